#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace irsim::life {

// Langton parameter of plain B3/S23: 1 - 372/512.
inline constexpr double kLambdaLife = 0.2734375;
// d(lambda)/dp = 172/512, exact. The 172 is the alive-to-dead transition
// count sum C(8,i) over i in {0,1,4..8}.
inline constexpr double kLambdaSlope = 172.0 / 512.0;
// Reached at p = 1: every death vetoed, 1 - 200/512.
inline constexpr double kLambdaMax = 0.609375;

/// lambda = 1 - n / K^N for a K-state automaton over an N-cell neighborhood
/// with n transitions into the quiescent state.
inline double lambda_langton(std::uint64_t K, std::uint64_t N, double n) {
    if (K < 2) throw std::domain_error("lambda_langton: K must be >= 2");
    if (N < 1) throw std::domain_error("lambda_langton: N must be >= 1");
    double table = 1.0;
    for (std::uint64_t i = 0; i < N; ++i) {
        table *= static_cast<double>(K);
        if (table > 0x1.0p62) throw std::domain_error("lambda_langton: K^N overflows");
    }
    if (n < 0.0 || n > table)
        throw std::domain_error("lambda_langton: n out of [0, K^N]");
    return 1.0 - n / table;
}

/// Transitions of the veto-modified rule that end in the quiescent (dead)
/// state: 28 + (2 - p) * 172. Dying cells are ignored with probability p, so
/// the 172 alive-to-dead entries count with weight (1 - p).
inline double count_quiescent_transitions(double p) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("count_quiescent_transitions: p out of [0, 1]");
    return 28.0 + (2.0 - p) * 172.0;
}

/// The lambda value produced by a death-veto probability p.
inline double lambda_of_p(double p) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("lambda_of_p: p out of [0, 1]");
    return kLambdaLife + kLambdaSlope * p;
}

/// Inverse of lambda_of_p, using the exact slope 172/512 = 0.3359375.
inline double p_of_lambda(double lambda_plus) {
    if (lambda_plus < kLambdaLife || lambda_plus > kLambdaMax)
        throw std::domain_error("p_of_lambda: lambda out of [" + std::to_string(kLambdaLife) +
                                ", " + std::to_string(kLambdaMax) + "]");
    return (lambda_plus - kLambdaLife) / kLambdaSlope;
}

/// The macroscopic rule parameter: death-veto probability p and the lambda
/// value it realizes.
struct LifeParams {
    double p = 0.0;
    double lambda_plus = kLambdaLife;

    static LifeParams from_p(double p) {
        if (p < 0.0 || p > 1.0) throw std::domain_error("LifeParams: p out of [0, 1]");
        return LifeParams{p, lambda_of_p(p)};
    }

    /// Accepts lambda in [lambda_life, 1]. Values above the p = 1 point
    /// (0.609375) saturate at p = 1; the linear relation cannot reach them.
    static LifeParams from_lambda(double lambda_plus) {
        if (lambda_plus < kLambdaLife || lambda_plus > 1.0)
            throw std::domain_error("LifeParams: lambda out of [" + std::to_string(kLambdaLife) +
                                    ", 1]");
        const double p = std::min(1.0, (lambda_plus - kLambdaLife) / kLambdaSlope);
        return LifeParams{p, lambda_of_p(p)};
    }
};

} // namespace irsim::life
