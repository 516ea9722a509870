#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "irsim/errors.hpp"
#include "irsim/life/lambda.hpp"
#include "irsim/time.hpp"

namespace irsim::lab {

enum class ModelKind { life, mlife };

enum Metric : unsigned {
    kMetricDensity = 1u << 0,
    kMetricClusterStats = 1u << 1,
    kMetricRejectedRate = 1u << 2,
    kMetricChangedCells = 1u << 3,
};

/// Declarative run description, parsed from a flat `key = value` file.
/// Unknown and duplicate keys are errors.
struct ExperimentConfig {
    ModelKind model = ModelKind::life;
    std::uint32_t width = 100;
    std::uint32_t height = 100;
    std::optional<double> init_density;
    std::uint64_t seed = 0;
    std::uint32_t replications = 1;
    Tick t_final = 0;

    // life: exactly one of the two
    std::optional<double> p;
    std::optional<double> lambda_plus;

    // mlife
    std::optional<double> rho_plus;
    std::optional<double> k_p;
    Tick meso_dt = 1;

    // shared: region side for mlife control and for cluster statistics
    std::optional<std::uint32_t> region_size;

    unsigned metrics = 0; // 0 = model default
    Tick convergence_cap = 20000;
    std::string output;

    static ExperimentConfig parse_text(std::string_view text);
    static ExperimentConfig parse_file(const std::string& path);

    void validate() const;

    unsigned effective_metrics() const {
        if (metrics != 0) return metrics;
        unsigned m = kMetricDensity | kMetricChangedCells;
        if (model == ModelKind::mlife) m |= kMetricRejectedRate;
        return m;
    }

    double effective_init_density() const {
        if (init_density) return *init_density;
        return 2.0 * rho_plus.value(); // mlife default, validate() guarantees rho_plus
    }

    double effective_k_p() const { return k_p ? *k_p : 10.0 * rho_plus.value(); }

    std::uint32_t effective_region_size() const { return region_size ? *region_size : 10; }

    life::LifeParams life_params() const {
        if (p) return life::LifeParams::from_p(*p);
        return life::LifeParams::from_lambda(*lambda_plus);
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline ConfigError key_error(std::string_view key, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << "config line " << line << ": key '" << key << "': " << what;
    return ConfigError(os.str());
}

inline double parse_real(std::string_view key, std::string_view v, std::size_t line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(std::string(v), &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw key_error(key, line, "expected a number, got '" + std::string(v) + "'");
    }
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view v, std::size_t line) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw key_error(key, line, "expected a non-negative integer, got '" + std::string(v) + "'");
    return x;
}

inline unsigned parse_metrics(std::string_view key, std::string_view v, std::size_t line) {
    unsigned m = 0;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t comma = v.find(',', pos);
        if (comma == std::string_view::npos) comma = v.size();
        const std::string_view item = trim(v.substr(pos, comma - pos));
        if (item == "density") m |= kMetricDensity;
        else if (item == "cluster_stats") m |= kMetricClusterStats;
        else if (item == "rejected_rate") m |= kMetricRejectedRate;
        else if (item == "changed_cells") m |= kMetricChangedCells;
        else if (!item.empty())
            throw key_error(key, line, "unknown metric '" + std::string(item) + "'");
        pos = comma + 1;
    }
    if (m == 0) throw key_error(key, line, "empty metric list");
    return m;
}

} // namespace detail

inline ExperimentConfig ExperimentConfig::parse_text(std::string_view text) {
    ExperimentConfig cfg;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        if (const std::size_t hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        const std::string_view linev = detail::trim(raw);
        if (linev.empty()) continue;

        const std::size_t eq = linev.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key{detail::trim(linev.substr(0, eq))};
        const std::string_view value = detail::trim(linev.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (!seen.insert(key).second)
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

        if (key == "model") {
            if (value == "life") cfg.model = ModelKind::life;
            else if (value == "mlife") cfg.model = ModelKind::mlife;
            else throw detail::key_error(key, line_no, "expected 'life' or 'mlife'");
        } else if (key == "width") {
            cfg.width = static_cast<std::uint32_t>(detail::parse_uint(key, value, line_no));
        } else if (key == "height") {
            cfg.height = static_cast<std::uint32_t>(detail::parse_uint(key, value, line_no));
        } else if (key == "init_density") {
            cfg.init_density = detail::parse_real(key, value, line_no);
        } else if (key == "seed") {
            cfg.seed = detail::parse_uint(key, value, line_no);
        } else if (key == "replications") {
            cfg.replications = static_cast<std::uint32_t>(detail::parse_uint(key, value, line_no));
        } else if (key == "t_final") {
            cfg.t_final = detail::parse_uint(key, value, line_no);
        } else if (key == "p") {
            cfg.p = detail::parse_real(key, value, line_no);
        } else if (key == "lambda_plus") {
            cfg.lambda_plus = detail::parse_real(key, value, line_no);
        } else if (key == "rho_plus") {
            cfg.rho_plus = detail::parse_real(key, value, line_no);
        } else if (key == "k_p") {
            cfg.k_p = detail::parse_real(key, value, line_no);
        } else if (key == "region_size") {
            cfg.region_size = static_cast<std::uint32_t>(detail::parse_uint(key, value, line_no));
        } else if (key == "meso_dt") {
            cfg.meso_dt = detail::parse_uint(key, value, line_no);
        } else if (key == "metrics") {
            cfg.metrics = detail::parse_metrics(key, value, line_no);
        } else if (key == "convergence_cap") {
            cfg.convergence_cap = detail::parse_uint(key, value, line_no);
        } else if (key == "output") {
            cfg.output = std::string(value);
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

inline void ExperimentConfig::validate() const {
    if (width == 0 || height == 0) throw ConfigError("config: width and height must be positive");
    if (replications == 0) throw ConfigError("config: replications must be positive");
    if (t_final == 0) throw ConfigError("config: t_final must be positive");
    if (convergence_cap == 0) throw ConfigError("config: convergence_cap must be positive");
    if (init_density && (*init_density < 0.0 || *init_density > 1.0))
        throw ConfigError("config: init_density out of [0, 1]");

    if (model == ModelKind::life) {
        if (p.has_value() == lambda_plus.has_value())
            throw ConfigError("config: life needs exactly one of 'p' and 'lambda_plus'");
        if (!init_density) throw ConfigError("config: life needs 'init_density'");
        if (rho_plus || k_p) throw ConfigError("config: 'rho_plus'/'k_p' are mlife keys");
        if (meso_dt != 1) throw ConfigError("config: 'meso_dt' is an mlife key");
        try {
            (void)life_params();
        } catch (const std::domain_error& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    } else {
        if (p || lambda_plus) throw ConfigError("config: 'p'/'lambda_plus' are life keys");
        if (!rho_plus) throw ConfigError("config: mlife needs 'rho_plus'");
        if (!(*rho_plus > 0.0 && *rho_plus < 1.0))
            throw ConfigError("config: rho_plus must be in (0, 1)");
        if (k_p && *k_p < 0.0) throw ConfigError("config: k_p must be non-negative");
        if (!region_size) throw ConfigError("config: mlife needs 'region_size'");
        if (meso_dt == 0) throw ConfigError("config: meso_dt must be >= 1");
        if (!init_density && 2.0 * *rho_plus > 1.0)
            throw ConfigError("config: default init_density 2*rho_plus exceeds 1, set it explicitly");
    }

    if ((effective_metrics() & kMetricClusterStats) || model == ModelKind::mlife) {
        const std::uint32_t rs = effective_region_size();
        if (rs == 0 || width % rs != 0 || height % rs != 0)
            throw ConfigError("config: grid dimensions must be multiples of region_size");
    }
}

} // namespace irsim::lab
