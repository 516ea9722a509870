#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "irsim/lab/config.hpp"
#include "irsim/lab/csv.hpp"
#include "irsim/lab/metrics.hpp"
#include "irsim/life/model.hpp"
#include "irsim/life/oracle.hpp"
#include "irsim/mlife/model.hpp"
#include "irsim/mlife/reaction.hpp"

namespace irsim::lab {

struct RunOptions {
    std::uint32_t threads = 0; // 0 = hardware concurrency
    bool collect_rows = true;
    bool dump_grids = false;
    std::string out_dir;
};

struct ReplicationOutput {
    std::vector<TimeSeriesRow> rows;
    ConvergenceReport report;
};

struct ExperimentResult {
    std::vector<ReplicationOutput> replications;
};

namespace detail {

inline std::uint32_t resolve_threads(std::uint32_t requested, std::uint32_t jobs) {
    std::uint32_t t = requested;
    if (t == 0) {
        t = std::thread::hardware_concurrency();
        if (t == 0) t = 1;
    }
    if (t > jobs) t = jobs;
    return t == 0 ? 1 : t;
}

/// Runs fn(0..jobs-1) on the requested number of threads. Jobs own disjoint
/// output slots, so scheduling order cannot affect results.
template <class Fn>
void parallel_jobs(std::uint32_t jobs, std::uint32_t threads, Fn&& fn) {
    if (threads <= 1) {
        for (std::uint32_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::uint32_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::uint32_t i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

using GridDumpFn = std::function<void(std::uint32_t rep, Tick step, const life::CellGrid&)>;

/// Shared replication loop. `advance` performs one step and returns the new
/// board plus the number of vetoed micro influences. Once the board is
/// steady it is provably frozen (same board, no influence can change it and
/// no veto draw happens), so stepping stops and the remaining rows repeat
/// the steady row.
template <class AdvanceFn>
ReplicationOutput drive_replication(const ExperimentConfig& cfg, std::uint32_t rep,
                                    life::CellGrid initial, AdvanceFn&& advance,
                                    bool collect_rows, const GridDumpFn* dump) {
    const unsigned metrics = cfg.effective_metrics();
    const bool want_clusters = (metrics & kMetricClusterStats) != 0;
    const std::uint64_t total_cells = initial.size();

    ReplicationOutput out;
    if (collect_rows) out.rows.reserve(static_cast<std::size_t>(cfg.t_final));

    life::CellGrid prev = std::move(initial);
    if (dump) (*dump)(rep, 0, prev);

    bool steady_found = false;
    Tick steady_at = 0;
    TimeSeriesRow row;
    row.replication = rep;
    double last_rho = prev.density();

    for (Tick step_no = 1; step_no <= cfg.t_final; ++step_no) {
        if (!steady_found) {
            const auto [board, vetoed] = advance();
            row.step = step_no;
            row.rho = board->density();
            row.changed = changed_cells(prev, *board);
            row.r = mlife::rejected_rate(vetoed, total_cells);
            if (want_clusters) {
                const auto [mean, var] = cluster_stats(*board, cfg.effective_region_size());
                row.cluster_mean = mean;
                row.cluster_var = var;
            }
            if (vetoed == 0 && detect_steady(prev, *board)) {
                steady_found = true;
                steady_at = step_no;
            }
            prev = *board;
            last_rho = row.rho;
        } else {
            row.step = step_no; // frozen board: rows repeat the steady row
        }
        if (collect_rows) out.rows.push_back(row);
        if (dump) (*dump)(rep, step_no, prev);
    }

    out.report.replication = rep;
    out.report.converged = steady_found && steady_at <= cfg.convergence_cap;
    out.report.steps_to_steady = out.report.converged ? steady_at : cfg.convergence_cap;
    out.report.final_density = last_rho;
    return out;
}

inline ReplicationOutput run_one_replication(const ExperimentConfig& cfg, std::uint32_t rep,
                                             bool collect_rows, const GridDumpFn* dump) {
    const StreamFamily init_streams(cfg.seed, rep, kInitLevelKey, 0);
    life::CellGrid grid0 =
        init_random_grid(cfg.width, cfg.height, cfg.effective_init_density(), init_streams);
    const life::StreamContext rng{cfg.seed, rep};

    if (cfg.model == ModelKind::life) {
        auto sim = life::build_life_simulation(cfg.life_params(), grid0, rng);
        auto advance = [&sim]() -> std::pair<const life::CellGrid*, std::uint32_t> {
            step(sim);
            return {&life::current_grid(sim), life::vetoed_last(sim)};
        };
        return drive_replication(cfg, rep, std::move(grid0), advance, collect_rows, dump);
    }

    auto partition = mlife::RegionPartition::tile(cfg.width, cfg.height, cfg.effective_region_size());
    const mlife::ControlParams control{cfg.rho_plus.value(), cfg.effective_k_p()};
    auto sim = mlife::build_mlife_simulation(grid0, std::move(partition), control, cfg.meso_dt, rng);
    auto advance = [&sim]() -> std::pair<const life::CellGrid*, std::uint32_t> {
        step(sim);
        return {&mlife::current_grid(sim), mlife::rejected_last(sim)};
    };
    return drive_replication(cfg, rep, std::move(grid0), advance, collect_rows, dump);
}

inline ReplicationOutput run_one_oracle_replication(const ExperimentConfig& cfg, std::uint32_t rep,
                                                    bool collect_rows, const GridDumpFn* dump) {
    const StreamFamily init_streams(cfg.seed, rep, kInitLevelKey, 0);
    life::CellGrid grid0 =
        init_random_grid(cfg.width, cfg.height, cfg.effective_init_density(), init_streams);
    life::CellGrid board = grid0;
    auto advance = [&board]() -> std::pair<const life::CellGrid*, std::uint32_t> {
        board = life::life_oracle_step(board);
        return {&board, 0u};
    };
    return drive_replication(cfg, rep, std::move(grid0), advance, collect_rows, dump);
}

inline GridDumpFn make_grid_dumper(const std::string& out_dir) {
    const std::string dir = out_dir + "/grids";
    std::filesystem::create_directories(dir);
    return [dir](std::uint32_t rep, Tick step, const life::CellGrid& g) {
        char name[64];
        std::snprintf(name, sizeof name, "/rep%03u_step%06llu.txt", rep,
                      static_cast<unsigned long long>(step));
        write_text_file(dir + name, life::grid_to_text(g));
    };
}

} // namespace detail

/// Runs all replications (in parallel when asked to) and returns their rows
/// and convergence reports. Results are independent of the thread count.
inline ExperimentResult run_experiment_in_memory(const ExperimentConfig& cfg,
                                                 const RunOptions& opts, bool oracle = false) {
    cfg.validate();
    if (oracle && (cfg.model != ModelKind::life || cfg.life_params().p != 0.0))
        throw ConfigError("oracle runs require model = life with p = 0");

    detail::GridDumpFn dump;
    if (opts.dump_grids) {
        if (opts.out_dir.empty()) throw ConfigError("grid dumps need an output directory");
        dump = detail::make_grid_dumper(opts.out_dir);
    }
    const detail::GridDumpFn* dump_ptr = opts.dump_grids ? &dump : nullptr;

    ExperimentResult result;
    result.replications.resize(cfg.replications);
    const std::uint32_t threads = detail::resolve_threads(opts.threads, cfg.replications);
    detail::parallel_jobs(cfg.replications, threads, [&](std::uint32_t rep) {
        result.replications[rep] =
            oracle ? detail::run_one_oracle_replication(cfg, rep, opts.collect_rows, dump_ptr)
                   : detail::run_one_replication(cfg, rep, opts.collect_rows, dump_ptr);
    });
    return result;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

inline std::string timeseries_csv(const ExperimentConfig& cfg, const ExperimentResult& res) {
    const unsigned metrics = cfg.effective_metrics();
    std::string out = "replication,step,rho,cluster_mean,cluster_var,r,changed\n";
    for (const auto& rep : res.replications) {
        for (const auto& row : rep.rows) {
            out += std::to_string(row.replication);
            out += ',';
            out += std::to_string(row.step);
            out += ',';
            if (metrics & kMetricDensity) append_g6(out, row.rho);
            out += ',';
            if (metrics & kMetricClusterStats) append_g6(out, row.cluster_mean);
            out += ',';
            if (metrics & kMetricClusterStats) append_g6(out, row.cluster_var);
            out += ',';
            if (metrics & kMetricRejectedRate) append_g6(out, row.r);
            out += ',';
            if (metrics & kMetricChangedCells) out += std::to_string(row.changed);
            out += '\n';
        }
    }
    return out;
}

inline std::string convergence_csv(const ExperimentResult& res) {
    std::string out = "replication,converged,steps_to_steady,final_density\n";
    for (const auto& rep : res.replications) {
        out += std::to_string(rep.report.replication);
        out += ',';
        out += rep.report.converged ? '1' : '0';
        out += ',';
        out += std::to_string(rep.report.steps_to_steady);
        out += ',';
        append_g6(out, rep.report.final_density);
        out += '\n';
    }
    return out;
}

/// Cross-replication mean and population variance per step, per metric.
inline std::string summary_csv(const ExperimentConfig& cfg, const ExperimentResult& res) {
    const unsigned metrics = cfg.effective_metrics();
    std::string out =
        "step,rho_mean,rho_var,cluster_mean_mean,cluster_mean_var,cluster_var_mean,"
        "cluster_var_var,r_mean,r_var,changed_mean,changed_var\n";
    if (res.replications.empty() || res.replications.front().rows.empty()) return out;

    const std::size_t steps = res.replications.front().rows.size();
    const double n = static_cast<double>(res.replications.size());
    auto stats = [&](auto&& get) -> std::pair<double, double> {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& rep : res.replications) {
            const double v = get(rep);
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / n;
        return {mean, sum_sq / n - mean * mean};
    };

    for (std::size_t s = 0; s < steps; ++s) {
        out += std::to_string(res.replications.front().rows[s].step);
        auto emit = [&](bool enabled, auto&& get) {
            out += ',';
            if (!enabled) {
                out += ',';
                return;
            }
            const auto [mean, var] = stats(get);
            append_g6(out, mean);
            out += ',';
            append_g6(out, var);
        };
        emit(metrics & kMetricDensity, [&](const ReplicationOutput& r) { return r.rows[s].rho; });
        emit(metrics & kMetricClusterStats,
             [&](const ReplicationOutput& r) { return r.rows[s].cluster_mean; });
        emit(metrics & kMetricClusterStats,
             [&](const ReplicationOutput& r) { return r.rows[s].cluster_var; });
        emit(metrics & kMetricRejectedRate, [&](const ReplicationOutput& r) { return r.rows[s].r; });
        emit(metrics & kMetricChangedCells,
             [&](const ReplicationOutput& r) { return static_cast<double>(r.rows[s].changed); });
        out += '\n';
    }
    return out;
}

/// Full experiment: run the replications and write timeseries.csv,
/// convergence.csv and summary.csv into the output directory.
inline void run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, bool oracle = false) {
    if (opts.out_dir.empty()) throw ConfigError("run_experiment: no output directory");
    std::filesystem::create_directories(opts.out_dir);
    RunOptions local = opts;
    local.collect_rows = true;
    const ExperimentResult res = run_experiment_in_memory(cfg, local, oracle);
    write_text_file(opts.out_dir + "/timeseries.csv", timeseries_csv(cfg, res));
    write_text_file(opts.out_dir + "/convergence.csv", convergence_csv(res));
    write_text_file(opts.out_dir + "/summary.csv", summary_csv(cfg, res));
}

// ---------------------------------------------------------------------------
// Lambda sweep
// ---------------------------------------------------------------------------

struct LambdaSweepRow {
    double lambda_plus = 0.0;
    double p = 0.0;
    std::uint32_t replications = 0;
    std::uint32_t converged = 0;
    double mean_steps_to_steady = 0.0; // capped runs count at the cap
    double mean_final_density = 0.0;
};

/// Runs the experiment once per lambda value and aggregates convergence.
inline std::vector<LambdaSweepRow> sweep_lambda(const ExperimentConfig& base,
                                                std::span<const double> lambda_values,
                                                const RunOptions& opts) {
    std::vector<LambdaSweepRow> table;
    table.reserve(lambda_values.size());
    for (const double lambda : lambda_values) {
        ExperimentConfig cfg = base;
        cfg.p.reset();
        cfg.lambda_plus = lambda;
        cfg.validate();

        RunOptions local = opts;
        local.collect_rows = false;
        local.dump_grids = false;
        const ExperimentResult res = run_experiment_in_memory(cfg, local);

        LambdaSweepRow row;
        row.lambda_plus = lambda;
        row.p = cfg.life_params().p;
        row.replications = cfg.replications;
        double steps_sum = 0.0, density_sum = 0.0;
        for (const auto& rep : res.replications) {
            row.converged += rep.report.converged ? 1 : 0;
            steps_sum += static_cast<double>(rep.report.steps_to_steady);
            density_sum += rep.report.final_density;
        }
        row.mean_steps_to_steady = steps_sum / static_cast<double>(cfg.replications);
        row.mean_final_density = density_sum / static_cast<double>(cfg.replications);
        table.push_back(row);
    }
    return table;
}

inline std::string sweep_csv(std::span<const LambdaSweepRow> table) {
    std::string out = "lambda_plus,p,replications,converged,mean_steps_to_steady,mean_final_density\n";
    for (const auto& row : table) {
        append_g6(out, row.lambda_plus);
        out += ',';
        append_g6(out, row.p);
        out += ',';
        out += std::to_string(row.replications);
        out += ',';
        out += std::to_string(row.converged);
        out += ',';
        append_g6(out, row.mean_steps_to_steady);
        out += ',';
        append_g6(out, row.mean_final_density);
        out += '\n';
    }
    return out;
}

} // namespace irsim::lab
