#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "irsim/lab/config.hpp"
#include "irsim/lab/experiment.hpp"
#include "irsim/lab/metrics.hpp"
#include "irsim/life/oracle.hpp"

using namespace irsim;
using namespace irsim::lab;
using irsim::life::CellGrid;

namespace {

const char* kLifeBase =
    "model = life\n"
    "width = 16\n"
    "height = 16\n"
    "init_density = 0.5\n"
    "seed = 42\n"
    "replications = 2\n"
    "t_final = 10\n"
    "p = 0\n";

std::string file_contents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("random grid initialization") {
    const StreamFamily streams(9, 0, kInitLevelKey, 0);
    CHECK(init_random_grid(10, 10, 0.0, streams).alive_count() == 0);
    CHECK(init_random_grid(10, 10, 1.0, streams).alive_count() == 100);

    const auto g = init_random_grid(100, 100, 0.5, streams);
    const auto alive = g.alive_count();
    CHECK(alive > 5000 - 150);
    CHECK(alive < 5000 + 150);
    CHECK_THROWS_AS(init_random_grid(10, 10, 1.5, streams), ConfigError);
}

TEST_CASE("steady detection is exact grid equality") {
    CellGrid block = CellGrid::empty(6, 6);
    block.set_at(2, 2, true);
    block.set_at(3, 2, true);
    block.set_at(2, 3, true);
    block.set_at(3, 3, true);
    CHECK(detect_steady(block, life::life_oracle_step(block)));

    CellGrid blinker = CellGrid::empty(6, 6);
    blinker.set_at(2, 1, true);
    blinker.set_at(2, 2, true);
    blinker.set_at(2, 3, true);
    CellGrid cur = blinker;
    for (int i = 0; i < 6; ++i) {
        const CellGrid next = life::life_oracle_step(cur);
        CHECK_FALSE(detect_steady(cur, next));
        cur = next;
    }

    const CellGrid empty = CellGrid::empty(4, 4);
    CHECK(detect_steady(empty, life::life_oracle_step(empty)));
    CHECK_THROWS_AS(detect_steady(empty, CellGrid::empty(5, 4)), ConfigError);
}

TEST_CASE("cluster statistics over regions") {
    CellGrid full = CellGrid::empty(100, 100);
    std::fill(full.cells.begin(), full.cells.end(), 1);
    CHECK(cluster_stats(full, 10) == std::pair<double, double>{1.0, 0.0});

    const CellGrid empty = CellGrid::empty(100, 100);
    CHECK(cluster_stats(empty, 10) == std::pair<double, double>{0.0, 0.0});

    CellGrid one_region = CellGrid::empty(100, 100);
    for (std::uint32_t y = 0; y < 10; ++y)
        for (std::uint32_t x = 0; x < 10; ++x) one_region.set_at(x, y, true);
    const auto [mean, var] = cluster_stats(one_region, 10);
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(0.01, 1e-12));
    CHECK_THAT(var, Catch::Matchers::WithinAbs(0.0099, 1e-12));

    CHECK_THROWS_AS(cluster_stats(one_region, 7), ConfigError);
}

TEST_CASE("config parsing happy path and defaults") {
    const auto cfg = ExperimentConfig::parse_text(
        "# a comment\n"
        "model = mlife\n"
        "width = 60\n"
        "height = 40\n"
        "seed = 7\n"
        "replications = 3\n"
        "t_final = 100\n"
        "rho_plus = 0.07\n"
        "region_size = 10\n"
        "metrics = density, rejected_rate\n");
    cfg.validate();
    CHECK(cfg.model == ModelKind::mlife);
    CHECK(cfg.width == 60);
    CHECK(cfg.effective_init_density() == 2.0 * 0.07);
    CHECK(cfg.effective_k_p() == 10.0 * 0.07);
    CHECK(cfg.effective_metrics() == (kMetricDensity | kMetricRejectedRate));
    CHECK(cfg.convergence_cap == 20000);
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(ExperimentConfig::parse_text("model = life\nbanana = 1\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("model = life\nmodel = life\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("width\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("width = abc\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("metrics = rho\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("config cross-field validation") {
    auto base = [](const std::string& extra) {
        return ExperimentConfig::parse_text(
            "model = life\nwidth = 16\nheight = 16\ninit_density = 0.5\n"
            "replications = 1\nt_final = 5\n" + extra);
    };
    CHECK_NOTHROW(base("p = 0.5\n").validate());
    CHECK_THROWS_AS(base("").validate(), ConfigError);                       // neither p nor lambda
    CHECK_THROWS_AS(base("p = 0.5\nlambda_plus = 0.5\n").validate(), ConfigError); // both
    CHECK_THROWS_AS(base("p = 1.5\n").validate(), ConfigError);
    CHECK_THROWS_AS(base("lambda_plus = 0.2\n").validate(), ConfigError);    // below lambda_life
    CHECK_THROWS_AS(base("p = 0\nrho_plus = 0.07\n").validate(), ConfigError);
    CHECK_THROWS_AS(base("p = 0\nmeso_dt = 2\n").validate(), ConfigError);
    // cluster metric needs a dividing region size
    CHECK_THROWS_AS(base("p = 0\nmetrics = cluster_stats\nregion_size = 7\n").validate(),
                    ConfigError);
    CHECK_NOTHROW(base("p = 0\nmetrics = cluster_stats\nregion_size = 8\n").validate());

    auto mbase = [](const std::string& extra) {
        return ExperimentConfig::parse_text(
            "model = mlife\nwidth = 20\nheight = 20\nreplications = 1\nt_final = 5\n" + extra);
    };
    CHECK_THROWS_AS(mbase("region_size = 10\n").validate(), ConfigError);   // no rho_plus
    CHECK_THROWS_AS(mbase("rho_plus = 0.07\n").validate(), ConfigError);    // no region_size
    CHECK_THROWS_AS(mbase("rho_plus = 1.2\nregion_size = 10\n").validate(), ConfigError);
    CHECK_THROWS_AS(mbase("rho_plus = 0.6\nregion_size = 10\n").validate(), ConfigError); // 2*rho>1
    CHECK_NOTHROW(mbase("rho_plus = 0.6\nregion_size = 10\ninit_density = 0.5\n").validate());
}

TEST_CASE("experiment rows are deterministic and exact") {
    const auto cfg = ExperimentConfig::parse_text(kLifeBase);
    RunOptions opts;
    opts.threads = 1;
    const auto a = run_experiment_in_memory(cfg, opts);
    REQUIRE(a.replications.size() == 2);
    CHECK(a.replications[0].rows.size() == 10);
    CHECK(a.replications[1].rows.size() == 10);

    // byte-identical re-run
    const auto b = run_experiment_in_memory(cfg, opts);
    CHECK(timeseries_csv(cfg, a) == timeseries_csv(cfg, b));
    CHECK(convergence_csv(a) == convergence_csv(b));

    // thread count cannot change anything
    RunOptions opts2;
    opts2.threads = 2;
    const auto c = run_experiment_in_memory(cfg, opts2);
    CHECK(timeseries_csv(cfg, a) == timeseries_csv(cfg, c));
    CHECK(summary_csv(cfg, a) == summary_csv(cfg, c));

    // metric soundness: rho equals the oracle-evolved alive fraction
    const StreamFamily init(cfg.seed, 1, kInitLevelKey, 0);
    CellGrid g = init_random_grid(16, 16, 0.5, init);
    for (int s = 0; s < 10; ++s) g = life::life_oracle_step(g);
    CHECK(a.replications[1].rows.back().rho == g.density());
}

TEST_CASE("adding replications does not disturb earlier ones") {
    auto cfg = ExperimentConfig::parse_text(kLifeBase);
    RunOptions opts;
    opts.threads = 2;
    const auto two = run_experiment_in_memory(cfg, opts);
    cfg.replications = 4;
    const auto four = run_experiment_in_memory(cfg, opts);
    for (std::size_t rep = 0; rep < 2; ++rep) {
        CHECK(four.replications[rep].report.final_density ==
              two.replications[rep].report.final_density);
        for (std::size_t s = 0; s < 10; ++s)
            CHECK(four.replications[rep].rows[s].rho == two.replications[rep].rows[s].rho);
    }
}

TEST_CASE("summary equals a recomputation from the raw rows") {
    const auto cfg = ExperimentConfig::parse_text(kLifeBase);
    RunOptions opts;
    const auto res = run_experiment_in_memory(cfg, opts);
    const std::string summary = summary_csv(cfg, res);

    // recompute the rho mean/variance of the third step from the rows
    const double x0 = res.replications[0].rows[2].rho;
    const double x1 = res.replications[1].rows[2].rho;
    const double mean = (x0 + x1) / 2;
    const double var = (x0 * x0 + x1 * x1) / 2 - mean * mean;
    std::string expected = "3," + format_g6(mean) + "," + format_g6(var) + ",,,,,,,";
    CHECK(summary.find(expected) != std::string::npos);
}

TEST_CASE("convergence reporting and cap semantics") {
    SECTION("an empty board is steady at the first step") {
        const auto cfg = ExperimentConfig::parse_text(
            "model = life\nwidth = 8\nheight = 8\ninit_density = 0\nseed = 1\n"
            "replications = 1\nt_final = 10\np = 0\n");
        const auto res = run_experiment_in_memory(cfg, RunOptions{});
        CHECK(res.replications[0].report.converged);
        CHECK(res.replications[0].report.steps_to_steady == 1);
        CHECK(res.replications[0].rows.size() == 10); // frozen rows still emitted
        for (const auto& row : res.replications[0].rows) {
            CHECK(row.rho == 0.0);
            CHECK(row.changed == 0);
        }
    }
    SECTION("unconverged runs report the cap") {
        const auto cfg = ExperimentConfig::parse_text(
            "model = life\nwidth = 12\nheight = 12\ninit_density = 0.5\nseed = 3\n"
            "replications = 2\nt_final = 8\np = 0.5\nconvergence_cap = 500\n");
        const auto res = run_experiment_in_memory(cfg, RunOptions{});
        for (const auto& rep : res.replications) {
            if (!rep.report.converged) CHECK(rep.report.steps_to_steady == 500);
            CHECK(rep.report.steps_to_steady <= 500);
        }
    }
}

TEST_CASE("frozen rows equal what explicit stepping would produce") {
    // this board becomes a still life at step 65; compare every row,
    // including the frozen tail, against a plain oracle loop
    const auto cfg = ExperimentConfig::parse_text(
        "model = life\nwidth = 10\nheight = 10\ninit_density = 0.3\nseed = 2\n"
        "replications = 1\nt_final = 200\np = 0\n");
    const auto res = run_experiment_in_memory(cfg, RunOptions{});
    REQUIRE(res.replications[0].report.converged);
    REQUIRE(res.replications[0].report.steps_to_steady < 200);
    REQUIRE(res.replications[0].report.final_density > 0.0);

    const StreamFamily init(cfg.seed, 0, kInitLevelKey, 0);
    CellGrid g = init_random_grid(10, 10, 0.3, init);
    for (std::size_t s = 0; s < 200; ++s) {
        const CellGrid next = life::life_oracle_step(g);
        const auto& row = res.replications[0].rows[s];
        CHECK(row.rho == next.density());
        CHECK(row.changed == changed_cells(g, next));
        g = next;
    }
}

TEST_CASE("oracle mode cross-checks the engine") {
    const auto cfg = ExperimentConfig::parse_text(kLifeBase);
    const auto engine = run_experiment_in_memory(cfg, RunOptions{});
    const auto oracle = run_experiment_in_memory(cfg, RunOptions{}, /*oracle=*/true);
    CHECK(timeseries_csv(cfg, engine) == timeseries_csv(cfg, oracle));

    auto veto_cfg = ExperimentConfig::parse_text(kLifeBase);
    veto_cfg.p = 0.3;
    CHECK_THROWS_AS(run_experiment_in_memory(veto_cfg, RunOptions{}, true), ConfigError);
}

TEST_CASE("run_experiment writes the three CSV files") {
    const auto dir = std::filesystem::temp_directory_path() / "irsim_lab_test";
    std::filesystem::remove_all(dir);
    auto cfg = ExperimentConfig::parse_text(kLifeBase);
    cfg.metrics = kMetricDensity | kMetricChangedCells | kMetricClusterStats;
    cfg.region_size = 8;
    RunOptions opts;
    opts.out_dir = dir.string();
    opts.dump_grids = true;
    run_experiment(cfg, opts);

    const std::string ts = file_contents((dir / "timeseries.csv").string());
    CHECK(ts.rfind("replication,step,rho,cluster_mean,cluster_var,r,changed\n", 0) == 0);
    CHECK(file_contents((dir / "convergence.csv").string())
              .rfind("replication,converged,steps_to_steady,final_density\n", 0) == 0);
    CHECK(file_contents((dir / "summary.csv").string()).rfind("step,rho_mean,rho_var,", 0) == 0);

    // dumped grids reproduce the reported densities
    const auto dumped =
        life::grid_from_text(file_contents((dir / "grids" / "rep001_step000010.txt").string()));
    const auto res = run_experiment_in_memory(cfg, RunOptions{});
    CHECK(dumped.density() == res.replications[1].rows.back().rho);
    std::filesystem::remove_all(dir);
}

TEST_CASE("an unwritable output path is a runtime error, not a config error") {
    const auto cfg = ExperimentConfig::parse_text(kLifeBase);
    RunOptions opts;
    opts.out_dir = "/dev/null/nested"; // cannot be created
    CHECK_THROWS(run_experiment(cfg, opts));
    try {
        run_experiment(cfg, opts);
    } catch (const ConfigError&) {
        FAIL("should not be reported as a configuration error");
    } catch (const std::exception&) {
        // filesystem or I/O error, maps to exit code 2 in the CLI
    }
}

TEST_CASE("six significant digits in CSV floats") {
    CHECK(format_g6(0.123456789) == "0.123457");
    CHECK(format_g6(0.07) == "0.07");
    CHECK(format_g6(0.0) == "0");
    CHECK(format_g6(2.0 / 3.0) == "0.666667");
}

TEST_CASE("lambda sweep aggregates convergence per value") {
    auto base = ExperimentConfig::parse_text(
        "model = life\nwidth = 10\nheight = 10\ninit_density = 0.3\nseed = 11\n"
        "replications = 2\nt_final = 50\nlambda_plus = 0.5\nconvergence_cap = 50\n");
    RunOptions opts;
    opts.threads = 1;

    SECTION("single value gives a one-row table") {
        const double lambda = life::kLambdaLife;
        const auto table = sweep_lambda(base, std::span(&lambda, 1), opts);
        REQUIRE(table.size() == 1);
        CHECK(table[0].lambda_plus == life::kLambdaLife);
        CHECK(table[0].p == 0.0);
        CHECK(table[0].replications == 2);
    }
    SECTION("rows land in the csv") {
        const std::vector<double> lambdas{0.45, 0.5, 0.65};
        const auto table = sweep_lambda(base, lambdas, opts);
        REQUIRE(table.size() == 3);
        const std::string csv = sweep_csv(table);
        CHECK(csv.rfind("lambda_plus,p,replications,converged,mean_steps_to_steady,"
                        "mean_final_density\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        // capped runs count at the cap
        for (const auto& row : table) CHECK(row.mean_steps_to_steady <= 50.0);
    }
    SECTION("values outside the lambda range are rejected") {
        const double bad = 0.2;
        CHECK_THROWS_AS(sweep_lambda(base, std::span(&bad, 1), opts), ConfigError);
    }
}
