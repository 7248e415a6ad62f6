#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "itd/harness.hpp"

using namespace itd;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_walk_config_json() {
    return nlohmann::json{
        {"env", {{"kind", "random_walk"}, {"n_states", 11}, {"gamma", 0.9}, {"d", 7}}},
        {"algorithm", {{"family", "td"}, {"mode", "implicit"}}},
        {"lambda", 0.0},
        {"schedule_alpha", {{"kind", "constant"}, {"c", 0.1}}},
        {"projection", {{"R", 10.0}}},
        {"n_steps", 500},
        {"n_replications", 8},
        {"master_seed", 99},
        {"metrics", {"rmsve", "param_error"}},
        {"snapshot_every", 100},
        {"output_path", "out/test"}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config json round trip") {
    const ExperimentConfig c = config_from_json(small_walk_config_json());
    CHECK(c.env.kind == EnvSpec::Kind::RandomWalk);
    CHECK(c.family == AlgorithmFamily::Td);
    CHECK(c.mode == UpdateMode::Implicit);
    CHECK(c.projection_r == 10.0);
    CHECK(c.metrics.size() == 2);
    const ExperimentConfig c2 = config_from_json(config_to_json(c));
    CHECK(config_to_json(c2) == config_to_json(c));
}

TEST_CASE("config validation errors") {
    auto base = small_walk_config_json();
    SUBCASE("schedule_beta on td is rejected") {
        base["schedule_beta"] = {{"kind", "constant"}, {"c", 0.5}};
        CHECK_THROWS_AS(config_from_json(base), ConfigError);
    }
    SUBCASE("tdc without schedule_beta is rejected") {
        base["algorithm"]["family"] = "tdc";
        CHECK_THROWS_AS(config_from_json(base), ConfigError);
    }
    SUBCASE("tdc with lambda is rejected") {
        base["algorithm"]["family"] = "tdc";
        base["schedule_beta"] = {{"kind", "constant"}, {"c", 0.5}};
        base["projection"] = nullptr;
        base["lambda"] = 0.5;
        CHECK_THROWS_AS(config_from_json(base), ConfigError);
    }
    SUBCASE("unknown metric is rejected") {
        base["metrics"] = {"rmsve", "banana"};
        CHECK_THROWS_AS(config_from_json(base), ConfigError);
    }
    SUBCASE("zero replications are rejected") {
        base["n_replications"] = 0;
        CHECK_THROWS_AS(config_from_json(base), ConfigError);
    }
    SUBCASE("missing required field is rejected") {
        base.erase("master_seed");
        CHECK_THROWS_AS(config_from_json(base), ConfigError);
    }
}

TEST_CASE("zero-step run reports only initial metric values") {
    ExperimentConfig c = config_from_json(small_walk_config_json());
    c.n_steps = 0;
    c.n_replications = 1;
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.snapshot_steps == std::vector<long>{0});
    REQUIRE(r.rows.size() == 2);  // one row per metric
    CHECK(r.rows[0].step == 0);
    CHECK(r.diverged.empty());
}

TEST_CASE("serial and parallel runners agree row for row") {
    const ExperimentConfig c = config_from_json(small_walk_config_json());
    const ExperimentResult a = run_experiment(c, Parallelism::Serial);
    const ExperimentResult b = run_experiment(c, Parallelism::OpenMp);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].replication == b.rows[i].replication);
        CHECK(a.rows[i].step == b.rows[i].step);
        CHECK(a.rows[i].value == b.rows[i].value);
    }
    REQUIRE(a.aggregates.size() == b.aggregates.size());
    for (size_t i = 0; i < a.aggregates.size(); ++i) {
        CHECK(a.aggregates[i].mean == b.aggregates[i].mean);
        CHECK(a.aggregates[i].stddev == b.aggregates[i].stddev);
    }
}

TEST_CASE("rows are ordered by replication then step") {
    const ExperimentConfig c = config_from_json(small_walk_config_json());
    const ExperimentResult r = run_experiment(c);
    int prev_rep = -1;
    long prev_step = -1;
    for (const auto& row : r.rows) {
        if (row.replication != prev_rep) {
            CHECK(row.replication > prev_rep);
            prev_rep = row.replication;
            prev_step = -1;
        }
        CHECK(row.step >= prev_step);
        prev_step = row.step;
    }
}

TEST_CASE("fully diverged variants aggregate to +inf at the final step") {
    ExperimentConfig c = config_from_json(small_walk_config_json());
    c.mode = UpdateMode::Explicit;
    c.projection_r.reset();
    c.schedule_alpha = StepSizeSchedule::constant(1.5);
    c.n_steps = 10000;
    c.n_replications = 10;
    c.metrics = {Metric::Rmsve};
    const ExperimentResult r = run_experiment(c);
    CHECK(r.diverged.size() == 10);
    CHECK(std::isinf(final_mean(r, Metric::Rmsve)));
}

TEST_CASE("emit_outputs writes deterministic artifacts") {
    const ExperimentConfig c = config_from_json(small_walk_config_json());
    const ExperimentResult r = run_experiment(c);
    const fs::path dir = fs::path("test_out") / "emit";
    fs::remove_all(dir.parent_path());
    emit_outputs(r, dir.string());
    for (const char* name : {"raw.csv", "agg.csv", "meta.json", "env.json", "oracle.json"})
        CHECK(fs::exists(dir / name));

    SUBCASE("agg.csv round-trips the aggregates bit-exactly") {
        std::ifstream in(dir / "agg.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header == "step,metric,mean,std");
        size_t i = 0;
        std::string line;
        while (std::getline(in, line)) {
            REQUIRE(i < r.aggregates.size());
            std::stringstream ss(line);
            std::string step_s, metric_s, mean_s, std_s;
            std::getline(ss, step_s, ',');
            std::getline(ss, metric_s, ',');
            std::getline(ss, mean_s, ',');
            std::getline(ss, std_s, ',');
            CHECK(std::stol(step_s) == r.aggregates[i].step);
            CHECK(metric_s == metric_name(r.aggregates[i].metric));
            CHECK(std::stod(mean_s) == r.aggregates[i].mean);
            CHECK(std::stod(std_s) == r.aggregates[i].stddev);
            ++i;
        }
        CHECK(i == r.aggregates.size());
    }
    SUBCASE("meta.json carries the documented fields") {
        const nlohmann::json meta = nlohmann::json::parse(slurp(dir / "meta.json"));
        for (const char* key : {"schema", "library_version", "config", "master_seed", "env",
                                "aggregation", "n_replications", "diverged",
                                "diverged_replications", "alive_at_final", "final_step"})
            CHECK(meta.contains(key));
        CHECK(meta["schema"] == "implicit-td/meta/v1");
        CHECK(meta["aggregation"] == "population_std");
        CHECK(config_to_json(config_from_json(meta["config"])) == meta["config"]);
    }
    SUBCASE("re-running the same config gives byte-identical raw.csv") {
        const std::string first = slurp(dir / "raw.csv");
        const ExperimentResult again = run_experiment(c);
        const fs::path dir2 = fs::path("test_out") / "emit2";
        emit_outputs(again, dir2.string());
        CHECK(first == slurp(dir2 / "raw.csv"));
    }
}

TEST_CASE("divergence is recorded in meta.json with the +inf sentinel") {
    ExperimentConfig c = config_from_json(small_walk_config_json());
    c.mode = UpdateMode::Explicit;
    c.projection_r.reset();
    c.schedule_alpha = StepSizeSchedule::constant(1.5);
    c.n_steps = 5000;
    c.n_replications = 5;
    c.metrics = {Metric::Rmsve};
    const ExperimentResult r = run_experiment(c);
    REQUIRE(!r.diverged.empty());
    const fs::path dir = fs::path("test_out") / "diverged";
    emit_outputs(r, dir.string());
    const nlohmann::json meta = nlohmann::json::parse(slurp(dir / "meta.json"));
    CHECK(meta["diverged"].get<size_t>() == r.diverged.size());
    REQUIRE(meta["diverged_replications"].size() == r.diverged.size());
    for (const auto& d : meta["diverged_replications"]) {
        CHECK(d["value"] == "+inf");
        CHECK(d["step"].get<long>() > 0);
    }
}

TEST_CASE("sweep is deterministic and covers the configured variants") {
    ExperimentConfig c = config_from_json(small_walk_config_json());
    c.n_steps = 300;
    c.n_replications = 4;
    const std::vector<double> alphas{0.05, 0.5};
    const auto t1 = sweep_step_size(c, alphas);
    const auto t2 = sweep_step_size(c, alphas);
    REQUIRE(t1.size() == t2.size());
    CHECK(t1.size() == alphas.size() * 4);  // projection configured: 4 variants
    for (size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].alpha == t2[i].alpha);
        CHECK(t1[i].variant == t2[i].variant);
        CHECK(t1[i].mean_final == t2[i].mean_final);
        CHECK(t1[i].std_final == t2[i].std_final);
    }
    CHECK_THROWS_AS(sweep_step_size(c, {}), ConfigError);
}

TEST_CASE("repro bundles are well formed") {
    CHECK(repro_names() == std::vector<std::string>{"randomwalk-fig3", "mrp-fig5", "baird-table"});
    CHECK(repro_bundle("mrp-fig5").runs.size() == 4);
    CHECK(repro_bundle("baird-table").runs.size() == 8);
    CHECK(!repro_bundle("randomwalk-fig3").sweep_alphas.empty());
    CHECK_THROWS_AS(repro_bundle("nope"), ConfigError);
}

TEST_CASE("thread cap env variable parsing") {
    ::setenv("IMPLICIT_TD_THREADS", "5", 1);
    CHECK(thread_cap_from_env() == 5);
    ::setenv("IMPLICIT_TD_THREADS", "0", 1);
    CHECK(thread_cap_from_env() == 0);
    ::unsetenv("IMPLICIT_TD_THREADS");
    CHECK(thread_cap_from_env() == 0);
}

TEST_CASE("rmstde metric runs through the harness") {
    ExperimentConfig c = config_from_json(small_walk_config_json());
    c.metrics = {Metric::Rmstde};
    c.n_steps = 200;
    c.n_replications = 2;
    const ExperimentResult r = run_experiment(c);
    for (const auto& row : r.rows) CHECK(row.value >= 0.0);
}

TEST_CASE("Baird small-step TDC finals sit in the reference band") {
    // Constant (0.005, 0.05): explicit and implicit TDC both settle near
    // RMSVE 1.4-1.9 (replication variance here is tiny).
    for (const auto& run : repro_bundle("baird-table").runs) {
        if (run.label.rfind("const_small", 0) != 0) continue;
        ExperimentConfig c = run.config;
        c.n_replications = 20;
        const ExperimentResult r = run_experiment(c);
        const double ve = final_mean(r, Metric::Rmsve);
        CHECK(ve > 1.2);
        CHECK(ve < 2.2);
        CHECK(r.diverged.empty());
    }
}
