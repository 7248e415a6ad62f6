#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "itd/algorithms.hpp"
#include "itd/environments.hpp"
#include "itd/oracle.hpp"
#include "vendor_json.hpp"

namespace itd {

enum class Metric { ParamError, Rmsve, Rmspbe, Rmstde };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct EnvSpec {
    enum class Kind { RandomWalk, RandomMrp, Baird };
    Kind kind = Kind::RandomWalk;
    int n_states = 11;
    int d = 7;
    double gamma = 0.9;
    uint64_t env_seed = 0;  // random_mrp only; the one sampled MRP is shared by all replications
};

enum class AlgorithmFamily { Td, Tdc };

struct ExperimentConfig {
    EnvSpec env;
    AlgorithmFamily family = AlgorithmFamily::Td;
    UpdateMode mode = UpdateMode::Explicit;
    double lambda = 0.0;  // td only
    StepSizeSchedule schedule_alpha;
    std::optional<StepSizeSchedule> schedule_beta;  // tdc only
    std::optional<double> projection_r;                      // td
    std::optional<std::pair<double, double>> projection_wu;  // tdc
    long n_steps = 0;
    int n_replications = 1;
    uint64_t master_seed = 0;
    std::vector<Metric> metrics;
    long snapshot_every = 0;  // 0 => log-spaced defaults plus the final step
    std::string output_path = "out";
    std::optional<Vector> w0;  // default: zeros, or Baird's canonical start
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

struct ResultRow {
    int replication = 0;
    long step = 0;
    Metric metric = Metric::Rmsve;
    double value = 0.0;
};

struct AggregateRow {
    long step = 0;
    Metric metric = Metric::Rmsve;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation across replications
};

struct DivergenceRecord {
    int replication = 0;
    long step = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<long> snapshot_steps;
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates;
    std::vector<DivergenceRecord> diverged;
    MarkovRewardEnvironment env;
    FeatureMap feature_map;
    OracleBundle oracle;

    long final_step() const { return snapshot_steps.empty() ? 0 : snapshot_steps.back(); }
};

enum class Parallelism { Serial, OpenMp };

/// Runs config.n_replications independent replications (replication i draws
/// from RngStream(master_seed, i)) and aggregates mean / population std per
/// (step, metric). Output is identical for both parallelism modes and any
/// thread count.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                Parallelism par = Parallelism::OpenMp);

/// Final-step aggregate for one metric; +inf when every replication diverged
/// before the final snapshot.
double final_mean(const ExperimentResult& result, Metric metric);
double final_std(const ExperimentResult& result, Metric metric);

struct SweepRow {
    double alpha = 0.0;
    std::string variant;
    Metric metric = Metric::Rmsve;
    double mean_final = 0.0;
    double std_final = 0.0;
    int diverged = 0;
};

/// Constant-step sweep over the given alphas; explicit/implicit variants,
/// plus projected versions when the base config carries a radius.
std::vector<SweepRow> sweep_step_size(const ExperimentConfig& base, const std::vector<double>& alphas,
                                      Parallelism par = Parallelism::OpenMp);

/// Writes raw.csv, agg.csv, meta.json, env.json, oracle.json under path.
/// All numbers carry 17 significant digits; output is byte-deterministic.
void emit_outputs(const ExperimentResult& result, const std::string& path);

void emit_sweep(const std::vector<SweepRow>& rows, const ExperimentConfig& base,
                const std::string& path);

struct PropertyResult {
    std::string name;
    bool pass = false;
    long n_checked = 0;
    double worst = 0.0;  // worst residual / statistic observed
    std::string note;
};

struct VerificationReport {
    std::vector<PropertyResult> properties;
    bool all_pass() const;
    nlohmann::json to_json() const;
};

struct VerifyOptions {
    /// Self-test hook: deliberately flips the effective-step lower bound so
    /// the suite must report that property as failing.
    bool self_test_flip_step_bound = false;
};

VerificationReport run_verification_suite(const VerifyOptions& opts = {});

/// Bundled reference experiment sets.
/// Names: randomwalk-fig3, mrp-fig5, baird-table.
std::vector<std::string> repro_names();

struct ReproRun {
    std::string label;
    ExperimentConfig config;
};

struct ReproBundle {
    std::string name;
    std::vector<ReproRun> runs;
    std::vector<double> sweep_alphas;  // nonempty => sweep instead of plain runs
};

ReproBundle repro_bundle(const std::string& name);

/// Executes a bundle into output_root/<label>/ (and summary.csv at the root).
void run_repro(const std::string& name, const std::string& output_root,
               Parallelism par = Parallelism::OpenMp);

/// Thread cap from IMPLICIT_TD_THREADS (0 or unset = automatic).
int thread_cap_from_env();

}  // namespace itd
