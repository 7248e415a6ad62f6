#include "itd/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include "itd/version.hpp"

namespace itd {

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::ParamError: return "param_error";
        case Metric::Rmsve: return "rmsve";
        case Metric::Rmspbe: return "rmspbe";
        case Metric::Rmstde: return "rmstde";
    }
    return "?";
}

Metric metric_from_name(const std::string& name) {
    if (name == "param_error") return Metric::ParamError;
    if (name == "rmsve") return Metric::Rmsve;
    if (name == "rmspbe") return Metric::Rmspbe;
    if (name == "rmstde") return Metric::Rmstde;
    throw ConfigError("unknown metric: " + name);
}

namespace {

StepSizeSchedule schedule_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return StepSizeSchedule::constant(j.at("c").get<double>());
    if (kind == "polynomial")
        return StepSizeSchedule::polynomial(j.at("c").get<double>(), j.at("s").get<double>());
    if (kind == "rescaled_harmonic")
        return StepSizeSchedule::rescaled_harmonic(j.at("alpha1").get<double>(),
                                                   j.at("rate").get<double>());
    throw ConfigError("unknown schedule kind: " + kind);
}

nlohmann::json schedule_to_json(const StepSizeSchedule& s) {
    switch (s.kind) {
        case StepSizeSchedule::Kind::Constant:
            return {{"kind", "constant"}, {"c", s.c}};
        case StepSizeSchedule::Kind::Polynomial:
            return {{"kind", "polynomial"}, {"c", s.c}, {"s", s.s}};
        case StepSizeSchedule::Kind::RescaledHarmonic:
            return {{"kind", "rescaled_harmonic"}, {"alpha1", s.alpha1}, {"rate", s.rate}};
    }
    return {};
}

void validate(const ExperimentConfig& c) {
    if (c.n_replications < 1) throw ConfigError("n_replications must be >= 1");
    if (c.n_steps < 0) throw ConfigError("n_steps must be nonnegative");
    if (c.family == AlgorithmFamily::Tdc) {
        if (!c.schedule_beta) throw ConfigError("tdc requires schedule_beta");
        if (c.lambda != 0.0) throw ConfigError("lambda applies to td only");
        if (c.projection_r) throw ConfigError("tdc projection uses {R_w, R_u}");
    } else {
        if (c.schedule_beta) throw ConfigError("schedule_beta applies to tdc only");
        if (c.projection_wu) throw ConfigError("td projection uses a single radius R");
        if (c.lambda < 0.0 || c.lambda > 1.0) throw ConfigError("lambda must lie in [0,1]");
    }
    if (c.metrics.empty()) throw ConfigError("at least one metric is required");
    if (c.snapshot_every < 0) throw ConfigError("snapshot_every must be nonnegative");
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        const auto& ej = j.at("env");
        const std::string kind = ej.at("kind").get<std::string>();
        if (kind == "random_walk") {
            c.env.kind = EnvSpec::Kind::RandomWalk;
            c.env.n_states = ej.value("n_states", 11);
            c.env.gamma = ej.value("gamma", 0.9);
            c.env.d = ej.value("d", 7);
        } else if (kind == "random_mrp") {
            c.env.kind = EnvSpec::Kind::RandomMrp;
            c.env.n_states = ej.value("n_states", 100);
            c.env.d = ej.value("d", 20);
            c.env.gamma = ej.value("gamma", 0.9);
            c.env.env_seed = ej.at("env_seed").get<uint64_t>();
        } else if (kind == "baird") {
            c.env.kind = EnvSpec::Kind::Baird;
            c.env.n_states = 7;
            c.env.d = 8;
            c.env.gamma = 0.99;
        } else {
            throw ConfigError("unknown env kind: " + kind);
        }

        const auto& aj = j.at("algorithm");
        const std::string family = aj.at("family").get<std::string>();
        if (family == "td")
            c.family = AlgorithmFamily::Td;
        else if (family == "tdc")
            c.family = AlgorithmFamily::Tdc;
        else
            throw ConfigError("unknown algorithm family: " + family);
        const std::string mode = aj.at("mode").get<std::string>();
        if (mode == "explicit")
            c.mode = UpdateMode::Explicit;
        else if (mode == "implicit")
            c.mode = UpdateMode::Implicit;
        else
            throw ConfigError("unknown update mode: " + mode);

        c.lambda = j.value("lambda", 0.0);
        c.schedule_alpha = schedule_from_json(j.at("schedule_alpha"));
        if (j.contains("schedule_beta") && !j.at("schedule_beta").is_null())
            c.schedule_beta = schedule_from_json(j.at("schedule_beta"));
        if (j.contains("projection") && !j.at("projection").is_null()) {
            const auto& pj = j.at("projection");
            if (pj.contains("R"))
                c.projection_r = pj.at("R").get<double>();
            else if (pj.contains("R_w") && pj.contains("R_u"))
                c.projection_wu = {pj.at("R_w").get<double>(), pj.at("R_u").get<double>()};
            else
                throw ConfigError("projection needs R or {R_w, R_u}");
        }
        c.n_steps = j.at("n_steps").get<long>();
        c.n_replications = j.at("n_replications").get<int>();
        c.master_seed = j.at("master_seed").get<uint64_t>();
        for (const auto& mj : j.at("metrics")) c.metrics.push_back(metric_from_name(mj.get<std::string>()));
        c.snapshot_every = j.value("snapshot_every", 0L);
        c.output_path = j.value("output_path", std::string("out"));
        if (j.contains("w0") && !j.at("w0").is_null()) c.w0 = j.at("w0").get<Vector>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config json: ") + e.what());
    }
    validate(c);
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json ej;
    switch (c.env.kind) {
        case EnvSpec::Kind::RandomWalk:
            ej = {{"kind", "random_walk"}, {"n_states", c.env.n_states}, {"gamma", c.env.gamma},
                  {"d", c.env.d}};
            break;
        case EnvSpec::Kind::RandomMrp:
            ej = {{"kind", "random_mrp"}, {"n_states", c.env.n_states}, {"d", c.env.d},
                  {"gamma", c.env.gamma}, {"env_seed", c.env.env_seed}};
            break;
        case EnvSpec::Kind::Baird:
            ej = {{"kind", "baird"}};
            break;
    }
    nlohmann::json j;
    j["env"] = ej;
    j["algorithm"] = {{"family", c.family == AlgorithmFamily::Td ? "td" : "tdc"},
                      {"mode", c.mode == UpdateMode::Explicit ? "explicit" : "implicit"}};
    j["lambda"] = c.lambda;
    j["schedule_alpha"] = schedule_to_json(c.schedule_alpha);
    if (c.schedule_beta) j["schedule_beta"] = schedule_to_json(*c.schedule_beta);
    if (c.projection_r)
        j["projection"] = {{"R", *c.projection_r}};
    else if (c.projection_wu)
        j["projection"] = {{"R_w", c.projection_wu->first}, {"R_u", c.projection_wu->second}};
    else
        j["projection"] = nullptr;
    j["n_steps"] = c.n_steps;
    j["n_replications"] = c.n_replications;
    j["master_seed"] = c.master_seed;
    nlohmann::json ms = nlohmann::json::array();
    for (Metric m : c.metrics) ms.push_back(metric_name(m));
    j["metrics"] = std::move(ms);
    j["snapshot_every"] = c.snapshot_every;
    j["output_path"] = c.output_path;
    if (c.w0) j["w0"] = *c.w0;
    return j;
}

namespace {

std::pair<MarkovRewardEnvironment, FeatureMap> build_environment(const EnvSpec& spec) {
    switch (spec.kind) {
        case EnvSpec::Kind::RandomWalk:
            return make_random_walk(spec.n_states, spec.gamma, spec.d);
        case EnvSpec::Kind::RandomMrp: {
            RngStream rng(spec.env_seed, 0);
            auto built = make_random_mrp(spec.n_states, spec.d, spec.gamma, rng);
            built.first.seed = spec.env_seed;
            return built;
        }
        case EnvSpec::Kind::Baird:
            return make_baird();
    }
    throw ConfigError("unknown env kind");
}

std::vector<long> snapshot_steps_for(const ExperimentConfig& c) {
    std::vector<long> steps{0};
    if (c.snapshot_every > 0) {
        for (long s = c.snapshot_every; s < c.n_steps; s += c.snapshot_every) steps.push_back(s);
    } else {
        // log-spaced: 8 points per decade
        for (int j = 0;; ++j) {
            const long s = std::llround(std::pow(10.0, j / 8.0));
            if (s >= c.n_steps) break;
            steps.push_back(s);
        }
    }
    steps.push_back(c.n_steps);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

constexpr uint64_t kEvalTransitionStream = 0x8000000000000000ULL;

std::vector<Transition> sample_eval_transitions(const MarkovRewardEnvironment& env,
                                                uint64_t master_seed, int count) {
    RngStream rng(master_seed, kEvalTransitionStream);
    std::vector<Transition> out;
    out.reserve(count);
    int x = env.restart_state;
    for (int i = 0; i < 1000; ++i) {  // burn-in toward the source distribution
        const Transition t = sample_transition(env, x, rng);
        x = t.terminal ? env.restart_state : t.x_next;
    }
    while (static_cast<int>(out.size()) < count) {
        const Transition t = sample_transition(env, x, rng);
        out.push_back(t);
        x = t.terminal ? env.restart_state : t.x_next;
    }
    return out;
}

struct MetricContext {
    const MarkovRewardEnvironment* env = nullptr;
    const FeatureMap* phi = nullptr;
    const OracleBundle* oracle = nullptr;
    Vector param_target;  // TD fixed point matched to the run's lambda
    std::vector<Transition> eval_transitions;
};

double compute_metric(Metric m, const Vector& w, const MetricContext& ctx) {
    switch (m) {
        case Metric::ParamError:
            return param_error(w, ctx.param_target);
        case Metric::Rmsve:
            return rmsve(w, *ctx.phi, ctx.oracle->v_star, ctx.oracle->rmsve_weights);
        case Metric::Rmspbe:
            return rmspbe(w, ctx.oracle->A, ctx.oracle->b, ctx.oracle->Sigma);
        case Metric::Rmstde:
            return rmstde(w, ctx.eval_transitions, *ctx.phi, ctx.env->gamma);
    }
    return 0.0;
}

struct ReplicationOutput {
    std::vector<ResultRow> rows;
    bool diverged = false;
    long diverged_at = -1;
};

ReplicationOutput run_replication(const ExperimentConfig& c, const MarkovRewardEnvironment& env,
                                  const FeatureMap& phi, const MetricContext& ctx, int rep,
                                  const std::vector<long>& snaps) {
    RngStream rng(c.master_seed, static_cast<uint64_t>(rep));
    const Vector w0 = c.w0 ? *c.w0 : default_initial_weights(env, phi.dim());

    ReplicationOutput out;
    auto record = [&](long step, const Vector& w) {
        for (Metric m : c.metrics)
            out.rows.push_back({rep, step, m, compute_metric(m, w, ctx)});
    };

    if (c.family == AlgorithmFamily::Td) {
        TdRunConfig rc;
        rc.schedule = c.schedule_alpha;
        rc.lambda = c.lambda;
        rc.projection_radius = c.projection_r;
        rc.mode = c.mode;
        rc.n_steps = c.n_steps;
        rc.w0 = w0;
        rc.snapshot_steps = snaps;
        const TdRunResult rr = run_td(env, phi, rc, rng);
        for (const auto& [step, st] : rr.snapshots) record(step, st.w);
        out.diverged = rr.diverged;
        out.diverged_at = rr.diverged_at;
    } else {
        TdcRunConfig rc;
        rc.schedule_alpha = c.schedule_alpha;
        rc.schedule_beta = *c.schedule_beta;
        if (c.projection_wu) {
            rc.projection_w = c.projection_wu->first;
            rc.projection_u = c.projection_wu->second;
        }
        rc.mode = c.mode;
        rc.n_steps = c.n_steps;
        rc.w0 = w0;
        rc.u0 = Vector(phi.dim(), 0.0);
        rc.snapshot_steps = snaps;
        const TdcRunResult rr = run_tdc(env, phi, rc, rng);
        for (const auto& [step, st] : rr.snapshots) record(step, st.w);
        out.diverged = rr.diverged;
        out.diverged_at = rr.diverged_at;
    }
    return out;
}

}  // namespace

int thread_cap_from_env() {
    const char* raw = std::getenv("IMPLICIT_TD_THREADS");
    if (!raw || !*raw) return 0;
    const long v = std::strtol(raw, nullptr, 10);
    return v > 0 ? static_cast<int>(v) : 0;
}

ExperimentResult run_experiment(const ExperimentConfig& config, Parallelism par) {
    validate(config);
    ExperimentResult result;
    result.config = config;
    auto [env, phi] = build_environment(config.env);
    result.oracle = compute_oracle(env, phi);
    result.snapshot_steps = snapshot_steps_for(config);

    MetricContext ctx;
    ctx.env = &env;
    ctx.phi = &phi;
    ctx.oracle = &result.oracle;
    ctx.param_target = result.oracle.w_star;
    if (config.family == AlgorithmFamily::Td && config.lambda > 0.0 && !env.episodic() &&
        !env.off_policy()) {
        const auto ml = steady_matrices_onpolicy(env, phi, config.lambda);
        ctx.param_target = td_fixed_point(ml.A, ml.b);
    }
    const bool needs_eval = std::find(config.metrics.begin(), config.metrics.end(),
                                      Metric::Rmstde) != config.metrics.end();
    if (needs_eval) ctx.eval_transitions = sample_eval_transitions(env, config.master_seed, 1000);

    const int n_reps = config.n_replications;
    std::vector<ReplicationOutput> outputs(n_reps);
    if (par == Parallelism::OpenMp) {
        const int cap = thread_cap_from_env();
        const int threads = cap > 0 ? cap : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (int rep = 0; rep < n_reps; ++rep)
            outputs[rep] = run_replication(config, env, phi, ctx, rep, result.snapshot_steps);
    } else {
        for (int rep = 0; rep < n_reps; ++rep)
            outputs[rep] = run_replication(config, env, phi, ctx, rep, result.snapshot_steps);
    }

    for (int rep = 0; rep < n_reps; ++rep) {
        const auto& o = outputs[rep];
        result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
        if (o.diverged) result.diverged.push_back({rep, o.diverged_at});
    }

    // mean / population std per (step, metric) over replications with a value
    for (long step : result.snapshot_steps) {
        for (Metric m : config.metrics) {
            double sum = 0.0;
            long count = 0;
            for (const auto& row : result.rows)
                if (row.step == step && row.metric == m) {
                    sum += row.value;
                    ++count;
                }
            AggregateRow agg;
            agg.step = step;
            agg.metric = m;
            if (count == 0) {
                agg.mean = std::numeric_limits<double>::infinity();
                agg.stddev = 0.0;
            } else {
                agg.mean = sum / count;
                double ss = 0.0;
                for (const auto& row : result.rows)
                    if (row.step == step && row.metric == m) {
                        const double d = row.value - agg.mean;
                        ss += d * d;
                    }
                agg.stddev = std::sqrt(ss / count);
            }
            result.aggregates.push_back(agg);
        }
    }
    result.env = std::move(env);
    result.feature_map = std::move(phi);
    return result;
}

double final_mean(const ExperimentResult& result, Metric metric) {
    for (const auto& a : result.aggregates)
        if (a.step == result.final_step() && a.metric == metric) return a.mean;
    throw ConfigError("metric not present in result: " + metric_name(metric));
}

double final_std(const ExperimentResult& result, Metric metric) {
    for (const auto& a : result.aggregates)
        if (a.step == result.final_step() && a.metric == metric) return a.stddev;
    throw ConfigError("metric not present in result: " + metric_name(metric));
}

std::vector<SweepRow> sweep_step_size(const ExperimentConfig& base,
                                      const std::vector<double>& alphas, Parallelism par) {
    if (alphas.empty()) throw ConfigError("sweep needs at least one alpha");
    if (base.family != AlgorithmFamily::Td) throw ConfigError("sweep_step_size covers td only");
    const Metric metric = base.metrics.front();

    struct Variant {
        std::string label;
        UpdateMode mode;
        std::optional<double> radius;
    };
    std::vector<Variant> variants{{"explicit", UpdateMode::Explicit, std::nullopt},
                                  {"implicit", UpdateMode::Implicit, std::nullopt}};
    if (base.projection_r) {
        variants.push_back({"explicit_projected", UpdateMode::Explicit, base.projection_r});
        variants.push_back({"implicit_projected", UpdateMode::Implicit, base.projection_r});
    }

    std::vector<SweepRow> table;
    for (double alpha : alphas) {
        for (const auto& v : variants) {
            ExperimentConfig c = base;
            c.schedule_alpha = StepSizeSchedule::constant(alpha);
            c.mode = v.mode;
            c.projection_r = v.radius;
            c.metrics = {metric};
            const ExperimentResult r = run_experiment(c, par);
            table.push_back({alpha, v.label, metric, final_mean(r, metric), final_std(r, metric),
                             static_cast<int>(r.diverged.size())});
        }
    }
    return table;
}

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& p, const std::string& contents) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open " + p.string());
    out << contents;
    if (!out) throw IoError("write failed for " + p.string());
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const std::string& path) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create " + path + ": " + ec.message());

    std::string raw = "replication,step,metric,value\n";
    for (const auto& row : result.rows) {
        raw += std::to_string(row.replication);
        raw += ',';
        raw += std::to_string(row.step);
        raw += ',';
        raw += metric_name(row.metric);
        raw += ',';
        raw += g17(row.value);
        raw += '\n';
    }
    write_file(fs::path(path) / "raw.csv", raw);

    std::string agg = "step,metric,mean,std\n";
    for (const auto& a : result.aggregates) {
        agg += std::to_string(a.step);
        agg += ',';
        agg += metric_name(a.metric);
        agg += ',';
        agg += g17(a.mean);
        agg += ',';
        agg += g17(a.stddev);
        agg += '\n';
    }
    write_file(fs::path(path) / "agg.csv", agg);

    nlohmann::json meta;
    meta["schema"] = "implicit-td/meta/v1";
    meta["library_version"] = ITD_VERSION;
    meta["config"] = config_to_json(result.config);
    meta["master_seed"] = result.config.master_seed;
    meta["env"] = {{"name", result.env.name}, {"seed", result.env.seed}};
    meta["aggregation"] = "population_std";
    meta["n_replications"] = result.config.n_replications;
    meta["diverged"] = result.diverged.size();
    nlohmann::json divs = nlohmann::json::array();
    for (const auto& d : result.diverged)
        divs.push_back({{"replication", d.replication}, {"step", d.step}, {"value", "+inf"}});
    meta["diverged_replications"] = std::move(divs);
    long alive = result.config.n_replications - static_cast<long>(result.diverged.size());
    meta["alive_at_final"] = alive;
    meta["final_step"] = result.final_step();
    write_file(fs::path(path) / "meta.json", meta.dump(2) + "\n");

    write_file(fs::path(path) / "env.json",
               environment_to_json(result.env, result.feature_map).dump(2) + "\n");
    write_file(fs::path(path) / "oracle.json", oracle_to_json(result.oracle).dump(2) + "\n");
}

void emit_sweep(const std::vector<SweepRow>& rows, const ExperimentConfig& base,
                const std::string& path) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create " + path + ": " + ec.message());
    std::string csv = "alpha,variant,metric,mean,std,diverged\n";
    for (const auto& r : rows) {
        csv += g17(r.alpha);
        csv += ',';
        csv += r.variant;
        csv += ',';
        csv += metric_name(r.metric);
        csv += ',';
        csv += g17(r.mean_final);
        csv += ',';
        csv += g17(r.std_final);
        csv += ',';
        csv += std::to_string(r.diverged);
        csv += '\n';
    }
    write_file(fs::path(path) / "sweep.csv", csv);
    nlohmann::json meta;
    meta["schema"] = "implicit-td/sweep-meta/v1";
    meta["library_version"] = ITD_VERSION;
    meta["config"] = config_to_json(base);
    write_file(fs::path(path) / "meta.json", meta.dump(2) + "\n");
}

std::vector<std::string> repro_names() { return {"randomwalk-fig3", "mrp-fig5", "baird-table"}; }

namespace {

ExperimentConfig base_walk_config() {
    ExperimentConfig c;
    c.env.kind = EnvSpec::Kind::RandomWalk;
    c.env.n_states = 11;
    c.env.gamma = 0.9;
    c.env.d = 7;
    c.family = AlgorithmFamily::Td;
    c.mode = UpdateMode::Explicit;
    c.lambda = 0.0;
    c.schedule_alpha = StepSizeSchedule::constant(0.05);
    c.projection_r = 10.0;
    c.n_steps = 10000;
    c.n_replications = 100;
    c.master_seed = 271828;
    c.metrics = {Metric::Rmsve};
    return c;
}

ExperimentConfig base_mrp_config() {
    ExperimentConfig c;
    c.env.kind = EnvSpec::Kind::RandomMrp;
    c.env.n_states = 100;
    c.env.d = 20;
    c.env.gamma = 0.9;
    c.env.env_seed = 9001;
    c.family = AlgorithmFamily::Td;
    c.schedule_alpha = StepSizeSchedule::polynomial(300.0, 1.0);
    c.projection_r = 5000.0;
    c.n_steps = 100000;
    c.n_replications = 20;
    c.master_seed = 314159;
    c.metrics = {Metric::ParamError};
    return c;
}

ExperimentConfig base_baird_config() {
    ExperimentConfig c;
    c.env.kind = EnvSpec::Kind::Baird;
    c.family = AlgorithmFamily::Tdc;
    c.schedule_alpha = StepSizeSchedule::constant(0.005);
    c.schedule_beta = StepSizeSchedule::constant(0.05);
    c.n_steps = 10000;
    c.n_replications = 100;
    c.master_seed = 161803;
    c.metrics = {Metric::Rmspbe, Metric::Rmsve};
    return c;
}

}  // namespace

ReproBundle repro_bundle(const std::string& name) {
    ReproBundle bundle;
    bundle.name = name;
    if (name == "randomwalk-fig3") {
        ReproRun run;
        run.label = "sweep";
        run.config = base_walk_config();
        bundle.runs.push_back(std::move(run));
        bundle.sweep_alphas = {0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.25, 1.5};
        return bundle;
    }
    if (name == "mrp-fig5") {
        for (double lambda : {0.0, 0.5}) {
            for (UpdateMode mode : {UpdateMode::Explicit, UpdateMode::Implicit}) {
                ExperimentConfig c = base_mrp_config();
                c.lambda = lambda;
                c.mode = mode;
                ReproRun run;
                run.label = std::string("td") + (lambda == 0.0 ? "0" : "05") +
                            (mode == UpdateMode::Explicit ? "_explicit" : "_implicit");
                run.config = std::move(c);
                bundle.runs.push_back(std::move(run));
            }
        }
        return bundle;
    }
    if (name == "baird-table") {
        struct Setting {
            const char* label;
            bool decreasing;
            double a1, b1;
        };
        const Setting settings[] = {{"const_small", false, 0.005, 0.05},
                                    {"const_large", false, 0.025, 0.25},
                                    {"decr_small", true, 0.05, 0.5},
                                    {"decr_large", true, 1.0, 10.0}};
        for (const auto& s : settings) {
            for (UpdateMode mode : {UpdateMode::Explicit, UpdateMode::Implicit}) {
                ExperimentConfig c = base_baird_config();
                if (s.decreasing) {
                    c.schedule_alpha = StepSizeSchedule::polynomial(s.a1, 0.99);
                    c.schedule_beta = StepSizeSchedule::polynomial(s.b1, 2.0 / 3.0);
                } else {
                    c.schedule_alpha = StepSizeSchedule::constant(s.a1);
                    c.schedule_beta = StepSizeSchedule::constant(s.b1);
                }
                c.mode = mode;
                ReproRun run;
                run.label = std::string(s.label) +
                            (mode == UpdateMode::Explicit ? "_tdc" : "_imp_tdc");
                run.config = std::move(c);
                bundle.runs.push_back(std::move(run));
            }
        }
        return bundle;
    }
    throw ConfigError("unknown repro name: " + name + " (expected randomwalk-fig3, mrp-fig5, baird-table)");
}

void run_repro(const std::string& name, const std::string& output_root, Parallelism par) {
    namespace fs = std::filesystem;
    const ReproBundle bundle = repro_bundle(name);
    std::error_code ec;
    fs::create_directories(output_root, ec);
    if (ec) throw IoError("cannot create " + output_root + ": " + ec.message());

    if (!bundle.sweep_alphas.empty()) {
        const auto table = sweep_step_size(bundle.runs.front().config, bundle.sweep_alphas, par);
        emit_sweep(table, bundle.runs.front().config, output_root);
        return;
    }

    std::string summary = "run,metric,final_mean,final_std,diverged\n";
    for (const auto& run : bundle.runs) {
        const ExperimentResult r = run_experiment(run.config, par);
        emit_outputs(r, (fs::path(output_root) / run.label).string());
        for (Metric m : run.config.metrics) {
            summary += run.label;
            summary += ',';
            summary += metric_name(m);
            summary += ',';
            summary += g17(final_mean(r, m));
            summary += ',';
            summary += g17(final_std(r, m));
            summary += ',';
            summary += std::to_string(r.diverged.size());
            summary += '\n';
        }
    }
    write_file(fs::path(output_root) / "summary.csv", summary);
}

bool VerificationReport::all_pass() const {
    for (const auto& p : properties)
        if (!p.pass) return false;
    return true;
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : properties)
        arr.push_back({{"name", p.name},
                       {"pass", p.pass},
                       {"n_checked", p.n_checked},
                       {"worst", p.worst},
                       {"note", p.note}});
    return {{"schema", "implicit-td/verify/v1"},
            {"library_version", ITD_VERSION},
            {"all_pass", all_pass()},
            {"properties", std::move(arr)}};
}

}  // namespace itd
