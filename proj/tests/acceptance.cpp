// Acceptance suite: runs every quantitative criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "itd/harness.hpp"

using namespace itd;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& details, double seconds) {
    std::printf("[%s] criterion %2d (%5.1fs): %s\n", pass ? "PASS" : "FAIL", criterion, seconds,
                details.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// exceeds(a, b): a > b, treating +inf on the left as exceeding any bound.
bool exceeds(double a, double b) { return a > b; }

ExperimentConfig walk_config(double alpha, UpdateMode mode, bool projected) {
    ExperimentConfig c;
    c.env.kind = EnvSpec::Kind::RandomWalk;
    c.env.n_states = 11;
    c.env.gamma = 0.9;
    c.env.d = 7;
    c.family = AlgorithmFamily::Td;
    c.mode = mode;
    c.schedule_alpha = StepSizeSchedule::constant(alpha);
    if (projected) c.projection_r = 10.0;
    c.n_steps = 10000;
    c.n_replications = 100;
    c.master_seed = 271828;
    c.metrics = {Metric::Rmsve};
    return c;
}

void criterion_1() {
    const auto t0 = Clock::now();
    std::map<std::string, double> finals;
    for (const auto& run : repro_bundle("mrp-fig5").runs)
        finals[run.label] = final_mean(run_experiment(run.config), Metric::ParamError);
    const double ie0 = finals["td0_implicit"], ee0 = finals["td0_explicit"];
    const double ie5 = finals["td05_implicit"], ee5 = finals["td05_explicit"];
    const bool pass = ie0 < 0.5 && ee0 > 1.0 && ie5 < 0.5 && ee5 > 1.0 && ie0 >= 0.05;
    report(1, pass,
           "100-state MRP, a_n=300/n, N=1e5, R=5000, 20 reps: param_error implicit/explicit "
           "TD(0)=" + fmt(ie0) + "/" + fmt(ee0) + " (want <0.5 / >1.0, implicit in [0.05,0.5]), "
           "TD(0.5)=" + fmt(ie5) + "/" + fmt(ee5) + " (want <0.5 / >1.0)",
           std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_2() {
    const auto t0 = Clock::now();
    const ExperimentResult small_e = run_experiment(walk_config(0.05, UpdateMode::Explicit, true));
    const ExperimentResult small_i = run_experiment(walk_config(0.05, UpdateMode::Implicit, true));
    const ExperimentResult big_proj = run_experiment(walk_config(1.5, UpdateMode::Explicit, true));
    const ExperimentResult big_raw = run_experiment(walk_config(1.5, UpdateMode::Explicit, false));
    const ExperimentResult big_imp = run_experiment(walk_config(1.5, UpdateMode::Implicit, false));

    const double r_se = final_mean(small_e, Metric::Rmsve);
    const double r_si = final_mean(small_i, Metric::Rmsve);
    const double ratio_small = r_se / r_si;
    const double r_proj = final_mean(big_proj, Metric::Rmsve);
    const double r_raw = final_mean(big_raw, Metric::Rmsve);
    const double r_imp = final_mean(big_imp, Metric::Rmsve);
    const int n_div = static_cast<int>(big_raw.diverged.size());

    const bool pass = ratio_small >= 0.5 && ratio_small <= 2.0 && exceeds(r_proj, 5.0 * r_imp) &&
                      exceeds(r_raw, 5.0 * r_imp) && n_div >= 50;
    report(2, pass,
           "random walk, N=1e4, 100 reps: a=0.05 explicit/implicit RMSVE=" + fmt(r_se) + "/" +
               fmt(r_si) + " (ratio " + fmt(ratio_small) + ", want [0.5,2]); a=1.5 explicit proj=" +
               fmt(r_proj) + " raw=" + fmt(r_raw) + " vs implicit=" + fmt(r_imp) +
               " (want both >5x); diverged=" + std::to_string(n_div) + "/100 (want >=50)",
           std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_3() {
    const auto t0 = Clock::now();
    std::map<std::string, ExperimentResult> results;
    for (const auto& run : repro_bundle("baird-table").runs)
        if (run.label.rfind("const_", 0) == 0) results.emplace(run.label, run_experiment(run.config));
    const double small_tdc = final_mean(results.at("const_small_tdc"), Metric::Rmsve);
    const double small_imp = final_mean(results.at("const_small_imp_tdc"), Metric::Rmsve);
    const double large_tdc = final_mean(results.at("const_large_tdc"), Metric::Rmsve);
    const double large_imp = final_mean(results.at("const_large_imp_tdc"), Metric::Rmsve);
    const bool pass =
        small_tdc < 3.0 && small_imp < 3.0 && exceeds(large_tdc, 10.0) && large_imp < 2.0;
    report(3, pass,
           "Baird constant steps, N=1e4, 100 reps: (0.005,0.05) RMSVE tdc/imp=" + fmt(small_tdc) +
               "/" + fmt(small_imp) + " (want both <3); (0.025,0.25) tdc=" + fmt(large_tdc) +
               " (want >10; diverged=" +
               std::to_string(results.at("const_large_tdc").diverged.size()) + "/100), imp=" +
               fmt(large_imp) + " (want <2)",
           std::chrono::duration<double>(Clock::now() - t0).count());
}

void criterion_4() {
    const auto t0 = Clock::now();
    std::map<std::string, ExperimentResult> results;
    for (const auto& run : repro_bundle("baird-table").runs)
        if (run.label.rfind("decr_large", 0) == 0)
            results.emplace(run.label, run_experiment(run.config));
    const auto& tdc = results.at("decr_large_tdc");
    const auto& imp = results.at("decr_large_imp_tdc");
    const double tdc_pbe = final_mean(tdc, Metric::Rmspbe);
    const double imp_pbe = final_mean(imp, Metric::Rmspbe);
    const double tdc_ve = final_mean(tdc, Metric::Rmsve);
    const double imp_ve = final_mean(imp, Metric::Rmsve);
    const bool pass = exceeds(tdc_pbe, 3.0 * imp_pbe) && imp_ve < 5.0 && exceeds(tdc_ve, 20.0);
    report(4, pass,
           "Baird a_n=1/n^0.99, b_n=10/n^(2/3), N=1e4, 100 reps: RMSPBE tdc/imp=" + fmt(tdc_pbe) +
               "/" + fmt(imp_pbe) + " (want >=3x gap); RMSVE tdc/imp=" + fmt(tdc_ve) + "/" +
               fmt(imp_ve) + " (want >20 / <5)",
           std::chrono::duration<double>(Clock::now() - t0).count());
}

const PropertyResult* find_property(const VerificationReport& report, const std::string& name) {
    for (const auto& p : report.properties)
        if (p.name == name) return &p;
    return nullptr;
}

bool properties_pass(const VerificationReport& rep, const std::vector<std::string>& names,
                     std::string& detail) {
    bool ok = true;
    for (const auto& name : names) {
        const PropertyResult* p = find_property(rep, name);
        if (!p) {
            ok = false;
            detail += name + "=missing ";
            continue;
        }
        ok = ok && p->pass;
        detail += name + "=" + (p->pass ? "ok" : "FAIL") + " ";
    }
    return ok;
}

void criteria_5_to_10(const VerificationReport& rep, double suite_seconds) {
    struct Group {
        int criterion;
        const char* what;
        std::vector<std::string> names;
    };
    const std::vector<Group> groups{
        {5,
         "implicit steps = direct fixed-point solves (1e-10)",
         {"implicit_td0_matches_fixed_point", "implicit_td_lambda_matches_fixed_point",
          "implicit_tdc_matches_fixed_point"}},
        {6,
         "effective-step and trace bounds on 1e5-step runs per environment",
         {"effective_step_bounds", "eligibility_trace_bound"}},
        {7,
         "oracle consistency (fixed point 1e-8, Bellman 1e-10, Monte Carlo 3SE)",
         {"fixed_point_residual", "bellman_residual", "monte_carlo_A_b_consistency"}},
        {8, "projection idempotent/non-expansive/norm-bounded", {"projection_properties"}},
        {9, "bounded updates on projected runs", {"projected_update_bound"}},
        {10, "byte-identical raw.csv across runs and thread counts",
         {"determinism_across_threads"}},
    };
    for (const auto& g : groups) {
        std::string detail = std::string(g.what) + ": ";
        const bool ok = properties_pass(rep, g.names, detail);
        report(g.criterion, ok, detail, suite_seconds / groups.size());
    }
}

void verification_sanity(const VerificationReport& rep) {
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = rep.all_pass();
    detail = "all " + std::to_string(rep.properties.size()) + " named properties pass";
    if (rep.properties.size() < 12) {
        ok = false;
        detail += " (FAIL: need >= 12)";
    }
    for (const auto& p : rep.properties)
        if (!p.pass) detail += " FAIL:" + p.name + (p.note.empty() ? "" : " (" + p.note + ")");

    // Mutation smoke test: a deliberately flipped effective-step bound must
    // surface as a failure of exactly that property.
    VerifyOptions mutated;
    mutated.self_test_flip_step_bound = true;
    const VerificationReport bad = run_verification_suite(mutated);
    const PropertyResult* flipped = find_property(bad, "effective_step_bounds");
    if (!flipped || flipped->pass) {
        ok = false;
        detail += " FAIL: injected step-bound bug was not detected";
    } else {
        detail += "; injected step-bound bug detected";
    }
    report(11, ok, detail, std::chrono::duration<double>(Clock::now() - t0).count());
}

}  // namespace

int main() {
    std::printf("acceptance suite (implicit/explicit TD policy evaluation)\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();

    const auto t0 = Clock::now();
    const VerificationReport rep = run_verification_suite();
    const double suite_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    criteria_5_to_10(rep, suite_seconds);
    verification_sanity(rep);

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
