#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "itd/harness.hpp"

namespace itd {

namespace {

struct Checker {
    PropertyResult result;

    explicit Checker(std::string name) { result.name = std::move(name); result.pass = true; }

    void observe(double residual, double limit) {
        ++result.n_checked;
        result.worst = std::max(result.worst, residual);
        if (!(residual <= limit)) result.pass = false;
    }

    void expect(bool ok, const std::string& note = "") {
        ++result.n_checked;
        if (!ok) {
            result.pass = false;
            if (result.note.empty()) result.note = note;
        }
    }
};

Vector random_vector(RngStream& rng, int d, double lo, double hi) {
    Vector v(d);
    for (double& x : v) x = lo + (hi - lo) * rng.next_double();
    return v;
}

PropertyResult check_rng_reproducibility() {
    Checker c("rng_reproducibility");
    RngStream a(123, 7), b(123, 7), other(123, 8);
    bool identical = true, distinct = false;
    for (int i = 0; i < 1000000; ++i)
        if (a.next_u64() != b.next_u64()) identical = false;
    RngStream a2(123, 7);
    for (int i = 0; i < 1000; ++i)
        if (a2.next_u64() != other.next_u64()) distinct = true;
    c.expect(identical, "same (seed, stream) must replay identically");
    c.expect(distinct, "distinct stream ids must differ");
    return c.result;
}

PropertyResult check_sherman_morrison() {
    Checker c("sherman_morrison_identity");
    RngStream rng(2024, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 1 + rng.next_below(10);
        const double alpha = 3.0 * rng.next_double();
        const Vector phi = random_vector(rng, d, -1.0, 1.0);
        Matrix m = Matrix::identity(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) += alpha * phi[i] * phi[j];
        const Matrix direct = inverse(m);
        const double scale = alpha / (1.0 + alpha * dot(phi, phi));
        Matrix closed = Matrix::identity(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) closed(i, j) -= scale * phi[i] * phi[j];
        c.observe(norm_inf(direct - closed), 1e-12);
    }
    return c.result;
}

PropertyResult check_contraction() {
    Checker c("update_matrix_contraction");
    RngStream rng(2024, 2);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 1 + rng.next_below(10);
        const double alpha = 3.0 * rng.next_double();
        const Vector phi = random_vector(rng, d, -1.0, 1.0);
        const double scale = alpha / (1.0 + alpha * dot(phi, phi));
        Matrix closed = Matrix::identity(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) closed(i, j) -= scale * phi[i] * phi[j];
        const Vector eig = eigenvalues_sym(closed);
        const double spectral = std::max(std::abs(eig.front()), std::abs(eig.back()));
        c.observe(spectral, 1.0 + 1e-12);
    }
    return c.result;
}

FeatureMap random_feature_map(RngStream& rng, int n, int d) {
    FeatureMap fm;
    fm.phi = Matrix(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) fm.phi(i, j) = 2.0 * rng.next_double() - 1.0;
    return fm;
}

PropertyResult check_implicit_td0_fixed_point() {
    Checker c("implicit_td0_matches_fixed_point");
    RngStream rng(2024, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 1 + rng.next_below(10);
        FeatureMap fm = random_feature_map(rng, 2, d);
        TdLearnerState st = make_td_state(random_vector(rng, d, -2, 2), 0.0, 0.9);
        Transition t{0, 2.0 * rng.next_double() - 1.0, 1, 1.0, false};
        const double alpha = 5.0 * rng.next_double();
        const TdLearnerState next = td_implicit_step(st, t, fm, alpha);

        const Vector phi_x = fm.row(0), phi_n = fm.row(1);
        const double drift_scale = alpha * (t.r + st.gamma * dot(phi_n, st.w));
        const Vector ref = implicit_fixed_point_solve(st.w, phi_x, alpha, drift_scale * phi_x);
        c.observe(norm_inf(next.w - ref), 1e-10);
    }
    return c.result;
}

PropertyResult check_implicit_tdl_fixed_point() {
    Checker c("implicit_td_lambda_matches_fixed_point");
    RngStream rng(2024, 4);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 1 + rng.next_below(10);
        FeatureMap fm = random_feature_map(rng, 2, d);
        const double lambda = rng.next_double();
        TdLearnerState st = make_td_state(random_vector(rng, d, -2, 2), lambda, 0.9);
        st.e = random_vector(rng, d, -1, 1);
        Transition t{0, 2.0 * rng.next_double() - 1.0, 1, 1.0, false};
        const double alpha = 5.0 * rng.next_double();
        const TdLearnerState next = detail::td_implicit_step_any_lambda(st, t, fm, alpha);

        const Vector phi_x = fm.row(0), phi_n = fm.row(1);
        Vector trace(d);
        for (int i = 0; i < d; ++i) trace[i] = phi_x[i] + lambda * st.gamma * st.e[i];
        const double drift_scale =
            alpha * (t.r + st.gamma * dot(phi_n, st.w) + lambda * st.gamma * dot(st.e, st.w));
        const Vector ref = implicit_fixed_point_solve(st.w, trace, alpha, drift_scale * trace);
        c.observe(norm_inf(next.w - ref), 1e-10);
    }
    return c.result;
}

PropertyResult check_implicit_tdc_fixed_point() {
    Checker c("implicit_tdc_matches_fixed_point");
    RngStream rng(2024, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 1 + rng.next_below(10);
        FeatureMap fm = random_feature_map(rng, 2, d);
        TdcLearnerState st =
            make_tdc_state(random_vector(rng, d, -2, 2), random_vector(rng, d, -2, 2), 0.9);
        const double rho = 4.0 * rng.next_double();
        Transition t{0, 2.0 * rng.next_double() - 1.0, 1, rho, false};
        const double alpha = 3.0 * rng.next_double();
        const double beta = 3.0 * rng.next_double();
        const TdcLearnerState next = tdc_implicit_step(st, t, fm, alpha, beta);

        const Vector phi_x = fm.row(0), phi_n = fm.row(1);
        const double delta = t.r + st.gamma * dot(phi_n, st.w) - dot(phi_x, st.w);
        Vector w_drift(d), u_drift(d);
        const double phiw = dot(phi_n, st.w), phiu = dot(phi_x, st.u);
        for (int i = 0; i < d; ++i) {
            w_drift[i] = alpha * rho *
                         (t.r * phi_x[i] + st.gamma * phiw * phi_x[i] - st.gamma * phiu * phi_n[i]);
            u_drift[i] = beta * rho * delta * phi_x[i];
        }
        const Vector w_ref = implicit_fixed_point_solve(st.w, phi_x, alpha * rho, w_drift);
        const Vector u_ref = implicit_fixed_point_solve(st.u, phi_x, beta * rho, u_drift);
        c.observe(norm_inf(next.w - w_ref), 1e-10);
        c.observe(norm_inf(next.u - u_ref), 1e-10);
    }
    return c.result;
}

// Instrumented implicit-TD run: recomputes the effective step per transition,
// checks the step-size bounds, the trace bound, and that the production step
// function moved exactly along the trace direction by that step. The bounds
// are stated for max ||phi|| = 1; with larger feature rows (random walk) the
// same derivation gives the max-norm-scaled forms used here, which reduce to
// the originals when phi_max = 1.
void instrumented_td_run(Checker& bounds, Checker& trace, const MarkovRewardEnvironment& env,
                         const FeatureMap& fm, double lambda, double alpha_const, long steps,
                         uint64_t seed, bool flip_lower_bound) {
    RngStream rng(seed, 0);
    TdLearnerState st = make_td_state(Vector(fm.dim(), 0.0), lambda, env.gamma);
    const double lg = lambda * env.gamma;
    double phi_max = 0.0;
    for (int x = 0; x < fm.n_states(); ++x) phi_max = std::max(phi_max, norm2(fm.row(x)));
    const double trace_limit = phi_max / (1.0 - lg);
    int x = env.restart_state;
    for (long n = 1; n <= steps; ++n) {
        const Transition t = sample_transition(env, x, rng);
        const Vector phi_x = fm.row(t.x);
        Vector e_next(fm.dim());
        for (int i = 0; i < fm.dim(); ++i) e_next[i] = phi_x[i] + lg * st.e[i];
        const double dir_sq = dot(e_next, e_next);
        const double alpha_eff = alpha_const / (1.0 + alpha_const * dir_sq);

        double lo = lambda == 0.0
                        ? alpha_const / (1.0 + alpha_const * phi_max * phi_max)
                        : alpha_const / (1.0 + alpha_const * trace_limit * trace_limit);
        if (flip_lower_bound) lo = alpha_const;  // deliberate fault injection
        bounds.expect(alpha_eff <= alpha_const * (1.0 + 1e-12), "alpha_eff above alpha");
        bounds.expect(alpha_eff >= lo * (1.0 - 1e-12), "alpha_eff below lower bound");
        trace.observe(norm2(e_next), trace_limit + 1e-12);

        const TdLearnerState next = td_implicit_step(st, t, fm, alpha_const);
        const Vector phi_n = fm.row(t.x_next);
        const double delta = t.r + st.gamma * dot(phi_n, st.w) - dot(phi_x, st.w);
        double worst = 0.0;
        for (int i = 0; i < fm.dim(); ++i)
            worst = std::max(worst,
                             std::abs(next.w[i] - (st.w[i] + alpha_eff * delta * e_next[i])));
        bounds.observe(worst, 1e-12 * std::max(1.0, norm_inf(st.w)));

        st = next;
        x = t.terminal ? env.restart_state : t.x_next;
    }
}

std::pair<PropertyResult, PropertyResult> check_step_and_trace_bounds(bool flip) {
    Checker bounds("effective_step_bounds");
    Checker trace("eligibility_trace_bound");
    {
        auto [env, fm] = make_random_walk();
        instrumented_td_run(bounds, trace, env, fm, 0.0, 1.5, 100000, 11, flip);
        instrumented_td_run(bounds, trace, env, fm, 0.5, 1.5, 100000, 12, flip);
    }
    {
        RngStream seed_rng(42, 0);
        auto [env, fm] = make_random_mrp(100, 20, 0.9, seed_rng);
        instrumented_td_run(bounds, trace, env, fm, 0.0, 10.0, 100000, 13, flip);
        instrumented_td_run(bounds, trace, env, fm, 0.5, 10.0, 100000, 14, flip);
    }
    {
        // Baird features have norm sqrt(5); the TDC effective steps obey the
        // analogous bound alpha / (1 + alpha rho_max max||phi||^2).
        auto [env, fm] = make_baird();
        RngStream rng(15, 0);
        TdcLearnerState st = make_tdc_state(default_initial_weights(env, 8), Vector(8, 0.0), env.gamma);
        int x = env.restart_state;
        for (long n = 1; n <= 100000; ++n) {
            const Transition t = sample_transition(env, x, rng);
            const double alpha = 0.1;
            const Vector phi_x = fm.row(t.x);
            const double a_eff = alpha / (1.0 + alpha * t.rho * dot(phi_x, phi_x));
            bounds.expect(a_eff <= alpha * (1.0 + 1e-12), "tdc alpha_eff above alpha");
            bounds.expect(a_eff >= alpha / (1.0 + alpha * 7.0 * 5.0) * (1.0 - 1e-12),
                          "tdc alpha_eff below bound");
            st = tdc_implicit_step(st, t, fm, alpha, 10 * alpha);
            x = t.x_next;
        }
    }
    return {bounds.result, trace.result};
}

PropertyResult check_projection() {
    Checker c("projection_properties");
    RngStream rng(2024, 6);
    for (int trial = 0; trial < 10000; ++trial) {
        const int d = 1 + rng.next_below(8);
        const double r = 0.1 + 5.0 * rng.next_double();
        const Vector u = random_vector(rng, d, -10, 10);
        const Vector v = random_vector(rng, d, -10, 10);
        const Vector pu = project(u, r), pv = project(v, r);
        c.observe(norm2(pu) - r, 1e-12);
        c.observe(norm2(pu - project(pu, r)), 1e-15);  // idempotence
        c.observe(norm2(pu - pv) - norm2(u - v), 1e-12);  // non-expansive
        if (norm2(u) <= r) c.expect(pu == u, "identity inside the ball");
    }
    return c.result;
}

// ||delta phi|| <= G = r_max + 2R and ||delta e|| <= G / (1 - lg) on projected
// runs. Exact on the MRP (unit feature rows); the walk uses the max-norm
// generalization G' = phi_max (r_max + 2 phi_max R).
PropertyResult check_projected_update_bound() {
    Checker c("projected_update_bound");
    auto run_case = [&](const MarkovRewardEnvironment& env, const FeatureMap& fm, double lambda,
                        double radius, double alpha, uint64_t seed) {
        const double r_max = env.max_abs_reward();
        double phi_max = 0.0;
        for (int s = 0; s < fm.n_states(); ++s) phi_max = std::max(phi_max, norm2(fm.row(s)));
        const double g_bound = phi_max * (r_max + 2.0 * phi_max * radius);
        const double trace_bound = g_bound / (1.0 - lambda * env.gamma);
        RngStream rng(seed, 0);
        TdLearnerState st = make_td_state(Vector(fm.dim(), 0.0), lambda, env.gamma);
        int x = env.restart_state;
        for (long n = 1; n <= 100000; ++n) {
            const Transition t = sample_transition(env, x, rng);
            const Vector phi_x = fm.row(t.x);
            const Vector phi_n = fm.row(t.x_next);
            Vector e_next(fm.dim());
            for (int i = 0; i < fm.dim(); ++i)
                e_next[i] = phi_x[i] + lambda * env.gamma * st.e[i];
            const double delta = t.r + env.gamma * dot(phi_n, st.w) - dot(phi_x, st.w);
            c.observe(std::abs(delta) * norm2(phi_x), g_bound + 1e-9);
            c.observe(std::abs(delta) * norm2(e_next), trace_bound + 1e-9);
            st = td_explicit_step(st, t, fm, alpha);
            st.w = project(st.w, radius);
            x = t.terminal ? env.restart_state : t.x_next;
        }
    };
    {
        auto [env, fm] = make_random_walk();
        run_case(env, fm, 0.0, 10.0, 0.5, 77);
        run_case(env, fm, 0.5, 10.0, 0.5, 78);
    }
    {
        RngStream seed_rng(42, 0);
        auto [env, fm] = make_random_mrp(100, 20, 0.9, seed_rng);
        run_case(env, fm, 0.0, 5.0, 1.0, 79);
        run_case(env, fm, 0.5, 5.0, 1.0, 80);
    }
    return c.result;
}

struct EnvCase {
    std::string label;
    MarkovRewardEnvironment env;
    FeatureMap fm;
    OracleBundle oracle;
};

std::vector<EnvCase> oracle_cases() {
    std::vector<EnvCase> cases;
    {
        auto [env, fm] = make_random_walk();
        EnvCase ec{"random_walk", std::move(env), std::move(fm), {}};
        ec.oracle = compute_oracle(ec.env, ec.fm);
        cases.push_back(std::move(ec));
    }
    {
        RngStream rng(42, 0);
        auto [env, fm] = make_random_mrp(100, 20, 0.9, rng);
        EnvCase ec{"random_mrp", std::move(env), std::move(fm), {}};
        ec.oracle = compute_oracle(ec.env, ec.fm);
        cases.push_back(std::move(ec));
    }
    {
        auto [env, fm] = make_baird();
        EnvCase ec{"baird", std::move(env), std::move(fm), {}};
        ec.oracle = compute_oracle(ec.env, ec.fm);
        cases.push_back(std::move(ec));
    }
    return cases;
}

PropertyResult check_fixed_point_residual(const std::vector<EnvCase>& cases) {
    Checker c("fixed_point_residual");
    for (const auto& ec : cases) {
        const Vector resid = ec.oracle.A * ec.oracle.w_star + ec.oracle.b;
        c.observe(norm2(resid), 1e-8);
        c.observe(rmspbe(ec.oracle.w_star, ec.oracle.A, ec.oracle.b, ec.oracle.Sigma), 1e-7);
    }
    return c.result;
}

PropertyResult check_bellman_residual(const std::vector<EnvCase>& cases) {
    Checker c("bellman_residual");
    for (const auto& ec : cases) {
        const auto& env = ec.env;
        const Vector& v = ec.oracle.v_star;
        if (env.episodic()) {
            for (int x = 0; x < env.n_states; ++x) {
                if (env.is_absorbing(x)) {
                    c.observe(std::abs(v[x]), 0.0);
                    continue;
                }
                double rhs = 0.0;
                for (int y = 0; y < env.n_states; ++y)
                    rhs += env.transition(x, y) * (env.reward(x, y) + env.gamma * v[y]);
                c.observe(std::abs(v[x] - rhs), 1e-10);
            }
        } else {
            const Matrix p = env.target_kernel();
            for (int x = 0; x < env.n_states; ++x) {
                double rhs = 0.0;
                for (int y = 0; y < env.n_states; ++y)
                    rhs += p(x, y) * (env.reward(x, y) + env.gamma * v[y]);
                c.observe(std::abs(v[x] - rhs), 1e-10);
            }
        }
    }
    return c.result;
}

PropertyResult check_lambda_continuity() {
    Checker c("lambda_continuity_at_zero");
    RngStream rng(42, 0);
    auto [env, fm] = make_random_mrp(100, 20, 0.9, rng);
    const auto m0 = steady_matrices_onpolicy(env, fm, 0.0);
    const auto m_eps = steady_matrices_onpolicy(env, fm, 1e-12);
    c.observe(norm_inf(m0.A - m_eps.A), 1e-9);
    c.observe(norm_inf(m0.b - m_eps.b), 1e-9);
    return c.result;
}

// Batch-means z-scores of 10^6-step Monte Carlo averages of (A_n, b_n)
// against the analytic matrices. Entry-wise "within 3 SE" is applied with a
// multiple-comparisons allowance: at most 2% of entries beyond 3 SE and none
// beyond 5 SE.
PropertyResult check_monte_carlo_consistency(const std::vector<EnvCase>& cases) {
    Checker c("monte_carlo_A_b_consistency");
    const long total_steps = 1000000;
    const int n_batches = 100;
    const long batch_len = total_steps / n_batches;
    for (const auto& ec : cases) {
        const auto& env = ec.env;
        const auto& fm = ec.fm;
        const int d = fm.dim();
        const int cells = d * d + d;
        std::vector<Vector> batch_means(n_batches, Vector(cells, 0.0));
        RngStream rng(909, 17);
        int x = env.restart_state;
        for (int i = 0; i < 20000; ++i) {  // burn-in
            const Transition t = sample_transition(env, x, rng);
            x = t.terminal ? env.restart_state : t.x_next;
        }
        for (int bidx = 0; bidx < n_batches; ++bidx) {
            Vector& acc = batch_means[bidx];
            for (long s = 0; s < batch_len; ++s) {
                const Transition t = sample_transition(env, x, rng);
                const Vector phi_x = fm.row(t.x);
                const Vector phi_n = fm.row(t.x_next);
                for (int i = 0; i < d; ++i) {
                    const double lead = t.rho * phi_x[i];
                    for (int j = 0; j < d; ++j)
                        acc[i * d + j] += lead * (env.gamma * phi_n[j] - phi_x[j]);
                    acc[d * d + i] += t.rho * t.r * phi_x[i];
                }
                x = t.terminal ? env.restart_state : t.x_next;
            }
            for (double& v : acc) v /= batch_len;
        }
        Vector target(cells, 0.0);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) target[i * d + j] = ec.oracle.A(i, j);
            target[d * d + i] = ec.oracle.b[i];
        }
        int beyond3 = 0;
        double worst_z = 0.0;
        for (int cell = 0; cell < cells; ++cell) {
            double mean = 0.0;
            for (int bidx = 0; bidx < n_batches; ++bidx) mean += batch_means[bidx][cell];
            mean /= n_batches;
            double var = 0.0;
            for (int bidx = 0; bidx < n_batches; ++bidx) {
                const double dv = batch_means[bidx][cell] - mean;
                var += dv * dv;
            }
            var /= (n_batches - 1);
            const double se = std::sqrt(var / n_batches);
            const double z = se > 0 ? std::abs(mean - target[cell]) / se
                                    : (std::abs(mean - target[cell]) > 1e-12 ? 1e9 : 0.0);
            worst_z = std::max(worst_z, z);
            if (z > 3.0) ++beyond3;
            ++c.result.n_checked;
        }
        c.result.worst = std::max(c.result.worst, worst_z);
        if (worst_z > 5.0 || beyond3 > std::max(1, cells / 50)) {
            c.result.pass = false;
            c.result.note = ec.label + ": monte carlo averages off the analytic values";
        }
    }
    return c.result;
}

PropertyResult check_lambda_min_range(const std::vector<EnvCase>& cases) {
    Checker c("lambda_min_in_unit_interval");
    for (const auto& ec : cases) {
        double phi_max = 0.0;
        for (int s = 0; s < ec.fm.n_states(); ++s)
            phi_max = std::max(phi_max, norm2(ec.fm.row(s)));
        if (phi_max > 1.0 + 1e-12) continue;  // stated only for unit-bounded feature rows
        c.expect(ec.oracle.lambda_min > 0.0 && ec.oracle.lambda_min < 1.0,
                 ec.label + ": lambda_min outside (0,1)");
    }
    return c.result;
}

PropertyResult check_baird_importance_identity(const std::vector<EnvCase>& cases) {
    Checker c("baird_importance_identity");
    for (const auto& ec : cases) {
        if (!ec.env.off_policy()) continue;
        const auto& env = ec.env;
        Matrix mix(env.n_states, env.n_states);
        double mean_rho = 0.0;
        for (const auto& act : env.actions) {
            mean_rho += act.behavior_prob * act.rho;
            for (int i = 0; i < env.n_states; ++i)
                for (int j = 0; j < env.n_states; ++j)
                    mix(i, j) += act.behavior_prob * act.rho * act.kernel(i, j);
        }
        c.observe(norm_inf(mix - env.target_kernel()), 1e-15);
        c.observe(std::abs(mean_rho - 1.0), 1e-15);
    }
    return c.result;
}

std::string read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PropertyResult check_determinism_across_threads() {
    Checker c("determinism_across_threads");
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() /
                          ("itd_verify_" + std::to_string(static_cast<unsigned long>(::getpid())));
    const fs::path serial_dir = root / "serial";
    const fs::path par_dir = root / "parallel";
    const fs::path capped_dir = root / "capped";

    run_repro("mrp-fig5", serial_dir.string(), Parallelism::Serial);
    run_repro("mrp-fig5", par_dir.string(), Parallelism::OpenMp);
    const char* saved = std::getenv("IMPLICIT_TD_THREADS");
    const std::string saved_copy = saved ? saved : "";
    ::setenv("IMPLICIT_TD_THREADS", "3", 1);
    run_repro("mrp-fig5", capped_dir.string(), Parallelism::OpenMp);
    if (saved)
        ::setenv("IMPLICIT_TD_THREADS", saved_copy.c_str(), 1);
    else
        ::unsetenv("IMPLICIT_TD_THREADS");

    for (const auto& run : repro_bundle("mrp-fig5").runs) {
        const std::string a = read_file_bytes(serial_dir / run.label / "raw.csv");
        const std::string b = read_file_bytes(par_dir / run.label / "raw.csv");
        const std::string d = read_file_bytes(capped_dir / run.label / "raw.csv");
        c.expect(a == b, run.label + ": serial vs parallel raw.csv differ");
        c.expect(a == d, run.label + ": thread cap changed raw.csv");
        c.expect(!a.empty(), run.label + ": raw.csv empty");
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    return c.result;
}

PropertyResult check_aggregation_consistency() {
    Checker c("aggregation_consistency");
    ExperimentConfig cfg;
    cfg.env.kind = EnvSpec::Kind::RandomWalk;
    cfg.family = AlgorithmFamily::Td;
    cfg.mode = UpdateMode::Implicit;
    cfg.schedule_alpha = StepSizeSchedule::constant(0.1);
    cfg.projection_r = 10.0;
    cfg.n_steps = 2000;
    cfg.n_replications = 25;
    cfg.master_seed = 5150;
    cfg.metrics = {Metric::Rmsve, Metric::ParamError};
    const ExperimentResult r = run_experiment(cfg);
    for (const auto& agg : r.aggregates) {
        double sum = 0.0;
        long count = 0;
        for (const auto& row : r.rows)
            if (row.step == agg.step && row.metric == agg.metric) {
                sum += row.value;
                ++count;
            }
        if (count == 0) continue;
        const double mean = sum / count;
        double ss = 0.0;
        for (const auto& row : r.rows)
            if (row.step == agg.step && row.metric == agg.metric) {
                const double d = row.value - mean;
                ss += d * d;
            }
        c.observe(std::abs(mean - agg.mean), 1e-12);
        c.observe(std::abs(std::sqrt(ss / count) - agg.stddev), 1e-12);
    }
    return c.result;
}

}  // namespace

VerificationReport run_verification_suite(const VerifyOptions& opts) {
    VerificationReport report;
    auto guard = [&](auto&& fn) {
        try {
            report.properties.push_back(fn());
        } catch (const std::exception& e) {
            PropertyResult pr;
            pr.name = "exception";
            pr.pass = false;
            pr.note = e.what();
            report.properties.push_back(std::move(pr));
        }
    };

    guard([] { return check_rng_reproducibility(); });
    guard([] { return check_sherman_morrison(); });
    guard([] { return check_contraction(); });
    guard([] { return check_implicit_td0_fixed_point(); });
    guard([] { return check_implicit_tdl_fixed_point(); });
    guard([] { return check_implicit_tdc_fixed_point(); });

    try {
        auto [bounds, trace] = check_step_and_trace_bounds(opts.self_test_flip_step_bound);
        report.properties.push_back(std::move(bounds));
        report.properties.push_back(std::move(trace));
    } catch (const std::exception& e) {
        PropertyResult pr;
        pr.name = "effective_step_bounds";
        pr.pass = false;
        pr.note = e.what();
        report.properties.push_back(std::move(pr));
    }

    guard([] { return check_projection(); });
    guard([] { return check_projected_update_bound(); });

    try {
        const std::vector<EnvCase> cases = oracle_cases();
        guard([&] { return check_fixed_point_residual(cases); });
        guard([&] { return check_bellman_residual(cases); });
        guard([&] { return check_lambda_continuity(); });
        guard([&] { return check_monte_carlo_consistency(cases); });
        guard([&] { return check_lambda_min_range(cases); });
        guard([&] { return check_baird_importance_identity(cases); });
    } catch (const std::exception& e) {
        PropertyResult pr;
        pr.name = "oracle_cases";
        pr.pass = false;
        pr.note = e.what();
        report.properties.push_back(std::move(pr));
    }

    guard([] { return check_determinism_across_threads(); });
    guard([] { return check_aggregation_consistency(); });
    return report;
}

}  // namespace itd
