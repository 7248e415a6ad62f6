#include "itd/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace itd {

namespace {

Vector expected_reward_under(const MarkovRewardEnvironment& env, const Matrix& kernel) {
    Vector r(env.n_states, 0.0);
    for (int x = 0; x < env.n_states; ++x) {
        double acc = 0.0;
        for (int y = 0; y < env.n_states; ++y) acc += kernel(x, y) * env.reward(x, y);
        r[x] = acc;
    }
    return r;
}

}  // namespace

Vector true_values_ergodic(const MarkovRewardEnvironment& env) {
    if (env.episodic()) throw ConfigError("true_values_ergodic requires a continuing chain");
    const Matrix p = env.target_kernel();
    const Vector r = expected_reward_under(env, p);
    Matrix m = Matrix::identity(env.n_states) - env.gamma * p;
    return solve_linear(m, r);
}

Vector true_values_episodic(const MarkovRewardEnvironment& env) {
    if (!env.episodic()) throw ConfigError("true_values_episodic requires absorbing states");
    std::vector<int> transient;
    for (int x = 0; x < env.n_states; ++x)
        if (!env.is_absorbing(x)) transient.push_back(x);
    const int nt = static_cast<int>(transient.size());
    Matrix m(nt, nt);
    Vector rhs(nt, 0.0);
    for (int i = 0; i < nt; ++i) {
        const int x = transient[i];
        double rbar = 0.0;
        for (int y = 0; y < env.n_states; ++y) rbar += env.transition(x, y) * env.reward(x, y);
        rhs[i] = rbar;
        for (int j = 0; j < nt; ++j)
            m(i, j) = (i == j ? 1.0 : 0.0) - env.gamma * env.transition(x, transient[j]);
    }
    const Vector vt = solve_linear(m, rhs);
    Vector v(env.n_states, 0.0);
    for (int i = 0; i < nt; ++i) v[transient[i]] = vt[i];
    return v;
}

namespace {

// Distribution of observed source states: for continuing chains the plain
// stationary distribution, for absorbing chains the stationary distribution
// of the transient chain with absorption redirected to the restart state.
Vector source_distribution(const MarkovRewardEnvironment& env) {
    if (!env.episodic()) return stationary_distribution(env.transition);
    std::vector<int> transient;
    for (int x = 0; x < env.n_states; ++x)
        if (!env.is_absorbing(x)) transient.push_back(x);
    const int nt = static_cast<int>(transient.size());
    int restart_idx = -1;
    for (int i = 0; i < nt; ++i)
        if (transient[i] == env.restart_state) restart_idx = i;
    if (restart_idx < 0) throw ConfigError("restart state must be transient");
    Matrix src(nt, nt);
    for (int i = 0; i < nt; ++i) {
        const int x = transient[i];
        double absorbed = 0.0;
        for (int y = 0; y < env.n_states; ++y)
            if (env.is_absorbing(y)) absorbed += env.transition(x, y);
        for (int j = 0; j < nt; ++j) src(i, j) = env.transition(x, transient[j]);
        src(i, restart_idx) += absorbed;
    }
    const Vector mu_t = stationary_distribution(src);
    Vector mu(env.n_states, 0.0);
    for (int i = 0; i < nt; ++i) mu[transient[i]] = mu_t[i];
    return mu;
}

}  // namespace

OnPolicyMatrices steady_matrices_onpolicy(const MarkovRewardEnvironment& env,
                                          const FeatureMap& phi_map, double lambda) {
    if (env.off_policy())
        throw ConfigError("steady_matrices_onpolicy does not apply to off-policy environments");
    if (env.episodic() && lambda != 0.0)
        throw ConfigError("episodic steady matrices are only defined for lambda = 0");
    const int n = env.n_states;
    const Vector mu = source_distribution(env);
    const Matrix d = diag(mu);
    const Matrix phi_t_d = transpose(phi_map.phi) * d;
    const Vector rbar = env.expected_reward();

    Matrix bellman = env.gamma * env.transition - Matrix::identity(n);
    OnPolicyMatrices out;
    out.Sigma = phi_t_d * phi_map.phi;
    if (lambda == 0.0) {
        out.A = phi_t_d * (bellman * phi_map.phi);
        out.b = phi_t_d * rbar;
    } else {
        const Matrix trace_resolvent =
            inverse(Matrix::identity(n) - (lambda * env.gamma) * env.transition);
        out.A = phi_t_d * (trace_resolvent * (bellman * phi_map.phi));
        out.b = phi_t_d * (trace_resolvent * rbar);
    }
    return out;
}

OffPolicyMatrices steady_matrices_offpolicy(const MarkovRewardEnvironment& env,
                                            const FeatureMap& phi_map) {
    if (!env.off_policy())
        throw ConfigError("steady_matrices_offpolicy requires an off-policy environment");
    const int n = env.n_states;
    const int d = phi_map.dim();
    const Vector mu = stationary_distribution(env.transition);

    OffPolicyMatrices out;
    out.A = Matrix(d, d);
    out.b = Vector(d, 0.0);
    out.C = Matrix(d, d);
    for (int x = 0; x < n; ++x) {
        const Vector phi_x = phi_map.row(x);
        for (const auto& act : env.actions) {
            const double weight = mu[x] * act.behavior_prob * act.rho;
            if (weight == 0.0) continue;
            Vector drift(d, 0.0);  // gamma E[phi(x') | x, a] - phi(x)
            double r_exp = 0.0;
            for (int y = 0; y < n; ++y) {
                const double p = act.kernel(x, y);
                if (p == 0.0) continue;
                r_exp += p * env.reward(x, y);
                for (int k = 0; k < d; ++k) drift[k] += env.gamma * p * phi_map.phi(y, k);
            }
            for (int k = 0; k < d; ++k) drift[k] -= phi_x[k];
            for (int i = 0; i < d; ++i) {
                out.b[i] += weight * r_exp * phi_x[i];
                for (int j = 0; j < d; ++j) {
                    out.A(i, j) += weight * phi_x[i] * drift[j];
                    out.C(i, j) -= weight * phi_x[i] * phi_x[j];
                }
            }
        }
    }
    return out;
}

Vector td_fixed_point(const Matrix& a, const Vector& b) {
    Vector neg_b(b.size());
    for (size_t i = 0; i < b.size(); ++i) neg_b[i] = -b[i];
    return solve_linear(a, neg_b);
}

Vector implicit_fixed_point_solve(const Vector& w, const Vector& direction, double scale,
                                  const Vector& drift) {
    if (w.size() != direction.size() || w.size() != drift.size())
        throw DimensionError("implicit_fixed_point_solve: length mismatch");
    if (scale < 0.0) throw ConfigError("scale must be nonnegative");
    const int d = static_cast<int>(w.size());
    Matrix m = Matrix::identity(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) += scale * direction[i] * direction[j];
    return solve_linear(m, w + drift);
}

double rmsve(const Vector& w, const FeatureMap& phi_map, const Vector& v_star,
             const Vector& weights) {
    if (static_cast<int>(w.size()) != phi_map.dim())
        throw DimensionError("rmsve: weight length vs feature dim");
    if (static_cast<int>(v_star.size()) != phi_map.n_states() || v_star.size() != weights.size())
        throw DimensionError("rmsve: state-space lengths");
    double acc = 0.0;
    for (int x = 0; x < phi_map.n_states(); ++x) {
        if (weights[x] < 0.0) throw ConfigError("rmsve weights must be nonnegative");
        double fit = 0.0;
        for (int j = 0; j < phi_map.dim(); ++j) fit += phi_map.phi(x, j) * w[j];
        const double gap = fit - v_star[x];
        acc += weights[x] * gap * gap;
    }
    return std::sqrt(acc);
}

double rmspbe(const Vector& w, const Matrix& a, const Vector& b, const Matrix& sigma_b) {
    const Vector residual = a * w + b;
    const Vector eig = eigenvalues_sym(sigma_b);
    const double lmax = std::max(std::abs(eig.front()), std::abs(eig.back()));
    if (lmax <= 0.0 || eig.back() <= 1e-10 * lmax)
        throw SingularMatrixError("rmspbe: feature second moment has no positive spectrum");
    // Sigma_b^+ residual; for symmetric Sigma_b the minimum-norm solve is
    // exactly the pseudo-inverse applied to the residual.
    Vector x = least_squares_minnorm(sigma_b, residual);
    const double v = dot(residual, x);
    return std::sqrt(std::max(v, 0.0));
}

double param_error(const Vector& w, const Vector& w_star) {
    if (w.size() != w_star.size()) throw DimensionError("param_error: length mismatch");
    return norm2(w - w_star);
}

double rmstde(const Vector& w, const std::vector<Transition>& transitions,
              const FeatureMap& phi_map, double gamma) {
    if (transitions.empty()) throw EmptyInputError("rmstde needs at least one transition");
    double acc = 0.0;
    for (const Transition& t : transitions) {
        const Vector phi_x = phi_map.row(t.x);
        const Vector phi_next = phi_map.row(t.x_next);
        const double delta = t.r + gamma * dot(phi_next, w) - dot(phi_x, w);
        acc += delta * delta;
    }
    return std::sqrt(acc / transitions.size());
}

OracleBundle compute_oracle(const MarkovRewardEnvironment& env, const FeatureMap& phi_map) {
    OracleBundle o;
    const int n = env.n_states;

    if (env.off_policy()) {
        o.mu = stationary_distribution(env.transition);
        const auto m = steady_matrices_offpolicy(env, phi_map);
        o.A = m.A;
        o.b = m.b;
        o.C = m.C;
        o.lambda_c = min_abs_eigenvalue(m.C);
        o.rho_max = 0.0;
        for (const auto& act : env.actions) o.rho_max = std::max(o.rho_max, act.rho);
        o.v_star = true_values_ergodic(env);
        Matrix d_mat = diag(o.mu);
        o.Sigma = transpose(phi_map.phi) * (d_mat * phi_map.phi);
        o.rmsve_weights = Vector(n, 1.0 / n);
    } else {
        const auto m = steady_matrices_onpolicy(env, phi_map, 0.0);
        o.A = m.A;
        o.b = m.b;
        o.Sigma = m.Sigma;
        o.mu = source_distribution(env);
        o.rho_max = 1.0;
        if (env.episodic()) {
            o.v_star = true_values_episodic(env);
            int nt = 0;
            for (int x = 0; x < n; ++x) nt += !env.is_absorbing(x);
            o.rmsve_weights = Vector(n, 0.0);
            for (int x = 0; x < n; ++x)
                if (!env.is_absorbing(x)) o.rmsve_weights[x] = 1.0 / nt;
        } else {
            o.v_star = true_values_ergodic(env);
            o.rmsve_weights = o.mu;
        }
    }

    o.lambda_min = min_eigenvalue_sym(o.Sigma);
    if (norm_inf(o.b) == 0.0) {
        // Zero-reward environments have w* = 0 whether or not A is singular.
        o.w_star = Vector(phi_map.dim(), 0.0);
    } else {
        o.w_star = td_fixed_point(o.A, o.b);
    }
    if (phi_map.phi.rows() >= phi_map.dim()) {
        try {
            o.w_ls = least_squares(phi_map.phi, o.v_star);
        } catch (const RankDeficientError&) {
            o.w_ls = least_squares_minnorm(phi_map.phi, o.v_star);
        }
    } else {
        o.w_ls = least_squares_minnorm(phi_map.phi, o.v_star);
    }
    return o;
}

nlohmann::json oracle_to_json(const OracleBundle& o) {
    nlohmann::json j;
    j["mu"] = o.mu;
    j["Sigma"] = o.Sigma.data();
    j["A"] = o.A.data();
    j["b"] = o.b;
    if (o.C) j["C"] = o.C->data();
    j["w_star"] = o.w_star;
    j["w_ls"] = o.w_ls;
    j["v_star"] = o.v_star;
    j["lambda_min"] = o.lambda_min;
    if (o.lambda_c) j["lambda_c"] = *o.lambda_c;
    j["rho_max"] = o.rho_max;
    j["rmsve_weights"] = o.rmsve_weights;
    return j;
}

}  // namespace itd
