#include "itd/environments.hpp"

#include <algorithm>
#include <cmath>

namespace itd {

bool MarkovRewardEnvironment::is_absorbing(int x) const {
    return std::find(absorbing.begin(), absorbing.end(), x) != absorbing.end();
}

Vector MarkovRewardEnvironment::expected_reward() const {
    Vector r(n_states, 0.0);
    for (int x = 0; x < n_states; ++x) {
        double acc = 0.0;
        for (int y = 0; y < n_states; ++y) acc += transition(x, y) * reward(x, y);
        r[x] = acc;
    }
    return r;
}

double MarkovRewardEnvironment::max_abs_reward() const {
    double m = 0.0;
    for (double v : reward.data()) m = std::max(m, std::abs(v));
    return m;
}

Matrix MarkovRewardEnvironment::target_kernel() const {
    if (!off_policy()) return transition;
    Matrix k(n_states, n_states);
    for (const auto& a : actions) {
        const double w = a.behavior_prob * a.rho;
        if (w == 0.0) continue;
        for (int i = 0; i < n_states; ++i)
            for (int j = 0; j < n_states; ++j) k(i, j) += w * a.kernel(i, j);
    }
    return k;
}

std::pair<MarkovRewardEnvironment, FeatureMap> make_random_walk(int n_states, double gamma, int d) {
    if (n_states < 3 || n_states % 2 == 0) throw DimensionError("random walk needs an odd state count >= 3");
    if (d < 2) throw DimensionError("random walk needs d >= 2");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");

    MarkovRewardEnvironment env;
    env.name = "random_walk";
    env.n_states = n_states;
    env.gamma = gamma;
    env.transition = Matrix(n_states, n_states);
    env.reward = Matrix(n_states, n_states);
    env.absorbing = {0, n_states - 1};
    env.restart_state = (n_states - 1) / 2;

    env.transition(0, 0) = 1.0;
    env.transition(n_states - 1, n_states - 1) = 1.0;
    for (int i = 1; i < n_states - 1; ++i) {
        env.transition(i, i - 1) = 0.5;
        env.transition(i, i + 1) = 0.5;
        env.reward(i, n_states - 1) = 1.0;  // reward on entering the rightmost state
    }

    // Raw truncated Fourier basis in the normalized interior position. The
    // rows are deliberately not rescaled: ||phi||^2 = (d+1)/2, which is what
    // makes explicit TD(0) at alpha = 1.5 genuinely divergent while implicit
    // TD(0) stays stable. Absorbing rows are zero (no bootstrap past the end).
    FeatureMap fm;
    fm.phi = Matrix(n_states, d);
    const int interior = n_states - 2;
    for (int i = 1; i <= interior; ++i) {
        const double u = interior == 1 ? 0.0 : static_cast<double>(i - 1) / (interior - 1);
        for (int j = 0; j < d; ++j) {
            if (j == 0)
                fm.phi(i, j) = 1.0;
            else if (j % 2 == 1)
                fm.phi(i, j) = std::cos(((j + 1) / 2) * M_PI * u);
            else
                fm.phi(i, j) = std::sin((j / 2) * M_PI * u);
        }
    }
    return {std::move(env), std::move(fm)};
}

namespace {

Vector random_simplex_row(int n, RngStream& rng) {
    Vector cuts(n - 1);
    for (double& c : cuts) c = rng.next_double();
    std::sort(cuts.begin(), cuts.end());
    Vector row(n);
    double prev = 0.0;
    for (int j = 0; j < n - 1; ++j) {
        row[j] = cuts[j] - prev;
        prev = cuts[j];
    }
    row[n - 1] = 1.0 - prev;
    return row;
}

bool full_column_rank(const Matrix& phi) {
    const Matrix gram = transpose(phi) * phi;
    const Vector eig = eigenvalues_sym(gram);
    return eig.front() > 1e-10 * std::max(eig.back(), 1e-300);
}

}  // namespace

std::pair<MarkovRewardEnvironment, FeatureMap> make_random_mrp(int n_states, int d, double gamma,
                                                               RngStream& rng) {
    if (n_states < 2 || d < 1 || d >= n_states) throw DimensionError("random MRP needs 1 <= d < n_states");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");

    MarkovRewardEnvironment env;
    env.name = "random_mrp";
    env.n_states = n_states;
    env.gamma = gamma;
    env.seed = rng.seed();
    env.transition = Matrix(n_states, n_states);
    env.reward = Matrix(n_states, n_states);
    env.restart_state = 0;

    for (int i = 0; i < n_states; ++i) {
        Vector row = random_simplex_row(n_states, rng);
        for (int j = 0; j < n_states; ++j) env.transition(i, j) = row[j];
    }
    for (int i = 0; i < n_states; ++i) {
        const double r = rng.next_double();
        for (int j = 0; j < n_states; ++j) env.reward(i, j) = r;
    }

    // Binary draws with all-zero rows redrawn, then each feature column is
    // rescaled to unit norm. Column normalization keeps every row inside the
    // unit ball while leaving the feature covariance poorly conditioned,
    // which is what lets a large initial step size hurt explicit TD here.
    FeatureMap fm;
    fm.phi = Matrix(n_states, d);
    for (;;) {
        for (int i = 0; i < n_states; ++i) {
            for (;;) {
                int ones = 0;
                for (int j = 0; j < d; ++j) {
                    fm.phi(i, j) = rng.next_double() < 0.5 ? 1.0 : 0.0;
                    ones += fm.phi(i, j) != 0.0;
                }
                if (ones > 0) break;  // redraw all-zero rows
            }
        }
        bool has_zero_column = false;
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i = 0; i < n_states; ++i) s += fm.phi(i, j) * fm.phi(i, j);
            if (s == 0.0) {
                has_zero_column = true;
                break;
            }
            s = std::sqrt(s);
            for (int i = 0; i < n_states; ++i) fm.phi(i, j) /= s;
        }
        if (!has_zero_column && full_column_rank(fm.phi)) break;
    }
    return {std::move(env), std::move(fm)};
}

std::pair<MarkovRewardEnvironment, FeatureMap> make_baird() {
    const int n = 7, d = 8, center = 6;
    MarkovRewardEnvironment env;
    env.name = "baird";
    env.n_states = n;
    env.gamma = 0.99;
    env.reward = Matrix(n, n);
    env.restart_state = center;

    OffPolicyAction dashed;
    dashed.behavior_prob = 6.0 / 7.0;
    dashed.rho = 0.0;
    dashed.kernel = Matrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 6; ++j) dashed.kernel(i, j) = 1.0 / 6.0;

    OffPolicyAction solid;
    solid.behavior_prob = 1.0 / 7.0;
    solid.rho = 7.0;
    solid.kernel = Matrix(n, n);
    for (int i = 0; i < n; ++i) solid.kernel(i, center) = 1.0;

    env.transition = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 6; ++j) env.transition(i, j) = dashed.behavior_prob / 6.0;
        env.transition(i, center) = solid.behavior_prob;
    }
    env.actions = {std::move(dashed), std::move(solid)};

    FeatureMap fm;
    fm.phi = Matrix(n, d);
    for (int i = 0; i < 6; ++i) {
        fm.phi(i, i) = 2.0;
        fm.phi(i, 7) = 1.0;
    }
    fm.phi(center, 6) = 1.0;
    fm.phi(center, 7) = 2.0;
    return {std::move(env), std::move(fm)};
}

Vector default_initial_weights(const MarkovRewardEnvironment& env, int d) {
    if (env.name == "baird" && d == 8) return {1, 1, 1, 1, 1, 1, 10, 1};
    return Vector(d, 0.0);
}

namespace {

int sample_index(const Matrix& kernel, int row, double u) {
    double acc = 0.0;
    int last_positive = 0;
    for (int j = 0; j < kernel.cols(); ++j) {
        const double p = kernel(row, j);
        if (p > 0.0) last_positive = j;
        acc += p;
        if (u < acc) return j;
    }
    return last_positive;
}

}  // namespace

Transition sample_transition(const MarkovRewardEnvironment& env, int x, RngStream& rng) {
    if (x < 0 || x >= env.n_states) throw DimensionError("state index out of range");
    if (env.is_absorbing(x)) return {x, env.reward(x, x), x, 1.0, true};

    Transition t;
    t.x = x;
    if (env.off_policy()) {
        const double ua = rng.next_double();
        double acc = 0.0;
        size_t chosen = env.actions.size() - 1;
        for (size_t a = 0; a < env.actions.size(); ++a) {
            acc += env.actions[a].behavior_prob;
            if (ua < acc) {
                chosen = a;
                break;
            }
        }
        const auto& act = env.actions[chosen];
        t.x_next = sample_index(act.kernel, x, rng.next_double());
        t.rho = act.rho;
    } else {
        t.x_next = sample_index(env.transition, x, rng.next_double());
        t.rho = 1.0;
    }
    t.r = env.reward(x, t.x_next);
    t.terminal = env.is_absorbing(t.x_next);
    return t;
}

namespace {

nlohmann::json matrix_to_array(const Matrix& m) {
    return nlohmann::json(m.data());
}

Matrix matrix_from_array(const nlohmann::json& j, int rows, int cols, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
        throw ConfigError(std::string(what) + ": expected row-major array of matching size");
    Matrix m(rows, cols);
    for (int i = 0; i < rows * cols; ++i) m.data()[i] = j[i].get<double>();
    return m;
}

}  // namespace

nlohmann::json environment_to_json(const MarkovRewardEnvironment& env, const FeatureMap& phi) {
    nlohmann::json j;
    j["n_states"] = env.n_states;
    j["transition"] = matrix_to_array(env.transition);
    j["reward"] = matrix_to_array(env.reward);
    j["gamma"] = env.gamma;
    j["absorbing"] = env.absorbing;
    j["restart_state"] = env.restart_state;
    j["d"] = phi.dim();
    j["phi"] = matrix_to_array(phi.phi);
    if (env.off_policy()) {
        nlohmann::json acts = nlohmann::json::array();
        for (const auto& a : env.actions) {
            acts.push_back({{"behavior_prob", a.behavior_prob},
                            {"rho", a.rho},
                            {"kernel", matrix_to_array(a.kernel)}});
        }
        j["actions"] = std::move(acts);
    }
    j["meta"] = {{"name", env.name}, {"seed", env.seed}};
    return j;
}

std::pair<MarkovRewardEnvironment, FeatureMap> environment_from_json(const nlohmann::json& j) {
    MarkovRewardEnvironment env;
    try {
        env.n_states = j.at("n_states").get<int>();
        const int n = env.n_states;
        env.transition = matrix_from_array(j.at("transition"), n, n, "transition");
        env.reward = matrix_from_array(j.at("reward"), n, n, "reward");
        env.gamma = j.at("gamma").get<double>();
        env.absorbing = j.at("absorbing").get<std::vector<int>>();
        env.restart_state = j.at("restart_state").get<int>();
        const int d = j.at("d").get<int>();
        FeatureMap fm;
        fm.phi = matrix_from_array(j.at("phi"), n, d, "phi");
        if (j.contains("actions")) {
            for (const auto& aj : j.at("actions")) {
                OffPolicyAction a;
                a.behavior_prob = aj.at("behavior_prob").get<double>();
                a.rho = aj.at("rho").get<double>();
                a.kernel = matrix_from_array(aj.at("kernel"), n, n, "action kernel");
                env.actions.push_back(std::move(a));
            }
        }
        env.name = j.at("meta").at("name").get<std::string>();
        env.seed = j.at("meta").at("seed").get<uint64_t>();
        return {std::move(env), std::move(fm)};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("environment json: ") + e.what());
    }
}

}  // namespace itd
