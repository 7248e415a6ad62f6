#include "itd/algorithms.hpp"

#include <cassert>
#include <cmath>

namespace itd {

StepSizeSchedule StepSizeSchedule::constant(double c) {
    StepSizeSchedule s;
    s.kind = Kind::Constant;
    s.c = c;
    return s;
}

StepSizeSchedule StepSizeSchedule::polynomial(double c, double exponent) {
    StepSizeSchedule s;
    s.kind = Kind::Polynomial;
    s.c = c;
    s.s = exponent;
    return s;
}

StepSizeSchedule StepSizeSchedule::rescaled_harmonic(double alpha1, double rate) {
    StepSizeSchedule s;
    s.kind = Kind::RescaledHarmonic;
    s.alpha1 = alpha1;
    s.rate = rate;
    return s;
}

double StepSizeSchedule::value(long n) const {
    if (n < 1) throw DimensionError("schedule index starts at 1");
    switch (kind) {
        case Kind::Constant:
            return c;
        case Kind::Polynomial:
            return c / std::pow(static_cast<double>(n), s);
        case Kind::RescaledHarmonic:
            return alpha1 / (alpha1 * rate * static_cast<double>(n - 1) + 1.0);
    }
    return 0.0;
}

TdLearnerState make_td_state(const Vector& w0, double lambda, double gamma) {
    TdLearnerState st;
    st.w = w0;
    st.e = Vector(w0.size(), 0.0);
    st.lambda = lambda;
    st.gamma = gamma;
    return st;
}

TdcLearnerState make_tdc_state(const Vector& w0, const Vector& u0, double gamma) {
    if (w0.size() != u0.size()) throw DimensionError("w0/u0 length mismatch");
    TdcLearnerState st;
    st.w = w0;
    st.u = u0;
    st.gamma = gamma;
    return st;
}

Vector project(const Vector& w, double r) {
    if (r <= 0.0) throw ConfigError("projection radius must be positive");
    const double nrm = norm2(w);
    if (nrm <= r) return w;
    if (!std::isfinite(nrm)) throw ConfigError("cannot project a non-finite vector");
    Vector out(w);
    double scale = r / nrm;
    for (;;) {  // nudge the scale down until rounding leaves the norm inside the ball
        for (size_t i = 0; i < w.size(); ++i) out[i] = w[i] * scale;
        if (norm2(out) <= r) break;
        scale = std::nextafter(scale, 0.0);
    }
    return out;
}

namespace {

void check_dims(const TdLearnerState& state, const FeatureMap& phi_map) {
    if (static_cast<int>(state.w.size()) != phi_map.dim())
        throw DimensionError("learner dimension does not match feature map");
}

double td_error(const Vector& w, const Vector& phi_x, const Vector& phi_next, double r,
                double gamma) {
    return r + gamma * dot(phi_next, w) - dot(phi_x, w);
}

#ifndef NDEBUG
// alpha/(1+alpha) <= alpha_eff <= alpha for TD(0) and the (1-lg)^2-scaled
// lower bound for TD(lambda), valid whenever the direction norm is inside
// the cap implied by unit-bounded features.
void assert_effective_step_bounds(double alpha, double alpha_eff, double lambda, double gamma,
                                  double dir_norm_sq) {
    if (alpha <= 0.0) return;
    assert(alpha_eff <= alpha * (1.0 + 1e-12));
    const double cap = lambda == 0.0 ? 1.0 : 1.0 / (1.0 - lambda * gamma);
    if (dir_norm_sq <= cap * cap * (1.0 + 1e-12)) {
        const double lo = alpha / (1.0 + alpha * cap * cap);
        assert(alpha_eff >= lo * (1.0 - 1e-12));
    }
}
#endif

// Shared core of the explicit/implicit TD(lambda) step. The two only differ
// in the step size applied along the trace direction.
TdLearnerState td_step_core(const TdLearnerState& state, const Transition& t,
                            const FeatureMap& phi_map, double alpha, bool implicit) {
    check_dims(state, phi_map);
    if (alpha < 0.0) throw ConfigError("step size must be nonnegative");
    const Vector phi_x = phi_map.row(t.x);
    const Vector phi_next = phi_map.row(t.x_next);

    TdLearnerState next = state;
    const double decay = state.lambda * state.gamma;
    for (size_t i = 0; i < next.e.size(); ++i) next.e[i] = phi_x[i] + decay * state.e[i];

    const double delta = td_error(state.w, phi_x, phi_next, t.r, state.gamma);
    double step = alpha;
    if (implicit) step = alpha / (1.0 + alpha * dot(next.e, next.e));
#ifndef NDEBUG
    if (implicit)
        assert_effective_step_bounds(alpha, step, state.lambda, state.gamma, dot(next.e, next.e));
#endif
    for (size_t i = 0; i < next.w.size(); ++i) next.w[i] = state.w[i] + step * delta * next.e[i];
    next.n = state.n + 1;
    if (t.terminal) next.e.assign(next.e.size(), 0.0);
    return next;
}

// TD(0) path: trace bookkeeping collapses to the bare feature vector.
TdLearnerState td0_step_core(const TdLearnerState& state, const Transition& t,
                             const FeatureMap& phi_map, double alpha, bool implicit) {
    check_dims(state, phi_map);
    if (alpha < 0.0) throw ConfigError("step size must be nonnegative");
    const Vector phi_x = phi_map.row(t.x);
    const Vector phi_next = phi_map.row(t.x_next);

    TdLearnerState next = state;
    next.e = phi_x;
    const double delta = td_error(state.w, phi_x, phi_next, t.r, state.gamma);
    double step = alpha;
    if (implicit) step = alpha / (1.0 + alpha * dot(phi_x, phi_x));
#ifndef NDEBUG
    if (implicit)
        assert_effective_step_bounds(alpha, step, 0.0, state.gamma, dot(phi_x, phi_x));
#endif
    for (size_t i = 0; i < next.w.size(); ++i) next.w[i] = state.w[i] + step * delta * phi_x[i];
    next.n = state.n + 1;
    if (t.terminal) next.e.assign(next.e.size(), 0.0);
    return next;
}

}  // namespace

namespace detail {

TdLearnerState td_explicit_step_any_lambda(const TdLearnerState& state, const Transition& t,
                                           const FeatureMap& phi_map, double alpha) {
    return td_step_core(state, t, phi_map, alpha, false);
}

TdLearnerState td_implicit_step_any_lambda(const TdLearnerState& state, const Transition& t,
                                           const FeatureMap& phi_map, double alpha) {
    return td_step_core(state, t, phi_map, alpha, true);
}

}  // namespace detail

TdLearnerState td_explicit_step(const TdLearnerState& state, const Transition& t,
                                const FeatureMap& phi_map, double alpha) {
    if (state.lambda == 0.0) return td0_step_core(state, t, phi_map, alpha, false);
    return td_step_core(state, t, phi_map, alpha, false);
}

TdLearnerState td_implicit_step(const TdLearnerState& state, const Transition& t,
                                const FeatureMap& phi_map, double alpha) {
    if (state.lambda == 0.0) return td0_step_core(state, t, phi_map, alpha, true);
    return td_step_core(state, t, phi_map, alpha, true);
}

TdcLearnerState tdc_explicit_step(const TdcLearnerState& state, const Transition& t,
                                  const FeatureMap& phi_map, double alpha, double beta) {
    if (static_cast<int>(state.w.size()) != phi_map.dim())
        throw DimensionError("learner dimension does not match feature map");
    if (alpha < 0.0 || beta < 0.0) throw ConfigError("step sizes must be nonnegative");
    if (t.rho < 0.0) throw ConfigError("importance weight must be nonnegative");

    const Vector phi_x = phi_map.row(t.x);
    const Vector phi_next = phi_map.row(t.x_next);
    const double delta = td_error(state.w, phi_x, phi_next, t.r, state.gamma);
    const double phi_u = dot(phi_x, state.u);

    TdcLearnerState next = state;
    for (size_t i = 0; i < next.w.size(); ++i) {
        next.w[i] = state.w[i] + alpha * t.rho * delta * phi_x[i] -
                    alpha * t.rho * state.gamma * phi_u * phi_next[i];
        next.u[i] = state.u[i] + beta * t.rho * delta * phi_x[i] - beta * t.rho * phi_u * phi_x[i];
    }
    next.n = state.n + 1;
    return next;
}

TdcLearnerState tdc_implicit_step(const TdcLearnerState& state, const Transition& t,
                                  const FeatureMap& phi_map, double alpha, double beta) {
    if (static_cast<int>(state.w.size()) != phi_map.dim())
        throw DimensionError("learner dimension does not match feature map");
    if (alpha < 0.0 || beta < 0.0) throw ConfigError("step sizes must be nonnegative");
    if (t.rho < 0.0) throw ConfigError("importance weight must be nonnegative");

    const Vector phi_x = phi_map.row(t.x);
    const Vector phi_next = phi_map.row(t.x_next);
    const double phi_sq = dot(phi_x, phi_x);
    const double alpha_eff = alpha / (1.0 + alpha * t.rho * phi_sq);
    const double beta_eff = beta / (1.0 + beta * t.rho * phi_sq);
    const double delta = td_error(state.w, phi_x, phi_next, t.r, state.gamma);
    const double phi_u = dot(phi_x, state.u);
    const double phi_cross = dot(phi_x, phi_next);

    TdcLearnerState next = state;
    for (size_t i = 0; i < next.w.size(); ++i) {
        const double corr = phi_next[i] - alpha_eff * t.rho * phi_cross * phi_x[i];
        next.w[i] = state.w[i] + alpha_eff * t.rho * delta * phi_x[i] -
                    alpha * t.rho * state.gamma * phi_u * corr;
        next.u[i] =
            state.u[i] + beta_eff * t.rho * delta * phi_x[i] - beta_eff * t.rho * phi_u * phi_x[i];
    }
    next.n = state.n + 1;
    return next;
}

namespace {

constexpr double kDivergenceThreshold = 1e12;

bool blown_up(const Vector& v) {
    double acc = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return true;
        acc += x * x;
    }
    return acc > kDivergenceThreshold * kDivergenceThreshold;
}

}  // namespace

TdRunResult run_td(const MarkovRewardEnvironment& env, const FeatureMap& phi_map,
                   const TdRunConfig& cfg, RngStream& rng) {
    if (cfg.n_steps < 0) throw ConfigError("n_steps must be nonnegative");
    TdRunResult out;
    TdLearnerState state = make_td_state(cfg.w0, cfg.lambda, env.gamma);
    size_t si = 0;
    const auto& snaps = cfg.snapshot_steps;
    if (si < snaps.size() && snaps[si] == 0) {
        out.snapshots.emplace_back(0, state);
        ++si;
    }
    int x = env.restart_state;
    for (long n = 1; n <= cfg.n_steps; ++n) {
        const Transition t = sample_transition(env, x, rng);
        const double alpha = cfg.schedule.value(n);
        state = cfg.mode == UpdateMode::Implicit ? td_implicit_step(state, t, phi_map, alpha)
                                                 : td_explicit_step(state, t, phi_map, alpha);
        if (cfg.projection_radius) {
            state.w = project(state.w, *cfg.projection_radius);
        } else if (blown_up(state.w)) {
            out.diverged = true;
            out.diverged_at = n;
            break;
        }
        x = t.terminal ? env.restart_state : t.x_next;
        if (si < snaps.size() && snaps[si] == n) {
            out.snapshots.emplace_back(n, state);
            ++si;
        }
    }
    return out;
}

TdcRunResult run_tdc(const MarkovRewardEnvironment& env, const FeatureMap& phi_map,
                     const TdcRunConfig& cfg, RngStream& rng) {
    if (cfg.n_steps < 0) throw ConfigError("n_steps must be nonnegative");
    TdcRunResult out;
    TdcLearnerState state = make_tdc_state(cfg.w0, cfg.u0, env.gamma);
    size_t si = 0;
    const auto& snaps = cfg.snapshot_steps;
    if (si < snaps.size() && snaps[si] == 0) {
        out.snapshots.emplace_back(0, state);
        ++si;
    }
    int x = env.restart_state;
    for (long n = 1; n <= cfg.n_steps; ++n) {
        const Transition t = sample_transition(env, x, rng);
        const double alpha = cfg.schedule_alpha.value(n);
        const double beta = cfg.schedule_beta.value(n);
        state = cfg.mode == UpdateMode::Implicit
                    ? tdc_implicit_step(state, t, phi_map, alpha, beta)
                    : tdc_explicit_step(state, t, phi_map, alpha, beta);
        if (cfg.projection_w) state.w = project(state.w, *cfg.projection_w);
        if (cfg.projection_u) state.u = project(state.u, *cfg.projection_u);
        if ((!cfg.projection_w && blown_up(state.w)) || (!cfg.projection_u && blown_up(state.u))) {
            out.diverged = true;
            out.diverged_at = n;
            break;
        }
        x = t.terminal ? env.restart_state : t.x_next;
        if (si < snaps.size() && snaps[si] == n) {
            out.snapshots.emplace_back(n, state);
            ++si;
        }
    }
    return out;
}

}  // namespace itd
