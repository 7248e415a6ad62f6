#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "itd/environments.hpp"
#include "itd/numerics.hpp"

namespace itd {

struct StepSizeSchedule {
    enum class Kind { Constant, Polynomial, RescaledHarmonic };

    Kind kind = Kind::Constant;
    double c = 0.0;         // Constant: alpha_n = c; Polynomial: alpha_n = c / n^s
    double s = 0.0;
    double alpha1 = 0.0;    // RescaledHarmonic: alpha_n = a1 / (a1 * rate * (n-1) + 1)
    double rate = 0.0;

    static StepSizeSchedule constant(double c);
    static StepSizeSchedule polynomial(double c, double s);
    static StepSizeSchedule rescaled_harmonic(double alpha1, double rate);

    double value(long n) const;  // n >= 1
};

struct TdLearnerState {
    Vector w;
    Vector e;  // eligibility trace, zero at start of every episode
    long n = 1;
    double lambda = 0.0;
    double gamma = 0.0;
};

struct TdcLearnerState {
    Vector w;
    Vector u;  // auxiliary correction weights
    long n = 1;
    double gamma = 0.0;
};

TdLearnerState make_td_state(const Vector& w0, double lambda, double gamma);
TdcLearnerState make_tdc_state(const Vector& w0, const Vector& u0, double gamma);

/// Euclidean projection onto the ball of radius R.
Vector project(const Vector& w, double r);

enum class UpdateMode { Explicit, Implicit };

TdLearnerState td_explicit_step(const TdLearnerState& state, const Transition& t,
                                const FeatureMap& phi_map, double alpha);

/// Closed-form solve of the rank-1 fixed-point equation: the explicit step
/// direction with effective step alpha / (1 + alpha * ||phi||^2) for TD(0),
/// alpha / (1 + alpha * ||e||^2) for TD(lambda).
TdLearnerState td_implicit_step(const TdLearnerState& state, const Transition& t,
                                const FeatureMap& phi_map, double alpha);

TdcLearnerState tdc_explicit_step(const TdcLearnerState& state, const Transition& t,
                                  const FeatureMap& phi_map, double alpha, double beta);

TdcLearnerState tdc_implicit_step(const TdcLearnerState& state, const Transition& t,
                                  const FeatureMap& phi_map, double alpha, double beta);

namespace detail {
// Generic-trace code paths, exposed so tests can pin the lambda == 0 fast
// paths against them bit for bit.
TdLearnerState td_explicit_step_any_lambda(const TdLearnerState& state, const Transition& t,
                                           const FeatureMap& phi_map, double alpha);
TdLearnerState td_implicit_step_any_lambda(const TdLearnerState& state, const Transition& t,
                                           const FeatureMap& phi_map, double alpha);
}  // namespace detail

struct TdRunConfig {
    StepSizeSchedule schedule;
    double lambda = 0.0;
    std::optional<double> projection_radius;
    UpdateMode mode = UpdateMode::Explicit;
    long n_steps = 0;
    Vector w0;
    std::vector<long> snapshot_steps;  // ascending; 0 means the initial state
};

struct TdcRunConfig {
    StepSizeSchedule schedule_alpha;
    StepSizeSchedule schedule_beta;
    std::optional<double> projection_w;
    std::optional<double> projection_u;
    UpdateMode mode = UpdateMode::Explicit;
    long n_steps = 0;
    Vector w0;
    Vector u0;
    std::vector<long> snapshot_steps;
};

/// Unprojected runs abort with diverged=true once ||w|| leaves [0, 1e12] or
/// turns non-finite; snapshots recorded up to that point are kept.
struct TdRunResult {
    std::vector<std::pair<long, TdLearnerState>> snapshots;
    bool diverged = false;
    long diverged_at = -1;
};

struct TdcRunResult {
    std::vector<std::pair<long, TdcLearnerState>> snapshots;
    bool diverged = false;
    long diverged_at = -1;
};

TdRunResult run_td(const MarkovRewardEnvironment& env, const FeatureMap& phi_map,
                   const TdRunConfig& cfg, RngStream& rng);

TdcRunResult run_tdc(const MarkovRewardEnvironment& env, const FeatureMap& phi_map,
                     const TdcRunConfig& cfg, RngStream& rng);

}  // namespace itd
