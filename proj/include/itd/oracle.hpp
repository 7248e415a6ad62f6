#pragma once

#include <optional>

#include "itd/environments.hpp"
#include "itd/numerics.hpp"
#include "vendor_json.hpp"

namespace itd {

/// Analytic quantities for one environment + feature map, computed once and
/// shared by every replication. The steady-state matrices are the lambda = 0
/// forms; lambda-dependent fixed points come from steady_matrices_onpolicy.
struct OracleBundle {
    Vector mu;      // stationary distribution of observed source states
    Matrix Sigma;   // Phi^T D Phi, the behavior feature second moment
    Matrix A;
    Vector b;
    std::optional<Matrix> C;  // off-policy only
    Vector w_star;            // root of A w + b = 0
    Vector w_ls;              // argmin_w ||Phi w - v_star||
    Vector v_star;
    double lambda_min = 0.0;  // min eigenvalue of Sigma
    std::optional<double> lambda_c;  // min |eig(C)|, off-policy only
    double rho_max = 1.0;
    Vector rmsve_weights;
};

/// v* = (I - gamma P)^{-1} r_bar for a continuing chain; off-policy inputs
/// are evaluated under the target kernel.
Vector true_values_ergodic(const MarkovRewardEnvironment& env);

/// Value function of an absorbing chain: zero on absorbing states, and the
/// solve of (I - gamma Q) v = r_bar on the transient block.
Vector true_values_episodic(const MarkovRewardEnvironment& env);

struct OnPolicyMatrices {
    Matrix A;
    Vector b;
    Matrix Sigma;
};

/// Closed geometric-series forms of the steady-state TD(lambda) matrices:
/// A = Phi^T D (I - lg P)^{-1} (g P - I) Phi, b = Phi^T D (I - lg P)^{-1} r.
/// Episodic chains use the post-absorption restart kernel for the source
/// distribution and support lambda = 0 only (traces reset per episode).
OnPolicyMatrices steady_matrices_onpolicy(const MarkovRewardEnvironment& env,
                                          const FeatureMap& phi_map, double lambda);

struct OffPolicyMatrices {
    Matrix A;
    Vector b;
    Matrix C;
};

/// Exact expectations under mu_behavior of rho-weighted TD quantities,
/// summed over (state, action) pairs.
OffPolicyMatrices steady_matrices_offpolicy(const MarkovRewardEnvironment& env,
                                            const FeatureMap& phi_map);

/// Root of A w + b = 0.
Vector td_fixed_point(const Matrix& a, const Vector& b);

/// Direct solve of (I + scale * direction direction^T) w' = w + drift.
/// Reference for the rank-1 closed forms used by the implicit steps.
Vector implicit_fixed_point_solve(const Vector& w, const Vector& direction, double scale,
                                  const Vector& drift);

double rmsve(const Vector& w, const FeatureMap& phi_map, const Vector& v_star,
             const Vector& weights);

/// sqrt((Aw+b)^T Sigma_b^+ (Aw+b)); the pseudo-inverse keeps the metric
/// defined when the feature matrix is deliberately rank deficient (Baird).
double rmspbe(const Vector& w, const Matrix& a, const Vector& b, const Matrix& sigma_b);

double param_error(const Vector& w, const Vector& w_star);

double rmstde(const Vector& w, const std::vector<Transition>& transitions,
              const FeatureMap& phi_map, double gamma);

OracleBundle compute_oracle(const MarkovRewardEnvironment& env, const FeatureMap& phi_map);

nlohmann::json oracle_to_json(const OracleBundle& o);

}  // namespace itd
