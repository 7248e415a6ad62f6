#pragma once

#include <optional>
#include <string>
#include <vector>

#include "itd/numerics.hpp"
#include "vendor_json.hpp"

namespace itd {

/// Feature map: one row per state, d columns.
struct FeatureMap {
    Matrix phi;

    int dim() const { return phi.cols(); }
    int n_states() const { return phi.rows(); }
    Vector row(int x) const { return phi.row(x); }
};

/// One action of an off-policy environment: probability of being chosen by
/// the behavior policy, its importance weight, and its transition kernel.
/// The same action set applies in every state (true for Baird).
struct OffPolicyAction {
    double behavior_prob = 0.0;
    double rho = 0.0;
    Matrix kernel;  // n x n
};

struct MarkovRewardEnvironment {
    std::string name;
    int n_states = 0;
    Matrix transition;  // behavior-policy kernel, row-stochastic
    Matrix reward;      // n x n, reward emitted on the transition x -> x'
    double gamma = 0.0;
    std::vector<int> absorbing;  // self-looping states, empty for continuing chains
    int restart_state = 0;       // episode start / restart after absorption
    std::vector<OffPolicyAction> actions;  // empty => on-policy (rho == 1)
    uint64_t seed = 0;

    bool episodic() const { return !absorbing.empty(); }
    bool off_policy() const { return !actions.empty(); }
    bool is_absorbing(int x) const;

    /// r_bar(x) = sum_x' P(x'|x) r(x, x') under the behavior kernel.
    Vector expected_reward() const;
    double max_abs_reward() const;

    /// Kernel of the target policy: mixture of action kernels weighted by
    /// pi_b(a) * rho(a). Equals `transition` for on-policy environments.
    Matrix target_kernel() const;
};

struct Transition {
    int x = 0;
    double r = 0.0;
    int x_next = 0;
    double rho = 1.0;
    bool terminal = false;
};

/// 1-D random walk: odd number of states on a line, absorbing endpoints,
/// reward 1 on the transition entering the rightmost state, start at the
/// center. Features are a raw truncated Fourier basis in the normalized
/// interior position (row norm sqrt((d+1)/2)); absorbing rows are zero.
std::pair<MarkovRewardEnvironment, FeatureMap> make_random_walk(int n_states = 11,
                                                                double gamma = 0.9,
                                                                int d = 7);

/// Dense random MRP: each transition row is the successive differences of
/// sorted Uniform(0,1) draws (with 0 and 1 as boundary points), one uniform
/// reward per state, random binary features with every column rescaled to
/// unit norm (rows then stay inside the unit ball). All-zero binary rows are
/// redrawn; the whole feature matrix is redrawn if column-rank deficient.
std::pair<MarkovRewardEnvironment, FeatureMap> make_random_mrp(int n_states, int d, double gamma,
                                                               RngStream& rng);

/// Baird's 7-state counterexample: six peripheral states and one center,
/// eight features, zero rewards, gamma 0.99. Behavior policy mixes the
/// dashed action (uniform peripheral, rho 0) with probability 6/7 and the
/// solid action (to center, rho 7) with probability 1/7; the target policy
/// always plays solid.
std::pair<MarkovRewardEnvironment, FeatureMap> make_baird();

/// Initial weight vector used throughout for an environment (zeros except
/// Baird's canonical (1,1,1,1,1,1,10,1)).
Vector default_initial_weights(const MarkovRewardEnvironment& env, int d);

Transition sample_transition(const MarkovRewardEnvironment& env, int x, RngStream& rng);

nlohmann::json environment_to_json(const MarkovRewardEnvironment& env, const FeatureMap& phi);
std::pair<MarkovRewardEnvironment, FeatureMap> environment_from_json(const nlohmann::json& j);

}  // namespace itd
