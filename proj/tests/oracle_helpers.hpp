#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "itd/environments.hpp"
#include "itd/numerics.hpp"

namespace testoracle {

using itd::Matrix;
using itd::Vector;

// Gauss-Jordan with full pivoting; independent of itd::solve_linear's
// partial-pivot elimination.
inline Matrix gauss_jordan_inverse(const Matrix& a) {
    const int n = a.rows();
    Matrix left = a;
    Matrix right = Matrix::identity(n);
    std::vector<int> col_perm(n);
    for (int i = 0; i < n; ++i) col_perm[i] = i;

    for (int step = 0; step < n; ++step) {
        int pr = step, pc = step;
        double best = 0.0;
        for (int i = step; i < n; ++i)
            for (int j = step; j < n; ++j)
                if (std::abs(left(i, j)) > best) {
                    best = std::abs(left(i, j));
                    pr = i;
                    pc = j;
                }
        if (best == 0.0) throw std::runtime_error("gauss_jordan_inverse: singular");
        for (int j = 0; j < n; ++j) std::swap(left(step, j), left(pr, j));
        for (int j = 0; j < n; ++j) std::swap(right(step, j), right(pr, j));
        for (int i = 0; i < n; ++i) std::swap(left(i, step), left(i, pc));
        std::swap(col_perm[step], col_perm[pc]);

        const double piv = left(step, step);
        for (int j = 0; j < n; ++j) {
            left(step, j) /= piv;
            right(step, j) /= piv;
        }
        for (int i = 0; i < n; ++i) {
            if (i == step) continue;
            const double f = left(i, step);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                left(i, j) -= f * left(step, j);
                right(i, j) -= f * right(step, j);
            }
        }
    }
    // undo the column permutation (rows of the inverse)
    Matrix inv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv(col_perm[i], j) = right(i, j);
    return inv;
}

// Random orthogonal matrix as an explicit product of Householder reflectors.
inline Matrix random_orthogonal(itd::RngStream& rng, int n) {
    Matrix q = Matrix::identity(n);
    for (int k = 0; k < n; ++k) {
        Vector v(n);
        double nrm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            v[i] = 2.0 * rng.next_double() - 1.0;
            nrm2 += v[i] * v[i];
        }
        if (nrm2 < 1e-12) continue;
        // Q <- Q (I - 2 v v^T / v^T v)
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += q(i, j) * v[j];
            acc = 2.0 * acc / nrm2;
            for (int j = 0; j < n; ++j) q(i, j) -= acc * v[j];
        }
    }
    return q;
}

// Row-wise inverse-CDF sampler independent of itd::sample_transition.
inline int sample_row(const Matrix& p, int row, double u) {
    double acc = 0.0;
    for (int j = 0; j < p.cols(); ++j) {
        acc += p(row, j);
        if (u < acc) return j;
    }
    return p.cols() - 1;
}

// Monte Carlo discounted return from state x0 (behavior kernel), truncated at
// `horizon`, `episodes` rollouts. Returns {mean, standard error}.
inline std::pair<double, double> mc_return(const itd::MarkovRewardEnvironment& env, int x0,
                                           itd::RngStream& rng, int horizon, int episodes) {
    const int n = env.n_states;
    std::vector<double> cum(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            acc += env.transition(i, j);
            cum[static_cast<size_t>(i) * n + j] = acc;
        }
    }
    auto draw = [&](int x) {
        const double u = rng.next_double();
        const auto* row = cum.data() + static_cast<size_t>(x) * n;
        const auto* it = std::upper_bound(row, row + n, u);
        return static_cast<int>(std::min<long>(it - row, n - 1));
    };
    double sum = 0.0, sum_sq = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        double ret = 0.0, discount = 1.0;  // v* = (I - gamma P)^{-1} r convention
        int x = x0;
        for (int t = 0; t < horizon; ++t) {
            const int y = draw(x);
            ret += discount * env.reward(x, y);
            discount *= env.gamma;
            x = y;
            if (env.is_absorbing(x)) break;
        }
        sum += ret;
        sum_sq += ret * ret;
    }
    const double mean = sum / episodes;
    const double var = std::max(sum_sq / episodes - mean * mean, 0.0);
    return {mean, std::sqrt(var / episodes)};
}

// Truncated geometric trace series: Phi^T D (sum_{k<=K} (lg P)^k) (g P - I) Phi
// and the matching b; reference for the closed resolvent form.
inline std::pair<Matrix, Vector> truncated_lambda_matrices(const itd::MarkovRewardEnvironment& env,
                                                           const itd::FeatureMap& fm,
                                                           const Vector& mu, double lambda,
                                                           int truncation) {
    const int n = env.n_states;
    Matrix series = Matrix::identity(n);
    Matrix power = Matrix::identity(n);
    for (int k = 1; k <= truncation; ++k) {
        power = (lambda * env.gamma) * (power * env.transition);
        series = series + power;
    }
    const Matrix d = itd::diag(mu);
    const Matrix bellman = env.gamma * env.transition - Matrix::identity(n);
    const Matrix a = itd::transpose(fm.phi) * (d * (series * (bellman * fm.phi)));
    const Vector b = itd::transpose(fm.phi) * (d * (series * env.expected_reward()));
    return {a, b};
}

// Plain second implementation of the root mean square TD error.
inline double rmstde_naive(const Vector& w, const std::vector<itd::Transition>& ts,
                           const itd::FeatureMap& fm, double gamma) {
    double acc = 0.0;
    for (const auto& t : ts) {
        double vx = 0.0, vn = 0.0;
        for (int j = 0; j < fm.dim(); ++j) {
            vx += fm.phi(t.x, j) * w[j];
            vn += fm.phi(t.x_next, j) * w[j];
        }
        const double delta = t.r + gamma * vn - vx;
        acc += delta * delta;
    }
    return std::sqrt(acc / ts.size());
}

}  // namespace testoracle
