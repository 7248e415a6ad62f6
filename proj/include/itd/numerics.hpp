#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "itd/errors.hpp"

namespace itd {

using Vector = std::vector<double>;

/// Dense row-major matrix. All dimensions are checked at use sites; the
/// sizes in this project are tiny (d <= 20, n <= a few hundred).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);

    static Matrix identity(int n);
    static Matrix from_rows(const std::vector<Vector>& rows);

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    Vector row(int i) const;
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);
Matrix outer(const Vector& a, const Vector& b);
Matrix diag(const Vector& d);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);
double norm_inf(const Matrix& a);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);

bool all_finite(const Vector& a);
bool all_finite(const Matrix& a);

/// Gaussian elimination with partial pivoting.
/// Throws SingularMatrixError when a pivot falls below 1e-12 of its row scale.
Vector solve_linear(const Matrix& a, const Vector& b);

/// Matrix inverse via column-by-column solves. Same pivot tolerance as solve_linear.
Matrix inverse(const Matrix& a);

/// argmin_w ||phi w - target||_2 for full-column-rank phi (normal equations).
/// Throws RankDeficientError when phi^T phi is numerically singular.
Vector least_squares(const Matrix& phi, const Vector& target);

/// Minimum-norm least squares via the pseudo-inverse of phi^T phi.
/// Used where the feature matrix is deliberately rank deficient.
Vector least_squares_minnorm(const Matrix& phi, const Vector& target);

/// Stationary distribution of a row-stochastic matrix. Small chains are solved
/// directly from the balance equations (P^T - I) mu = 0 with sum(mu) = 1;
/// chains above 500 states fall back to power iteration. Reducible or periodic
/// chains surface as NoConvergenceError.
Vector stationary_distribution(const Matrix& p);

/// All eigenvalues of a symmetric matrix via cyclic Jacobi sweeps, ascending.
Vector eigenvalues_sym(const Matrix& s);

/// Minimum eigenvalue of a symmetric (PSD in our uses) matrix.
/// Throws NotSymmetricError when max |s - s^T| exceeds 1e-10 of the scale.
double min_eigenvalue_sym(const Matrix& s);

/// Eigenvalues of a general square matrix: Hessenberg reduction followed by
/// a shifted QR iteration in complex arithmetic.
std::vector<std::complex<double>> eigenvalues(const Matrix& c);

/// min |lambda(c)| over the full (possibly complex) spectrum.
double min_abs_eigenvalue(const Matrix& c);

/// Counter-based deterministic random stream. Draw i of stream (seed, stream_id)
/// is the SplitMix64 finalizer applied to base(seed, stream_id) + i * gamma,
/// so identical (seed, stream_id) yields identical sequences on any platform
/// and distinct stream ids give statistically independent streams.
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream_id);

    uint64_t next_u64();
    /// Uniform double in [0, 1), 53 random bits.
    double next_double();
    /// Uniform integer in [0, n).
    int next_below(int n);

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

private:
    uint64_t seed_;
    uint64_t stream_id_;
    uint64_t base_;
    uint64_t counter_ = 0;
};

}  // namespace itd
