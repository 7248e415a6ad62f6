#include "itd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace itd {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw DimensionError(what);
}

}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    require(rows >= 0 && cols >= 0, "negative matrix dimension");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i) {
        require(static_cast<int>(rows[i].size()) == m.cols(), "ragged rows");
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Vector Matrix::row(int i) const {
    require(i >= 0 && i < rows_, "row index out of range");
    return Vector(data_.begin() + static_cast<size_t>(i) * cols_,
                  data_.begin() + static_cast<size_t>(i + 1) * cols_);
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix add shape");
    Matrix r(a.rows(), a.cols());
    for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] = a.data()[i] + b.data()[i];
    return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sub shape");
    Matrix r(a.rows(), a.cols());
    for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] = a.data()[i] - b.data()[i];
    return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matrix multiply shape");
    Matrix r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix r = a;
    for (double& v : r.data()) v *= s;
    return r;
}

Vector operator*(const Matrix& a, const Vector& x) {
    require(a.cols() == static_cast<int>(x.size()), "matrix-vector shape");
    Vector y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix r(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

Matrix outer(const Vector& a, const Vector& b) {
    Matrix r(static_cast<int>(a.size()), static_cast<int>(b.size()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = a[i] * b[j];
    return r;
}

Matrix diag(const Vector& d) {
    Matrix r(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) r(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return r;
}

double dot(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "dot shape");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double norm_inf(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

Vector operator+(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "vector add shape");
    Vector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vector operator-(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "vector sub shape");
    Vector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vector operator*(double s, const Vector& a) {
    Vector r(a);
    for (double& v : r) v *= s;
    return r;
}

bool all_finite(const Vector& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const Matrix& a) {
    for (double v : a.data())
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

// Elimination core shared by solve_linear / inverse / least_squares.
// Reduces [a | rhs columns] in place; throws `Thrower` on a tiny pivot.
template <typename ExcT>
void eliminate(Matrix& a, Matrix& rhs, const char* what) {
    const int n = a.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double piv_val = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > piv_val) {
                piv = r;
                piv_val = std::abs(a(r, col));
            }
        }
        double row_scale = 0.0;
        for (int j = 0; j < n; ++j) row_scale = std::max(row_scale, std::abs(a(piv, j)));
        if (piv_val <= 1e-12 * std::max(row_scale, 1e-300)) throw ExcT(what);
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (int j = 0; j < rhs.cols(); ++j) std::swap(rhs(col, j), rhs(piv, j));
        }
        const double inv_p = 1.0 / a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv_p;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (int j = 0; j < rhs.cols(); ++j) rhs(r, j) -= f * rhs(col, j);
        }
    }
    // back substitution
    for (int col = n - 1; col >= 0; --col) {
        const double inv_p = 1.0 / a(col, col);
        for (int j = 0; j < rhs.cols(); ++j) {
            double acc = rhs(col, j);
            for (int k = col + 1; k < n; ++k) acc -= a(col, k) * rhs(k, j);
            rhs(col, j) = acc * inv_p;
        }
    }
}

}  // namespace

Vector solve_linear(const Matrix& a, const Vector& b) {
    require(a.rows() == a.cols(), "solve_linear: matrix must be square");
    require(a.rows() == static_cast<int>(b.size()), "solve_linear: rhs length");
    Matrix work = a;
    Matrix rhs(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i) rhs(i, 0) = b[i];
    eliminate<SingularMatrixError>(work, rhs, "pivot below tolerance");
    Vector x(a.rows());
    for (int i = 0; i < a.rows(); ++i) x[i] = rhs(i, 0);
    if (!all_finite(x)) throw SingularMatrixError("non-finite solution");
    return x;
}

Matrix inverse(const Matrix& a) {
    require(a.rows() == a.cols(), "inverse: matrix must be square");
    Matrix work = a;
    Matrix rhs = Matrix::identity(a.rows());
    eliminate<SingularMatrixError>(work, rhs, "pivot below tolerance");
    if (!all_finite(rhs)) throw SingularMatrixError("non-finite inverse");
    return rhs;
}

Vector least_squares(const Matrix& phi, const Vector& target) {
    require(phi.rows() >= phi.cols(), "least_squares: need m >= d");
    require(phi.rows() == static_cast<int>(target.size()), "least_squares: target length");
    const Matrix pt = transpose(phi);
    Matrix gram = pt * phi;
    Matrix rhs(phi.cols(), 1);
    Vector ptt = pt * target;
    for (int i = 0; i < phi.cols(); ++i) rhs(i, 0) = ptt[i];
    eliminate<RankDeficientError>(gram, rhs, "gram pivot below tolerance");
    Vector w(phi.cols());
    for (int i = 0; i < phi.cols(); ++i) w[i] = rhs(i, 0);
    if (!all_finite(w)) throw RankDeficientError("non-finite solution");
    return w;
}

namespace {

struct SymEigen {
    Vector values;   // ascending
    Matrix vectors;  // columns matching values
};

// Cyclic Jacobi. Tolerance 1e-12 relative to the Frobenius norm, 200 sweeps max.
SymEigen jacobi_sym(const Matrix& s) {
    const int n = s.rows();
    Matrix a = s;
    Matrix v = Matrix::identity(n);
    double fro = 0.0;
    for (double x : a.data()) fro += x * x;
    fro = std::sqrt(fro);
    const double tol = 1e-12 * std::max(fro, 1e-300);

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= tol / (n * n)) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    SymEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

void check_symmetric(const Matrix& s) {
    if (s.rows() != s.cols()) throw NotSymmetricError("matrix not square");
    const double scale = std::max(norm_inf(s), 1e-300);
    for (int i = 0; i < s.rows(); ++i)
        for (int j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * scale)
                throw NotSymmetricError("max asymmetry above 1e-10 of scale");
}

bool is_symmetric(const Matrix& s) {
    if (s.rows() != s.cols()) return false;
    const double scale = std::max(norm_inf(s), 1e-300);
    for (int i = 0; i < s.rows(); ++i)
        for (int j = i + 1; j < s.cols(); ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * scale) return false;
    return true;
}

}  // namespace

Vector least_squares_minnorm(const Matrix& phi, const Vector& target) {
    require(phi.rows() == static_cast<int>(target.size()), "least_squares_minnorm: target length");
    const Matrix pt = transpose(phi);
    const Matrix gram = pt * phi;
    const SymEigen eg = jacobi_sym(gram);
    const double lmax = std::max(std::abs(eg.values.front()), std::abs(eg.values.back()));
    const double cut = 1e-10 * std::max(lmax, 1e-300);
    const Vector rhs = pt * target;
    Vector w(phi.cols(), 0.0);
    for (int j = 0; j < gram.rows(); ++j) {
        if (eg.values[j] <= cut) continue;
        double proj = 0.0;
        for (int i = 0; i < gram.rows(); ++i) proj += eg.vectors(i, j) * rhs[i];
        proj /= eg.values[j];
        for (int i = 0; i < gram.rows(); ++i) w[i] += proj * eg.vectors(i, j);
    }
    return w;
}

Vector stationary_distribution(const Matrix& p) {
    const int n = p.rows();
    require(n == p.cols(), "stationary_distribution: matrix must be square");
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += p(i, j);
        if (std::abs(s - 1.0) > 1e-12) throw Error("stationary_distribution: rows must sum to 1");
    }

    Vector mu;
    if (n <= 500) {
        // balance equations with the last one replaced by the normalization
        Matrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = p(j, i) - (i == j ? 1.0 : 0.0);
        for (int j = 0; j < n; ++j) m(n - 1, j) = 1.0;
        Vector rhs(n, 0.0);
        rhs[n - 1] = 1.0;
        try {
            mu = solve_linear(m, rhs);
        } catch (const SingularMatrixError&) {
            throw NoConvergenceError("balance equations singular (chain likely reducible)");
        }
    } else {
        mu.assign(n, 1.0 / n);
        const int max_iter = 200000;
        for (int it = 0; it < max_iter; ++it) {
            Vector next(n, 0.0);
            for (int i = 0; i < n; ++i) {
                const double mi = mu[i];
                if (mi == 0.0) continue;
                for (int j = 0; j < n; ++j) next[j] += mi * p(i, j);
            }
            double diff = 0.0, sum = 0.0;
            for (int j = 0; j < n; ++j) sum += next[j];
            for (int j = 0; j < n; ++j) {
                next[j] /= sum;
                diff += std::abs(next[j] - mu[j]);
            }
            mu = next;
            if (diff < 1e-14) break;
            if (it == max_iter - 1)
                throw NoConvergenceError("power iteration budget exhausted");
        }
    }

    double residual = 0.0, total = 0.0;
    for (int j = 0; j < n; ++j) {
        if (mu[j] < -1e-9) throw NoConvergenceError("negative stationary mass");
        mu[j] = std::max(mu[j], 0.0);
        total += mu[j];
    }
    for (double& v : mu) v /= total;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) col += mu[i] * p(i, j);
        residual += std::abs(col - mu[j]);
    }
    if (residual > 1e-10) throw NoConvergenceError("balance residual above 1e-10");
    return mu;
}

Vector eigenvalues_sym(const Matrix& s) {
    check_symmetric(s);
    return jacobi_sym(s).values;
}

double min_eigenvalue_sym(const Matrix& s) {
    check_symmetric(s);
    return jacobi_sym(s).values.front();
}

namespace {

using Cplx = std::complex<double>;

// Householder reduction to upper Hessenberg form (real arithmetic).
Matrix hessenberg(const Matrix& a) {
    const int n = a.rows();
    Matrix h = a;
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += h(i, k) * h(i, k);
        scale = std::sqrt(scale);
        if (scale == 0.0) continue;
        double alpha = h(k + 1, k) >= 0 ? -scale : scale;
        Vector v(n, 0.0);
        v[k + 1] = h(k + 1, k) - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = h(i, k);
        double vnorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        // H <- (I - 2vv^T/v^Tv) H (I - 2vv^T/v^Tv)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = k + 1; i < n; ++i) acc += v[i] * h(i, j);
            acc = 2.0 * acc / vnorm2;
            for (int i = k + 1; i < n; ++i) h(i, j) -= acc * v[i];
        }
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = k + 1; j < n; ++j) acc += h(i, j) * v[j];
            acc = 2.0 * acc / vnorm2;
            for (int j = k + 1; j < n; ++j) h(i, j) -= acc * v[j];
        }
        for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
    return h;
}

// One explicit shifted QR step on the Hessenberg block [l, m] (complex Givens).
void qr_step(std::vector<std::vector<Cplx>>& h, int l, int m, Cplx shift) {
    const int len = m - l + 1;
    std::vector<double> cs(len - 1);
    std::vector<Cplx> sn(len - 1);
    for (int i = l; i <= m; ++i) h[i][i] -= shift;
    for (int k = l; k < m; ++k) {
        Cplx f = h[k][k], g = h[k + 1][k];
        double af = std::abs(f), ag = std::abs(g);
        double c;
        Cplx s;
        if (ag == 0.0) {
            c = 1.0;
            s = 0.0;
        } else if (af == 0.0) {
            c = 0.0;
            s = std::conj(g) / ag;
        } else {
            double r = std::hypot(af, ag);
            c = af / r;
            s = (f / af) * std::conj(g) / r;
        }
        cs[k - l] = c;
        sn[k - l] = s;
        for (int j = k; j <= m; ++j) {
            Cplx t1 = h[k][j], t2 = h[k + 1][j];
            h[k][j] = c * t1 + s * t2;
            h[k + 1][j] = -std::conj(s) * t1 + c * t2;
        }
    }
    for (int k = l; k < m; ++k) {
        double c = cs[k - l];
        Cplx s = sn[k - l];
        int top = std::min(k + 2, m);
        for (int i = l; i <= top; ++i) {
            Cplx t1 = h[i][k], t2 = h[i][k + 1];
            h[i][k] = c * t1 + std::conj(s) * t2;
            h[i][k + 1] = -s * t1 + c * t2;
        }
    }
    for (int i = l; i <= m; ++i) h[i][i] += shift;
}

}  // namespace

std::vector<Cplx> eigenvalues(const Matrix& c) {
    require(c.rows() == c.cols(), "eigenvalues: matrix must be square");
    const int n = c.rows();
    if (n == 0) return {};
    if (is_symmetric(c)) {
        std::vector<Cplx> out;
        for (double v : jacobi_sym(c).values) out.emplace_back(v, 0.0);
        return out;
    }
    const Matrix hr = hessenberg(c);
    std::vector<std::vector<Cplx>> h(n, std::vector<Cplx>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h[i][j] = hr(i, j);

    double scale = std::max(norm_inf(hr), 1e-300);
    const double tol = 1e-14 * scale;
    std::vector<Cplx> eig(n);
    int m = n - 1;
    int iter_in_block = 0;
    while (m >= 0) {
        if (m == 0) {
            eig[0] = h[0][0];
            break;
        }
        // deflate trailing entries with negligible subdiagonal
        double sub = std::abs(h[m][m - 1]);
        if (sub <= tol || sub <= 1e-14 * (std::abs(h[m][m]) + std::abs(h[m - 1][m - 1]))) {
            eig[m] = h[m][m];
            --m;
            iter_in_block = 0;
            continue;
        }
        int l = m;
        while (l > 0) {
            double s = std::abs(h[l][l - 1]);
            if (s <= tol || s <= 1e-14 * (std::abs(h[l][l]) + std::abs(h[l - 1][l - 1]))) break;
            --l;
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        Cplx a = h[m - 1][m - 1], b = h[m - 1][m], cc = h[m][m - 1], d = h[m][m];
        Cplx tr = a + d, det = a * d - b * cc;
        Cplx disc = std::sqrt(tr * tr - 4.0 * det);
        Cplx mu1 = 0.5 * (tr + disc), mu2 = 0.5 * (tr - disc);
        Cplx shift = std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
        if (++iter_in_block % 12 == 0)
            shift = d + std::abs(h[m][m - 1]);  // exceptional shift to break cycles
        if (iter_in_block > 40 * n) throw NoConvergenceError("QR iteration budget exhausted");
        qr_step(h, l, m, shift);
    }
    return eig;
}

double min_abs_eigenvalue(const Matrix& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues(c)) best = std::min(best, std::abs(ev));
    return best;
}

namespace {

constexpr uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      base_(mix64(mix64(seed + kGoldenGamma) ^ mix64(stream_id + 0xD1B54A32D192ED03ULL))) {}

uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(base_ + counter_ * kGoldenGamma);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int RngStream::next_below(int n) {
    require(n > 0, "next_below: n must be positive");
    int v = static_cast<int>(next_double() * n);
    return v >= n ? n - 1 : v;
}

}  // namespace itd
