#pragma once

// Small dense linear-algebra and convex-solver primitives shared by the
// algorithm modules. Everything here operates on caller-owned data; the
// dimensions involved stay small (a few dozen), so SPD solves refactorize
// via Cholesky instead of maintaining rank-one factor updates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pcbandit/errors.hpp"

namespace pcb {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatchError();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatchError();
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatchError();
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scale(const Vec& a, double s) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

// Row-major dense real matrix with explicit dimensions.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    // A += s * v v^T (v length must equal rows == cols)
    void add_outer(const Vec& v, double s) {
        if (rows != cols || static_cast<int>(v.size()) != rows) throw DimensionMismatchError();
        for (int i = 0; i < rows; ++i) {
            const double vi = s * v[i];
            for (int j = 0; j < cols; ++j) (*this)(i, j) += vi * v[j];
        }
    }

    Vec mul(const Vec& x) const {
        if (static_cast<int>(x.size()) != cols) throw DimensionMismatchError();
        Vec y(rows, 0.0);
        for (int i = 0; i < rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

// Lower-triangular Cholesky factor of an SPD matrix. The factorization is the
// only route through which SPD systems are solved; a non-positive pivot means
// the input was not SPD and raises NotSpdError.
class Cholesky {
  public:
    Cholesky() = default;

    explicit Cholesky(const Matrix& A) { factor(A); }

    void factor(const Matrix& A) {
        if (A.rows != A.cols) throw NotSpdError("matrix not square");
        n_ = A.rows;
        L_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            double d = A(j, j);
            for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
            if (!(d > 0.0) || !std::isfinite(d)) throw NotSpdError();
            const double ljj = std::sqrt(d);
            l(j, j) = ljj;
            for (int i = j + 1; i < n_; ++i) {
                double s = A(i, j);
                for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
                l(i, j) = s / ljj;
            }
        }
    }

    int dim() const { return n_; }

    // Solves A x = b.
    Vec solve(const Vec& b) const {
        if (static_cast<int>(b.size()) != n_) throw DimensionMismatchError();
        Vec y = forward(b);
        // back substitution with L^T
        for (int i = n_ - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n_; ++k) s -= l(k, i) * y[k];
            y[i] = s / l(i, i);
        }
        return y;
    }

    // Returns v^T A^{-1} v = ||L^{-1} v||^2.
    double quad_form_inv(const Vec& v) const {
        Vec y = forward(v);
        return dot(y, y);
    }

  private:
    Vec forward(const Vec& b) const {
        Vec y(b);
        for (int i = 0; i < n_; ++i) {
            double s = y[i];
            for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        return y;
    }

    double& l(int i, int j) { return L_[static_cast<std::size_t>(i) * n_ + j]; }
    double l(int i, int j) const { return L_[static_cast<std::size_t>(i) * n_ + j]; }

    int n_ = 0;
    std::vector<double> L_;
};

inline Vec cholesky_solve(const Matrix& A, const Vec& b) {
    return Cholesky(A).solve(b);
}

// det(Lambda + n phi phi^T) / det(Lambda) via the matrix determinant lemma,
// i.e. 1 + n phi^T Lambda^{-1} phi.
inline double det_ratio_rank_one(const Cholesky& chol, const Vec& phi, long long n) {
    return 1.0 + static_cast<double>(n) * chol.quad_form_inv(phi);
}

inline double det_ratio_rank_one(const Matrix& lambda, const Vec& phi, long long n) {
    return det_ratio_rank_one(Cholesky(lambda), phi, n);
}

// arg min_{||theta|| <= B} sum_j n_j (y_j - <theta, phi_j>)^2 + ||theta||^2.
// Unconstrained ridge first; if the ball constraint is violated, bisect on a
// Lagrange multiplier lambda >= 0 added to the ||theta||^2 term until
// ||theta(lambda)|| lands in [B(1-1e-8), B].
inline Vec constrained_ridge(const std::vector<double>& weights,
                             const std::vector<Vec>& features,
                             const std::vector<double>& targets,
                             double norm_bound) {
    if (weights.empty() || weights.size() != features.size() || weights.size() != targets.size())
        throw DimensionMismatchError("constrained_ridge: inconsistent observation lists");
    const int nu = static_cast<int>(features.front().size());
    Matrix lam = Matrix::identity(nu);
    Vec rhs(nu, 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (static_cast<int>(features[j].size()) != nu) throw DimensionMismatchError();
        lam.add_outer(features[j], weights[j]);
        for (int i = 0; i < nu; ++i) rhs[i] += weights[j] * targets[j] * features[j][i];
    }

    auto solve_with = [&](double extra) {
        Matrix m = lam;
        for (int i = 0; i < nu; ++i) m(i, i) += extra;
        return Cholesky(m).solve(rhs);
    };

    Vec theta = solve_with(0.0);
    const double b = norm_bound;
    if (norm2(theta) <= b) return theta;

    double lo = 0.0, hi = 1.0;
    while (norm2(solve_with(hi)) > b && hi < 1e300) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        theta = solve_with(mid);
        const double nrm = norm2(theta);
        if (nrm > b)
            lo = mid;
        else if (nrm < b * (1.0 - 1e-13)) // well inside the [B(1-1e-8), B] target
            hi = mid;
        else
            return theta;
    }
    return solve_with(hi);
}

// Halfspace a.x <= c.
struct Halfspace {
    Vec a;
    double c = 0.0;
};

inline bool satisfies(const Vec& x, const Halfspace& h, double tol = 1e-9) {
    return dot(h.a, x) <= h.c + tol;
}

// Euclidean projection onto box [lo,hi] intersected with halfspaces, via
// Dykstra's alternating projections. Stops when a full cycle moves the
// iterate by <= 1e-10; cap 10,000 cycles.
inline Vec project_box_halfspaces(const Vec& u, const Vec& lo, const Vec& hi,
                                  const std::vector<Halfspace>& halfspaces) {
    const std::size_t d = u.size();
    if (lo.size() != d || hi.size() != d) throw DimensionMismatchError();

    auto clip_box = [&](Vec& x) {
        for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };

    Vec x = u;
    clip_box(x);
    if (halfspaces.empty()) return x;

    x = u;
    const std::size_t m = halfspaces.size() + 1;
    std::vector<Vec> corr(m, Vec(d, 0.0));
    for (int cycle = 0; cycle < 10000; ++cycle) {
        Vec prev = x;
        for (std::size_t s = 0; s < m; ++s) {
            Vec z = add(x, corr[s]);
            Vec proj = z;
            if (s == 0) {
                clip_box(proj);
            } else {
                const Halfspace& h = halfspaces[s - 1];
                const double viol = dot(h.a, z) - h.c;
                if (viol > 0.0) {
                    const double aa = dot(h.a, h.a);
                    if (aa > 0.0) proj = sub(z, scale(h.a, viol / aa));
                }
            }
            corr[s] = sub(z, proj);
            x = proj;
        }
        if (norm_inf(sub(x, prev)) <= 1e-10) break;
    }

    for (std::size_t i = 0; i < d; ++i)
        if (x[i] < lo[i] - 1e-9 || x[i] > hi[i] + 1e-9)
            throw InfeasibleRegionError();
    for (const auto& h : halfspaces)
        if (!satisfies(x, h))
            throw InfeasibleRegionError();
    return x;
}

} // namespace pcb
