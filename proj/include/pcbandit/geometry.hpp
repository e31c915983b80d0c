#pragma once

// Domain representation, cube partitioning and the local polynomial feature
// map. A Domain is an axis-aligned box inside [0,1]^d, optionally cut by
// convex feasible halfspaces; partitioning divides [0,1]^d into J^d cubes and
// keeps the ones whose intersection with the domain is nonempty (checked on
// the candidate grid).

#include <cstdint>
#include <functional>
#include <vector>

#include "pcbandit/errors.hpp"
#include "pcbandit/linalg.hpp"

namespace pcb {

struct Domain {
    int d = 1;
    Vec lo, hi;                           // box, per-coordinate [lo, hi] within [0,1]
    std::vector<Halfspace> feasible;      // Z
    double interior_margin = 0.0;         // delta_0

    static Domain unit_box(int d) {
        Domain dom;
        dom.d = d;
        dom.lo.assign(d, 0.0);
        dom.hi.assign(d, 1.0);
        return dom;
    }

    bool in_box(const Vec& x, double tol = 1e-12) const {
        for (int i = 0; i < d; ++i)
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        return true;
    }

    bool in_feasible(const Vec& x, double tol = 1e-9) const {
        for (const auto& h : feasible)
            if (!satisfies(x, h, tol)) return false;
        return true;
    }

    bool contains(const Vec& x, double tol = 1e-9) const { return in_box(x, tol) && in_feasible(x, tol); }

    // X^o: the box shrunk by delta_0 on each side; Z halfspaces carry over.
    Domain interior() const {
        Domain in = *this;
        for (int i = 0; i < d; ++i) {
            in.lo[i] = lo[i] + interior_margin;
            in.hi[i] = hi[i] - interior_margin;
            if (in.lo[i] > in.hi[i]) throw InfeasibleRegionError("interior margin empties the box");
        }
        return in;
    }

    Vec center() const {
        Vec c(d);
        for (int i = 0; i < d; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }
};

struct CubeIndex {
    std::vector<int> j; // 1-based, each in [1, J]

    bool operator<(const CubeIndex& o) const { return j < o.j; }
    bool operator==(const CubeIndex& o) const { return j == o.j; }
};

struct Cube {
    CubeIndex idx;
    Vec lo, hi;  // cube box intersected with the domain box
    Vec anchor;  // a point of X_j; the clipped-box center unless Z cuts it out

    // Feature maps may be evaluated anywhere; this flags off-cube points.
    bool contains(const Vec& x, double tol = 1e-12) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        return true;
    }
};

inline int feature_dim(int k, int d, int cap = 10000) {
    if (k < 1 || d < 1) throw ConfigError("feature_dim requires k >= 1 and d >= 1");
    // C(k+d-1, d), multiplicative form
    long long nu = 1;
    for (int i = 1; i <= d; ++i) {
        nu = nu * (k - 1 + i) / i;
        if (nu > cap) throw OverflowError("feature dimension exceeds cap");
    }
    return static_cast<int>(nu);
}

// Monomial exponent table and anchor for the degree-<k local map phi_j.
// Exponents are ordered graded-lexicographically: total degree ascending,
// within a degree lexicographically descending on the exponent tuple, which
// reproduces the listing 1, x1, x2, ..., x1^2, x1 x2, ... The first entry is
// always the all-zeros exponent (constant monomial).
struct FeatureMap {
    int k = 1;
    int d = 1;
    Vec anchor;
    std::vector<std::vector<int>> exponents;
    int nu = 1;
};

namespace detail {
inline void enumerate_exponents(int d, int degree, std::vector<int>& cur,
                                std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == d - 1) {
        int used = 0;
        for (int e : cur) used += e;
        cur.push_back(degree - used);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    int used = 0;
    for (int e : cur) used += e;
    for (int e = degree - used; e >= 0; --e) { // descending lex within the degree
        cur.push_back(e);
        enumerate_exponents(d, degree, cur, out);
        cur.pop_back();
    }
}
} // namespace detail

inline FeatureMap make_feature_map(int k, int d, Vec anchor, int cap = 10000) {
    FeatureMap fm;
    fm.k = k;
    fm.d = d;
    fm.anchor = std::move(anchor);
    fm.nu = feature_dim(k, d, cap);
    for (int degree = 0; degree < k; ++degree) {
        std::vector<int> cur;
        detail::enumerate_exponents(d, degree, cur, fm.exponents);
    }
    return fm;
}

inline Vec feature_map(const Vec& x, const FeatureMap& fm) {
    Vec phi(fm.exponents.size());
    for (std::size_t m = 0; m < fm.exponents.size(); ++m) {
        double v = 1.0;
        for (int i = 0; i < fm.d; ++i) {
            const int e = fm.exponents[m][i];
            const double base = x[i] - fm.anchor[i];
            for (int p = 0; p < e; ++p) v *= base;
        }
        phi[m] = v;
    }
    return phi;
}

// Uniform G^d grid over the cube box, filtered to points satisfying Z.
// Deterministic order: dimension 0 is the most significant digit, so the
// first point is the cube's low corner.
inline std::vector<Vec> cube_grid(const Cube& cube, int points_per_dim,
                                  const std::vector<Halfspace>& feasible = {}) {
    if (points_per_dim < 2) throw ConfigError("cube_grid requires G >= 2");
    const int d = static_cast<int>(cube.lo.size());
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(points_per_dim);
    std::vector<Vec> grid;
    grid.reserve(total);
    Vec x(d);
    for (std::size_t m = 0; m < total; ++m) {
        std::size_t rem = m;
        for (int i = d - 1; i >= 0; --i) {
            const int g = static_cast<int>(rem % points_per_dim);
            rem /= points_per_dim;
            x[i] = cube.lo[i] + (cube.hi[i] - cube.lo[i]) * g / (points_per_dim - 1);
        }
        bool ok = true;
        for (const auto& h : feasible)
            if (!satisfies(x, h)) { ok = false; break; }
        if (ok) grid.push_back(x);
    }
    if (grid.empty()) throw EmptyCubeError();
    return grid;
}

// Partition [0,1]^d into J^d cubes, intersect each with the domain box and
// keep those with at least one feasible grid point. Lexicographic order on
// the cube index.
inline std::vector<Cube> partition(const Domain& dom, int J, int grid_points = 10) {
    std::vector<Cube> cubes;
    std::size_t total = 1;
    for (int i = 0; i < dom.d; ++i) total *= static_cast<std::size_t>(J);
    for (std::size_t m = 0; m < total; ++m) {
        Cube c;
        c.idx.j.resize(dom.d);
        std::size_t rem = m;
        for (int i = dom.d - 1; i >= 0; --i) {
            c.idx.j[i] = static_cast<int>(rem % J) + 1;
            rem /= J;
        }
        c.lo.resize(dom.d);
        c.hi.resize(dom.d);
        bool empty = false;
        for (int i = 0; i < dom.d; ++i) {
            c.lo[i] = std::max((c.idx.j[i] - 1) / static_cast<double>(J), dom.lo[i]);
            c.hi[i] = std::min(c.idx.j[i] / static_cast<double>(J), dom.hi[i]);
            if (c.lo[i] >= c.hi[i]) { empty = true; break; }
        }
        if (empty) continue;
        c.anchor.resize(dom.d);
        for (int i = 0; i < dom.d; ++i) c.anchor[i] = 0.5 * (c.lo[i] + c.hi[i]);
        if (!dom.in_feasible(c.anchor)) {
            try {
                c.anchor = cube_grid(c, grid_points, dom.feasible).front();
            } catch (const EmptyCubeError&) {
                continue; // no feasible point: drop from A_1
            }
        }
        cubes.push_back(std::move(c));
    }
    return cubes;
}

// Max grid-point absolute error of the best uniform-error polynomial fit of
// degree < k on the cube grid. Lawson's iteratively reweighted least squares
// drives the weighted LSQ solution to the minimax fit; iteration stops when
// the max error stabilizes.
inline double poly_fit_error(const std::function<double(const Vec&)>& f, const Cube& cube, int k,
                             int grid_points) {
    const int d = static_cast<int>(cube.lo.size());
    FeatureMap fm = make_feature_map(k, d, cube.anchor);
    const std::vector<Vec> grid = cube_grid(cube, grid_points);
    const std::size_t n = grid.size();
    std::vector<Vec> feats(n);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        feats[i] = feature_map(grid[i], fm);
        y[i] = f(grid[i]);
    }

    Vec w(n, 1.0);
    double max_err = 0.0, prev_err = -1.0;
    for (int it = 0; it < 400; ++it) {
        Matrix gram(fm.nu, fm.nu);
        Vec rhs(fm.nu, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            gram.add_outer(feats[i], w[i]);
            for (int c = 0; c < fm.nu; ++c) rhs[c] += w[i] * y[i] * feats[i][c];
        }
        for (int c = 0; c < fm.nu; ++c) gram(c, c) += 1e-12; // grid can be rank-deficient vs nu
        const Vec theta = Cholesky(gram).solve(rhs);

        max_err = 0.0;
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::abs(y[i] - dot(theta, feats[i]));
            max_err = std::max(max_err, e);
            w[i] *= e + 1e-300;
            wsum += w[i];
        }
        if (max_err < 1e-12) return max_err;
        for (std::size_t i = 0; i < n; ++i) w[i] *= n / wsum;
        if (it > 10 && std::abs(max_err - prev_err) < 1e-11 * (1.0 + max_err)) break;
        prev_err = max_err;
    }
    return max_err;
}

} // namespace pcb
