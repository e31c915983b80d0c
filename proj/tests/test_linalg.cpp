#include <catch2/catch_amalgamated.hpp>

#include "pcbandit/linalg.hpp"
#include "pcbandit/philox.hpp"

using namespace pcb;

namespace {

Matrix random_spd(int n, RngStream& rng, double diag = 1.0) {
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = rng.uniform(-1.0, 1.0);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += b(k, i) * b(k, j);
            a(i, j) = s / n;
        }
    for (int i = 0; i < n; ++i) a(i, i) += diag;
    return a;
}

// Explicit determinant via LU with partial pivoting, for the rank-one ratio check.
double det_lu(Matrix m) {
    const int n = m.rows;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < n; ++r) {
            const double f = m(r, c) / m(c, c);
            for (int j = c; j < n; ++j) m(r, j) -= f * m(c, j);
        }
    }
    return det;
}

double ridge_objective(const std::vector<double>& w, const std::vector<Vec>& phis,
                       const std::vector<double>& ys, const Vec& theta) {
    double obj = dot(theta, theta);
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double r = ys[j] - dot(theta, phis[j]);
        obj += w[j] * r * r;
    }
    return obj;
}

// Projected gradient to convergence, the independent route for the
// constrained ridge check.
Vec ridge_pg_oracle(const std::vector<double>& w, const std::vector<Vec>& phis,
                    const std::vector<double>& ys, double bound) {
    const int nu = static_cast<int>(phis.front().size());
    Matrix lam = Matrix::identity(nu);
    Vec rhs(nu, 0.0);
    for (std::size_t j = 0; j < w.size(); ++j) {
        lam.add_outer(phis[j], w[j]);
        for (int i = 0; i < nu; ++i) rhs[i] += w[j] * ys[j] * phis[j][i];
    }
    double trace = 0.0;
    for (int i = 0; i < nu; ++i) trace += lam(i, i);
    const double step = 1.0 / (2.0 * trace);
    Vec theta(nu, 0.0);
    for (int it = 0; it < 200000; ++it) {
        Vec grad = lam.mul(theta);
        for (int i = 0; i < nu; ++i) grad[i] = 2.0 * (grad[i] - rhs[i]);
        for (int i = 0; i < nu; ++i) theta[i] -= step * grad[i];
        const double nrm = norm2(theta);
        if (nrm > bound) theta = scale(theta, bound / nrm);
    }
    return theta;
}

} // namespace

TEST_CASE("cholesky_solve identity and diagonal cases") {
    Matrix eye = Matrix::identity(2);
    Vec x = cholesky_solve(eye, {1.0, 2.0});
    CHECK(x[0] == Catch::Approx(1.0));
    CHECK(x[1] == Catch::Approx(2.0));

    Matrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    x = cholesky_solve(d, {2.0, 4.0});
    CHECK(x[0] == Catch::Approx(1.0));
    CHECK(x[1] == Catch::Approx(1.0));
}

TEST_CASE("cholesky_solve residual on random SPD instances up to dim 64") {
    RngStream rng(7, 0, 0);
    for (int n : {2, 5, 16, 64}) {
        for (int rep = 0; rep < 5; ++rep) {
            Matrix a = random_spd(n, rng);
            Vec b(n);
            for (int i = 0; i < n; ++i) b[i] = rng.uniform(-2.0, 2.0);
            Vec x = cholesky_solve(a, b);
            Vec r = sub(a.mul(x), b);
            CHECK(norm_inf(r) <= 1e-9 * (1.0 + norm_inf(b)));
        }
    }
}

TEST_CASE("cholesky rejects non-SPD input") {
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = m(1, 0) = 2.0;
    m(1, 1) = 1.0; // indefinite
    CHECK_THROWS_AS(cholesky_solve(m, {1.0, 1.0}), NotSpdError);
}

TEST_CASE("det_ratio_rank_one closed form") {
    Matrix eye = Matrix::identity(3);
    Vec phi = {0.5, 0.5, 0.0}; // ||phi||^2 = 0.5
    CHECK(det_ratio_rank_one(eye, phi, 2) == Catch::Approx(2.0));
    Vec zero(3, 0.0);
    CHECK(det_ratio_rank_one(eye, zero, 17) == Catch::Approx(1.0));
}

TEST_CASE("det_ratio_rank_one matches explicit determinants") {
    RngStream rng(11, 0, 0);
    for (int n : {2, 4, 8}) {
        for (int rep = 0; rep < 10; ++rep) {
            Matrix a = random_spd(n, rng);
            Vec phi(n);
            for (int i = 0; i < n; ++i) phi[i] = rng.uniform(-1.0, 1.0);
            const long long m = rng.uniform_int(1, 50);
            Matrix updated = a;
            updated.add_outer(phi, static_cast<double>(m));
            const double explicit_ratio = det_lu(updated) / det_lu(a);
            const double lemma_ratio = det_ratio_rank_one(a, phi, m);
            CHECK(std::abs(lemma_ratio - explicit_ratio) <= 1e-10 * std::abs(explicit_ratio));
        }
    }
}

TEST_CASE("constrained_ridge scalar cases") {
    // one observation, n=1, phi=(1), y=0.5: (0.5 - t)^2 + t^2 minimized at 0.25
    Vec theta = constrained_ridge({1.0}, {{1.0}}, {0.5}, 10.0);
    CHECK(theta[0] == Catch::Approx(0.25));
    // active constraint
    theta = constrained_ridge({1.0}, {{1.0}}, {0.5}, 0.1);
    CHECK(norm2(theta) == Catch::Approx(0.1).epsilon(1e-7));
}

TEST_CASE("constrained_ridge matches projected-gradient oracle") {
    RngStream rng(13, 0, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const int nu = 6;
        const int obs = static_cast<int>(rng.uniform_int(1, 12));
        std::vector<double> w, ys;
        std::vector<Vec> phis;
        for (int j = 0; j < obs; ++j) {
            w.push_back(rng.uniform(0.5, 20.0));
            Vec phi(nu);
            for (int i = 0; i < nu; ++i) phi[i] = rng.uniform(-1.0, 1.0);
            phis.push_back(phi);
            ys.push_back(rng.uniform(-2.0, 2.0));
        }
        const double bound = rep % 2 == 0 ? rng.uniform(0.05, 0.3) : 10.0;
        Vec theta = constrained_ridge(w, phis, ys, bound);
        CHECK(norm2(theta) <= bound * (1.0 + 1e-8));
        Vec ref = ridge_pg_oracle(w, phis, ys, bound);
        CHECK(ridge_objective(w, phis, ys, theta) <= ridge_objective(w, phis, ys, ref) + 1e-8);
    }
}

TEST_CASE("project_box_halfspaces basics") {
    // interior point is a fixed point
    Vec u = {0.3, 0.4};
    Vec p = project_box_halfspaces(u, {0.0, 0.0}, {1.0, 1.0}, {});
    CHECK(p[0] == Catch::Approx(0.3));
    CHECK(p[1] == Catch::Approx(0.4));

    // clipping
    p = project_box_halfspaces({1.5, -0.2}, {0.0, 0.0}, {1.0, 1.0}, {});
    CHECK(p[0] == Catch::Approx(1.0));
    CHECK(p[1] == Catch::Approx(0.0));

    // box with halfspace x1 + x2 <= 1 from (1,1) -> (0.5, 0.5)
    Halfspace hs{{1.0, 1.0}, 1.0};
    p = project_box_halfspaces({1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {hs});
    CHECK(p[0] == Catch::Approx(0.5).margin(1e-8));
    CHECK(p[1] == Catch::Approx(0.5).margin(1e-8));
}

TEST_CASE("projection is idempotent and feasible on random instances") {
    RngStream rng(17, 0, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = static_cast<int>(rng.uniform_int(1, 4));
        Vec lo(d), hi(d), u(d);
        for (int i = 0; i < d; ++i) {
            lo[i] = rng.uniform(0.0, 0.3);
            hi[i] = rng.uniform(0.6, 1.0);
            u[i] = rng.uniform(-1.0, 2.0);
        }
        // halfspaces through a random interior point, so the region is nonempty
        Vec interior(d);
        for (int i = 0; i < d; ++i) interior[i] = rng.uniform(lo[i] + 0.05, hi[i] - 0.05);
        std::vector<Halfspace> hs;
        const int m = static_cast<int>(rng.uniform_int(0, 3));
        for (int j = 0; j < m; ++j) {
            Vec a(d);
            for (int i = 0; i < d; ++i) a[i] = rng.uniform(-1.0, 1.0);
            hs.push_back({a, dot(a, interior) + rng.uniform(0.0, 0.5)});
        }
        Vec p = project_box_halfspaces(u, lo, hi, hs);
        for (int i = 0; i < d; ++i) {
            CHECK(p[i] >= lo[i] - 1e-9);
            CHECK(p[i] <= hi[i] + 1e-9);
        }
        for (const auto& h : hs) CHECK(dot(h.a, p) <= h.c + 1e-9);
        Vec pp = project_box_halfspaces(p, lo, hi, hs);
        CHECK(norm_inf(sub(pp, p)) <= 1e-7);
    }
}

TEST_CASE("projection reports infeasible regions") {
    Halfspace impossible{{1.0}, -5.0}; // x <= -5 inside [0,1]
    CHECK_THROWS_AS(project_box_halfspaces({0.5}, {0.0}, {1.0}, {impossible}),
                    InfeasibleRegionError);
}
