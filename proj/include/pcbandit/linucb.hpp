#pragma once

// Batched LinUCB over a local polynomial feature map, driven by a pairwise
// comparison oracle against a fixed baseline x_s, plus its doubling-epoch
// iteration. Batch sizes follow the determinant-doubling rule, evaluated in
// closed form through the matrix determinant lemma.

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcbandit/errors.hpp"
#include "pcbandit/geometry.hpp"
#include "pcbandit/linalg.hpp"
#include "pcbandit/oracle.hpp"

namespace pcb {

enum class ConstantMode { Theoretical, Practical };

struct UcbParams {
    double M = 1.0;      // Holder constant; also the clip level of the index
    double C1 = 0.0;     // oracle consistency constant
    double C2 = 0.0;     // local approximation constant
    ConstantMode mode = ConstantMode::Practical;
    double log_T = 0.0;  // ln T, used by the practical confidence rule
    double c1p_scale = 1.0;
    std::optional<double> c1p_override;
    int grid_points = 10;
    long long min_batch = 1;
};

inline double tau_infinity(int nu, long long N) {
    return nu * std::log2(2.0 * static_cast<double>(N) * nu);
}

inline double c1_prime(const UcbParams& p, int nu, long long N) {
    if (p.c1p_override) return *p.c1p_override;
    const double tau_inf = tau_infinity(nu, N);
    const double sq_nu = std::sqrt(static_cast<double>(nu));
    double v;
    if (p.mode == ConstantMode::Theoretical)
        v = 2.0 * p.M * sq_nu + 2.0 * p.C2 * std::sqrt(tau_inf * N) + 2.0 * std::sqrt(p.C1 * tau_inf);
    else
        v = sq_nu * p.log_T + p.C2 * std::sqrt(tau_inf * N) + std::sqrt(p.C1 * tau_inf);
    return p.c1p_scale * v;
}

struct RidgeState {
    Matrix lambda;   // I + sum n_tau phi_tau phi_tau^T
    Cholesky chol;
    Vec theta;       // constrained ridge estimate, ||theta|| <= M sqrt(nu)
    struct Obs {
        long long n;
        Vec phi;
        double y;
    };
    std::vector<Obs> history;

    explicit RidgeState(int nu) : lambda(Matrix::identity(nu)), chol(lambda), theta(nu, 0.0) {}
};

// Smallest n with det(Lambda + n phi phi^T) > 2 det(Lambda), i.e.
// floor(1/s) + 1 for s = phi^T Lambda^{-1} phi, truncated to the remaining
// budget; s below 1e-14 never doubles the determinant, so the whole budget is
// assigned. 1/s is snapped to the nearest integer when it sits within
// rounding error of one, so the strict inequality survives floating point.
inline long long batch_size(const Cholesky& chol, const Vec& phi, long long n_remaining) {
    const double s = chol.quad_form_inv(phi);
    if (s <= 1e-14) return n_remaining;
    double inv = 1.0 / s;
    const double nearest = std::round(inv);
    if (std::abs(inv - nearest) <= 1e-9 * std::max(1.0, nearest)) inv = nearest;
    const long long n = static_cast<long long>(std::floor(inv)) + 1;
    return std::min(n, n_remaining);
}

inline long long batch_size(const RidgeState& state, const Vec& phi, long long n_remaining) {
    return batch_size(state.chol, phi, n_remaining);
}

// Clipped UCB index min{M, <theta, dphi> + C1' ||dphi||_{Lambda^-1} + C2}.
inline double ucb_index(const RidgeState& state, const Vec& dphi, double c1p, const UcbParams& p) {
    const double bonus = c1p * std::sqrt(std::max(0.0, state.chol.quad_form_inv(dphi)));
    return std::min(p.M, dot(state.theta, dphi) + bonus + p.C2);
}

namespace detail {
inline std::size_t ucb_argmax_index(const RidgeState& state, const std::vector<Vec>& dphis,
                                    double c1p, const UcbParams& p) {
    std::size_t best = 0;
    double best_val = -1e300;
    for (std::size_t i = 0; i < dphis.size(); ++i) {
        const double v = ucb_index(state, dphis[i], c1p, p);
        if (v > best_val) { // ties keep the lowest grid index
            best_val = v;
            best = i;
        }
    }
    return best;
}
} // namespace detail

// Grid maximizer of the clipped UCB index; C1' is derived from the budget N
// the surrounding BatchLinUCB invocation was given.
inline Vec ucb_argmax(const RidgeState& state, const FeatureMap& fm, const Cube& cube,
                      const Vec& x_s, const UcbParams& p, long long N,
                      const std::vector<Halfspace>& feasible = {}) {
    const std::vector<Vec> grid = cube_grid(cube, p.grid_points, feasible);
    const Vec phi_s = feature_map(x_s, fm);
    std::vector<Vec> dphis(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) dphis[i] = sub(feature_map(grid[i], fm), phi_s);
    const double c1p = c1_prime(p, fm.nu, N);
    return grid[detail::ucb_argmax_index(state, dphis, c1p, p)];
}

// Algorithm: loop (UCB argmax -> determinant-doubling batch size -> oracle
// -> refit) until the budget N is spent; return the action of the longest
// batch (earliest on ties). Consumes exactly N periods.
inline Vec batch_lin_ucb(const Cube& cube, const FeatureMap& fm, const Vec& x_s, long long N,
                         const UcbParams& p, ComparisonOracle& oracle,
                         const std::vector<Halfspace>& feasible = {}) {
    if (N < 1) throw ConfigError("batch_lin_ucb requires N >= 1");
    const std::vector<Vec> grid = cube_grid(cube, p.grid_points, feasible);
    const Vec phi_s = feature_map(x_s, fm);
    std::vector<Vec> dphis(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) dphis[i] = sub(feature_map(grid[i], fm), phi_s);

    const int nu = fm.nu;
    const double c1p = c1_prime(p, nu, N);
    const double norm_bound = p.M * std::sqrt(static_cast<double>(nu));
    const double tau_cap = tau_infinity(nu, N);

    RidgeState state(nu);
    std::vector<double> weights;
    std::vector<Vec> phis;
    std::vector<double> targets;

    long long n_remaining = N;
    long long best_n = -1;
    std::size_t best_point = 0;
    long long batches = 0;
    while (n_remaining > 0) {
        const std::size_t pick = detail::ucb_argmax_index(state, dphis, c1p, p);
        const Vec& phi_tau = dphis[pick];
        long long n_tau = batch_size(state, phi_tau, n_remaining);
        if (p.min_batch > 1) n_tau = std::min(std::max(n_tau, p.min_batch), n_remaining);
        // reply estimates f(x_tau) - f(x_s)
        const OracleReply reply = oracle.invoke(n_tau, x_s, grid[pick]);
        n_remaining -= n_tau;
        state.lambda.add_outer(phi_tau, static_cast<double>(n_tau));
        state.chol.factor(state.lambda);
        weights.push_back(static_cast<double>(n_tau));
        phis.push_back(phi_tau);
        targets.push_back(reply.y);
        state.history.push_back({n_tau, phi_tau, reply.y});
        state.theta = constrained_ridge(weights, phis, targets, norm_bound);
        if (n_tau > best_n) {
            best_n = n_tau;
            best_point = pick;
        }
        ++batches;
        if (static_cast<double>(batches) > tau_cap)
            throw Error("batch count exceeded nu log2(2 N nu) = " + std::to_string(tau_cap));
    }
    return grid[best_point];
}

// Doubling-epoch iteration: epochs beta = 1..beta_0 of budget 2^beta, each
// re-anchored at the previous output; the leftover budget is committed to the
// final pair. Consumes exactly N periods.
inline Vec iterative_batch_lin_ucb(const Cube& cube, const FeatureMap& fm, long long N,
                                   const UcbParams& p, ComparisonOracle& oracle,
                                   const std::vector<Halfspace>& feasible = {}) {
    if (N < 1) throw ConfigError("iterative_batch_lin_ucb requires N >= 1");
    const int beta0 = std::bit_width(static_cast<std::uint64_t>(N) + 1) - 2; // floor(log2(N+1)) - 1
    Vec x = cube.anchor;
    long long spent = 0;
    for (int beta = 1; beta <= beta0; ++beta) {
        const long long budget = 1LL << beta;
        x = batch_lin_ucb(cube, fm, x, budget, p, oracle, feasible);
        spent += budget;
    }
    oracle.commit(N - spent, x, x);
    return x;
}

} // namespace pcb
