#pragma once

// Proximal gradient ascent with biased central-difference gradients for
// strongly concave objectives. Epochs grow geometrically (beta_tau =
// ceil((1+eta)^tau)); each epoch spends beta_tau periods on each of the 2d
// perturbation comparisons, then takes a prox step whose objective reduces to
// a Euclidean projection onto X^o intersect Z.

#include <cmath>
#include <vector>

#include "pcbandit/errors.hpp"
#include "pcbandit/geometry.hpp"
#include "pcbandit/linalg.hpp"
#include "pcbandit/oracle.hpp"

namespace pcb {

struct PgdConfig {
    double eta = 1.0;       // epoch growth; theory default sigma / M
    double alpha = 1.0;     // prox step; theory default 1 / M
    double sigma = 1.0;     // strong concavity constant
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    long long T = 1;        // horizon, enters h_tau through ln T
    long long beta_floor = 1; // minimum epoch length (oracles needing n >= 8)
};

inline long long pgd_beta(const PgdConfig& cfg, long long tau) {
    const double raw = std::ceil(std::pow(1.0 + cfg.eta, static_cast<double>(tau)));
    const long long beta = raw > 2e18 ? static_cast<long long>(2e18) : static_cast<long long>(raw);
    return std::max(beta, cfg.beta_floor);
}

inline double pgd_step_width(const PgdConfig& cfg, long long beta, int d) {
    const double c = cfg.gamma1 + 2.0 * cfg.gamma2 * std::log(static_cast<double>(cfg.T));
    return std::pow(c / (static_cast<double>(beta) * d), 0.25);
}

// Central-difference gradient of f + sigma ||.||^2 / 2 from 2d oracle calls of
// beta periods each: g(j) = (y_plus - y_minus) / (2 h) + sigma x_j.
inline Vec estimate_gradient(const Vec& x, double h, long long beta, double sigma,
                             ComparisonOracle& oracle) {
    const int d = static_cast<int>(x.size());
    Vec g(d);
    for (int j = 0; j < d; ++j) {
        Vec plus = x, minus = x;
        plus[j] += h;
        minus[j] -= h;
        const OracleReply up = oracle.invoke(beta, x, plus);
        const OracleReply down = oracle.invoke(beta, x, minus);
        g[j] = (up.y - down.y) / (2.0 * h) + sigma * x[j];
    }
    return g;
}

// arg min_{u in X^o cap Z} { -<g, u> + sigma ||u||^2 / 2 + ||u - x||^2 / (2 alpha) }
// = projection of (g + x / alpha) / (sigma + 1 / alpha) by completing the square.
inline Vec prox_step(const Vec& x, const Vec& g, double sigma, double alpha,
                     const Domain& interior) {
    const double inv_alpha = 1.0 / alpha;
    Vec target(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        target[i] = (g[i] + inv_alpha * x[i]) / (sigma + inv_alpha);
    return project_box_halfspaces(target, interior.lo, interior.hi, interior.feasible);
}

struct PgdTrace {
    struct Epoch {
        long long tau = 0;
        long long beta = 0;
        double h = 0.0;
        Vec x;
        Vec g;
    };
    std::vector<Epoch> epochs;
    long long commit_periods = 0;
    Vec commit_point;
};

inline PgdTrace run_pgd(const Domain& dom, const PgdConfig& cfg, ComparisonOracle& oracle) {
    const Domain interior = dom.interior();
    const int d = dom.d;
    Vec x = project_box_halfspaces(dom.center(), interior.lo, interior.hi, interior.feasible);

    PgdTrace trace;
    for (long long tau = 0;; ++tau) {
        const long long beta = pgd_beta(cfg, tau);
        if (oracle.remaining() < 2 * d * beta) break;
        double h = pgd_step_width(cfg, beta, d);

        // Perturbations must stay inside X: shrink h toward the nearest wall
        // while that keeps h >= h/2, otherwise shift the iterate inward by
        // projection onto the h-shrunk box intersected with Z (the iterate
        // must stay in X^o cap Z, the queries only in X).
        double min_width = 1e300, room = 1e300;
        for (int j = 0; j < d; ++j) {
            min_width = std::min(min_width, dom.hi[j] - dom.lo[j]);
            room = std::min({room, x[j] - dom.lo[j], dom.hi[j] - x[j]});
        }
        h = std::min(h, 0.5 * min_width);
        if (room < h) {
            if (room >= 0.5 * h) {
                h = room;
            } else {
                Vec lo(d), hi(d);
                for (int j = 0; j < d; ++j) {
                    lo[j] = std::max(interior.lo[j], dom.lo[j] + h);
                    hi[j] = std::max(std::min(interior.hi[j], dom.hi[j] - h), lo[j]);
                }
                x = project_box_halfspaces(x, lo, hi, interior.feasible);
            }
        }

        Vec g;
        try {
            g = estimate_gradient(x, h, beta, cfg.sigma, oracle);
        } catch (const BudgetExhaustedError&) {
            break;
        }
        trace.epochs.push_back({tau, beta, h, x, g});
        x = prox_step(x, g, cfg.sigma, cfg.alpha, interior);
    }
    trace.commit_periods = oracle.commit(oracle.remaining(), x, x);
    trace.commit_point = x;
    return trace;
}

} // namespace pcb
