#pragma once

// Test objectives and the joint pricing-inventory environment with censored
// demand: Wendland and concave synthetic objectives, demand curves with
// uniform/normal noise, the clairvoyant newsvendor solution, and a pairwise
// comparison oracle built from inventory-inflation exploration plus plug-in
// newsvendor maximization. The environment's true-profit ledger is hidden
// from policies; they only ever see censored sales.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <numeric>
#include <string>
#include <vector>

#include "pcbandit/errors.hpp"
#include "pcbandit/linalg.hpp"
#include "pcbandit/oracle.hpp"
#include "pcbandit/philox.hpp"

namespace pcb {

// ---------------------------------------------------------------------------
// Synthetic objectives of the bandit experiments.

struct SyntheticObjective {
    std::string id;
    int d = 1;
    double noise_half_width = 0.1;
    std::function<double(const Vec&)> f;
    double f_star = 1.0;
};

inline SyntheticObjective make_synthetic(const std::string& id, int d) {
    auto r2 = [](const Vec& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    };
    SyntheticObjective o;
    o.id = id;
    o.d = d;
    if (id == "f1") {
        o.f = [r2](const Vec& x) {
            const double r = r2(x);
            if (r > 1.0) return 0.0;
            const double q = 1.0 - r;
            return q * q * q * q * (4.0 * r + 1.0);
        };
        o.f_star = 1.0;
        o.noise_half_width = 0.1;
    } else if (id == "f2") {
        o.f = [r2](const Vec& x) {
            const double r = r2(x);
            if (r > 1.0) return 0.0;
            const double q = 1.0 - r;
            const double q3 = q * q * q;
            return q3 * q3 * (35.0 * r * r + 18.0 * r + 3.0);
        };
        o.f_star = 3.0;
        o.noise_half_width = 0.3;
    } else if (id == "f3") {
        o.f = [](const Vec& x) {
            return 1.0 - 0.5 * std::accumulate(x.begin(), x.end(), 0.0);
        };
        o.f_star = 1.0;
    } else if (id == "f4") {
        o.f = [](const Vec& x) {
            double s = 0.0;
            for (double v : x) s += (v - 0.25) * (v - 0.25);
            return 1.0 - 0.5 * s;
        };
        o.f_star = 1.0;
    } else {
        throw ConfigError("unknown synthetic objective: " + id);
    }
    return o;
}

// ---------------------------------------------------------------------------
// Normal distribution helpers.

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) * 0.3989422804014326779; }

// Standard normal quantile: rough seed, then safeguarded Newton on the exact
// CDF down to machine precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile requires p in (0,1)");
    const double q = std::min(p, 1.0 - p);
    double z = std::sqrt(-2.0 * std::log(q));
    z -= (2.30753 + 0.27061 * z) / (1.0 + z * (0.99229 + 0.04481 * z)); // Hastings seed
    if (p < 0.5) z = -z;
    double lo = z - 1.0, hi = z + 1.0;
    for (int it = 0; it < 100; ++it) {
        const double err = normal_cdf(z) - p;
        if (err > 0.0) hi = std::min(hi, z);
        else lo = std::max(lo, z);
        const double step = err / std::max(normal_pdf(z), 1e-300);
        double nz = z - step;
        if (!(nz > lo && nz < hi)) nz = 0.5 * (lo + hi);
        if (std::abs(nz - z) < 1e-15 * (1.0 + std::abs(z))) { z = nz; break; }
        z = nz;
    }
    return z;
}

// Adaptive Simpson quadrature.
namespace detail {
inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                                   double b, double fb, double m, double fm, double whole,
                                   double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10) {
    if (a >= b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = detail::simpson(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

// ---------------------------------------------------------------------------
// Inventory model.

enum class DemandCurve { Exponential, Logit, Bimodal };

struct NoiseSpec {
    enum class Kind { Uniform, Normal };
    Kind kind = Kind::Uniform;
    double half_width = 3.0; // uniform
    double sd = 2.0;         // normal

    // Known support bound for uniform; effective bound (6 sd) for normal.
    double bound() const { return kind == Kind::Uniform ? half_width : 6.0 * sd; }

    double draw(RngStream& rng) const {
        return kind == Kind::Uniform ? rng.uniform_sym(half_width) : rng.normal(sd);
    }

    double quantile(double q) const {
        if (kind == Kind::Uniform) return -half_width + 2.0 * half_width * q;
        return sd * normal_quantile(q);
    }

    // E[(eps - z)^+]; uniform in closed form, normal by quadrature.
    double mean_excess(double z) const {
        if (kind == Kind::Uniform) {
            const double w = half_width;
            if (z >= w) return 0.0;
            if (z <= -w) return -z;
            return (w - z) * (w - z) / (4.0 * w);
        }
        const double hi = 8.0 * sd;
        if (z >= hi) return 0.0;
        const double lo = std::max(z, -hi);
        const double s = sd;
        return adaptive_simpson(
            [s, z](double e) { return (e - z) * normal_pdf(e / s) / s; }, lo, hi, 1e-11);
    }
};

struct InventoryModel {
    DemandCurve curve = DemandCurve::Exponential;
    double p_lo = 20.0, p_hi = 30.0;
    NoiseSpec noise;
    double h = 2.0; // holding cost
    double b = 10.0; // lost-sales penalty

    double lambda(double p) const {
        switch (curve) {
            case DemandCurve::Exponential:
                return std::exp(3.0 - 0.04 * p);
            case DemandCurve::Logit: {
                const double e = std::exp(3.0 - 0.1 * p);
                return e / (1.0 + e);
            }
            case DemandCurve::Bimodal:
                return 5.0 * (2.0 - normal_cdf((p - 4.5) / 0.81) - normal_cdf((p - 8.5) / 1.44));
        }
        return 0.0;
    }

    double lambda_max() const {
        double m = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            const double p = p_lo + (p_hi - p_lo) * i / 2000.0;
            m = std::max(m, lambda(p));
        }
        return m;
    }

    // Known upper bound on demand, used by the inflation exploration policy.
    double demand_upper() const { return lambda_max() + noise.bound(); }

    double realized_profit(double p, double y, double d) const {
        return p * std::min(d, y) - b * std::max(0.0, d - y) - h * std::max(0.0, y - d);
    }

    // R(p, y) = E_eps[realized profit]; uses E[(z - eps)^+] = z + E[(eps - z)^+].
    // Memoized on the last action: runs evaluate long stretches at one (p, y).
    double expected_profit(double p, double y) const {
        if (memo_valid_ && p == memo_p_ && y == memo_y_) return memo_r_;
        const double z = y - lambda(p);
        const double excess = noise.mean_excess(z);
        memo_p_ = p;
        memo_y_ = y;
        memo_r_ = p * lambda(p) - (p + b) * excess - h * (z + excess);
        memo_valid_ = true;
        return memo_r_;
    }

  private:
    mutable bool memo_valid_ = false;
    mutable double memo_p_ = 0.0, memo_y_ = 0.0, memo_r_ = 0.0;

  public:

    double newsvendor_fractile(double p) const { return (p + b) / (p + b + h); }

    double y_star(double p) const { return lambda(p) + noise.quantile(newsvendor_fractile(p)); }

    double g_of_p(double p) const { return expected_profit(p, y_star(p)); }
};

inline InventoryModel make_inventory_model(const std::string& curve, const NoiseSpec& noise,
                                           double h, double b) {
    if (!(h > 0.0) || !(b > 0.0)) throw ConfigError("inventory costs h and b must be positive");
    InventoryModel m;
    m.noise = noise;
    m.h = h;
    m.b = b;
    if (curve == "exponential") {
        m.curve = DemandCurve::Exponential;
        m.p_lo = 20.0;
        m.p_hi = 30.0;
    } else if (curve == "logit") {
        m.curve = DemandCurve::Logit;
        m.p_lo = 20.0;
        m.p_hi = 30.0;
    } else if (curve == "bimodal") {
        m.curve = DemandCurve::Bimodal;
        m.p_lo = 1.0;
        m.p_hi = 10.0;
    } else {
        throw ConfigError("unknown demand curve: " + curve);
    }
    return m;
}

// True-profit ledger of the environment. Policies never see it; the
// single-action regret and relative regret are computed from it post hoc.
class InventoryLedger {
  public:
    InventoryLedger() = default;
    explicit InventoryLedger(double r_star) : r_star_(r_star) {}

    void record(double expected_profit) {
        profit_sum_ += expected_profit;
        ++periods_;
    }

    long long periods() const { return periods_; }
    double r_star() const { return r_star_; }
    double cum_regret(long long T) const { return static_cast<double>(T) * r_star_ - profit_sum_; }
    double relative_pct(long long T) const {
        return cum_regret(T) / (static_cast<double>(T) * r_star_) * 100.0;
    }

  private:
    double r_star_ = 0.0;
    double profit_sum_ = 0.0;
    long long periods_ = 0;
};

struct InventoryObservation {
    double sale = 0.0;
    bool stockout = false;
};

// One period at (p, y): draws demand, exposes only the censored sale, books
// the expected profit of the action on the hidden ledger.
inline InventoryObservation inventory_step(const InventoryModel& model, double p, double y,
                                           RngStream& rng, InventoryLedger* ledger = nullptr) {
    const double d = model.lambda(p) + model.noise.draw(rng);
    if (ledger) ledger->record(model.expected_profit(p, y));
    return {std::min(d, y), d >= y};
}

// ---------------------------------------------------------------------------
// Clairvoyant optimal policy.

struct ClairvoyantSolution {
    double p_star = 0.0;
    double y_star = 0.0;
    double r_star = 0.0;
};

inline ClairvoyantSolution clairvoyant(const InventoryModel& model, double grid_resolution = 1e-3) {
    const int n = std::max(2, static_cast<int>(std::lround(1.0 / grid_resolution)));
    const double span = model.p_hi - model.p_lo;
    double best_p = model.p_lo, best_g = -1e300;
    for (int i = 0; i <= n; ++i) {
        const double p = model.p_lo + span * i / n;
        const double g = model.g_of_p(p);
        if (g > best_g) {
            best_g = g;
            best_p = p;
        }
    }
    // golden-section refinement around the best grid point
    double a = std::max(model.p_lo, best_p - span / n);
    double b = std::min(model.p_hi, best_p + span / n);
    const double gr = 0.6180339887498948482;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double g1 = model.g_of_p(x1), g2 = model.g_of_p(x2);
    for (int it = 0; it < 120 && (b - a) > 1e-12; ++it) {
        if (g1 < g2) {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + gr * (b - a);
            g2 = model.g_of_p(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - gr * (b - a);
            g1 = model.g_of_p(x1);
        }
    }
    ClairvoyantSolution sol;
    sol.p_star = 0.5 * (a + b);
    sol.y_star = model.y_star(sol.p_star);
    sol.r_star = model.g_of_p(sol.p_star);
    return sol;
}

// ---------------------------------------------------------------------------
// Pairwise comparison oracle over prices.
//
// invoke(n, x, x') splits n periods between the two prices. Exploration
// inflates the stock to (running demand mean + 2 B_eps), capped at the known
// demand bound, so the sale observation is uncensored and the empirical
// demand samples are honest; the reply is the difference of plug-in
// newsvendor maxima over a 200-point y-grid. Replies use only the samples of
// the current invocation; the persistent per-price store only drives the
// commit policy. Quality per Definition 1 is claimed for n >= 8; smaller n
// still consumes periods but returns an uninformative estimate.
class InventoryOracle : public ComparisonOracle {
  public:
    InventoryOracle(const InventoryModel& model, BudgetClock& clock, RngStream& rng,
                    InventoryLedger& ledger)
        : model_(model), clock_(&clock), rng_(&rng), ledger_(&ledger),
          demand_upper_(model.demand_upper()) {}

    double price_of(const Vec& x) const {
        return model_.p_lo + std::clamp(x[0], 0.0, 1.0) * (model_.p_hi - model_.p_lo);
    }

    OracleReply invoke(long long n, const Vec& x, const Vec& xp) override {
        if (n < 1) throw ConfigError("oracle invocation requires n >= 1");
        if (n > clock_->remaining()) throw BudgetExhaustedError();
        const double p = price_of(x), pp = price_of(xp);
        const long long n_first = n / 2;
        const long long n_second = n - n_first;
        std::vector<double> fresh_p, fresh_pp;
        for (long long t = 0; t < n_first; ++t) {
            if (const auto d = explore_period(p)) fresh_p.push_back(*d);
        }
        for (long long t = 0; t < n_second; ++t) {
            if (const auto d = explore_period(pp)) fresh_pp.push_back(*d);
        }
        double y = 0.0;
        if (!fresh_p.empty() && !fresh_pp.empty())
            y = plug_in_max(pp, fresh_pp) - plug_in_max(p, fresh_p);
        auto& store_p = samples_[p];
        store_p.insert(store_p.end(), fresh_p.begin(), fresh_p.end());
        auto& store_pp = samples_[pp];
        store_pp.insert(store_pp.end(), fresh_pp.begin(), fresh_pp.end());
        return {y, n};
    }

    long long commit(long long n, const Vec& x, const Vec& xp) override {
        const long long m = std::min(n, clock_->remaining());
        const double p = price_of(x), pp = price_of(xp);
        std::map<double, double> stock; // resolved exploit stock per price
        for (long long t = 0; t < m; ++t) {
            const double q = (t % 2 == 0) ? p : pp;
            auto& store = samples_[q];
            if (store.size() < 8) {
                if (const auto d = explore_period(q)) store.push_back(*d);
                continue;
            }
            auto it = stock.find(q);
            if (it == stock.end()) it = stock.emplace(q, plug_in_argmax(q, store)).first;
            clock_->consume(1);
            inventory_step(model_, q, it->second, *rng_, ledger_);
        }
        return m;
    }

    long long remaining() const override { return clock_->remaining(); }

  private:
    // One inflated period at price q. The stock buffer B (1 + 3/sqrt(m))
    // above the running mean keeps the sale uncensored except with
    // probability < exp(-4.5) per period; a censored sale (sale == stock
    // with positive noise support) is discarded rather than polluting the
    // demand store.
    std::optional<double> explore_period(double q) {
        auto& store = samples_[q];
        const double bound = model_.noise.bound();
        double y = demand_upper_;
        if (!store.empty()) {
            const double mean = std::accumulate(store.begin(), store.end(), 0.0) / store.size();
            const double buffer = bound * (1.0 + 3.0 / std::sqrt(static_cast<double>(store.size())));
            y = std::min(mean + buffer, demand_upper_ + bound);
        }
        clock_->consume(1);
        const InventoryObservation obs = inventory_step(model_, q, y, *rng_, ledger_);
        if (bound > 0.0 && obs.sale >= y - 1e-12) return std::nullopt;
        return obs.sale;
    }

    double plug_in_profit(double q, double y, const std::vector<double>& demands) const {
        double s = 0.0;
        for (double d : demands) s += model_.realized_profit(q, y, d);
        return s / static_cast<double>(demands.size());
    }

    double plug_in_argmax(double q, const std::vector<double>& demands) const {
        const double mean = std::accumulate(demands.begin(), demands.end(), 0.0) / demands.size();
        const double bound = model_.noise.bound();
        double best_y = mean, best_v = -1e300;
        for (int i = 0; i < 200; ++i) {
            const double y = mean - bound + 2.0 * bound * i / 199.0;
            const double v = plug_in_profit(q, y, demands);
            if (v > best_v) {
                best_v = v;
                best_y = y;
            }
        }
        return best_y;
    }

    double plug_in_max(double q, const std::vector<double>& demands) const {
        return plug_in_profit(q, plug_in_argmax(q, demands), demands);
    }

    InventoryModel model_;
    BudgetClock* clock_;
    RngStream* rng_;
    InventoryLedger* ledger_;
    double demand_upper_;
    std::map<double, std::vector<double>> samples_;
};

} // namespace pcb
