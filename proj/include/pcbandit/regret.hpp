#pragma once

// Cumulative regret accounting: per-pair instantaneous regret
// n (2 f* - f(x) - f(x')) plus a knapsack penalty T psi(average action)
// applied exactly once at the end of a run.

#include <functional>
#include <utility>
#include <vector>

#include "pcbandit/errors.hpp"
#include "pcbandit/linalg.hpp"

namespace pcb {

// psi >= 0, zero on the feasible region Z. The max_affine form is
// scale * max_j {0, (A xbar)_j - cap_j}.
struct PenaltyFunction {
    enum class Kind { Zero, MaxAffine };
    Kind kind = Kind::Zero;
    double scale = 1.0;
    std::vector<Vec> rows;
    Vec caps;

    double operator()(const Vec& xbar) const {
        if (kind == Kind::Zero) return 0.0;
        double worst = 0.0;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const double v = dot(rows[j], xbar) - caps[j];
            if (v > worst) worst = v;
        }
        return scale * worst;
    }
};

class RegretLedger {
  public:
    RegretLedger() = default;

    RegretLedger(double f_star, std::function<double(const Vec&)> f, int d,
                 PenaltyFunction psi = {})
        : f_star_(f_star), f_(std::move(f)), psi_(std::move(psi)), action_sum_(d, 0.0) {}

    void record(long long n, const Vec& x, const Vec& xp) {
        pair_regret_ += static_cast<double>(n) * (2.0 * f_star_ - f_(x) - f_(xp));
        for (std::size_t i = 0; i < action_sum_.size(); ++i)
            action_sum_[i] += static_cast<double>(n) * (x[i] + xp[i]);
        periods_ += n;
    }

    long long periods() const { return periods_; }
    double f_star() const { return f_star_; }
    double pair_regret() const { return pair_regret_; }

    // Eq.-style total: pair regret plus T psi((1/2T) sum n (x + x')).
    double total(long long T) const {
        Vec avg = scale(action_sum_, 1.0 / (2.0 * static_cast<double>(T)));
        return pair_regret_ + static_cast<double>(T) * psi_(avg);
    }

    // Percentage of relative regret: [2T f* - sum (f(x_t) + f(x'_t))] / (2T f*).
    double relative_pct(long long T) const {
        if (f_star_ == 0.0) throw ConfigError("relative regret undefined for f* = 0");
        return pair_regret_ / (2.0 * static_cast<double>(T) * f_star_) * 100.0;
    }

  private:
    double f_star_ = 0.0;
    std::function<double(const Vec&)> f_ = [](const Vec&) { return 0.0; };
    PenaltyFunction psi_;
    Vec action_sum_;
    double pair_regret_ = 0.0;
    long long periods_ = 0;
};

} // namespace pcb
