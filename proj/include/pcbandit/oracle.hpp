#pragma once

// The (gamma_1, gamma_2)-consistent pairwise comparison oracle contract, the
// global period budget, and the synthetic averaging oracle. An invocation
// O(n, x, x') consumes n periods and returns an estimate of f(x') - f(x);
// commit plays a pair with no feedback and truncates to the remaining budget.

#include <functional>
#include <utility>

#include "pcbandit/errors.hpp"
#include "pcbandit/linalg.hpp"
#include "pcbandit/philox.hpp"
#include "pcbandit/regret.hpp"

namespace pcb {

struct ConsistencyParams {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
};

// High-probability error envelope sqrt((g1 + g2 ln(1/delta)) / n).
inline double consistency_envelope(const ConsistencyParams& g, long long n, double delta) {
    return std::sqrt((g.gamma1 + g.gamma2 * std::log(1.0 / delta)) / static_cast<double>(n));
}

class BudgetClock {
  public:
    explicit BudgetClock(long long horizon) : horizon_(horizon) {}

    long long horizon() const { return horizon_; }
    long long used() const { return used_; }
    long long remaining() const { return horizon_ - used_; }

    // Exact consumption; the caller is responsible for fitting the budget.
    void consume(long long n) {
        if (n > remaining()) throw BudgetExhaustedError();
        used_ += n;
    }

  private:
    long long horizon_;
    long long used_ = 0;
};

struct OracleReply {
    double y = 0.0;
    long long n = 0;
};

class ComparisonOracle {
  public:
    virtual ~ComparisonOracle() = default;

    // Consumes exactly n periods; throws BudgetExhaustedError (consuming
    // nothing) if fewer than n remain.
    virtual OracleReply invoke(long long n, const Vec& x, const Vec& xp) = 0;

    // Plays the pair for min(n, remaining) periods with no feedback; returns
    // the number of periods actually consumed.
    virtual long long commit(long long n, const Vec& x, const Vec& xp) = 0;

    virtual long long remaining() const = 0;
};

// Averaging oracle over direct function observations with i.i.d. bounded
// noise: y = (1/n) sum_t [(f(x') + e'_t) - (f(x) + e_t)]. Each invocation
// draws 2n variates in the fixed order (e_1, e'_1, e_2, e'_2, ...).
class AveragingOracle : public ComparisonOracle {
  public:
    AveragingOracle(std::function<double(const Vec&)> f, double noise_half_width, BudgetClock& clock,
                    RngStream& rng, RegretLedger* ledger = nullptr)
        : f_(std::move(f)), a_(noise_half_width), clock_(&clock), rng_(&rng), ledger_(ledger) {}

    OracleReply invoke(long long n, const Vec& x, const Vec& xp) override {
        if (n < 1) throw ConfigError("oracle invocation requires n >= 1");
        if (n > clock_->remaining()) throw BudgetExhaustedError();
        const double fx = f_(x);
        const double fxp = f_(xp);
        double sum = 0.0;
        if (a_ > 0.0) {
            for (long long t = 0; t < n; ++t) {
                const double e = rng_->uniform_sym(a_);
                const double ep = rng_->uniform_sym(a_);
                sum += (fxp + ep) - (fx + e);
            }
        } else {
            sum = static_cast<double>(n) * (fxp - fx);
        }
        clock_->consume(n);
        if (ledger_) ledger_->record(n, x, xp);
        return {sum / static_cast<double>(n), n};
    }

    long long commit(long long n, const Vec& x, const Vec& xp) override {
        const long long m = std::min(n, clock_->remaining());
        if (m <= 0) return 0;
        clock_->consume(m);
        if (ledger_) ledger_->record(m, x, xp);
        return m;
    }

    long long remaining() const override { return clock_->remaining(); }

  private:
    std::function<double(const Vec&)> f_;
    double a_;
    BudgetClock* clock_;
    RngStream* rng_;
    RegretLedger* ledger_;
};

} // namespace pcb
