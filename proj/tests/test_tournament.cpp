#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "pcbandit/environments.hpp"
#include "pcbandit/tournament.hpp"

using namespace pcb;

namespace {

// Oracle wrapper that counts invocations per n, used to audit match budgets.
class CountingOracle : public ComparisonOracle {
  public:
    CountingOracle(ComparisonOracle& inner) : inner_(&inner) {}
    OracleReply invoke(long long n, const Vec& x, const Vec& xp) override {
        ++invocations;
        return inner_->invoke(n, x, xp);
    }
    long long commit(long long n, const Vec& x, const Vec& xp) override {
        return inner_->commit(n, x, xp);
    }
    long long remaining() const override { return inner_->remaining(); }
    long long invocations = 0;

  private:
    ComparisonOracle* inner_;
};

UcbParams basic_ucb(double M, long long T) {
    UcbParams p;
    p.M = M;
    p.C1 = 0.0;
    p.C2 = 0.0;
    p.mode = ConstantMode::Theoretical;
    p.grid_points = 4;
    p.log_T = std::log(static_cast<double>(T));
    return p;
}

} // namespace

TEST_CASE("tournament_constants formulas") {
    TournamentConfig cfg;
    cfg.ucb.M = 2.0;
    cfg.ucb.C1 = 0.5;
    cfg.ucb.C2 = 0.1;
    const int nu = 3;
    const long long T = 1000;
    const double lg = std::log(5.0 * nu * static_cast<double>(T));

    cfg.ucb.mode = ConstantMode::Theoretical;
    tournament_constants(cfg, nu, T);
    CHECK(cfg.C2p == Catch::Approx((12.0 * 3 + 116.0 * 2.0) * 0.1 * 9.0 * std::pow(lg, 1.5)));
    const double root_t = 68.0 * 2.0 + 85.0 * std::sqrt(0.5);
    CHECK(cfg.C3 == Catch::Approx(root_t * root_t * 4.0 * 81.0 * lg * lg * lg));

    cfg.ucb.mode = ConstantMode::Practical;
    tournament_constants(cfg, nu, T);
    CHECK(cfg.C2p == Catch::Approx((3.0 + 2.0) * 0.1 * 9.0 * std::pow(lg, 1.5)));
    const double root_p = 2.0 + std::sqrt(0.5);
    CHECK(cfg.C3 == Catch::Approx(root_p * root_p * 4.0 * 81.0 * lg * lg * lg));
}

TEST_CASE("single_elim plays m - 1 matches and zero-noise winner is the argmax") {
    auto f3 = make_synthetic("f3", 1);
    for (std::size_t m : {2u, 5u, 8u}) {
        BudgetClock clock(1000000);
        RngStream rng(3, 0, 0);
        AveragingOracle base(f3.f, 0.0, clock, rng);
        CountingOracle oracle(base);

        std::vector<std::size_t> entrants(m);
        std::vector<Vec> champions(m);
        std::size_t best = 0;
        RngStream vals(50 + m, 0, 0);
        for (std::size_t i = 0; i < m; ++i) {
            entrants[i] = i;
            champions[i] = {vals.uniform01()};
            if (f3.f(champions[i]) > f3.f(champions[best])) best = i;
        }
        const std::size_t winner = single_elim(entrants, champions, 10, oracle);
        CHECK(winner == best);
        CHECK(oracle.invocations == static_cast<long long>(m) - 1);
        CHECK(clock.used() == 10 * (static_cast<long long>(m) - 1));
    }
}

TEST_CASE("threshold elimination keeps ties and cuts large gaps at zero noise") {
    auto f3 = make_synthetic("f3", 1);
    BudgetClock clock(1000000);
    RngStream rng(4, 0, 0);
    AveragingOracle oracle(f3.f, 0.0, clock, rng);

    // equal champions: everyone retained even with C2' = 0 (y = 0 <= eps)
    std::vector<Vec> equal = {{0.5}, {0.5}, {0.5}};
    auto kept = threshold_eliminate(0, {0, 1, 2}, equal, 10, 0.25, 0.0, oracle);
    CHECK(kept.size() == 3);

    // gap beyond eps + C2' eliminates
    std::vector<Vec> gapped = {{0.0}, {0.9}, {0.05}};
    kept = threshold_eliminate(0, {0, 1, 2}, gapped, 10, 0.25, 0.0, oracle);
    // f3 decreasing: champion 1 is 0.45 below champion 0 -> eliminated;
    // champion 2 is 0.025 below -> retained
    CHECK(kept == std::vector<std::size_t>{0, 2});
}

TEST_CASE("noisy threshold retention keeps zero-gap cubes") {
    // champions of equal value, bounded noise: retention frequency of each
    // non-winner at N = 100 is >= 1 - delta for delta = 0.05
    auto f3 = make_synthetic("f3", 1);
    int retained = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        BudgetClock clock(1000);
        RngStream rng(4000 + t, 0, 0);
        AveragingOracle oracle(f3.f, 0.1, clock, rng);
        std::vector<Vec> champions = {{0.5}, {0.5}};
        auto kept = threshold_eliminate(0, {0, 1}, champions, 100, 0.25, 0.0, oracle);
        if (kept.size() == 2) ++retained;
    }
    CHECK(static_cast<double>(retained) / trials >= 0.95);
}

TEST_CASE("single active cube: all budget goes to champion search plus commit") {
    auto f4 = make_synthetic("f4", 1);
    Domain dom = Domain::unit_box(1);
    dom.hi = {0.32}; // only the first of 3 cubes survives the box
    BudgetClock clock(500);
    RngStream rng(6, 0, 0);
    AveragingOracle base(f4.f, 0.0, clock, rng);
    CountingOracle oracle(base);

    TournamentConfig cfg;
    cfg.J = 3;
    cfg.k = 2;
    cfg.ucb = basic_ucb(1.0, 500);
    cfg.C2p = 0.0;
    cfg.C3 = 2.0;
    auto trace = run_tournament(dom, cfg, oracle);
    CHECK(clock.used() == 500);
    for (const auto& round : trace.rounds) CHECK(round.active.size() == 1);
}

TEST_CASE("immediate commit when the horizon cannot fund the first round") {
    auto f4 = make_synthetic("f4", 2);
    Domain dom = Domain::unit_box(2);
    BudgetClock clock(20); // N_tot at zeta=1 is 3 * 8 * ceil(4 C3) = 96
    RngStream rng(7, 0, 0);
    AveragingOracle oracle(f4.f, 0.0, clock, rng);

    TournamentConfig cfg;
    cfg.J = 3;
    cfg.k = 2;
    cfg.ucb = basic_ucb(1.0, 20);
    cfg.C2p = 0.0;
    cfg.C3 = 1.0;
    auto trace = run_tournament(dom, cfg, oracle);
    CHECK(clock.used() == 20);
    CHECK(trace.rounds.empty());
    CHECK(trace.commit_periods == 20);
    // commit pair is the lex-smallest cube's anchor at zeta = 1
    CHECK(trace.commit_point[0] == Catch::Approx(1.0 / 6.0));
    CHECK(trace.commit_point[1] == Catch::Approx(1.0 / 6.0));
}

TEST_CASE("zero-noise tournament never eliminates the best cube") {
    auto f1 = make_synthetic("f1", 2);
    Domain dom = Domain::unit_box(2);
    // the global max of f1 sits at the origin: cube (1,1)
    for (long long T : {3000LL, 20000LL}) {
        BudgetClock clock(T);
        RngStream rng(8, 0, 0);
        AveragingOracle oracle(f1.f, 0.0, clock, rng);

        TournamentConfig cfg;
        cfg.J = 3;
        cfg.k = 2;
        cfg.ucb = basic_ucb(1.0, T);
        cfg.C2p = 0.05;
        cfg.C3 = 4.0;
        auto trace = run_tournament(dom, cfg, oracle);
        CHECK(clock.used() == T);
        bool eliminations_seen = false;
        const CubeIndex best{{1, 1}};
        for (const auto& round : trace.rounds) {
            bool found = false;
            for (const auto& idx : round.active)
                if (idx == best) found = true;
            CHECK(found);
            if (round.active.size() < 9) eliminations_seen = true;
        }
        CHECK(eliminations_seen); // thresholds do bite at these settings
    }
}

namespace {
// Asserts every queried action satisfies the feasible region.
class FeasibilityCheckingOracle : public ComparisonOracle {
  public:
    FeasibilityCheckingOracle(ComparisonOracle& inner, const Domain& dom)
        : inner_(&inner), dom_(&dom) {}
    OracleReply invoke(long long n, const Vec& x, const Vec& xp) override {
        REQUIRE(dom_->contains(x));
        REQUIRE(dom_->contains(xp));
        return inner_->invoke(n, x, xp);
    }
    long long commit(long long n, const Vec& x, const Vec& xp) override {
        REQUIRE(dom_->contains(x));
        REQUIRE(dom_->contains(xp));
        return inner_->commit(n, x, xp);
    }
    long long remaining() const override { return inner_->remaining(); }

  private:
    ComparisonOracle* inner_;
    const Domain* dom_;
};
} // namespace

TEST_CASE("feasible-region runs only ever query feasible pairs") {
    auto f4 = make_synthetic("f4", 2);
    Domain dom = Domain::unit_box(2);
    dom.feasible.push_back({{1.0, 1.0}, 1.0}); // x1 + x2 <= 1, contains x* = (1/4, 1/4)

    BudgetClock clock(2000);
    RngStream rng(19, 0, 0);
    AveragingOracle base(f4.f, 0.1, clock, rng);
    FeasibilityCheckingOracle oracle(base, dom);
    TournamentConfig cfg;
    cfg.J = 3;
    cfg.k = 2;
    cfg.ucb = basic_ucb(1.0, 2000);
    cfg.ucb.C1 = 0.05;
    cfg.C2p = 0.05;
    cfg.C3 = 2.0;
    run_tournament(dom, cfg, oracle);
    CHECK(clock.used() == 2000);
}

TEST_CASE("budget conservation across randomized tournament configs") {
    RngStream seeds(77, 0, 0);
    for (int rep = 0; rep < 10; ++rep) {
        const int d = static_cast<int>(seeds.uniform_int(1, 2));
        auto obj = make_synthetic(rep % 2 == 0 ? "f1" : "f4", d);
        Domain dom = Domain::unit_box(d);
        const long long T = seeds.uniform_int(1, 4000);
        BudgetClock clock(T);
        RngStream rng(900 + rep, 0, 0);
        AveragingOracle oracle(obj.f, 0.1, clock, rng);

        TournamentConfig cfg;
        cfg.J = static_cast<int>(seeds.uniform_int(2, 3));
        cfg.k = static_cast<int>(seeds.uniform_int(1, 3));
        cfg.ucb = basic_ucb(seeds.uniform(0.5, 2.0), T);
        cfg.ucb.C1 = 0.05;
        cfg.ucb.C2 = 0.01;
        cfg.C2p = seeds.uniform01() < 0.3 ? 0.0 : seeds.uniform(0.0, 0.5);
        cfg.C3 = seeds.uniform(0.5, 8.0);
        run_tournament(dom, cfg, oracle);
        CHECK(clock.used() == T);
    }
}
