#pragma once

// Main tournament successive-elimination loop over cubes: per-round champion
// search (iterated BatchLinUCB), a single-elimination bracket across cube
// champions, and threshold retention against the bracket winner. Budget
// accounting is exact-by-consumption: the round-entry guard uses the nominal
// 3 (|A|-1) N_zeta round budget, but every oracle call re-checks the clock
// and any exhaustion falls through to the commit path, so a run always
// consumes exactly T.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "pcbandit/errors.hpp"
#include "pcbandit/geometry.hpp"
#include "pcbandit/linucb.hpp"
#include "pcbandit/oracle.hpp"

namespace pcb {

struct TournamentConfig {
    int J = 3;
    int k = 2;
    UcbParams ucb;
    double C2p = 0.0; // elimination threshold constant
    double C3 = 1.0;  // round budget constant
};

// C2' and C3 from (mode, M, C1, C2, nu, T). Practical mode replaces the
// leading numeric multipliers with one; scale knobs cover the recommended
// constant rescaling for desk-size horizons.
inline void tournament_constants(TournamentConfig& cfg, int nu, long long T, double c2p_scale = 1.0,
                                 double c3_scale = 1.0) {
    const double M = cfg.ucb.M;
    const double lg = std::log(5.0 * nu * static_cast<double>(T));
    const double nu2 = static_cast<double>(nu) * nu;
    const double nu4 = nu2 * nu2;
    if (cfg.ucb.mode == ConstantMode::Theoretical) {
        cfg.C2p = (12.0 * nu + 116.0 * M) * cfg.ucb.C2 * nu2 * std::pow(lg, 1.5);
        const double root = 68.0 * M + 85.0 * std::sqrt(cfg.ucb.C1);
        cfg.C3 = root * root * M * M * nu4 * lg * lg * lg;
    } else {
        cfg.C2p = (nu + M) * cfg.ucb.C2 * nu2 * std::pow(lg, 1.5);
        const double root = M + std::sqrt(cfg.ucb.C1);
        cfg.C3 = root * root * M * M * nu4 * lg * lg * lg;
    }
    cfg.C2p *= c2p_scale;
    cfg.C3 *= c3_scale;
}

struct TournamentTrace {
    struct Round {
        long long zeta = 0;
        long long n_zeta = 0;
        std::vector<CubeIndex> active;
        CubeIndex winner;
        bool completed = false;
        long long remaining_after = 0;
    };
    std::vector<Round> rounds;
    long long commit_periods = 0;
    Vec commit_point;
};

// Single-elimination bracket over champions (indices into a lex-ordered
// list). With odd cardinality the lex-smallest entry takes the bye and the
// rest pair adjacently. j' advances iff y = O(N, x_j, x_j') >= 0.
inline std::size_t single_elim(const std::vector<std::size_t>& entrants,
                               const std::vector<Vec>& champions, long long n_zeta,
                               ComparisonOracle& oracle) {
    std::vector<std::size_t> alive = entrants;
    while (alive.size() > 1) {
        std::vector<std::size_t> next;
        std::size_t start = 0;
        if (alive.size() % 2 == 1) {
            next.push_back(alive[0]); // bye
            start = 1;
        }
        for (std::size_t i = start; i + 1 < alive.size(); i += 2) {
            const std::size_t a = alive[i], b = alive[i + 1];
            const OracleReply r = oracle.invoke(n_zeta, champions[a], champions[b]);
            next.push_back(r.y >= 0.0 ? b : a);
        }
        std::sort(next.begin(), next.end());
        alive = std::move(next);
    }
    return alive.front();
}

// Retention against the bracket winner: y = O(N, x_j, x_winner) estimates
// f(x_winner) - f(x_j); j stays iff y <= eps + C2'. The winner always stays.
inline std::vector<std::size_t> threshold_eliminate(std::size_t winner,
                                                    const std::vector<std::size_t>& active,
                                                    const std::vector<Vec>& champions,
                                                    long long n_zeta, double eps, double c2p,
                                                    ComparisonOracle& oracle) {
    std::vector<std::size_t> next = {winner};
    for (std::size_t j : active) {
        if (j == winner) continue;
        const OracleReply r = oracle.invoke(n_zeta, champions[j], champions[winner]);
        if (r.y <= eps + c2p) next.push_back(j);
    }
    std::sort(next.begin(), next.end());
    return next;
}

inline TournamentTrace run_tournament(const Domain& dom, const TournamentConfig& cfg,
                                      ComparisonOracle& oracle) {
    if (!(cfg.C3 > 0.0)) throw ConfigError("tournament requires C3 > 0");
    const std::vector<Cube> cubes = partition(dom, cfg.J, cfg.ucb.grid_points);
    if (cubes.empty()) throw InfeasibleRegionError("no feasible cube in the partition");
    std::vector<FeatureMap> fms;
    fms.reserve(cubes.size());
    for (const auto& c : cubes) fms.push_back(make_feature_map(cfg.k, dom.d, c.anchor));

    std::vector<std::size_t> active(cubes.size());
    for (std::size_t i = 0; i < cubes.size(); ++i) active[i] = i;

    std::vector<Vec> champions(cubes.size());
    bool have_champions = false;

    TournamentTrace trace;
    auto commit_rest = [&]() {
        const Vec point = have_champions ? champions[active.front()] : cubes[active.front()].anchor;
        trace.commit_periods = oracle.commit(oracle.remaining(), point, point);
        trace.commit_point = point;
    };

    for (long long zeta = 1;; ++zeta) {
        if (oracle.remaining() <= 0) {
            commit_rest();
            break;
        }
        const double eps = std::pow(2.0, -static_cast<double>(zeta));
        const double raw = std::ceil(cfg.C3 / (eps * eps));
        const long long n_zeta = raw > 2e18 ? static_cast<long long>(2e18)
                                            : std::max(1LL, static_cast<long long>(raw));
        const double n_tot = 3.0 * static_cast<double>(active.size() - 1) * static_cast<double>(n_zeta);
        if (static_cast<double>(oracle.remaining()) < n_tot) {
            commit_rest();
            break;
        }

        TournamentTrace::Round round;
        round.zeta = zeta;
        round.n_zeta = n_zeta;
        for (std::size_t j : active) round.active.push_back(cubes[j].idx);

        try {
            std::vector<Vec> fresh(cubes.size());
            for (std::size_t j : active)
                fresh[j] = iterative_batch_lin_ucb(cubes[j], fms[j], n_zeta, cfg.ucb, oracle,
                                                   dom.feasible);
            for (std::size_t j : active) champions[j] = fresh[j];
            have_champions = true;

            const std::size_t winner = single_elim(active, champions, n_zeta, oracle);
            round.winner = cubes[winner].idx;
            active = threshold_eliminate(winner, active, champions, n_zeta, eps, cfg.C2p, oracle);
            round.completed = true;
        } catch (const BudgetExhaustedError&) {
            trace.rounds.push_back(std::move(round));
            commit_rest();
            break;
        }
        round.remaining_after = oracle.remaining();
        trace.rounds.push_back(std::move(round));
    }
    return trace;
}

} // namespace pcb
