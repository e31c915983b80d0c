#pragma once

// Experiment runner: JSON config -> seeded replications -> results.csv,
// summary.csv and an optional SVG of mean relative regret with stderr
// whiskers. A cell is one resolved (algorithm, objective, parameters)
// combination; cells x T-grid x replications are run with one Philox stream
// per (master_seed, T, rep) and merged in deterministic order.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pcbandit/environments.hpp"
#include "pcbandit/errors.hpp"
#include "pcbandit/linucb.hpp"
#include "pcbandit/oracle.hpp"
#include "pcbandit/pgd.hpp"
#include "pcbandit/regret.hpp"
#include "pcbandit/tournament.hpp"

namespace pcb {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Small statistics helpers.

struct Moments {
    double mean = 0.0;
    double std = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        m.stderr_ = m.std / std::sqrt(static_cast<double>(xs.size()));
    }
    return m;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(xs[i]);
        my += std::log(std::max(ys[i], 1e-300));
    }
    mx /= n;
    my /= n;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(xs[i]) - mx;
        cov += dx * (std::log(std::max(ys[i], 1e-300)) - my);
        var += dx * dx;
    }
    return cov / var;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Configuration.

struct PgdSettings {
    std::optional<double> sigma, eta, alpha;
    long long beta_floor = 1;
};

struct InventorySettings {
    std::string curve = "exponential";
    NoiseSpec noise;
    double h = 2.0;
    double b = 10.0;
};

// One resolved experiment cell.
struct Cell {
    std::string algorithm; // tournament | pgd
    std::string objective; // f1..f4 | inventory
    std::string label;     // objective column value
    int d = 1;
    int k = 2;
    int J = 3;
    ConstantMode mode = ConstantMode::Practical;
    double gamma1 = 0.01;
    double gamma2 = 0.01;
    double M = 1.0;
    bool m_inv_sqrt_nu = false; // M = 1 / sqrt(nu(k, d))
    int grid_points = 10;
    long long min_batch = 1;
    double noise_half_width = -1.0; // synthetic oracle; <0 means objective default
    double c1p_scale = 1.0, c2_scale = 1.0, c2p_scale = 1.0, c3_scale = 1.0;
    std::optional<double> C2p_override, C3_override;
    PgdSettings pgd;
    InventorySettings inventory;
    double delta0 = 0.0;
    std::vector<Halfspace> halfspaces;
    PenaltyFunction penalty;
    std::string metric = "pairwise"; // pairwise | single_action
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<Cell> cells;
    std::vector<long long> t_grid;
    int replications = 50;
    std::uint64_t seed = 1;
    bool emit_traces = false;
};

namespace detail {

template <typename T>
std::vector<T> as_list(const json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

inline NoiseSpec parse_noise(const json& j, const std::string& path) {
    NoiseSpec n;
    const std::string kind = j.value("kind", "uniform");
    if (kind == "uniform") {
        n.kind = NoiseSpec::Kind::Uniform;
        if (!j.contains("half_width")) throw ConfigError(path + ".half_width missing");
        n.half_width = j.at("half_width").get<double>();
    } else if (kind == "normal") {
        n.kind = NoiseSpec::Kind::Normal;
        if (!j.contains("sd")) throw ConfigError(path + ".sd missing");
        n.sd = j.at("sd").get<double>();
    } else {
        throw ConfigError(path + ".kind must be uniform or normal");
    }
    return n;
}

inline std::string noise_label(const NoiseSpec& n) {
    std::ostringstream os;
    if (n.kind == NoiseSpec::Kind::Uniform)
        os << "uniform" << n.half_width;
    else
        os << "normal" << n.sd;
    return os.str();
}

} // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    if (j.value("schema_version", 0) != 1) throw ConfigError("schema_version must be 1");
    cfg.name = j.value("name", std::string("experiment"));
    if (!j.contains("T_grid")) throw ConfigError("T_grid missing");
    cfg.t_grid = j.at("T_grid").get<std::vector<long long>>();
    if (cfg.t_grid.empty()) throw ConfigError("T_grid empty");
    for (std::size_t i = 1; i < cfg.t_grid.size(); ++i)
        if (cfg.t_grid[i] <= cfg.t_grid[i - 1]) throw ConfigError("T_grid must be sorted ascending");
    cfg.replications = j.value("replications", 50);
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.emit_traces = j.value("emit_traces", false);

    Cell base;
    base.d = j.value("d", 1);
    base.J = j.value("J", 3);
    const std::string mode = j.value("mode", std::string("practical"));
    if (mode == "practical")
        base.mode = ConstantMode::Practical;
    else if (mode == "theoretical")
        base.mode = ConstantMode::Theoretical;
    else
        throw ConfigError("mode must be practical or theoretical");
    base.gamma1 = j.value("gamma1", 0.01);
    base.gamma2 = j.value("gamma2", 0.01);
    if (j.contains("M") && j.at("M").is_string()) {
        if (j.at("M").get<std::string>() != "inv_sqrt_nu")
            throw ConfigError("M must be a number or \"inv_sqrt_nu\"");
        base.m_inv_sqrt_nu = true;
    } else {
        base.M = j.value("M", 1.0);
    }
    base.grid_points = j.value("grid_points", 10);
    base.min_batch = j.value("min_batch", 1LL);
    base.noise_half_width = j.value("noise_half_width", -1.0);
    if (j.contains("scales")) {
        const json& s = j.at("scales");
        base.c1p_scale = s.value("c1p", 1.0);
        base.c2_scale = s.value("c2", 1.0);
        base.c2p_scale = s.value("c2p", 1.0);
        base.c3_scale = s.value("c3", 1.0);
    }
    if (j.contains("overrides")) {
        const json& o = j.at("overrides");
        if (o.contains("C2p")) base.C2p_override = o.at("C2p").get<double>();
        if (o.contains("C3")) base.C3_override = o.at("C3").get<double>();
    }
    if (j.contains("pgd")) {
        const json& p = j.at("pgd");
        if (p.contains("sigma")) base.pgd.sigma = p.at("sigma").get<double>();
        if (p.contains("eta")) base.pgd.eta = p.at("eta").get<double>();
        if (p.contains("alpha")) base.pgd.alpha = p.at("alpha").get<double>();
        base.pgd.beta_floor = p.value("beta_floor", 1LL);
    }
    if (j.contains("domain")) {
        const json& d = j.at("domain");
        base.delta0 = d.value("delta0", 0.0);
        if (d.contains("halfspaces"))
            for (const auto& h : d.at("halfspaces"))
                base.halfspaces.push_back({h.at("a").get<Vec>(), h.at("c").get<double>()});
    }
    if (j.contains("penalty")) {
        const json& p = j.at("penalty");
        const std::string kind = p.value("kind", "zero");
        if (kind == "max_affine") {
            base.penalty.kind = PenaltyFunction::Kind::MaxAffine;
            base.penalty.scale = p.value("scale", 1.0);
            for (const auto& r : p.at("rows")) base.penalty.rows.push_back(r.get<Vec>());
            base.penalty.caps = p.at("caps").get<Vec>();
        } else if (kind != "zero") {
            throw ConfigError("penalty.kind must be zero or max_affine");
        }
    }

    const auto algorithms = detail::as_list<std::string>(j.at("algorithm"));
    const auto objectives = detail::as_list<std::string>(j.at("objective"));
    const auto ks = j.contains("k") ? detail::as_list<int>(j.at("k")) : std::vector<int>{2};

    std::vector<InventorySettings> inv_cells;
    if (j.contains("inventory")) {
        // one sweep block or a list of them (noise families differ per curve)
        std::vector<json> blocks;
        if (j.at("inventory").is_array())
            for (const auto& b : j.at("inventory")) blocks.push_back(b);
        else
            blocks.push_back(j.at("inventory"));
        for (const json& inv : blocks) {
            const auto curves = detail::as_list<std::string>(inv.at("curve"));
            const auto hs = detail::as_list<double>(inv.at("h"));
            const auto bs = detail::as_list<double>(inv.at("b"));
            std::vector<NoiseSpec> noises;
            if (inv.at("noise").is_array())
                for (const auto& n : inv.at("noise"))
                    noises.push_back(detail::parse_noise(n, "inventory.noise"));
            else
                noises.push_back(detail::parse_noise(inv.at("noise"), "inventory.noise"));
            for (const auto& c : curves)
                for (const auto& n : noises)
                    for (double h : hs)
                        for (double b : bs) inv_cells.push_back({c, n, h, b});
        }
    }

    for (const auto& algo : algorithms) {
        if (algo != "tournament" && algo != "pgd")
            throw ConfigError("algorithm must be tournament or pgd");
        for (const auto& obj : objectives) {
            for (int k : ks) {
                Cell c = base;
                c.algorithm = algo;
                c.objective = obj;
                c.k = k;
                if (obj == "inventory") {
                    if (inv_cells.empty()) throw ConfigError("inventory block missing");
                    c.d = 1;
                    c.metric = "single_action";
                    for (const auto& inv : inv_cells) {
                        Cell ci = c;
                        ci.inventory = inv;
                        std::ostringstream label; // ';' separators keep the CSV comma-free
                        label << "inventory[" << inv.curve << ";" << detail::noise_label(inv.noise)
                              << ";h" << inv.h << ";b" << inv.b << "]";
                        ci.label = label.str();
                        cfg.cells.push_back(ci);
                    }
                } else {
                    c.label = obj;
                    c.metric = "pairwise";
                    cfg.cells.push_back(c);
                }
                if (algo == "pgd" && ks.size() > 1) break; // k sweeps only vary the tournament
            }
        }
    }
    if (cfg.cells.empty()) throw ConfigError("no cells resolved from config");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    in >> j;
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Running.

struct RunResult {
    double cum_regret = 0.0;
    double rel_regret_pct = 0.0;
    long long wall_ms = 0;
    json trace; // populated only when requested
};

namespace detail {

inline UcbParams ucb_params_for(const Cell& cell, long long T) {
    UcbParams u;
    u.M = cell.m_inv_sqrt_nu ? 1.0 / std::sqrt(1.0 * feature_dim(cell.k, cell.d)) : cell.M;
    u.mode = cell.mode;
    u.log_T = std::log(static_cast<double>(T));
    const double dk = std::pow(static_cast<double>(cell.d + cell.k), cell.k);
    const double jk = std::pow(static_cast<double>(cell.J), -cell.k);
    if (cell.mode == ConstantMode::Theoretical) {
        u.C1 = cell.gamma1 + 2.0 * cell.gamma2 * u.log_T;
        u.C2 = dk * cell.M * jk;
    } else {
        u.C1 = cell.gamma1 + cell.gamma2 * u.log_T;
        u.C2 = dk * jk * u.log_T;
    }
    u.C2 *= cell.c2_scale;
    u.c1p_scale = cell.c1p_scale;
    u.grid_points = cell.grid_points;
    u.min_batch = cell.min_batch;
    return u;
}

inline TournamentConfig tournament_config_for(const Cell& cell, long long T) {
    TournamentConfig cfg;
    cfg.J = cell.J;
    cfg.k = cell.k;
    cfg.ucb = ucb_params_for(cell, T);
    const int nu = feature_dim(cell.k, cell.d);
    tournament_constants(cfg, nu, T, cell.c2p_scale, cell.c3_scale);
    if (cell.C2p_override) cfg.C2p = *cell.C2p_override;
    if (cell.C3_override) cfg.C3 = *cell.C3_override;
    return cfg;
}

inline PgdConfig pgd_config_for(const Cell& cell, long long T) {
    PgdConfig cfg;
    const double m = cell.m_inv_sqrt_nu ? 1.0 / std::sqrt(1.0 * feature_dim(cell.k, cell.d)) : cell.M;
    cfg.sigma = cell.pgd.sigma.value_or(1.0);
    cfg.eta = cell.pgd.eta.value_or(cfg.sigma / m);
    cfg.alpha = cell.pgd.alpha.value_or(1.0 / m);
    cfg.gamma1 = cell.gamma1;
    cfg.gamma2 = cell.gamma2;
    cfg.T = T;
    cfg.beta_floor = cell.pgd.beta_floor;
    return cfg;
}

inline json tournament_trace_json(const TournamentTrace& tr) {
    json rounds = json::array();
    for (const auto& r : tr.rounds) {
        json active = json::array();
        for (const auto& idx : r.active) active.push_back(idx.j);
        rounds.push_back({{"zeta", r.zeta},
                          {"n_zeta", r.n_zeta},
                          {"active_size", r.active.size()},
                          {"active", active},
                          {"winner", r.winner.j},
                          {"completed", r.completed},
                          {"remaining_after", r.remaining_after}});
    }
    return {{"rounds", rounds},
            {"commit_periods", tr.commit_periods},
            {"commit_point", tr.commit_point}};
}

inline json pgd_trace_json(const PgdTrace& tr) {
    json epochs = json::array();
    for (const auto& e : tr.epochs)
        epochs.push_back({{"tau", e.tau}, {"beta", e.beta}, {"h", e.h}, {"x", e.x}, {"g", e.g}});
    return {{"epochs", epochs},
            {"commit_periods", tr.commit_periods},
            {"commit_point", tr.commit_point}};
}

} // namespace detail

// Clairvoyant solutions are deterministic per cell; solve once and share.
struct CellContext {
    std::optional<ClairvoyantSolution> clairvoyant_solution;
    std::optional<InventoryModel> model;
};

inline CellContext make_cell_context(const Cell& cell) {
    CellContext ctx;
    if (cell.objective == "inventory") {
        ctx.model = make_inventory_model(cell.inventory.curve, cell.inventory.noise,
                                         cell.inventory.h, cell.inventory.b);
        ctx.clairvoyant_solution = clairvoyant(*ctx.model);
    }
    return ctx;
}

inline RunResult run_cell(const Cell& cell, const CellContext& ctx, long long T, int rep,
                          std::uint64_t master_seed, bool want_trace = false) {
    RunResult out;
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng(master_seed, static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(rep));
    BudgetClock clock(T);

    if (cell.objective == "inventory") {
        InventoryLedger ledger(ctx.clairvoyant_solution->r_star);
        InventoryOracle oracle(*ctx.model, clock, rng, ledger);
        Domain dom = Domain::unit_box(1);
        dom.interior_margin = cell.delta0;
        if (cell.algorithm == "tournament") {
            auto tr = run_tournament(dom, detail::tournament_config_for(cell, T), oracle);
            if (want_trace) out.trace = detail::tournament_trace_json(tr);
        } else {
            auto tr = run_pgd(dom, detail::pgd_config_for(cell, T), oracle);
            if (want_trace) out.trace = detail::pgd_trace_json(tr);
        }
        if (clock.used() != T) throw Error("budget not conserved");
        out.cum_regret = ledger.cum_regret(T);
        out.rel_regret_pct = ledger.relative_pct(T);
    } else {
        SyntheticObjective obj = make_synthetic(cell.objective, cell.d);
        const double noise = cell.noise_half_width >= 0.0 ? cell.noise_half_width
                                                          : obj.noise_half_width;
        RegretLedger ledger(obj.f_star, obj.f, cell.d, cell.penalty);
        AveragingOracle oracle(obj.f, noise, clock, rng, &ledger);
        Domain dom = Domain::unit_box(cell.d);
        dom.feasible = cell.halfspaces;
        dom.interior_margin = cell.delta0;
        if (cell.algorithm == "tournament") {
            auto tr = run_tournament(dom, detail::tournament_config_for(cell, T), oracle);
            if (want_trace) out.trace = detail::tournament_trace_json(tr);
        } else {
            auto tr = run_pgd(dom, detail::pgd_config_for(cell, T), oracle);
            if (want_trace) out.trace = detail::pgd_trace_json(tr);
        }
        if (clock.used() != T) throw Error("budget not conserved");
        if (ledger.periods() != T) throw Error("ledger periods mismatch");
        out.cum_regret = ledger.total(T);
        out.rel_regret_pct = ledger.relative_pct(T);
    }
    out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return out;
}

// ---------------------------------------------------------------------------
// Plot: self-contained SVG, mean relative regret vs T with stderr whiskers.

struct SeriesPoint {
    double t;
    double mean;
    double stderr_;
};

inline std::string render_svg(const std::vector<std::pair<std::string, std::vector<SeriesPoint>>>& series,
                              const std::string& title) {
    const double width = 760, height = 520, ml = 70, mr = 190, mt = 50, mb = 55;
    double tmin = 1e300, tmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& [name, pts] : series)
        for (const auto& p : pts) {
            tmin = std::min(tmin, p.t);
            tmax = std::max(tmax, p.t);
            ymax = std::max(ymax, p.mean + p.stderr_);
        }
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.08;
    auto sx = [&](double t) { return ml + (t - tmin) / std::max(tmax - tmin, 1e-12) * (width - ml - mr); };
    auto sy = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    // axes
    s << "<line x1=\"" << ml << "\" y1=\"" << (height - mb) << "\" x2=\"" << (width - mr)
      << "\" y2=\"" << (height - mb) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << (height - mb) << "\" x2=\"" << ml << "\" y2=\"" << mt
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double t = tmin + (tmax - tmin) * i / 5.0;
        const double y = ymin + (ymax - ymin) * i / 5.0;
        s << "<text x=\"" << sx(t) << "\" y=\"" << (height - mb + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << static_cast<long long>(t) << "</text>\n";
        char ybuf[32];
        std::snprintf(ybuf, sizeof(ybuf), "%.3g", y);
        s << "<text x=\"" << (ml - 8) << "\" y=\"" << (sy(y) + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << ybuf
          << "</text>\n";
        s << "<line x1=\"" << ml << "\" y1=\"" << sy(y) << "\" x2=\"" << (width - mr) << "\" y2=\""
          << sy(y) << "\" stroke=\"#dddddd\"/>\n";
    }
    s << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"" << (height - 14)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">T</text>\n";
    s << "<text x=\"20\" y=\"" << (mt + (height - mt - mb) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
      << (mt + (height - mt - mb) / 2) << ")\">relative regret (%)</text>\n";

    int ci = 0;
    for (const auto& [name, pts] : series) {
        const char* color = colors[ci % 8];
        std::ostringstream path;
        for (std::size_t i = 0; i < pts.size(); ++i)
            path << (i == 0 ? "M" : "L") << sx(pts[i].t) << " " << sy(pts[i].mean) << " ";
        s << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.8\"/>\n";
        for (const auto& p : pts) {
            s << "<line x1=\"" << sx(p.t) << "\" y1=\"" << sy(p.mean - p.stderr_) << "\" x2=\""
              << sx(p.t) << "\" y2=\"" << sy(p.mean + p.stderr_) << "\" stroke=\"" << color
              << "\"/>\n";
            s << "<circle cx=\"" << sx(p.t) << "\" cy=\"" << sy(p.mean) << "\" r=\"2.6\" fill=\""
              << color << "\"/>\n";
        }
        s << "<text x=\"" << (width - mr + 12) << "\" y=\"" << (mt + 16 + 18 * ci)
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << name
          << "</text>\n";
        ++ci;
    }
    s << "</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------
// run_experiment: full grid, CSV + summary + optional plot and traces.

struct ExperimentOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<int> reps_override;
    bool plot = false;
    bool traces = false;
    int threads = 0; // 0: hardware concurrency
};

inline void run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                           const ExperimentOptions& opts = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::uint64_t seed = opts.seed_override.value_or(config.seed);
    const int reps = opts.reps_override.value_or(config.replications);
    if (reps < 1) throw ConfigError("replications must be >= 1");

    std::ofstream results(fs::path(out_dir) / "results.csv");
    results << "algorithm,objective,d,k,T,rep,seed,cum_regret,rel_regret_pct,wall_ms\n";

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "algorithm,objective,d,k,T,n,cum_regret_mean,cum_regret_std,cum_regret_stderr,"
               "rel_regret_pct_mean,rel_regret_pct_std,rel_regret_pct_stderr\n";

    int n_threads = opts.threads > 0 ? opts.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;

    std::vector<std::pair<std::string, std::vector<SeriesPoint>>> series;
    for (const Cell& cell : config.cells) {
        const CellContext ctx = make_cell_context(cell);
        std::vector<SeriesPoint> pts;
        for (long long T : config.t_grid) {
            std::vector<RunResult> rows(static_cast<std::size_t>(reps));
            const bool want_trace = opts.traces || config.emit_traces;
            if (n_threads == 1 || reps == 1) {
                for (int rep = 0; rep < reps; ++rep)
                    rows[rep] = run_cell(cell, ctx, T, rep, seed, want_trace && rep == 0);
            } else {
                std::atomic<int> next{0};
                std::vector<std::thread> pool;
                const int workers = std::min(n_threads, reps);
                for (int w = 0; w < workers; ++w)
                    pool.emplace_back([&]() {
                        for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1))
                            rows[rep] = run_cell(cell, ctx, T, rep, seed, want_trace && rep == 0);
                    });
                for (auto& th : pool) th.join();
            }
            std::vector<double> cums, rels;
            for (int rep = 0; rep < reps; ++rep) {
                const RunResult& r = rows[rep];
                results << cell.algorithm << ',' << cell.label << ',' << cell.d << ',' << cell.k
                        << ',' << T << ',' << rep << ',' << seed << ',' << fmt_double(r.cum_regret)
                        << ',' << fmt_double(r.rel_regret_pct) << ',' << r.wall_ms << '\n';
                cums.push_back(r.cum_regret);
                rels.push_back(r.rel_regret_pct);
            }
            results.flush();
            const Moments mc = moments(cums);
            const Moments mr = moments(rels);
            summary << cell.algorithm << ',' << cell.label << ',' << cell.d << ',' << cell.k << ','
                    << T << ',' << reps << ',' << fmt_double(mc.mean) << ',' << fmt_double(mc.std)
                    << ',' << fmt_double(mc.stderr_) << ',' << fmt_double(mr.mean) << ','
                    << fmt_double(mr.std) << ',' << fmt_double(mr.stderr_) << '\n';
            summary.flush();
            pts.push_back({static_cast<double>(T), mr.mean, mr.stderr_});

            if (want_trace && !rows[0].trace.is_null()) {
                std::ostringstream name;
                name << "trace_" << cell.algorithm << "_" << cell.label << "_k" << cell.k << "_T"
                     << T << ".json";
                std::ofstream tr(fs::path(out_dir) / name.str());
                json wrapper = {{"algorithm", cell.algorithm}, {"objective", cell.label},
                                {"d", cell.d},                 {"k", cell.k},
                                {"T", T},                      {"rep", 0},
                                {"seed", seed},                {"trace", rows[0].trace}};
                tr << wrapper.dump(1) << '\n';
            }
        }
        std::ostringstream sname;
        sname << cell.algorithm << " " << cell.label;
        if (cell.algorithm == "tournament") sname << " k=" << cell.k;
        series.emplace_back(sname.str(), std::move(pts));
    }

    if (opts.plot) {
        std::ofstream svg(fs::path(out_dir) / "plot.svg");
        svg << render_svg(series, config.name);
    }
}

} // namespace pcb
