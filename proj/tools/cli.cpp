#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "branchlab/bmc.hpp"
#include "branchlab/bmp.hpp"
#include "branchlab/fkpp.hpp"
#include "branchlab/gw.hpp"
#include "branchlab/io.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/repro/criticality.hpp"
#include "branchlab/repro/intervals.hpp"
#include "branchlab/repro/mutation.hpp"
#include "branchlab/spectral.hpp"
#include "branchlab/types.hpp"

#ifndef BRANCHLAB_VERSION
#define BRANCHLAB_VERSION "0.0.0"
#endif

namespace branchlab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Global {
    std::uint64_t seed = 1;
    std::uint64_t replicas = 0;
    std::string out = ".";
    int threads = 0;
};

/// What a subcommand produced: the summary plus everything that determines it.
struct Outcome {
    json summary = json::object();
    json canonical = json::object();
    /// Exit status once the summary is written; nonzero for flagged non-convergence.
    int status = kExitOk;
};

json to_json(const McEstimate& e) {
    return {{"estimate", e.estimate}, {"stderr", e.standard_error}, {"replicas", e.replicas}};
}

json to_json(const EigenvalueEstimate& e) {
    auto bound = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"value", e.value},
            {"lower", bound(e.lower)},
            {"upper", bound(e.upper)},
            {"method", std::string(to_string(e.method))},
            {"metadata", e.metadata}};
}

std::string rational_text(const repro::cpp_rational& q) {
    std::ostringstream s;
    s << q;
    return s.str();
}

std::uint64_t replicas_or(const Global& g, std::uint64_t fallback) { return g.replicas ? g.replicas : fallback; }

json base_canonical(const Global& g, const char* name) {
    return {{"subcommand", name}, {"seed", g.seed}, {"replicas", g.replicas}};
}

// gw

struct GwArgs {
    std::string law;
    int mc_horizon = 0;
};

Outcome run_gw(const Global& g, const GwArgs& a) {
    const auto law = io::load_law(a.law);
    const auto c = classify(law);
    Outcome o;
    o.canonical = base_canonical(g, "gw");
    o.canonical["law"] = io::law_to_json(law);
    o.canonical["mc_horizon"] = a.mc_horizon;
    o.summary = {{"mean", c.mean},
                 {"regime", std::string(to_string(c.regime))},
                 {"extinction_prob", c.extinction_prob},
                 {"iterations", c.solve.iterations},
                 {"converged", c.solve.converged},
                 {"residual", c.solve.residual},
                 {"aitken", c.solve.aitken}};
    if (!c.solve.converged) o.status = kExitConvergence;
    if (a.mc_horizon > 0) {
        const OffspringLaw local(std::vector<OffspringLaw::Outcome>(law.outcomes().begin(), law.outcomes().end()));
        const auto mc = survival_probability_mc(BmcSpec::uniform(local), StateIndex{0}, a.mc_horizon, 1u << 20,
                                                replicas_or(g, 100000), RandomSource(g.seed), g.threads);
        o.summary["mc_extinction"] = {{"estimate", 1.0 - mc.survival.estimate},
                                      {"stderr", mc.survival.standard_error},
                                      {"replicas", mc.survival.replicas},
                                      {"horizon", a.mc_horizon},
                                      {"cap_hits", mc.cap_hits}};
    }
    return o;
}

// bmc

struct BmcArgs {
    std::string config;
    int horizon = 50;
    std::uint64_t cap = 1000000;
    int expected_depth = -1;
    std::uint64_t trace_replicas = 100;
};

Outcome run_bmc(const Global& g, const BmcArgs& a) {
    const auto doc = io::TomlDocument::load(a.config);
    const auto cfg = io::bmc_from_config(doc);
    const auto replicas = replicas_or(g, 1000);
    Outcome o;
    o.canonical = base_canonical(g, "bmc");
    o.canonical["config"] = doc.json();
    o.canonical["options"] = {{"horizon", a.horizon}, {"cap", a.cap}, {"expected_depth", a.expected_depth},
                              {"trace_replicas", a.trace_replicas}};
    const RandomSource rng(g.seed);
    const auto surv = survival_probability_mc(cfg.spec, cfg.start, a.horizon, a.cap, replicas, rng, g.threads);
    o.summary["survival"] = to_json(surv.survival);
    o.summary["cap_hits"] = surv.cap_hits;
    o.summary["cap_bias_bound"] = surv.cap_bias_bound ? json(*surv.cap_bias_bound) : json(nullptr);
    o.summary["horizon"] = a.horizon;
    if (a.expected_depth >= 0) {
        auto counts = json::array();
        for (int n = 0; n <= a.expected_depth; ++n) counts.push_back(expected_counts(cfg.spec, cfg.start, n));
        o.summary["expected_counts"] = counts;
    }
    const auto traced = std::min(replicas, a.trace_replicas);
    if (traced > 0) {
        const auto traces = simulate_replicas(cfg.spec, cfg.start, a.horizon, a.cap, traced, rng, g.threads);
        io::CsvWriter csv(fs::path(g.out) / "bmc_traces.csv", {"replica", "generation", "count"});
        for (std::size_t i = 0; i < traces.size(); ++i) {
            for (std::size_t k = 0; k < traces[i].times.size(); ++k) {
                csv.row({static_cast<double>(i), traces[i].times[k], static_cast<double>(traces[i].counts[k])});
            }
        }
        o.summary["traces_csv"] = "bmc_traces.csv";
    }
    return o;
}

// spectral

struct SpectralArgs {
    std::string config;
    std::string mode = "trunc";
    std::vector<int> depths{4, 8, 16, 32};
    int n_max = 64;
    int depth = 8;
};

Outcome run_spectral(const Global& g, const SpectralArgs& a) {
    const auto doc = io::TomlDocument::load(a.config);
    const auto cfg = io::bmc_from_config(doc);
    const auto kernel = expectation_kernel(cfg.spec);
    Outcome o;
    o.canonical = base_canonical(g, "spectral");
    o.canonical["config"] = doc.json();
    o.canonical["options"] = {{"mode", a.mode}, {"depths", a.depths}, {"n_max", a.n_max}, {"depth", a.depth}};
    o.summary["mode"] = a.mode;
    if (a.mode == "trunc") {
        const auto sweep = spectral_radius_truncation(kernel, cfg.start, a.depths, g.threads);
        auto list = json::array();
        for (const auto& e : sweep.estimates) list.push_back(to_json(e));
        o.summary["estimates"] = list;
        o.summary["warnings"] = sweep.warnings;
        o.summary["lower_bound"] = sweep.lower_bound;
    } else if (a.mode == "growth") {
        o.summary["estimate"] = to_json(rho_double_prime_growth(kernel, cfg.start, a.n_max));
    } else if (a.mode == "certify") {
        const auto trunc = Truncation::breadth_first(kernel, cfg.start, a.depth);
        PerronResult perron_result;
        const auto u = perron_test_function(trunc, cfg.start, &perron_result);
        const double rho = certifiable_rate(kernel, u);
        const auto cert = certify_rho_prime(kernel, u, rho, trunc.states());
        o.summary["perron_rho"] = perron_result.rho;
        o.summary["certified_rho"] = rho;
        o.summary["margin"] = cert.margin;
        o.summary["valid"] = cert.valid;
        o.summary["checked_states"] = cert.checked_states.size();
        o.summary["worst_state"] = cert.worst_state.id;
    } else if (a.mode == "reversible") {
        const auto r = reversible_criterion_check(kernel, cfg.start, a.n_max);
        o.summary["c"] = r.c;
        o.summary["support"] = r.support;
        o.summary["ratio_defined"] = r.ratio_defined;
        o.summary["violation"] = r.violation;
        o.summary["c_growth"] = r.c_growth;
        o.summary["hypotheses_hold"] = r.hypotheses_hold;
        o.summary["rho_truncation"] = r.rho_truncation;
        o.summary["rho_growth"] = r.rho_growth;
        o.summary["agree"] = r.agree;
    } else {
        throw ValidationError("--mode must be trunc, growth, certify or reversible");
    }
    return o;
}

// bmp

struct BmpArgs {
    std::string config;
    std::string mode = "survival";
    double start = 0.0;
    double horizon = 10.0;
    double dt = 0.01;
    std::uint64_t cap = 100000;
    std::vector<double> window;
    bool monte_carlo = false;
};

Outcome run_bmp(const Global& g, const BmpArgs& a) {
    const auto doc = io::TomlDocument::load(a.config);
    const auto motion = io::motion_from_config(doc);
    const auto branch = io::branch_from_config(doc);
    Outcome o;
    o.canonical = base_canonical(g, "bmp");
    o.canonical["config"] = doc.json();
    o.canonical["options"] = {{"mode", a.mode}, {"start", a.start}, {"horizon", a.horizon}, {"dt", a.dt},
                              {"cap", a.cap},   {"window", a.window}, {"mc", a.monte_carlo}};
    BmpConfig cfg;
    cfg.dt = a.dt;
    cfg.horizon = a.horizon;
    cfg.cap = a.cap;
    cfg.replicas = replicas_or(g, 1000);
    cfg.seed = g.seed;
    cfg.validate();
    const RandomSource rng(g.seed);
    o.summary["mode"] = a.mode;
    if (a.mode == "survival") {
        const auto s = bmp_survival_mc(motion, branch, a.start, cfg, rng, g.threads);
        o.summary["survival"] = to_json(s.survival);
        o.summary["cap_hits"] = s.cap_hits;
    } else if (a.mode == "mass") {
        o.summary["mass_mc"] = to_json(mass_mc(motion, branch, a.start, cfg, rng, g.threads));
        if (motion.kind != MotionKind::ctmc) o.summary["mass_pde"] = expected_mass_pde(motion, branch, a.start, a.horizon);
    } else if (a.mode == "lambda") {
        const auto e = a.monte_carlo ? lambda_double_prime_mc(motion, branch, a.start, a.horizon, cfg, rng, g.threads)
                                     : lambda_double_prime_estimate(motion, branch, a.start, a.horizon);
        o.summary["estimate"] = to_json(e);
    } else if (a.mode == "total") {
        const auto r = total_mass_estimate(motion, branch, a.start, cfg, rng, g.threads);
        o.summary["total_mass"] = to_json(r.mass);
        o.summary["censored"] = r.censored;
        o.summary["warning"] = r.warning ? json(*r.warning) : json(nullptr);
    } else if (a.mode == "local") {
        if (a.window.size() != 2) throw ValidationError("--window needs two numbers lo hi");
        o.summary["local_survival"] =
            to_json(local_survival_mc(motion, branch, a.start, a.window[0], a.window[1], cfg, rng, g.threads));
    } else {
        throw ValidationError("--mode must be survival, mass, lambda, total or local");
    }
    return o;
}

// fkpp

struct FkppArgs {
    std::string config;
    std::string mode = "stationary";
    double t_end = 10.0;
    double dt = 1e-3;
    double tol = 1e-8;
    double duality_t = 2.0;
};

ScalarField growth_potential(const BranchField& branch) {
    const double bound = branch.rate_bound() * std::max(1.0, static_cast<double>(branch.max_count()));
    return ScalarField([branch](double x) { return branch.growth(x); }, -bound, bound);
}

void write_field(const fs::path& path, const Grid1D& grid, const std::vector<std::vector<double>>& columns,
                 const std::vector<std::string>& names) {
    std::vector<std::string> header{"x"};
    header.insert(header.end(), names.begin(), names.end());
    io::CsvWriter csv(path, header);
    for (int i = 0; i < grid.n_nodes(); ++i) {
        std::vector<double> row{grid.x(i)};
        for (const auto& c : columns) row.push_back(c[static_cast<std::size_t>(i)]);
        csv.row(row);
    }
}

Outcome run_fkpp(const Global& g, const FkppArgs& a) {
    const auto doc = io::TomlDocument::load(a.config);
    const auto problem = io::fkpp_from_config(doc);
    Outcome o;
    o.canonical = base_canonical(g, "fkpp");
    o.canonical["config"] = doc.json();
    o.canonical["options"] = {{"mode", a.mode}, {"t_end", a.t_end}, {"dt", a.dt}, {"tol", a.tol},
                              {"duality_t", a.duality_t}};
    o.summary["mode"] = a.mode;
    const auto csv = fs::path(g.out) / "fkpp_field.csv";
    if (a.mode == "parabolic") {
        const auto sol = solve_parabolic(problem, a.t_end, a.dt, {a.t_end / 4, a.t_end / 2, a.t_end});
        std::vector<std::string> names;
        for (double t : sol.times) names.push_back("t=" + io::format_double(t));
        write_field(csv, problem.grid, sol.fields, names);
        o.summary["times"] = sol.times;
        o.summary["max_clamp"] = sol.max_clamp;
        o.summary["steps"] = sol.steps;
    } else if (a.mode == "stationary") {
        const auto r = stationary_monotone(problem, 0.0, 1e-12);
        write_field(csv, problem.grid, {r.field}, {"u"});
        o.summary["sweeps"] = r.sweeps;
        o.summary["residual"] = r.residual;
        o.summary["shift"] = r.shift;
        o.summary["linear_growth"] = r.linear_growth;
        o.summary["degenerate"] = r.degenerate;
        o.summary["max"] = *std::max_element(r.field.begin(), r.field.end());
    } else if (a.mode == "longtime") {
        const auto r = maximal_stationary_via_longtime(problem, a.t_end, a.dt, a.tol);
        write_field(csv, problem.grid, {r.field}, {"u"});
        o.summary["change"] = r.change;
        o.summary["settled"] = r.settled;
        o.summary["warning"] = r.warning ? json(*r.warning) : json(nullptr);
        o.summary["max"] = *std::max_element(r.field.begin(), r.field.end());
    } else if (a.mode == "duality") {
        DualitySettings s;
        s.t = a.duality_t;
        s.replicas = replicas_or(g, 100000);
        s.pde_dt = a.dt;
        s.seed = g.seed;
        const auto reports = mckean_duality_check(problem, {problem.initial}, s, g.threads);
        auto points = json::array();
        for (const auto& p : reports.front().points) {
            points.push_back({{"x", p.x}, {"pde", p.pde}, {"mc", to_json(p.mc)}, {"standardized", p.standardized}});
        }
        o.summary["points"] = points;
        o.summary["max_standardized"] = reports.front().max_standardized;
    } else if (a.mode == "eigenvalue") {
        o.summary["estimate"] = to_json(principal_eigenvalue_1d(problem, growth_potential(problem.branch)));
    } else {
        throw ValidationError("--mode must be parabolic, stationary, longtime, duality or eigenvalue");
    }
    return o;
}

// repro

struct ReproArgs {
    std::string example;
    int n = 3;
    double sigma = 0.05;
    double kappa = -0.7;
    int n_max = 256;
    std::vector<double> horizons;
    std::string mode = "killing_g";
    double epsilon = 0.1;
};

Outcome run_repro(const Global& g, const ReproArgs& a) {
    Outcome o;
    o.canonical = base_canonical(g, "repro");
    o.canonical["options"] = {{"example", a.example}, {"n", a.n},         {"sigma", a.sigma},
                              {"kappa", a.kappa},     {"n_max", a.n_max}, {"horizons", a.horizons},
                              {"mode", a.mode},       {"epsilon", a.epsilon}};
    o.summary["example"] = a.example;
    const RandomSource rng(g.seed);
    if (a.example == "intervals") {
        if (a.n < 1 || a.n > 60) throw ValidationError("--n must lie in [1, 60]");
        const auto c = repro::IntervalConstruction::build(a.n + 1);
        auto s = json::array(), av = json::array();
        for (const auto& v : c.S) s.push_back(v.str());
        for (std::size_t k = 1; k < c.a.size(); ++k) av.push_back(c.a[k].str());
        const auto avg = repro::interval_time_averages(a.n);
        o.summary["S"] = s;
        o.summary["a"] = av;
        o.summary["n"] = a.n;
        o.summary["avg_at_Sn"] = rational_text(avg.at_s);
        o.summary["avg_at_Sn_plus_a"] = rational_text(avg.at_s_plus_a);
        o.summary["avg_at_Sn_value"] = avg.at_s.convert_to<double>();
        o.summary["avg_at_Sn_plus_a_value"] = avg.at_s_plus_a.convert_to<double>();
        // Geometric series 4 sum_{n>=1} 9^-n, summed exactly in closed form.
        o.summary["rescaled_measure"] = rational_text(repro::cpp_rational(4, 9) / (1 - repro::cpp_rational(1, 9)));
        o.summary["rescaled_measure_partial"] = rational_text(repro::rescaled_set_measure(a.n));
        if (g.replicas > 0) {
            auto fk = json::array();
            for (int n = 1; n <= std::min(a.n, 3); ++n) {
                const auto e = repro::counterexample_fk_mc(a.sigma, a.kappa, n, true, g.replicas, rng.replica(n),
                                                           {0.05, 0.01, g.threads});
                fk.push_back({{"n", n},
                              {"T", e.horizon},
                              {"log_estimate", e.log_estimate},
                              {"relative_stderr", e.log_standard_error},
                              {"ess", e.effective_sample_size},
                              {"warning", e.warning ? json(*e.warning) : json(nullptr)}});
            }
            o.summary["feynman_kac"] = fk;
        }
    } else if (a.example == "mutation") {
        const auto w = repro::mutation_growth(a.n_max);
        o.summary["window"] = {w.first, w.last};
        o.summary["window_max"] = w.window_max;
        o.summary["window_max_at"] = w.argmax;
        o.summary["window_min"] = w.window_min;
        o.summary["window_min_at"] = w.argmin;
        io::CsvWriter csv(fs::path(g.out) / "mutation_growth.csv", {"n", "root"});
        for (std::size_t n = 1; n < w.roots.size(); ++n) csv.row({static_cast<double>(n), w.roots[n]});
        std::vector<std::uint64_t> horizons;
        for (double h : a.horizons.empty() ? std::vector<double>{16, 64, 256} : a.horizons) {
            horizons.push_back(static_cast<std::uint64_t>(h));
        }
        const auto rep = repro::mutation_survival_mc(horizons, replicas_or(g, 10000), rng, g.threads);
        auto list = json::array();
        for (const auto& h : rep.horizons) {
            list.push_back({{"horizon", h.horizon}, {"survival", to_json(h.survival)}, {"frequency", to_json(h.frequency)}});
        }
        o.summary["survival"] = list;
        o.summary["worst_switch_ratio"] = rep.worst_switch_ratio;
    } else if (a.example == "criticality") {
        repro::CriticalitySettings s;
        s.epsilon = a.epsilon;
        s.threads = g.threads;
        const auto mode = repro::parse_criticality_mode(a.mode);
        const auto points = repro::criticality_example_mc(
            mode, a.horizons.empty() ? std::vector<double>{100, 200, 400} : a.horizons, replicas_or(g, 2000), rng, s);
        auto list = json::array();
        for (const auto& p : points) {
            list.push_back({{"horizon", p.horizon},
                            {"frequency", to_json(p.frequency)},
                            {"cap_hits", p.cap_hits},
                            {"conditional", p.conditional ? to_json(*p.conditional) : json(nullptr)}});
        }
        o.summary["mode"] = a.mode;
        o.summary["points"] = list;
    } else {
        throw ValidationError("--example must be mutation, intervals or criticality");
    }
    return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"branchlab: branching process simulation and spectral analysis", "branchlab"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--replicas", g.replicas, "Monte Carlo replicas (0 = command default)");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = BRANCHLAB_THREADS or all cores)");
    app.set_version_flag("--version", BRANCHLAB_VERSION);

    std::function<Outcome()> action;
    const char* name = "";

    GwArgs gw_args;
    auto* gw = app.add_subcommand("gw", "Galton-Watson extinction probability and regime");
    gw->add_option("--law", gw_args.law, "offspring law JSON")->required();
    gw->add_option("--mc-horizon", gw_args.mc_horizon, "also estimate extinction by simulation to this generation");
    gw->callback([&] { name = "gw"; action = [&] { return run_gw(g, gw_args); }; });

    BmcArgs bmc_args;
    auto* bmc = app.add_subcommand("bmc", "discrete-time branching Markov chain simulation");
    bmc->add_option("--config", bmc_args.config, "space and law TOML")->required();
    bmc->add_option("--horizon", bmc_args.horizon)->capture_default_str();
    bmc->add_option("--cap", bmc_args.cap)->capture_default_str();
    bmc->add_option("--expected-depth", bmc_args.expected_depth, "exact E[N_n] for n up to this depth");
    bmc->add_option("--trace-replicas", bmc_args.trace_replicas)->capture_default_str();
    bmc->callback([&] { name = "bmc"; action = [&] { return run_bmc(g, bmc_args); }; });

    SpectralArgs sp_args;
    auto* spectral = app.add_subcommand("spectral", "spectral radius, growth and certificates of a kernel");
    spectral->add_option("--config", sp_args.config, "space and law TOML")->required();
    spectral->add_option("--mode", sp_args.mode)
        ->check(CLI::IsMember({"trunc", "growth", "certify", "reversible"}))
        ->capture_default_str();
    spectral->add_option("--depths", sp_args.depths)->delimiter(',');
    spectral->add_option("--n-max", sp_args.n_max)->capture_default_str();
    spectral->add_option("--depth", sp_args.depth, "truncation depth for certify")->capture_default_str();
    spectral->callback([&] { name = "spectral"; action = [&] { return run_spectral(g, sp_args); }; });

    BmpArgs bmp_args;
    auto* bmp = app.add_subcommand("bmp", "continuous-time branching process simulation");
    bmp->add_option("--config", bmp_args.config, "motion and branch TOML")->required();
    bmp->add_option("--mode", bmp_args.mode)
        ->check(CLI::IsMember({"survival", "mass", "lambda", "total", "local"}))
        ->capture_default_str();
    bmp->add_option("--start", bmp_args.start)->capture_default_str();
    bmp->add_option("--horizon", bmp_args.horizon)->capture_default_str();
    bmp->add_option("--dt", bmp_args.dt)->capture_default_str();
    bmp->add_option("--cap", bmp_args.cap)->capture_default_str();
    bmp->add_option("--window", bmp_args.window)->expected(2);
    bmp->add_flag("--mc", bmp_args.monte_carlo, "growth slope from simulation instead of the PDE");
    bmp->callback([&] { name = "bmp"; action = [&] { return run_bmp(g, bmp_args); }; });

    FkppArgs fk_args;
    auto* fkpp = app.add_subcommand("fkpp", "FKPP solves and duality checks");
    fkpp->add_option("--config", fk_args.config, "problem TOML")->required();
    fkpp->add_option("--mode", fk_args.mode)
        ->check(CLI::IsMember({"parabolic", "stationary", "longtime", "duality", "eigenvalue"}))
        ->capture_default_str();
    fkpp->add_option("--t-end", fk_args.t_end)->capture_default_str();
    fkpp->add_option("--dt", fk_args.dt)->capture_default_str();
    fkpp->add_option("--tol", fk_args.tol)->capture_default_str();
    fkpp->add_option("--t", fk_args.duality_t, "duality time")->capture_default_str();
    fkpp->callback([&] { name = "fkpp"; action = [&] { return run_fkpp(g, fk_args); }; });

    ReproArgs re_args;
    auto* repro = app.add_subcommand("repro", "worked examples");
    repro->add_option("--example", re_args.example)
        ->check(CLI::IsMember({"mutation", "intervals", "criticality"}))
        ->required();
    repro->add_option("--n", re_args.n)->capture_default_str();
    repro->add_option("--sigma", re_args.sigma)->capture_default_str();
    repro->add_option("--kappa", re_args.kappa)->capture_default_str();
    repro->add_option("--n-max", re_args.n_max)->capture_default_str();
    repro->add_option("--horizons", re_args.horizons)->delimiter(',');
    repro->add_option("--mode", re_args.mode)->capture_default_str();
    repro->add_option("--epsilon", re_args.epsilon)->capture_default_str();
    repro->callback([&] { name = "repro"; action = [&] { return run_repro(g, re_args); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        set_default_threads(g.threads);
        fs::create_directories(g.out);
        auto o = action();
        o.summary["config_hash"] = io::config_hash(o.canonical);
        o.summary["seed"] = g.seed;
        o.summary["version"] = BRANCHLAB_VERSION;
        io::write_json(fs::path(g.out) / (std::string(name) + ".json"), o.summary);
        out << o.summary.dump(2) << '\n';
        if (o.status == kExitConvergence) err << "error: iteration cap reached before convergence\n";
        return o.status;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace branchlab::cli
