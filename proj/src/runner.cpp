#include "entropix/runner.hpp"
#include "entropix/confined.hpp"
#include "entropix/errors.hpp"
#include "entropix/fock.hpp"
#include "entropix/version.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace entropix::runner {

namespace {

using nlohmann::json;

// ---- grid parsing ----

std::vector<double> parse_grid(const json& j, const std::string& where) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (v.is_string() && (v == "inf" || v == "Infinity")) {
                out.push_back(std::numeric_limits<double>::infinity());
            } else {
                out.push_back(v.get<double>());
            }
        }
        return out;
    }
    if (j.is_object()) {
        const double lo = j.at("min").get<double>();
        const double hi = j.at("max").get<double>();
        if (j.contains("step")) {
            const double step = j.at("step").get<double>();
            if (!(step > 0)) throw ConfigError(where + ".step must be positive");
            for (double x = lo; x <= hi + 1e-12 * std::abs(step); x += step) out.push_back(x);
            return out;
        }
        const int count = j.value("count", 2);
        if (count < 1) throw ConfigError(where + ".count must be >= 1");
        for (int i = 0; i < count; ++i) {
            out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1.0));
        }
        return out;
    }
    if (j.is_number()) {
        out.push_back(j.get<double>());
        return out;
    }
    throw ConfigError(where + ": expected a list, a range object, or a number");
}

double parse_p(const json& j, const std::string& where) {
    if (j.is_string()) {
        if (j == "inf" || j == "Infinity") return std::numeric_limits<double>::infinity();
        throw ConfigError(where + ": unknown string value '" + j.get<std::string>() + "'");
    }
    return j.get<double>();
}

json grid_to_json(const std::vector<double>& grid) {
    json arr = json::array();
    for (double v : grid) {
        if (std::isinf(v)) {
            arr.push_back("inf");
        } else {
            arr.push_back(v);
        }
    }
    return arr;
}

// deterministic scalar formatting for CSV/plot columns
std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

const std::vector<std::string> kTasks = {"functional", "limit",  "scattering", "flux",
                                         "rates",      "verify", "converge"};

} // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    RunConfig c;
    c.schema = j.value("schema", 1);
    if (c.schema != 1) {
        throw ConfigError("config.schema: unsupported version " + std::to_string(c.schema));
    }
    if (!j.contains("task")) throw ConfigError("config.task: missing");
    c.task = j.at("task").get<std::string>();
    if (std::find(kTasks.begin(), kTasks.end(), c.task) == kTasks.end()) {
        throw ConfigError("config.task: unknown task '" + c.task + "'");
    }
    if (!j.contains("chain")) throw ConfigError("config.chain: missing");
    c.chain = ChainSpec::from_json(j.at("chain"));

    if (j.contains("functional")) {
        const json& f = j.at("functional");
        c.kind = f.value("kind", "ES");
        if (c.kind != "ES" && c.kind != "EP" && c.kind != "EINF" && c.kind != "FCS" &&
            c.kind != "GC") {
            throw ConfigError("config.functional.kind: unknown kind '" + c.kind + "'");
        }
        if (f.contains("p")) c.p = parse_p(f.at("p"), "config.functional.p");
        c.s = f.value("s", 0.0);
        if (c.s < 0) throw ConfigError("config.functional.s: must be >= 0");
        if (!(c.p > 0)) throw ConfigError("config.functional.p: must lie in ]0, inf]");
    }

    if (j.contains("grids")) {
        const json& g = j.at("grids");
        if (g.contains("alpha")) c.alpha_grid = parse_grid(g.at("alpha"), "config.grids.alpha");
        if (g.contains("t")) c.t_grid = parse_grid(g.at("t"), "config.grids.t");
        if (g.contains("p")) c.p_grid = parse_grid(g.at("p"), "config.grids.p");
        if (g.contains("theta")) c.theta_grid = parse_grid(g.at("theta"), "config.grids.theta");
        if (g.contains("E")) c.E_grid = parse_grid(g.at("E"), "config.grids.E");
    }

    if (j.contains("interval")) {
        const json& iv = j.at("interval");
        c.interval = Interval(iv.at("lo").get<int>(), iv.at("hi").get<int>());
    }
    if (j.contains("M")) c.M = j.at("M").get<int>();
    if (j.contains("M_rule")) {
        const json& r = j.at("M_rule");
        c.use_m_rule = true;
        c.m_rule.M0 = r.value("M0", 10);
        c.m_rule.vmax_factor = r.value("vmax_factor", 1.0);
        c.m_rule.M_cap = r.value("M_cap", 2000);
    }

    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        c.quad_tol = t.value("quad", 1e-9);
        c.oracle_tol = t.value("oracle", 1e-9);
        if (!(c.quad_tol > 0) || !(c.oracle_tol > 0)) {
            throw ConfigError("config.tolerances: tolerances must be positive");
        }
    }
    if (j.contains("verify")) {
        const json& v = j.at("verify");
        if (v.contains("sizes")) c.verify_sizes = v.at("sizes").get<std::vector<int>>();
        for (int n : c.verify_sizes) {
            if (n < 2 || n > fock::kMaxSites) {
                throw ConfigError("config.verify.sizes: sizes must lie in [2, 12]");
            }
        }
    }
    if (j.contains("rates")) c.rate_kind = j.at("rates").value("which", "FCS");
    if (c.rate_kind != "FCS" && c.rate_kind != "ES_GC" && c.rate_kind != "both") {
        throw ConfigError("config.rates.which: expected FCS | ES_GC | both");
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        c.out_dir = o.value("dir", ".");
        c.stem = o.value("stem", "entropix");
        c.plot_style = o.value("plot", "");
    }
    c.threads = j.value("threads", 1);
    if (c.threads < 1) throw ConfigError("config.threads: must be >= 1");
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["schema"] = schema;
    j["task"] = task;
    j["chain"] = chain.to_json();
    json f;
    f["kind"] = kind;
    if (std::isinf(p)) {
        f["p"] = "inf";
    } else {
        f["p"] = p;
    }
    f["s"] = s;
    j["functional"] = f;
    json g;
    if (!alpha_grid.empty()) g["alpha"] = grid_to_json(alpha_grid);
    if (!t_grid.empty()) g["t"] = grid_to_json(t_grid);
    if (!p_grid.empty()) g["p"] = grid_to_json(p_grid);
    if (!theta_grid.empty()) g["theta"] = grid_to_json(theta_grid);
    if (!E_grid.empty()) g["E"] = grid_to_json(E_grid);
    j["grids"] = g;
    if (interval) j["interval"] = {{"lo", interval->lo}, {"hi", interval->hi}};
    if (M) j["M"] = *M;
    if (use_m_rule) {
        j["M_rule"] = {{"M0", m_rule.M0},
                       {"vmax_factor", m_rule.vmax_factor},
                       {"M_cap", m_rule.M_cap}};
    }
    j["tolerances"] = {{"quad", quad_tol}, {"oracle", oracle_tol}};
    j["verify"] = {{"sizes", verify_sizes}};
    j["rates"] = {{"which", rate_kind}};
    j["output"] = {{"dir", out_dir}, {"stem", stem}, {"plot", plot_style}};
    j["threads"] = threads;
    return j;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

std::string ResultTable::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += columns[i];
        out += i + 1 == columns.size() ? '\n' : ',';
    }
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += format_double(row[i]);
            out += i + 1 == row.size() ? '\n' : ',';
        }
    }
    return out;
}

Interval resolve_interval(const RunConfig& config) {
    if (config.interval) return *config.interval;
    if (config.M) return Interval::symmetric(*config.M);
    double tmax = 0.0;
    for (double t : config.t_grid) tmax = std::max(tmax, std::abs(t));
    if (config.kind == "GC") tmax += config.s;
    const double vmax = asymptotics::max_group_velocity(config.chain);
    const asymptotics::MRule& rule = config.m_rule;
    const int m = static_cast<int>(std::ceil(rule.M0 + rule.vmax_factor * vmax * tmax));
    if (m > rule.M_cap) {
        throw CapError("resolve_interval: causality window M = " + std::to_string(m) +
                       " exceeds cap " + std::to_string(rule.M_cap));
    }
    return Interval::symmetric(m);
}

namespace {

double eval_functional(const ConfinedSystem& sys, const RunConfig& c, double alpha, double t) {
    if (c.kind == "ES") return es_t(sys, alpha, t);
    if (c.kind == "EP") return ep_t(sys, c.p, alpha, t);
    if (c.kind == "EINF") return einf_t(sys, alpha, t);
    if (c.kind == "FCS") return ep_t(sys, 2.0, alpha, t);
    if (c.kind == "GC") return gc_t(sys, alpha, t, c.s);
    throw ConfigError("unknown functional kind '" + c.kind + "'");
}

ResultTable task_functional(const RunConfig& c) {
    if (c.alpha_grid.empty()) throw ConfigError("functional: grids.alpha must be nonempty");
    std::vector<double> ts = c.t_grid.empty() ? std::vector<double>{1.0} : c.t_grid;
    const Interval iv = resolve_interval(c);
    const ConfinedSystem sys = assemble(c.chain, iv);
    ResultTable table;
    table.columns = {"alpha", "t", "value"};
    const int n = static_cast<int>(c.alpha_grid.size() * ts.size());
    table.rows.assign(n, {});
    parallel_for(n, c.threads, [&](int i) {
        const double alpha = c.alpha_grid[i % c.alpha_grid.size()];
        const double t = ts[i / c.alpha_grid.size()];
        table.rows[i] = {alpha, t, eval_functional(sys, c, alpha, t)};
    });
    table.metadata["interval"] = {{"lo", iv.lo}, {"hi", iv.hi}};
    return table;
}

ResultTable task_limit(const RunConfig& c) {
    if (c.alpha_grid.empty()) throw ConfigError("limit: grids.alpha must be nonempty");
    const asymptotics::Model model = asymptotics::make_model(c.chain);
    const asymptotics::QuadSpec q{c.quad_tol};
    ResultTable table;
    if (c.p_grid.empty()) {
        table.columns = {"alpha", "value"};
        table.rows.assign(c.alpha_grid.size(), {});
        parallel_for(static_cast<int>(c.alpha_grid.size()), c.threads, [&](int i) {
            table.rows[i] = {c.alpha_grid[i], asymptotics::e_plus(c.alpha_grid[i], model, q)};
        });
    } else {
        table.columns = {"alpha", "p", "value"};
        const int n = static_cast<int>(c.alpha_grid.size() * c.p_grid.size());
        table.rows.assign(n, {});
        parallel_for(n, c.threads, [&](int i) {
            const double alpha = c.alpha_grid[i % c.alpha_grid.size()];
            const double p = c.p_grid[i / c.alpha_grid.size()];
            table.rows[i] = {alpha, p, asymptotics::e_p_plus(alpha, p, model, q)};
        });
    }
    json sup = json::array();
    for (const auto& [lo, hi] : model.support.intervals) sup.push_back({lo, hi});
    table.metadata["support"] = sup;
    return table;
}

ResultTable task_scattering(const RunConfig& c) {
    const asymptotics::Model model = asymptotics::make_model(c.chain);
    std::vector<double> grid = c.E_grid;
    if (grid.empty()) {
        // default: Chebyshev-distributed points per support band
        const int per_band = 501;
        for (const auto& [lo, hi] : model.support.intervals) {
            for (int k = 0; k < per_band; ++k) {
                grid.push_back(0.5 * (lo + hi) +
                               0.5 * (hi - lo) *
                                   std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * per_band)));
            }
        }
        std::sort(grid.begin(), grid.end());
    }
    ResultTable table;
    table.columns = {"E", "trans", "F_l", "F_r", "unitarity_dev", "in_support"};
    table.rows.assign(grid.size(), {});
    parallel_for(static_cast<int>(grid.size()), c.threads, [&](int i) {
        const auto pt = scattering::scattering_point(grid[i], c.chain, model.support);
        const double unit = (pt.s.adjoint() * pt.s - Eigen::Matrix2cd::Identity())
                                .cwiseAbs()
                                .maxCoeff();
        table.rows[i] = {pt.E,   std::norm(pt.s(0, 1)), pt.F_l, pt.F_r, unit,
                         pt.in_support ? 1.0 : 0.0};
    });
    json sup = json::array();
    for (const auto& [lo, hi] : model.support.intervals) sup.push_back({lo, hi});
    table.metadata["support"] = sup;
    const auto refl = scattering::reflectionless_test(c.chain);
    table.metadata["reflectionless"] =
        refl.verdict == scattering::ReflectionlessVerdict::Reflectionless;
    table.metadata["reflectionless_max_deviation"] = refl.max_deviation;
    return table;
}

ResultTable task_flux(const RunConfig& c, RunOutcome& outcome) {
    const asymptotics::Model model = asymptotics::make_model(c.chain);
    const asymptotics::QuadSpec q{c.quad_tol};
    const auto flux = asymptotics::landauer_flux(model, q);
    const double dbeta = c.chain.beta_r - c.chain.beta_l;
    double from_slope = 0.0;
    if (dbeta != 0.0) {
        from_slope = -asymptotics::e_plus_derivative(0.0, 1, model, q) / dbeta;
    }
    ResultTable table;
    table.columns = {"phi_l", "phi_r", "sigma", "phi_l_from_slope"};
    table.rows = {{flux.phi_l, flux.phi_r, flux.sigma, from_slope}};
    // sign contracts
    json verdicts;
    verdicts["sigma_nonnegative"] = flux.sigma >= -1e-12;
    verdicts["sign_matches_temperature_bias"] =
        dbeta == 0.0 ? flux.phi_l == 0.0 : (dbeta > 0 ? flux.phi_l >= -1e-12 : flux.phi_l <= 1e-12);
    if (dbeta != 0.0 && !model.support.empty()) {
        verdicts["slope_consistency_dev"] = std::abs(flux.phi_l - from_slope);
        if (std::abs(flux.phi_l - from_slope) > 1e-6 * std::max(1.0, std::abs(flux.phi_l))) {
            outcome.verification_passed = false;
            outcome.failures.push_back(
                {{"check", "flux_slope_consistency"},
                 {"deviation", std::abs(flux.phi_l - from_slope)},
                 {"tolerance", 1e-6}});
        }
    }
    table.metadata["verdicts"] = verdicts;
    return table;
}

ResultTable task_rates(const RunConfig& c) {
    if (c.theta_grid.empty()) throw ConfigError("rates: grids.theta must be nonempty");
    const asymptotics::Model model = asymptotics::make_model(c.chain);
    const asymptotics::QuadSpec q{c.quad_tol};
    ResultTable table;
    const bool both = c.rate_kind == "both";
    table.columns = both ? std::vector<std::string>{"theta", "I_fcs", "I_es_gc"}
                         : std::vector<std::string>{"theta", "I"};
    table.rows.assign(c.theta_grid.size(), {});
    parallel_for(static_cast<int>(c.theta_grid.size()), c.threads, [&](int i) {
        const double theta = c.theta_grid[i];
        if (both) {
            table.rows[i] = {theta,
                             asymptotics::rate_function(asymptotics::RateKind::FCS, theta, model, q),
                             asymptotics::rate_function(asymptotics::RateKind::ES_GC, theta, model,
                                                        q)};
        } else {
            const auto kind = c.rate_kind == "FCS" ? asymptotics::RateKind::FCS
                                                   : asymptotics::RateKind::ES_GC;
            table.rows[i] = {theta, asymptotics::rate_function(kind, theta, model, q)};
        }
    });
    return table;
}

ResultTable task_converge(const RunConfig& c) {
    if (c.t_grid.empty()) throw ConfigError("converge: grids.t must be nonempty");
    if (c.alpha_grid.size() != 1) {
        throw ConfigError("converge: grids.alpha must hold exactly one value");
    }
    asymptotics::FunctionalKind kind;
    if (c.kind == "ES") {
        kind = asymptotics::FunctionalKind::ES;
    } else if (c.kind == "EP") {
        kind = asymptotics::FunctionalKind::EP;
    } else if (c.kind == "EINF") {
        kind = asymptotics::FunctionalKind::EINF;
    } else if (c.kind == "FCS") {
        kind = asymptotics::FunctionalKind::FCS;
    } else {
        kind = asymptotics::FunctionalKind::GC;
    }
    const auto rows = asymptotics::finite_time_convergence(
        c.chain, kind, c.alpha_grid[0], c.p, c.t_grid, c.m_rule, asymptotics::QuadSpec{c.quad_tol});
    ResultTable table;
    table.columns = {"t", "M", "finite_over_t", "limit", "deviation"};
    for (const auto& r : rows) {
        table.rows.push_back({r.t, static_cast<double>(r.M), r.finite_over_t, r.limit,
                              r.deviation});
    }
    return table;
}

struct VerifyCheck {
    std::string name;
    int n_sites;
    double deviation;
    double tolerance;
};

ResultTable task_verify(const RunConfig& c, RunOutcome& outcome) {
    std::vector<VerifyCheck> checks;
    const double tol = c.oracle_tol;
    const std::vector<ChainSpec> chains = {
        ChainSpec::constant(1.0, 0.0, c.chain.beta_l, c.chain.beta_r),
        ChainSpec::step_J(0.5, 1.0, 0.0, c.chain.beta_l, c.chain.beta_r)};
    const std::vector<double> alphas = {-0.5, 0.3, 0.5, 1.0, 1.7};
    const std::vector<double> ps = {0.5, 1.0, 2.0, 3.0,
                                    std::numeric_limits<double>::infinity()};
    const std::vector<double> ts = {0.5, 2.0};

    for (int n : c.verify_sizes) {
        const Interval iv(-(n / 2 - 1), n - n / 2);
        for (std::size_t ci = 0; ci < chains.size(); ++ci) {
            const ChainSpec& spec = chains[ci];
            const ConfinedSystem sys = assemble(spec, iv);
            const std::string tag = (ci == 0 ? "constant" : "step_J");
            double dev_es = 0.0, dev_ep = 0.0, dev_fcs = 0.0, dev_gc = 0.0, dev_rate = 0.0;
            for (double t : ts) {
                for (double alpha : alphas) {
                    dev_es = std::max(dev_es, std::abs(es_t(sys, alpha, t) -
                                                       fock::oracle_es(spec, iv, alpha, t)));
                    for (double p : ps) {
                        dev_ep = std::max(dev_ep,
                                          std::abs(ep_t(sys, p, alpha, t) -
                                                   fock::oracle_ep(spec, iv, p, alpha, t)));
                    }
                }
                for (const Complex alpha : {Complex(0.5, 0.3), Complex(-0.3, 0.8)}) {
                    dev_fcs = std::max(dev_fcs, std::abs(fcs_char(sys, alpha, t) -
                                                         fock::oracle_fcs_char(spec, iv, alpha, t)));
                }
                for (double s : {0.0, 1.0, 3.0}) {
                    dev_gc = std::max(dev_gc, std::abs(gc_t(sys, 0.5, t, s) -
                                                       fock::oracle_gc(spec, iv, 0.5, t, s)));
                }
                dev_rate = std::max(dev_rate, std::abs(mean_ep_rate(sys, t) -
                                                       fock::oracle_mean_ep_rate(spec, iv, t)));
            }
            checks.push_back({"es_vs_fock_" + tag, n, dev_es, tol});
            checks.push_back({"ep_vs_fock_" + tag, n, dev_ep, tol});
            checks.push_back({"fcs_char_vs_fock_" + tag, n, dev_fcs, tol});
            checks.push_back({"gc_vs_fock_" + tag, n, dev_gc, tol});
            checks.push_back({"mean_ep_rate_vs_fock_" + tag, n, dev_rate, tol});
        }
    }

    // detailed fluctuation relation of the brute-force FCS measure
    {
        const Interval iv(-2, 3);
        const auto measure = fock::fcs_distribution(chains[0], iv, 2.0);
        double dev = 0.0;
        for (const auto& [phi, w] : measure.atoms) {
            if (phi <= 0) continue;
            double w_neg = 0.0;
            for (const auto& [phi2, w2] : measure.atoms) {
                if (std::abs(phi2 + phi) < 1e-9) w_neg += w2;
            }
            dev = std::max(dev, std::abs(w_neg - std::exp(-2.0 * phi) * w));
        }
        checks.push_back({"fcs_detailed_fluctuation_relation", 6, dev, 1e-10});
    }

    ResultTable table;
    table.columns = {"check_index", "n_sites", "deviation", "tolerance", "pass"};
    json names = json::array();
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& ch = checks[i];
        const bool pass = ch.deviation <= ch.tolerance;
        table.rows.push_back({static_cast<double>(i), static_cast<double>(ch.n_sites),
                              ch.deviation, ch.tolerance, pass ? 1.0 : 0.0});
        names.push_back(ch.name);
        if (!pass) {
            outcome.verification_passed = false;
            outcome.failures.push_back({{"check", ch.name},
                                        {"n_sites", ch.n_sites},
                                        {"deviation", ch.deviation},
                                        {"tolerance", ch.tolerance}});
        }
    }
    table.metadata["checks"] = names;
    return table;
}

} // namespace

std::vector<std::string> emit_plotdata(const ResultTable& table, const std::string& style,
                                       const std::string& path_stem) {
    std::vector<std::string> want;
    std::string caption;
    if (style == "functional") {
        want = {"alpha", "value"};
        caption = "entropic functional vs alpha";
    } else if (style == "convergence") {
        want = {"t", "finite_over_t", "limit"};
        caption = "finite-time functional over t against the large-time limit";
    } else if (style == "scattering") {
        want = {"E", "trans", "F_l", "F_r"};
        caption = "transmission probability and spectral densities vs energy";
    } else {
        want = table.columns;
        caption = "all columns";
    }
    std::vector<int> idx;
    for (const auto& name : want) {
        const auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end()) {
            throw ConfigError("emit_plotdata: column '" + name + "' not present for style '" +
                              style + "'");
        }
        idx.push_back(static_cast<int>(it - table.columns.begin()));
    }
    const std::string dat_path = path_stem + ".dat";
    std::ofstream dat(dat_path);
    dat << "#";
    for (const auto& name : want) dat << " " << name;
    dat << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            dat << (i ? " " : "") << format_double(row[idx[i]]);
        }
        dat << "\n";
    }
    const std::string caption_path = path_stem + ".caption";
    std::ofstream cap(caption_path);
    cap << caption << "\n";
    return {dat_path, caption_path};
}

RunOutcome run(const RunConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    RunOutcome outcome;
    if (config.task == "functional") {
        outcome.table = task_functional(config);
    } else if (config.task == "limit") {
        outcome.table = task_limit(config);
    } else if (config.task == "scattering") {
        outcome.table = task_scattering(config);
    } else if (config.task == "flux") {
        outcome.table = task_flux(config, outcome);
    } else if (config.task == "rates") {
        outcome.table = task_rates(config);
    } else if (config.task == "verify") {
        outcome.table = task_verify(config, outcome);
    } else if (config.task == "converge") {
        outcome.table = task_converge(config);
    } else {
        throw ConfigError("run: unknown task '" + config.task + "'");
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    outcome.table.metadata["config"] = config.to_json();
    outcome.table.metadata["version"] = kVersion;
    outcome.table.metadata["wall_time_seconds"] = wall;
    outcome.table.metadata["verification_passed"] = outcome.verification_passed;
    if (!outcome.failures.empty()) outcome.table.metadata["failures"] = outcome.failures;

    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const std::string stem = (fs::path(config.out_dir) / config.stem).string();
    {
        std::ofstream csv(stem + ".csv");
        csv << outcome.table.to_csv();
        outcome.written_files.push_back(stem + ".csv");
    }
    {
        std::ofstream meta(stem + ".meta.json");
        meta << outcome.table.metadata.dump(2) << "\n";
        outcome.written_files.push_back(stem + ".meta.json");
    }
    if (!config.plot_style.empty()) {
        for (auto& p : emit_plotdata(outcome.table, config.plot_style, stem)) {
            outcome.written_files.push_back(std::move(p));
        }
    }
    return outcome;
}

} // namespace entropix::runner
