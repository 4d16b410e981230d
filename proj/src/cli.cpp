#include "fpt/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/kernels.hpp"
#include "fpt/validation.hpp"

namespace fpt::cli {

using json = nlohmann::json;

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string policy_name(VPolicy p) { return p == VPolicy::epsilon_limit ? "limit" : "auto"; }

double convexity_horizon(const RunConfig& cfg) { return std::max(10.0, cfg.grid.stop); }

Boundary load_boundary(const std::string& text, double t_max) { return make_boundary(text, t_max); }

McParams mc_params(const RunConfig& cfg) {
    McParams p = cfg.mc;
    p.seed = *cfg.seed;
    return p;
}

json config_echo(const RunConfig& cfg, Command c) {
    json j;
    j["command"] = to_string(c);
    j["boundary"] = cfg.boundary;
    j["grid"] = {{"start", cfg.grid.start}, {"stop", cfg.grid.stop}, {"count", cfg.grid.count}};
    j["quadrature"] = {{"abs_tol", cfg.quadrature.abs_tol},
                       {"eps0", cfg.quadrature.eps0},
                       {"eps_ratio", cfg.quadrature.eps_ratio},
                       {"eps_terms", cfg.quadrature.eps_terms}};
    j["monte_carlo"] = {{"n_paths", cfg.mc.n_paths},
                        {"steps", cfg.mc.steps},
                        {"seed", *cfg.seed},
                        {"antithetic", cfg.mc.antithetic}};
    j["v_mode"] = policy_name(cfg.v_policy);
    return j;
}

std::string join_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

std::string emit(const RunConfig& cfg, Command c, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows, const json& records, const json& extra = {}) {
    if (cfg.format == Format::csv) return join_csv(header, rows);
    json doc;
    doc["config"] = config_echo(cfg, c);
    doc["rows"] = records;
    if (!extra.is_null()) doc["summary"] = extra;
    return doc.dump(2) + "\n";
}

CommandOutput do_density(const RunConfig& cfg) {
    const Boundary bd = load_boundary(cfg.boundary, convexity_horizon(cfg));
    const std::vector<double> grid = cfg.grid.values();
    const McParams mc = mc_params(cfg);
    const DensityCurve closed = fpt_density(grid, bd, cfg.quadrature, cfg.v_policy);
    const DensityCurve girsanov = girsanov_density_curve(bd, grid, mc);
    const DirectHittingResult direct = direct_hitting_density(bd, grid, mc);

    CommandOutput out;
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    std::size_t bad = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::string verdict = to_string(closed.status[i]);
        if (!is_usable(closed.status[i])) ++bad;
        rows.push_back({num(grid[i]), num(closed.value[i]), verdict, num(girsanov.value[i]),
                        num(girsanov.std_error[i]), num(direct.density.value[i]), num(direct.density.std_error[i])});
        records.push_back({{"s", grid[i]},
                           {"phi_closed", jnum(closed.value[i])},
                           {"verdict", verdict},
                           {"v", jnum(closed.v[i])},
                           {"phi_girsanov_mc", jnum(girsanov.value[i])},
                           {"stderr_g", jnum(girsanov.std_error[i])},
                           {"phi_direct_mc", jnum(direct.density.value[i])},
                           {"stderr_d", jnum(direct.density.std_error[i])}});
    }
    out.content = emit(cfg, Command::density,
                       {"s", "phi_closed", "verdict", "phi_girsanov_mc", "stderr_g", "phi_direct_mc", "stderr_d"}, rows,
                       records);
    std::ostringstream sum;
    sum << "density: " << grid.size() << " points, " << bad << " without a closed-form value\n";
    out.summary = sum.str();
    out.exit_code = bad ? kExitNonconvergent : kExitOk;
    return out;
}

CommandOutput do_cdf(const RunConfig& cfg) {
    const Boundary bd = load_boundary(cfg.boundary, convexity_horizon(cfg));
    const std::vector<double> grid = cfg.grid.values();
    const DirectHittingResult direct = direct_hitting_density(bd, grid, mc_params(cfg));

    CommandOutput out;
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    std::size_t bad = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const CdfResult r = fpt_cdf(grid[i], bd, cfg.quadrature, cfg.v_policy);
        if (!r.ok) ++bad;
        const std::string status = r.ok ? "ok" : "failed";
        rows.push_back({num(grid[i]), num(r.value), num(r.error), status, num(direct.cdf[i]),
                        num(direct.cdf_std_error[i])});
        records.push_back({{"t_max", grid[i]},
                           {"cdf_closed", jnum(r.value)},
                           {"error", jnum(r.error)},
                           {"status", status},
                           {"message", r.message},
                           {"cdf_direct_mc", jnum(direct.cdf[i])},
                           {"stderr_d", jnum(direct.cdf_std_error[i])}});
    }
    out.content = emit(cfg, Command::cdf, {"t_max", "cdf_closed", "error", "status", "cdf_direct_mc", "stderr_d"},
                       rows, records);
    out.summary = "cdf: " + std::to_string(grid.size()) + " points, " + std::to_string(bad) + " failed\n";
    out.exit_code = bad ? kExitNonconvergent : kExitOk;
    return out;
}

CommandOutput do_bridge(const RunConfig& cfg) {
    const Boundary bd = load_boundary(cfg.boundary, convexity_horizon(cfg));
    const std::vector<double> grid = cfg.grid.values();
    const McParams mc = mc_params(cfg);

    CommandOutput out;
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const McEstimate e = bridge_functional_estimate(bd, grid[i], mc, static_cast<std::uint64_t>(i) << 40);
        rows.push_back({num(grid[i]), num(e.mean), num(e.std_error), std::to_string(e.n_paths),
                        std::to_string(e.n_steps), std::to_string(e.seed)});
        records.push_back({{"s", grid[i]},
                           {"mean", jnum(e.mean)},
                           {"stderr", jnum(e.std_error)},
                           {"n_paths", e.n_paths},
                           {"steps", e.n_steps},
                           {"seed", e.seed}});
    }
    out.content =
        emit(cfg, Command::bridge_expectation, {"s", "mean", "stderr", "n_paths", "steps", "seed"}, rows, records);
    out.summary = "bridge-expectation: " + std::to_string(grid.size()) + " horizons\n";
    return out;
}

struct ResidualCheck {
    std::string name;
    EvalPoint point;
    std::function<double(double)> residual;
};

CommandOutput do_residual(const RunConfig& cfg) {
    const Boundary bd = load_boundary(cfg.boundary, convexity_horizon(cfg));
    const EvalPoint pb{0.3, 1.0, 0.8, 1.2, 1.0};
    const EvalPoint pc{0.2, 1.0, 0.6, 0.9, 1.0};
    const std::vector<ResidualCheck> checks = {
        {"backward/direct-term", pb,
         [&](double h) { return residual_backward_schrodinger(schrodinger_direct_term, pb, bd, h, h); }},
        {"backward/kernel-H", pb, [&](double h) { return residual_backward_schrodinger(kernel_H, pb, bd, h, h); }},
        {"forward/direct-term", pb,
         [&](double h) { return residual_forward_schrodinger(schrodinger_direct_term, pb, bd, h, h); }},
        {"forward/forward-solution", pb,
         [&](double h) { return residual_forward_schrodinger(forward_solution_term, pb, bd, h, h); }},
        {"forward/kernel-H", pb, [&](double h) { return residual_forward_schrodinger(kernel_H, pb, bd, h, h); }},
        {"bessel-cauchy/green-G", pc, [&](double h) { return residual_bessel_cauchy(pc, bd, h, h); }},
    };
    const std::vector<double> steps = default_residual_steps();

    CommandOutput out;
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    std::ostringstream sum;
    for (const auto& c : checks) {
        const ResidualReport r = residual_report(c.name, c.point, c.residual, steps);
        const std::string verdict = to_string(r.verdict);
        json jr = json::array();
        for (std::size_t i = 0; i < r.h.size(); ++i) {
            const auto& p = r.point;
            rows.push_back({c.name, num(p.t), num(p.a), num(p.tau), num(p.b), num(p.s), num(r.h[i]),
                            num(r.residuals[i]), num(r.order), verdict});
            jr.push_back({{"h", r.h[i]}, {"residual", jnum(r.residuals[i])}});
        }
        records.push_back({{"check", c.name},
                           {"point", {{"t", c.point.t}, {"a", c.point.a}, {"tau", c.point.tau}, {"b", c.point.b},
                                      {"s", c.point.s}}},
                           {"steps", jr},
                           {"order", jnum(r.order)},
                           {"verdict", verdict}});
        sum << c.name << ": order " << num(r.order) << ", " << verdict << "\n";
    }
    out.content = emit(cfg, Command::residual_report,
                       {"check", "t", "a", "tau", "b", "s", "h", "residual", "order", "verdict"}, rows, records);
    out.summary = sum.str();
    return out;
}

CommandOutput do_cross(const RunConfig& cfg) {
    std::vector<std::string> boundaries;
    if (cfg.corpus)
        boundaries = boundary_corpus();
    else
        boundaries.push_back(cfg.boundary);
    const std::vector<double> grid = cfg.grid.values();
    const McParams mc = mc_params(cfg);

    CommandOutput out;
    std::vector<std::vector<std::string>> rows;
    json records = json::array();
    json totals = json::array();
    std::ostringstream sum;
    for (const auto& text : boundaries) {
        const Boundary bd = load_boundary(text, convexity_horizon(cfg));
        const CrossRouteReport rep = cross_route_report(bd, grid, cfg.quadrature, mc, cfg.v_policy);
        totals.push_back({{"boundary", text},
                          {"direct_hit_fraction", jnum(rep.direct_hit_fraction)},
                          {"stderr", jnum(rep.direct_hit_se)}});
        std::size_t agree_gd = 0;
        for (const auto& r : rep.rows) {
            const double neg = negative_mass(bd, 0.0, bd.initial_level(), 0.5 * r.s, cfg.quadrature).negative_mass;
            if (r.girsanov_direct == PairVerdict::agree) ++agree_gd;
            rows.push_back({text, num(r.s), num(r.closed), to_string(r.closed_status), r.limit_verdict, num(r.v),
                            num(r.girsanov), num(r.girsanov_se), num(r.direct), num(r.direct_se),
                            num(r.z_closed_girsanov), num(r.z_closed_direct), num(r.z_girsanov_direct),
                            to_string(r.closed_girsanov), to_string(r.closed_direct), to_string(r.girsanov_direct),
                            num(neg)});
            records.push_back({{"boundary", text},
                               {"s", r.s},
                               {"phi_closed", jnum(r.closed)},
                               {"status", to_string(r.closed_status)},
                               {"limit_verdict", r.limit_verdict},
                               {"v", jnum(r.v)},
                               {"phi_girsanov_mc", jnum(r.girsanov)},
                               {"stderr_g", jnum(r.girsanov_se)},
                               {"phi_direct_mc", jnum(r.direct)},
                               {"stderr_d", jnum(r.direct_se)},
                               {"z_closed_girsanov", jnum(r.z_closed_girsanov)},
                               {"z_closed_direct", jnum(r.z_closed_direct)},
                               {"z_girsanov_direct", jnum(r.z_girsanov_direct)},
                               {"verdict_closed_girsanov", to_string(r.closed_girsanov)},
                               {"verdict_closed_direct", to_string(r.closed_direct)},
                               {"verdict_girsanov_direct", to_string(r.girsanov_direct)},
                               {"h_negative_mass", jnum(neg)}});
        }
        sum << text << ": girsanov/direct agree at " << agree_gd << " of " << rep.rows.size() << " points\n";
    }
    out.content = emit(cfg, Command::cross_validate,
                       {"boundary", "s", "phi_closed", "status", "limit_verdict", "v", "phi_girsanov_mc", "stderr_g",
                        "phi_direct_mc", "stderr_d", "z_closed_girsanov", "z_closed_direct", "z_girsanov_direct",
                        "verdict_closed_girsanov", "verdict_closed_direct", "verdict_girsanov_direct",
                        "h_negative_mass"},
                       rows, records, totals);
    out.summary = sum.str();
    return out;
}

template <class T>
void read_key(const json& obj, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::density: return "density";
        case Command::cdf: return "cdf";
        case Command::bridge_expectation: return "bridge-expectation";
        case Command::residual_report: return "residual-report";
        case Command::cross_validate: return "cross-validate";
    }
    return "unknown";
}

std::vector<double> GridSpec::values() const {
    if (count < 1) throw ConfigError("grid count must be at least 1");
    if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError("grid bounds must be finite");
    if (!(start > 0.0)) throw ConfigError("grid start must be positive");
    if (count == 1) {
        if (stop != start) throw ConfigError("a single-point grid needs start == stop");
        return {start};
    }
    if (!(stop > start)) throw ConfigError("grid stop must exceed start");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.back() = stop;
    return v;
}

void RunConfig::validate(Command c) const {
    if (!(c == Command::cross_validate && corpus) && boundary.empty()) throw ConfigError("no boundary given");
    if (!seed) throw ConfigError("a seed is required");
    if (mc.n_paths < 1) throw ConfigError("n_paths must be at least 1");
    if (mc.steps < 2) throw ConfigError("steps must be at least 2");
    (void)grid.values();
    quadrature.validate();
}

void apply_json(RunConfig& cfg, const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    read_key(doc, "boundary", cfg.boundary);
    read_key(doc, "corpus", cfg.corpus);
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        read_key(g, "start", cfg.grid.start);
        read_key(g, "stop", cfg.grid.stop);
        read_key(g, "count", cfg.grid.count);
    }
    if (doc.contains("quadrature")) {
        const json& q = doc["quadrature"];
        read_key(q, "abs_tol", cfg.quadrature.abs_tol);
        read_key(q, "max_panels", cfg.quadrature.max_panels);
        read_key(q, "truncation_sigmas", cfg.quadrature.truncation_sigmas);
        read_key(q, "eps0", cfg.quadrature.eps0);
        read_key(q, "eps_ratio", cfg.quadrature.eps_ratio);
        read_key(q, "eps_terms", cfg.quadrature.eps_terms);
    }
    if (doc.contains("monte_carlo")) {
        const json& m = doc["monte_carlo"];
        long long n_paths = static_cast<long long>(cfg.mc.n_paths), steps = static_cast<long long>(cfg.mc.steps);
        read_key(m, "n_paths", n_paths);
        read_key(m, "steps", steps);
        if (n_paths < 0 || steps < 0) throw ConfigError("n_paths and steps must be non-negative");
        cfg.mc.n_paths = static_cast<std::size_t>(n_paths);
        cfg.mc.steps = static_cast<std::size_t>(steps);
        read_key(m, "antithetic", cfg.mc.antithetic);
        if (m.contains("seed")) {
            std::uint64_t seed = 0;
            read_key(m, "seed", seed);
            cfg.seed = seed;
        }
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        read_key(o, "path", cfg.out);
        if (o.contains("format")) {
            std::string f;
            read_key(o, "format", f);
            if (f == "csv")
                cfg.format = Format::csv;
            else if (f == "json")
                cfg.format = Format::json;
            else
                throw ConfigError("output format must be csv or json");
        }
    }
    if (doc.contains("v_mode")) {
        std::string m;
        read_key(doc, "v_mode", m);
        if (m == "auto")
            cfg.v_policy = VPolicy::exact_when_linear;
        else if (m == "limit")
            cfg.v_policy = VPolicy::epsilon_limit;
        else
            throw ConfigError("v_mode must be auto or limit");
    }
}

const std::vector<std::string>& boundary_corpus() {
    static const std::vector<std::string> corpus = {"1", "1+t", "2+0.25*t^2", "1+t^2/2", "cosh(t)"};
    return corpus;
}

CommandOutput run_command(Command c, const RunConfig& cfg) {
    cfg.validate(c);
    switch (c) {
        case Command::density: return do_density(cfg);
        case Command::cdf: return do_cdf(cfg);
        case Command::bridge_expectation: return do_bridge(cfg);
        case Command::residual_report: return do_residual(cfg);
        case Command::cross_validate: return do_cross(cfg);
    }
    throw ConfigError("unknown command");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e)) return kExitConfig;
    if (dynamic_cast<const BoundaryValidationError*>(&e)) return kExitBoundary;
    return kExitNumeric;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"First-passage densities of Brownian motion to convex boundaries"};
    app.require_subcommand(1);

    struct Flags {
        std::string boundary, config, out, format, v_mode;
        double s_start = 0, s_stop = 0, eps0 = 0;
        long long s_count = 0, n_paths = 0, steps = 0;
        int eps_terms = 0;
        std::uint64_t seed = 0;
        bool corpus = false;
    } f;
    std::map<std::string, CLI::Option*> opts;
    std::map<CLI::App*, Command> commands;

    const std::pair<const char*, Command> names[] = {{"density", Command::density},
                                                    {"cdf", Command::cdf},
                                                    {"bridge-expectation", Command::bridge_expectation},
                                                    {"residual-report", Command::residual_report},
                                                    {"cross-validate", Command::cross_validate}};
    for (const auto& [name, cmd] : names) {
        CLI::App* sub = app.add_subcommand(name, "run " + std::string(name));
        commands[sub] = cmd;
        sub->add_option("--boundary", f.boundary, "boundary expression in t");
        sub->add_option("--config", f.config, "JSON config file; flags override its values");
        sub->add_option("--s-start", f.s_start, "first grid point");
        sub->add_option("--s-stop", f.s_stop, "last grid point");
        sub->add_option("--s-count", f.s_count, "number of grid points");
        sub->add_option("--n-paths", f.n_paths, "Monte Carlo paths");
        sub->add_option("--steps", f.steps, "time steps per path");
        sub->add_option("--seed", f.seed, "random seed (required)");
        sub->add_option("--eps0", f.eps0, "first epsilon of the limit schedule");
        sub->add_option("--eps-terms", f.eps_terms, "number of epsilons in the limit schedule");
        sub->add_option("--out", f.out, "output path (stdout when absent)");
        sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--v-mode", f.v_mode, "auto or limit")->check(CLI::IsMember({"auto", "limit"}));
        if (cmd == Command::cross_validate) sub->add_flag("--corpus", f.corpus, "use the built-in boundary corpus");
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? kExitOk : kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    const Command cmd = commands.at(sub);
    auto given = [sub](const char* name) { return sub->count(name) > 0; };

    try {
        RunConfig cfg;
        if (given("--config")) {
            std::ifstream in(f.config, std::ios::binary);
            if (!in) throw ConfigError("cannot read config file " + f.config);
            std::ostringstream text;
            text << in.rdbuf();
            apply_json(cfg, text.str());
        }
        if (given("--boundary")) cfg.boundary = f.boundary;
        if (given("--s-start")) cfg.grid.start = f.s_start;
        if (given("--s-stop")) cfg.grid.stop = f.s_stop;
        if (given("--s-start") && !given("--s-stop")) cfg.grid.stop = std::max(cfg.grid.stop, cfg.grid.start);
        if (given("--s-count")) cfg.grid.count = f.s_count;
        if (given("--n-paths")) {
            if (f.n_paths < 0) throw ConfigError("n_paths must be non-negative");
            cfg.mc.n_paths = static_cast<std::size_t>(f.n_paths);
        }
        if (given("--steps")) {
            if (f.steps < 0) throw ConfigError("steps must be non-negative");
            cfg.mc.steps = static_cast<std::size_t>(f.steps);
        }
        if (given("--seed")) cfg.seed = f.seed;
        if (given("--eps0")) cfg.quadrature.eps0 = f.eps0;
        if (given("--eps-terms")) cfg.quadrature.eps_terms = f.eps_terms;
        if (given("--out")) cfg.out = f.out;
        if (given("--format")) cfg.format = f.format == "json" ? Format::json : Format::csv;
        if (given("--v-mode")) cfg.v_policy = f.v_mode == "limit" ? VPolicy::epsilon_limit : VPolicy::exact_when_linear;
        if (f.corpus) cfg.corpus = true;

        const CommandOutput result = run_command(cmd, cfg);
        if (cfg.out.empty()) {
            out << result.content;
        } else {
            std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
            if (!file) throw ConfigError("cannot write output file " + cfg.out);
            file << result.content;
            if (!file) throw ConfigError("failed writing output file " + cfg.out);
        }
        err << result.summary;
        return result.exit_code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace fpt::cli
