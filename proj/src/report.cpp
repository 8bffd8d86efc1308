#include "capax/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "capax/capacities.hpp"
#include "capax/errors.hpp"

namespace capax {

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) return v;
            else if constexpr (std::is_same_v<T, double>) return format_number(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else return std::to_string(v);
        },
        c);
}

std::string cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return std::isfinite(*d) ? format_number(*d) : "\"" + format_number(*d) + "\"";
    if (const auto* s = std::get_if<std::string>(&c)) return nlohmann::json(*s).dump();
    return cell_text(c);
}

}  // namespace

std::string emit_report(const Table& t, Format f)
{
    std::ostringstream os;
    if (f == Format::csv) {
        for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
        os << "\r\n";
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(cell_text(row[i]));
            os << "\r\n";
        }
        return os.str();
    }
    os << "[";
    for (size_t r = 0; r < t.rows.size(); ++r) {
        os << (r ? ",\n " : "\n ") << "{";
        for (size_t i = 0; i < t.columns.size(); ++i)
            os << (i ? ", " : "") << nlohmann::json(t.columns[i]).dump() << ": " << cell_json(t.rows[r][i]);
        os << "}";
    }
    os << (t.rows.empty() ? "]" : "\n]");
    return os.str();
}

void RunConfig::validate() const
{
    static const std::vector<std::string> commands{"spectrum", "orbits", "capacities", "verify", "morse", "axioms"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
        throw InputError("unknown command \"" + command + "\"");
    if (domain.empty()) throw InputError("--domain is required");
    if (command == "axioms" && domain2.empty()) throw InputError("axioms needs --domain2");
    if (K < 0 || m < 0) throw InputError("K and grid must be positive");
    if (kmax < 1) throw InputError("kmax must be positive");
    if (!(tol > 0.0)) throw InputError("tol must be positive");
    if (slope < 0.0) throw InputError("slope must be positive");
    if (!(width > 0.0) || eps < 0.0) throw InputError("width and eps must be positive");
    for (double r : scalings)
        if (!(r > 0.0)) throw InputError("scalings must be positive");
}

void apply_config(RunConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object()) throw InputError("config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "command") cfg.command = v.get<std::string>();
            else if (key == "domain") cfg.domain = v.get<std::string>();
            else if (key == "domain2") cfg.domain2 = v.get<std::string>();
            else if (key == "K") cfg.K = v.get<int>();
            else if (key == "grid") cfg.m = v.get<int>();
            else if (key == "kmax") cfg.kmax = v.get<int>();
            else if (key == "tol") cfg.tol = v.get<double>();
            else if (key == "seed") cfg.seed = v.get<unsigned long long>();
            else if (key == "slope") cfg.slope = v.get<double>();
            else if (key == "format") {
                const auto s = v.get<std::string>();
                if (s != "csv" && s != "json") throw InputError("format must be csv or json");
                cfg.format = s == "csv" ? Format::csv : Format::json;
            } else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "width") cfg.width = v.get<double>();
            else if (key == "eps") cfg.eps = v.get<double>();
            else if (key == "forcing-amp") cfg.forcingAmp = v.get<double>();
            else if (key == "forcing-mode") cfg.forcingMode = v.get<int>();
            else if (key == "scalings") cfg.scalings = v.get<std::vector<double>>();
            else throw InputError("unknown config key \"" + key + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

nlohmann::json provenance(const RunConfig& c)
{
    return {{"command", c.command}, {"domain", c.domain},      {"domain2", c.domain2},
            {"K", c.K},             {"grid", c.m},             {"kmax", c.kmax},
            {"tol", c.tol},         {"seed", c.seed},          {"slope", c.slope},
            {"width", c.width},     {"eps", c.eps},            {"forcing-amp", c.forcingAmp},
            {"forcing-mode", c.forcingMode}, {"scalings", c.scalings}};
}

namespace {

EllipsoidSpec load_domain(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open domain file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed domain file " + path + ": " + e.what());
    }
    return ellipsoid_from_json(j);
}

struct Body {
    Table table;
    nlohmann::json extra = nlohmann::json::object();  // resolved parameters
    nlohmann::json attachment;                        // json-only payload
    bool fail = false;
};

PipelineConfig pipeline_config(const RunConfig& c)
{
    PipelineConfig p;
    p.K = c.K;
    p.m = c.m;
    p.slope = c.slope;
    return p;
}

double resolved_slope(const RunConfig& c, const EllipsoidSpec& dom)
{
    return c.slope > 0.0 ? c.slope : select_slope(dom, c.kmax);
}

int resolved_K(const RunConfig& c, const EllipsoidSpec& dom, double slope)
{
    return c.K > 0 ? c.K : required_K(dom, slope) + 2;
}

std::string label_of(const PeriodicOrbit& o)
{
    if (!o.reebLabel) return "const";
    return std::to_string(o.reebLabel->m) + "*a" + std::to_string(o.reebLabel->axis + 1);
}

// admissible-profile orbits, broken by the forcing term when present
std::pair<ActionContext, std::vector<PeriodicOrbit>> profile_orbits(const RunConfig& c, const EllipsoidSpec& dom,
                                                                     Body& body)
{
    const double slope = resolved_slope(c, dom);
    const int K = resolved_K(c, dom, slope);
    const double eps = c.eps > 0.0 ? c.eps : 2.0 * c.width;
    body.extra["slope"] = slope;
    body.extra["K"] = K;
    body.extra["eps"] = eps;
    ActionContext ctx(admissible_profile(dom, slope, ProfileParams{eps, c.width}), K, c.m);
    std::vector<PeriodicOrbit> orbits = solve_quadratic_orbits(ctx);
    if (c.forcingAmp == 0.0) return {ctx, orbits};

    // mode 0: every mode 1..K on every axis, so each family feels the forcing at first order
    FourierLoop f(dom.n(), c.forcingMode == 0 ? K : std::abs(c.forcingMode));
    if (c.forcingMode == 0) {
        for (int k = 1; k <= K; ++k)
            for (int j = 0; j < dom.n(); ++j) f.at(k, j) = c.forcingAmp;
    } else {
        f.at(c.forcingMode, 0) = c.forcingAmp;
    }
    ActionContext forced(with_forcing(ctx.H, f), K, c.m);
    // phase samples along each family, offset by the seed
    constexpr int P = 64;
    std::mt19937_64 rng(c.seed);
    const double offset = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi / P)(rng);
    std::vector<double> phases;
    for (int j = 0; j < P; ++j) phases.push_back(offset + j * 2.0 * std::numbers::pi / P);
    std::vector<PeriodicOrbit> broken = break_families(forced, orbits, phases);
    return {forced, broken};
}

Body cmd_spectrum(const RunConfig& c)
{
    const EllipsoidSpec dom = load_domain(c.domain);
    Body b;
    const double slope = resolved_slope(c, dom);
    b.extra["slope"] = slope;
    b.table.columns = {"k", "value", "multiplier", "axis"};
    const ReebSpectrum s = reeb_spectrum(dom, slope);
    long long k = 0;
    for (const auto& e : s.entries)
        if (e.value < slope) b.table.rows.push_back({++k, e.value, (long long)e.m, (long long)e.axis + 1});
    return b;
}

Body cmd_orbits(const RunConfig& c)
{
    const EllipsoidSpec dom = load_domain(c.domain);
    Body b;
    const auto [ctx, orbits] = profile_orbits(c, dom, b);
    b.table.columns = {"label", "period", "action", "rel_index", "cz_index", "margin", "grad_norm", "family"};
    for (const auto& o : orbits)
        b.table.rows.push_back({label_of(o), o.reebLabel ? o.reebLabel->period : 0.0, o.actionValue,
                                (long long)o.relIndex, o.czIndex ? Cell((long long)*o.czIndex) : Cell(std::string()),
                                o.margin, o.gradNorm, o.family});
    return b;
}

Body capacity_rows(const RunConfig& c, bool verify)
{
    const EllipsoidSpec dom = load_domain(c.domain);
    Body b;
    PipelineConfig pc = pipeline_config(c);
    b.table.columns = {"k", "c_eh", "c_gh", "diff", "label"};
    if (verify) b.table.columns.push_back("pass");
    if (!verify) {
        // degenerate domains fall back to the multiset count on the GH side
        try {
            check_irrational(dom, resolved_slope(c, dom), pc.gh.orbit.irrationality);
        } catch (const DegeneracyError& e) {
            pc.gh.multiset = true;
            b.extra["gh_mode"] = std::string("multiset count, equivalence unverified: ") + e.what();
        }
    }
    const EqualityReport rep = [&] {
        if (verify) return verify_equality(dom, c.kmax, c.tol, pc);
        // same rows without the irrationality precondition
        EqualityReport r;
        const CapacitySequence eh = run_pipeline(Method::EH, dom, c.kmax, pc);
        const CapacitySequence gh = run_pipeline(Method::GH, dom, c.kmax, pc);
        r.slope = eh.slope;
        r.K = eh.K;
        r.diagnostics = gh.diagnostics;
        for (int k = 1; k <= c.kmax; ++k) {
            const double x = eh.at(k), y = gh.at(k);
            const double d = (std::isinf(x) && std::isinf(y)) ? 0.0 : std::abs(x - y);
            r.rows.push_back({k, x, y, std::isnan(d) ? kInf : d, "", true});
        }
        return r;
    }();
    const ReebSpectrum s = reeb_spectrum(dom, rep.slope + dom.a.back());
    for (const auto& row : rep.rows) {
        std::string label = row.label;
        if (label.empty() && std::isfinite(row.eh)) {
            for (const auto& e : s.entries)
                if (std::abs(e.value - row.eh) <= 1e-6 * (1.0 + e.value))
                    label += (label.empty() ? "" : " ") + std::to_string(e.m) + "*a" + std::to_string(e.axis + 1);
        }
        std::vector<Cell> r{(long long)row.k, row.eh, row.gh, row.diff, label};
        if (verify) r.push_back(row.pass ? std::string("PASS") : std::string("FAIL"));
        b.table.rows.push_back(r);
    }
    b.extra["slope"] = rep.slope;
    b.extra["K"] = rep.K;
    if (verify) b.extra["margin"] = rep.margin;
    b.extra["diagnostics"] = rep.diagnostics;
    b.fail = verify && !rep.pass;
    return b;
}

Body cmd_morse(const RunConfig& c)
{
    const EllipsoidSpec dom = load_domain(c.domain);
    Body b;
    const auto [ctx, orbits] = profile_orbits(c, dom, b);
    const double eps = b.extra["eps"].get<double>(), slope = b.extra["slope"].get<double>();
    const FilteredMorseComplex cx = build_complex(ctx, orbits, eps, slope);
    if (!boundary_squares_to_zero(cx)) throw NumericalError("boundary does not square to zero");
    const auto ranks = homology_ranks(cx);
    std::map<int, int> gens;
    for (int i = 0; i < cx.size(); ++i) ++gens[cx.degree(i)];
    b.table.columns = {"degree", "rank", "level", "generators"};
    for (const auto& [d, g] : gens)
        b.table.rows.push_back({(long long)d, (long long)(ranks.count(d) ? ranks.at(d) : 0), slope, (long long)g});
    b.extra["verified"] = cx.verified;
    b.attachment = complex_to_json(cx);
    b.fail = !cx.verified;
    return b;
}

Body cmd_axioms(const RunConfig& c)
{
    const EllipsoidSpec a = load_domain(c.domain), bdom = load_domain(c.domain2);
    Body b;
    PipelineConfig pc = pipeline_config(c);
    pc.slope = 0.0;  // each domain picks its own slope
    const AxiomReport rep = axiom_checks(a, bdom, c.kmax, c.scalings, c.tol, pc);
    b.table.columns = {"check", "method", "k", "lhs", "rhs", "pass"};
    for (const auto& r : rep.rows)
        b.table.rows.push_back(
            {r.check, method_name(r.method), (long long)r.k, r.lhs, r.rhs, r.pass ? std::string("PASS") : std::string("FAIL")});
    b.fail = !rep.pass;
    return b;
}

std::string error_line(const std::string& kind, const std::string& reason)
{
    return "error: kind=" + kind + " reason=" + nlohmann::json(reason).dump();
}

}  // namespace

RunOutcome run(const RunConfig& cfg)
{
    RunOutcome out;
    try {
        cfg.validate();
        Body b;
        if (cfg.command == "spectrum") b = cmd_spectrum(cfg);
        else if (cfg.command == "orbits") b = cmd_orbits(cfg);
        else if (cfg.command == "capacities") b = capacity_rows(cfg, false);
        else if (cfg.command == "verify") b = capacity_rows(cfg, true);
        else if (cfg.command == "morse") b = cmd_morse(cfg);
        else b = cmd_axioms(cfg);

        nlohmann::json prov = provenance(cfg);
        prov["resolved"] = b.extra;
        std::ostringstream os;
        if (cfg.format == Format::csv) {
            for (const auto& [k, v] : prov.items()) os << "# " << k << "=" << v.dump() << "\r\n";
            os << emit_report(b.table, Format::csv);
        } else {
            os << "{\"provenance\": " << prov.dump() << ",\n\"rows\": " << emit_report(b.table, Format::json);
            if (!b.attachment.is_null()) os << ",\n\"complex\": " << b.attachment.dump();
            os << "}\n";
        }
        out.report = os.str();
        out.exitCode = b.fail ? 1 : 0;
    } catch (const InputError& e) {
        out.exitCode = 2;
        out.error = error_line("input", e.what());
    } catch (const DegeneracyError& e) {
        out.exitCode = 3;
        out.error = error_line("degeneracy", e.what());
    } catch (const NumericalError& e) {
        out.exitCode = 3;
        out.error = error_line("numerical", e.what());
    } catch (const std::exception& e) {
        out.exitCode = 3;
        out.error = error_line("internal", e.what());
    }
    return out;
}

}  // namespace capax
