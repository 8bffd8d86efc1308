#include "capax/capacities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "capax/errors.hpp"

namespace capax {

std::string method_name(Method m) { return m == Method::EH ? "EH" : "GH"; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> sorted_spectrum(const EllipsoidSpec& dom, int count)
{
    const ReebSpectrum s = reeb_spectrum(dom, (count + 1) * dom.a.front());
    std::vector<double> v;
    for (const auto& e : s.entries) v.push_back(e.value);
    std::sort(v.begin(), v.end());
    return v;
}

// Neville evaluation at w = 0 of the interpolant through (w_i, v_i)
double extrapolate_zero(const std::vector<double>& w, std::vector<double> v)
{
    const size_t n = w.size();
    for (size_t m = 1; m < n; ++m)
        for (size_t i = 0; i + m < n; ++i)
            v[i] = (w[i + m] * v[i] - w[i] * v[i + 1]) / (w[i + m] - w[i]);
    return v[0];
}

}  // namespace

double select_slope(const EllipsoidSpec& dom, int kmax)
{
    if (kmax < 1) throw InputError("kmax must be positive");
    const std::vector<double> spec = sorted_spectrum(dom, kmax);
    double L = 1.1 * spec.at(kmax - 1);
    // exclusion points near L, then step to the midpoint of the free interval above
    const double tol = 1e-3 * L;
    std::vector<double> ex = sorted_spectrum(dom, static_cast<int>(2 * L / dom.a.front()) + kmax);
    for (int j = 1; j * kTwoPi < 3.0 * L; ++j) ex.push_back(j * kTwoPi);
    std::sort(ex.begin(), ex.end());
    for (int guard = 0; guard < 64; ++guard) {
        auto it = std::find_if(ex.begin(), ex.end(), [&](double e) { return std::abs(e - L) < tol; });
        if (it == ex.end()) break;
        auto next = std::upper_bound(ex.begin(), ex.end(), *it + tol);
        L = next == ex.end() ? *it + 10.0 * tol : 0.5 * (*it + *next);
    }
    if (nearest_exclusion(dom, L).distance < 1e-9 * L) throw NumericalError("could not move the slope off the spectrum");
    return L;
}

int required_K(const EllipsoidSpec& dom, double slope)
{
    return static_cast<int>(std::floor(slope / dom.a.front()));
}

CapacitySequence capacity_eh(const ActionContext& ctx, int kmax)
{
    const EhCounter counter(ctx);
    CapacitySequence seq;
    seq.method = Method::EH;
    seq.domain = ctx.H.domain;
    seq.slope = ctx.H.slope;
    seq.K = ctx.K;
    const double L = ctx.H.slope;
    const double top = L * (1.0 - 1e-12);
    const int total = static_cast<int>(std::count_if(counter.thresholds().begin(), counter.thresholds().end(),
                                                     [&](double t) { return t < L; }));
    // count that treats a level glued to a threshold as the threshold itself
    auto probe = [&](double c, bool& boundary) {
        try {
            boundary = false;
            return counter.count(c);
        } catch (const DegeneracyError&) {
            boundary = true;
            return -1;
        }
    };
    for (int k = 1; k <= kmax; ++k) {
        if (k > total) {
            seq.values[k] = kInf;
            continue;
        }
        double lo = 0.0, hi = top;
        bool b = false;
        if (probe(hi, b) < k && !b) throw NumericalError("EH count below k at the slope");
        double found = -1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const int c = probe(mid, b);
            if (b) {
                found = mid;
                break;
            }
            (c >= k ? hi : lo) = mid;
        }
        if (found < 0.0) {
            bool b1 = false, b2 = false;
            const int cl = probe(lo, b1), ch = probe(hi, b2);
            if (!b1 && !b2 && !(cl < k && ch >= k))
                throw NumericalError("bisection collapsed without a count jump at k=" + std::to_string(k));
            found = hi;
        }
        seq.values[k] = found;
    }
    return seq;
}

GhLevel gh_level(const ActionContext& base, double width, const GhOptions& opts)
{
    const double eps = opts.epsPerWidth * width;
    GhLevel lv;
    lv.ctx = base;
    lv.ctx.H = admissible_profile(base.H.domain, base.H.slope, ProfileParams{eps, width});
    OrbitOptions oo = opts.orbit;
    if (opts.multiset) {
        oo.allowDegenerate = true;
        oo.computeCz = false;
    }
    lv.orbits = solve_quadratic_orbits(lv.ctx, oo);
    ComplexOptions co;
    co.multiset = opts.multiset;
    lv.complex = build_complex(lv.ctx, lv.orbits, eps, base.H.slope, co);
    return lv;
}

CapacitySequence capacity_gh(const ActionContext& ctx, int kmax, const GhOptions& opts)
{
    if (ctx.H.kind != HamiltonianKind::admissibleProfile)
        throw InputError("GH pipeline needs an admissible profile");
    CapacitySequence seq;
    seq.method = Method::GH;
    seq.domain = ctx.H.domain;
    seq.slope = ctx.H.slope;
    seq.K = ctx.K;
    const int n = ctx.n();

    std::vector<GhLevel> levels;
    if (opts.widths.size() <= 1) {
        GhLevel lv;
        lv.ctx = ctx;
        OrbitOptions oo = opts.orbit;
        if (opts.multiset) {
            oo.allowDegenerate = true;
            oo.computeCz = false;
        }
        lv.orbits = solve_quadratic_orbits(ctx, oo);
        ComplexOptions co;
        co.multiset = opts.multiset;
        lv.complex = build_complex(ctx, lv.orbits, ctx.H.epsilon, ctx.H.slope, co);
        levels.push_back(std::move(lv));
    } else {
        for (double w : opts.widths) levels.push_back(gh_level(ctx, w, opts));
    }

    // per level: c_k as the action in degree n-1+2k (or k-th action for multisets)
    std::vector<std::map<int, double>> perLevel(levels.size());
    std::vector<std::map<int, ReebLabel>> labels(levels.size());
    for (size_t l = 0; l < levels.size(); ++l) {
        const FilteredMorseComplex& cx = levels[l].complex;
        if (!cx.verified) seq.verified = false;
        if (opts.multiset) {
            std::vector<double> acts;
            for (const auto& g : cx.generators) acts.push_back(g.actionValue);
            std::sort(acts.begin(), acts.end());
            for (int k = 1; k <= kmax; ++k) perLevel[l][k] = k <= static_cast<int>(acts.size()) ? acts[k - 1] : kInf;
            continue;
        }
        for (int k = 1; k <= kmax; ++k) {
            const int d = n - 1 + 2 * k;
            double best = kInf;
            int hits = 0;
            for (const auto& g : cx.generators) {
                const int deg = g.czIndex ? *g.czIndex : g.relIndex;
                if (g.czIndex && *g.czIndex != g.relIndex) {
                    seq.verified = false;
                    seq.diagnostics.push_back("index mismatch at action " + std::to_string(g.actionValue));
                }
                if (deg != d) continue;
                ++hits;
                if (g.actionValue < best) {
                    best = g.actionValue;
                    if (g.reebLabel) labels[l][k] = *g.reebLabel;
                }
            }
            if (hits > 1) {
                seq.verified = false;
                seq.diagnostics.push_back(std::to_string(hits) + " generators in degree " + std::to_string(d));
            }
            perLevel[l][k] = best;
        }
    }

    for (int k = 1; k <= kmax; ++k) {
        std::vector<double> w, v;
        bool inf = false;
        for (size_t l = 0; l < levels.size(); ++l) {
            const double x = perLevel[l][k];
            if (std::isinf(x)) inf = true;
            w.push_back(levels[l].ctx.H.width);
            v.push_back(x);
            if (l > 0 && labels[l].count(k) && labels[0].count(k) &&
                (labels[l][k].m != labels[0][k].m || labels[l][k].axis != labels[0][k].axis)) {
                seq.verified = false;
                seq.diagnostics.push_back("degree " + std::to_string(n - 1 + 2 * k) + " changes orbit across widths");
            }
        }
        double c = inf ? kInf : (levels.size() > 1 ? extrapolate_zero(w, v) : v[0]);
        if (inf) seq.diagnostics.push_back("no generator in degree " + std::to_string(n - 1 + 2 * k) + " below the slope");
        if (c >= seq.slope) c = kInf;
        seq.values[k] = c;
    }
    return seq;
}

namespace {

struct Resolved {
    double slope;
    int K, m;
};

Resolved resolve(const EllipsoidSpec& dom, int kmax, const PipelineConfig& cfg)
{
    Resolved r;
    r.slope = cfg.slope > 0.0 ? cfg.slope : select_slope(dom, kmax);
    r.K = cfg.K > 0 ? cfg.K : required_K(dom, r.slope) + 2;
    r.m = cfg.m;
    if (required_K(dom, r.slope) > r.K)
        throw InputError("truncation K=" + std::to_string(r.K) + " is below the largest multiplicity " +
                         std::to_string(required_K(dom, r.slope)) + " under the slope");
    return r;
}

ActionContext gh_context(const EllipsoidSpec& dom, const Resolved& r, const GhOptions& g)
{
    const double w = g.widths.empty() ? 1e-3 : g.widths.back();
    return ActionContext(admissible_profile(dom, r.slope, ProfileParams{g.epsPerWidth * w, w}), r.K, r.m);
}

std::string nearest_labels(const EllipsoidSpec& dom, double c, double slope)
{
    if (std::isinf(c)) return "";
    const ReebSpectrum s = reeb_spectrum(dom, std::max(c, slope) * 1.5 + dom.a.back());
    double best = kInf;
    for (const auto& e : s.entries) best = std::min(best, std::abs(e.value - c));
    std::ostringstream os;
    bool first = true;
    for (const auto& e : s.entries)
        if (std::abs(e.value - c) <= best + 1e-9 * (1.0 + c)) {
            os << (first ? "" : " ") << e.m << "*a" << e.axis + 1;
            first = false;
        }
    return os.str();
}

}  // namespace

CapacitySequence run_pipeline(Method method, const EllipsoidSpec& dom, int kmax, const PipelineConfig& cfg)
{
    const Resolved r = resolve(dom, kmax, cfg);
    if (method == Method::EH)
        return capacity_eh(ActionContext(quadratic_model(dom, r.slope, cfg.epsEh), r.K, r.m), kmax);
    GhOptions g = cfg.gh;
    std::string note;
    if (!g.multiset) {
        try {
            check_irrational(dom, r.slope, g.orbit.irrationality);
        } catch (const DegeneracyError& e) {
            g.multiset = true;
            note = std::string("multiset count, equivalence unverified: ") + e.what();
        }
    }
    CapacitySequence seq = capacity_gh(gh_context(dom, r, g), kmax, g);
    if (!note.empty()) seq.diagnostics.insert(seq.diagnostics.begin(), note);
    return seq;
}

EqualityReport verify_equality(const EllipsoidSpec& dom, int kmax, double tol, const PipelineConfig& cfg)
{
    const Resolved r = resolve(dom, kmax, cfg);
    check_irrational(dom, r.slope, cfg.gh.orbit.irrationality);
    EqualityReport rep;
    rep.domain = dom;
    rep.kmax = kmax;
    rep.K = r.K;
    rep.m = r.m > 0 ? r.m : 4 * r.K;
    rep.slope = r.slope;
    rep.tol = tol;
    const ReebSpectrum s = reeb_spectrum(dom, r.slope);
    rep.margin = nearest_exclusion(dom, r.slope).distance;
    for (size_t i = 0; i + 1 < s.entries.size(); ++i)
        for (size_t j = i + 1; j < s.entries.size(); ++j)
            rep.margin = std::min(rep.margin, std::abs(s.entries[i].value - s.entries[j].value) /
                                                  std::max(s.entries[i].value, s.entries[j].value));

    const CapacitySequence eh = capacity_eh(ActionContext(quadratic_model(dom, r.slope, cfg.epsEh), r.K, r.m), kmax);
    const CapacitySequence gh = capacity_gh(gh_context(dom, r, cfg.gh), kmax, cfg.gh);
    rep.diagnostics = gh.diagnostics;
    if (!gh.verified) rep.diagnostics.push_back("GH complex not fully verified");
    for (int k = 1; k <= kmax; ++k) {
        EqualityRow row;
        row.k = k;
        row.eh = eh.at(k);
        row.gh = gh.at(k);
        const bool bothInf = std::isinf(row.eh) && std::isinf(row.gh);
        row.diff = bothInf ? 0.0 : std::abs(row.eh - row.gh);
        if (std::isnan(row.diff)) row.diff = kInf;
        row.pass = bothInf || row.diff <= tol * (1.0 + std::min(row.eh, row.gh));
        row.label = nearest_labels(dom, std::isinf(row.eh) ? row.gh : row.eh, r.slope);
        if (!row.pass) {
            rep.pass = false;
            std::ostringstream os;
            os.precision(17);
            os << "FAIL k=" << k << " eh=" << row.eh << " gh=" << row.gh << " nearest " << row.label;
            rep.diagnostics.push_back(os.str());
        }
        rep.rows.push_back(row);
    }
    return rep;
}

AxiomReport axiom_checks(const EllipsoidSpec& domA, const EllipsoidSpec& domB, int kmax,
                         const std::vector<double>& scalings, double tol, const PipelineConfig& cfg)
{
    if (!domA.inside(domB)) throw InputError(domA.label() + " is not inside " + domB.label());
    AxiomReport rep;
    auto close = [&](double x, double y) {
        if (std::isinf(x) || std::isinf(y)) return std::isinf(x) && std::isinf(y);
        return std::abs(x - y) <= tol * (1.0 + std::abs(y));
    };
    for (Method m : {Method::EH, Method::GH}) {
        const CapacitySequence a = run_pipeline(m, domA, kmax, cfg);
        const CapacitySequence b = run_pipeline(m, domB, kmax, cfg);
        for (int k = 1; k <= kmax; ++k) {
            const double x = a.at(k), y = b.at(k);
            rep.rows.push_back({"monotone", m, k, x, y, x <= y || close(x, y)});
        }
        for (double r : scalings) {
            // an explicit slope override scales with the domain
            PipelineConfig sc = cfg;
            if (sc.slope > 0.0) sc.slope *= r * r;
            const CapacitySequence s = run_pipeline(m, domA.scaled(r), kmax, sc);
            std::ostringstream name;
            name << "conformal r=" << r;
            for (int k = 1; k <= kmax; ++k) {
                const double lhs = s.at(k), rhs = r * r * a.at(k);
                rep.rows.push_back({name.str(), m, k, lhs, rhs, close(lhs, rhs)});
            }
        }
    }
    for (const auto& row : rep.rows) rep.pass = rep.pass && row.pass;
    return rep;
}

}  // namespace capax
