#include "capax/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>

#include "capax/errors.hpp"
#include "capax/parallel.hpp"

namespace capax {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_constant(const FourierLoop& x)
{
    for (int k = -x.K(); k <= x.K(); ++k)
        if (k != 0 && !x.coeffs().col(k + x.K()).isZero(0.0)) return false;
    return true;
}

Eigen::MatrixXd symplectic_J(int n)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        J(2 * j, 2 * j + 1) = -1.0;
        J(2 * j + 1, 2 * j) = 1.0;
    }
    return J;
}

// Unitary frame of the Lagrangian {(C v, Psi v)} in R^{2n} x R^{2n}, with
// C = diag(I, -I) in block coordinates (x..., y...).  Its intersections
// with the diagonal frame are exactly the eigenvectors of Psi for 1.
Eigen::MatrixXcd graph_unitary(const Eigen::MatrixXd& Psi, int n)
{
    Eigen::MatrixXd Pb(2 * n, 2 * n);
    for (int j = 0; j < n; ++j)
        for (int c = 0; c < 2; ++c)
            for (int l = 0; l < n; ++l)
                for (int d = 0; d < 2; ++d) Pb(j + c * n, l + d * n) = Psi(2 * j + c, 2 * l + d);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(4 * n, 2 * n);
    G.block(0, 0, n, n).setIdentity();                 // x-part of C
    G.block(n, 0, n, 2 * n) = Pb.topRows(n);           // x-part of Psi
    G.block(2 * n, n, n, n) = -Eigen::MatrixXd::Identity(n, n);  // y-part of C
    G.block(3 * n, 0, n, 2 * n) = Pb.bottomRows(n);    // y-part of Psi
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(4 * n, 2 * n);
    return Q.topRows(2 * n).cast<cplx>() + cplx(0.0, 1.0) * Q.bottomRows(2 * n).cast<cplx>();
}

struct Tracker {
    int n;
    Eigen::MatrixXcd Vadj;

    explicit Tracker(int n_) : n(n_)
    {
        Vadj = graph_unitary(Eigen::MatrixXd::Identity(2 * n, 2 * n), n).adjoint();
    }

    std::vector<double> angles(const Eigen::MatrixXd& Psi) const
    {
        const Eigen::MatrixXcd M = Vadj * graph_unitary(Psi, n);
        const Eigen::MatrixXcd W = M.transpose() * M;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(W, false);
        std::vector<double> a(2 * n);
        for (int i = 0; i < 2 * n; ++i) a[i] = std::arg(es.eigenvalues()(i));
        return a;
    }
};

double angdist(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

// permutation of b minimizing the largest angular move from a
double match(const std::vector<double>& a, std::vector<double>& b)
{
    const int N = static_cast<int>(a.size());
    std::vector<int> perm(N), best(N);
    std::vector<bool> used(N, false);
    double bestCost = std::numeric_limits<double>::infinity();
    std::function<void(int, double)> dfs = [&](int i, double cost) {
        if (cost >= bestCost) return;
        if (i == N) {
            bestCost = cost;
            best = perm;
            return;
        }
        for (int j = 0; j < N; ++j) {
            if (used[j]) continue;
            used[j] = true;
            perm[i] = j;
            dfs(i + 1, std::max(cost, angdist(a[i], b[j])));
            used[j] = false;
        }
    };
    dfs(0, 0.0);
    std::vector<double> out(N);
    for (int i = 0; i < N; ++i) out[i] = b[best[i]];
    b = out;
    return bestCost;
}

using State = std::vector<double>;

Eigen::Map<const Eigen::MatrixXd> as_matrix(const State& s, int d) { return {s.data(), d, d}; }

}  // namespace

FredholmPairDim relative_dim(const Eigen::MatrixXd& V0, const Eigen::MatrixXd& W0, double threshold)
{
    if (V0.rows() != W0.rows()) throw InputError("relative_dim: bases live in different spaces");
    FredholmPairDim r;
    auto orth = [](const Eigen::MatrixXd& B) -> Eigen::MatrixXd {
        if (B.cols() == 0) return B;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
        return qr.householderQ() * Eigen::MatrixXd::Identity(B.rows(), B.cols());
    };
    r.V = orth(V0);
    r.W = orth(W0);
    const long p = r.V.cols(), q = r.W.cols();
    long rank = 0;
    if (p > 0 && q > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.W.transpose() * r.V);
        for (long i = 0; i < svd.singularValues().size(); ++i) {
            const double s = svd.singularValues()(i);
            if (s > threshold) ++rank;
            if (s >= 0.1 * threshold && s <= 10.0 * threshold) r.ambiguous = true;
        }
    }
    // dim(V cap W^perp) = p - rank, dim(V^perp cap W) = q - rank
    r.value = static_cast<int>((p - rank) - (q - rank));
    return r;
}

MorseData morse_data(const ActionContext& ctx, const FourierLoop& x)
{
    MorseData md;
    Eigen::MatrixXd M = hessian_form(ctx, x);
    md.quotiented = !ctx.H.forcing && !is_constant(x);
    if (md.quotiented) {
        Eigen::VectorXd v = x.resized(ctx.K).derivative().to_h12();
        v.normalize();
        v(0) += v(0) >= 0.0 ? 1.0 : -1.0;
        const double beta = 2.0 / v.squaredNorm();
        const Eigen::VectorXd Mv = M * v;
        const double c = v.dot(Mv);
        M.noalias() -= beta * v * Mv.transpose();
        M.noalias() -= beta * Mv * v.transpose();
        M.noalias() += beta * beta * c * v * v.transpose();
        const long N = M.rows();
        M = M.bottomRightCorner(N - 1, N - 1).eval();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    md.eigenvalues = es.eigenvalues();
    const double norm = md.eigenvalues.cwiseAbs().maxCoeff();
    md.margin = norm > 0.0 ? md.eigenvalues.cwiseAbs().minCoeff() / norm : 0.0;
    md.negatives = static_cast<int>((md.eigenvalues.array() < 0.0).count());
    md.index = md.negatives - ctx.dim_H_minus();
    return md;
}

int relative_morse_index(const ActionContext& ctx, const PeriodicOrbit& orbit, const OrbitOptions& opts)
{
    const MorseData md = morse_data(ctx, orbit.loop);
    if (md.margin < opts.nuRel) {
        std::ostringstream os;
        os << "Hessian eigenvalue within margin: min|lambda|/|M| = " << md.margin << " < " << opts.nuRel;
        throw DegeneracyError(os.str());
    }
    return md.index;
}

CzResult cz_crossing_path(int n, const std::function<Eigen::MatrixXd(double)>& S, const CzOptions& opts)
{
    namespace odeint = boost::numeric::odeint;
    const int d = 2 * n;
    const Eigen::MatrixXd J = symplectic_J(n);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    const Tracker tr(n);
    CzResult res;

    const Eigen::MatrixXd S0 = S(0.0) - opts.eta * I;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(0.5 * (S0 + S0.transpose()), Eigen::EigenvaluesOnly);
    int sig = 0;
    for (int i = 0; i < d; ++i) sig += es0.eigenvalues()(i) > 0.0 ? 1 : -1;
    int crossings = 0;

    auto rhs = [&](const State& x, State& dx, double t) {
        const Eigen::MatrixXd A = J * (S(t) - opts.eta * I);
        Eigen::Map<Eigen::MatrixXd>(dx.data(), d, d).noalias() = A * as_matrix(x, d);
    };

    State phi(d * d, 0.0);
    for (int i = 0; i < d; ++i) phi[i * d + i] = 1.0;
    auto stepper = odeint::make_dense_output(opts.tol, opts.tol, odeint::runge_kutta_dopri5<State>());
    const double ts = std::min(1e-6, 1e-3 / std::max(1.0, S0.norm()));
    stepper.initialize(phi, 0.0, ts);
    while (stepper.current_time() < ts) stepper.do_step(rhs);

    State buf(d * d);
    auto angles_at = [&](double t) {
        stepper.calc_state(t, buf);
        return tr.angles(as_matrix(buf, d));
    };

    std::vector<double> prev = angles_at(ts);
    {
        int s = 0;
        for (double a : prev) s += a > 0.0 ? 1 : (a < 0.0 ? -1 : 0);
        if (s != sig)
            throw NumericalError("crossing count: initial eigen-angles disagree with sign(S(0))");
    }
    double tprev = ts;

    // advance the tracked angles from (tprev, prev) to tb inside the current step
    std::function<void(double)> advance = [&](double tb) {
        std::vector<double> nxt = angles_at(tb);
        const double move = match(prev, nxt);
        if (move > 0.05 && tb - tprev > 1e-14) {
            const double tm = 0.5 * (tprev + tb);
            advance(tm);
            advance(tb);
            return;
        }
        for (size_t i = 0; i < nxt.size(); ++i) {
            const double o = prev[i], w = nxt[i];
            if (std::abs(o) >= 0.5 || std::abs(w) >= 0.5) continue;
            int sgn = 0;
            if (o < 0.0 && w >= 0.0) sgn = +1;
            else if (o >= 0.0 && w < 0.0) sgn = -1;
            if (!sgn) continue;
            // locate the crossing by bisection on the tracked angle
            double lo = tprev, hi = tb;
            std::vector<double> alo = prev;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                std::vector<double> am = angles_at(mid);
                match(alo, am);
                if ((am[i] >= 0.0) == (o >= 0.0)) {
                    lo = mid;
                    alo = am;
                } else {
                    hi = mid;
                }
            }
            crossings += sgn;
            res.crossingTimes.push_back(0.5 * (lo + hi));
            res.crossingSigns.push_back(sgn);
        }
        prev = nxt;
        tprev = tb;
    };

    while (tprev < 1.0) {
        if (stepper.current_time() <= tprev) stepper.do_step(rhs);
        const double tb = std::min(stepper.current_time(), 1.0);
        advance(tb);
    }
    stepper.calc_state(1.0, buf);
    const Eigen::MatrixXd Phi = as_matrix(buf, d);
    double em = std::numeric_limits<double>::infinity();
    for (double a : tr.angles(Phi)) em = std::min(em, std::abs(a));
    res.endpointMargin = em;
    res.symplecticDefect = (Phi.transpose() * J * Phi - J).norm() / std::max(1.0, Phi.squaredNorm());
    if (em < opts.endpointTol) {
        std::ostringstream os;
        os << "degenerate endpoint: Phi(1) has eigenvalue 1 (angle " << em << ")";
        throw DegeneracyError(os.str());
    }
    res.index = sig / 2 + crossings;
    return res;
}

CzResult cz_crossing(const ActionContext& ctx, const FourierLoop& x, const CzOptions& opts)
{
    const FourierLoop y = x.resized(ctx.K);
    return cz_crossing_path(ctx.n(), [&](double t) { return ctx.H.hessian(eval_at(y, t)); }, opts);
}

int cz_index_crossing(const ActionContext& ctx, const PeriodicOrbit& orbit, const CzOptions& opts)
{
    return cz_crossing(ctx, orbit.loop, opts).index;
}

PeriodicOrbit certify_orbit(const ActionContext& ctx, const FourierLoop& x, const OrbitOptions& opts)
{
    PeriodicOrbit o;
    o.loop = x.resized(ctx.K);
    o.actionValue = action(ctx, o.loop);
    o.gradNorm = h12_norm(grad_action(ctx, o.loop));
    const MorseData md = morse_data(ctx, o.loop);
    o.family = md.quotiented;
    o.margin = md.margin;
    o.relIndex = md.index;
    o.nondegenerate = md.margin >= opts.nuRel;
    if (!o.nondegenerate && !opts.allowDegenerate) {
        std::ostringstream os;
        os << "degenerate orbit at action " << o.actionValue << ": min|lambda|/|M| = " << md.margin;
        throw DegeneracyError(os.str());
    }
    if (opts.computeCz && o.nondegenerate) o.czIndex = cz_crossing(ctx, o.loop).index;
    return o;
}

std::vector<PeriodicOrbit> solve_quadratic_orbits(const ActionContext& ctx, const OrbitOptions& opts)
{
    const HamiltonianSpec& H = ctx.H;
    if (!H.radial() || H.forcing)
        throw InputError("solve_quadratic_orbits needs an autonomous radial Hamiltonian");
    const int n = ctx.n();
    std::vector<PeriodicOrbit> out;

    if (H.kind == HamiltonianKind::quadraticModel) {
        // H_B is constant on B: its constant orbits fill B and are degenerate.
        PeriodicOrbit o;
        o.loop = FourierLoop(n, ctx.K);
        o.actionValue = action(ctx, o.loop);
        o.gradNorm = h12_norm(grad_action(ctx, o.loop));
        o.nondegenerate = false;
        out.push_back(o);
        return out;
    }

    if (!opts.allowDegenerate) check_irrational(H.domain, H.slope, opts.irrationality);
    const ReebSpectrum spec = reeb_spectrum(H.domain, H.slope);
    for (const auto& e : spec.entries)
        if (e.m > ctx.K)
            throw InputError("truncation K=" + std::to_string(ctx.K) + " cannot carry an orbit of multiplicity " +
                             std::to_string(e.m));

    std::vector<FourierLoop> loops;
    std::vector<std::optional<ReebLabel>> labels;
    loops.emplace_back(n, ctx.K);  // the origin
    labels.emplace_back();
    for (const auto& e : spec.entries) {
        if (e.value >= H.slope) continue;
        const double r = H.level_of_period(e.value);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
        v(e.axis) = std::sqrt(r * H.domain.a[e.axis] / kPi);
        loops.push_back(FourierLoop::mode_loop(e.m, v, ctx.K));
        labels.push_back(ReebLabel{e.m, e.axis, e.value});
    }
    out.resize(loops.size());
    parallel_for(static_cast<int>(loops.size()), [&](int i) {
        out[i] = certify_orbit(ctx, loops[i], opts);
        out[i].reebLabel = labels[i];
    });
    return out;
}

std::vector<PeriodicOrbit> break_families(const ActionContext& forced, const std::vector<PeriodicOrbit>& families,
                                          const std::vector<double>& phases, const OrbitOptions& opts)
{
    auto rotated = [](const FourierLoop& x, double th) {
        FourierLoop g = x;
        g.coeffs() *= std::polar(1.0, th);
        return g;
    };
    struct Job {
        size_t fam;
        double phase;
    };
    std::vector<Job> jobs;
    const int P = static_cast<int>(phases.size());
    for (size_t f = 0; f < families.size(); ++f) {
        if (!families[f].family || P < 3) {
            jobs.push_back({f, 0.0});
            continue;
        }
        std::vector<double> val(P);
        for (int j = 0; j < P; ++j) val[j] = action(forced, rotated(families[f].loop, phases[j]));
        for (int j = 0; j < P; ++j) {
            const double l = val[(j + P - 1) % P], c = val[j], r = val[(j + 1) % P];
            const bool isMax = c > l && c > r;
            if (!(isMax || (c < l && c < r))) continue;
            // Newton steps are straight lines and leave the circle, so the
            // extremum along the family has to be located first
            const double hl = std::abs(std::remainder(phases[j] - phases[(j + P - 1) % P], 2.0 * kPi));
            const double hr = std::abs(std::remainder(phases[(j + 1) % P] - phases[j], 2.0 * kPi));
            const double sgn = isMax ? -1.0 : 1.0;
            const auto best = boost::math::tools::brent_find_minima(
                [&](double th) { return sgn * action(forced, rotated(families[f].loop, th)); }, phases[j] - hl,
                phases[j] + hr, 40);
            jobs.push_back({f, best.first});
        }
    }
    std::vector<std::optional<PeriodicOrbit>> found(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), [&](int j) {
        try {
            PeriodicOrbit o = refine_orbit(forced, rotated(families[jobs[j].fam].loop, jobs[j].phase), opts);
            o.reebLabel = families[jobs[j].fam].reebLabel;
            found[j] = std::move(o);
        } catch (const NumericalError&) {
        }
    });
    std::vector<PeriodicOrbit> out;
    std::vector<size_t> origin;
    for (size_t j = 0; j < found.size(); ++j) {
        auto& o = found[j];
        if (!o) continue;
        const double scale = std::max(1.0, h12_norm(o->loop));
        const bool dup = std::any_of(out.begin(), out.end(), [&](const PeriodicOrbit& q) {
            return h12_norm(q.loop - o->loop) <= 1e-6 * scale;
        });
        if (dup) continue;
        out.push_back(std::move(*o));
        origin.push_back(jobs[j].fam);
    }
    // a family of quotient index i breaks into equally many orbits of index i and i + 1;
    // anything else means the forcing moved Newton out of the family's neighbourhood
    for (size_t f = 0; f < families.size(); ++f) {
        if (!families[f].family || P < 3) continue;
        const int i = families[f].relIndex;
        int lower = 0, upper = 0;
        bool stray = false;
        for (size_t q = 0; q < out.size(); ++q) {
            if (origin[q] != f) continue;
            if (out[q].basinJump) stray = true;
            else if (out[q].relIndex == i) ++lower;
            else if (out[q].relIndex == i + 1) ++upper;
            else stray = true;
        }
        if (stray || lower == 0 || lower != upper) {
            std::ostringstream os;
            os << "forcing does not break the family at action " << families[f].actionValue << " into index pairs ("
               << lower << " of index " << i << ", " << upper << " of index " << i + 1
               << (stray ? ", others strayed" : "") << "); reduce the forcing or widen the collar";
            throw NumericalError(os.str());
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PeriodicOrbit& a, const PeriodicOrbit& b) { return a.actionValue < b.actionValue; });
    return out;
}

PeriodicOrbit refine_orbit(const ActionContext& ctx, const FourierLoop& guess, const OrbitOptions& opts)
{
    const int n = ctx.n(), K = ctx.K;
    FourierLoop x = guess.resized(K);
    if (x.n() != n) throw InputError("guess dimension does not match H");
    const double a0 = action(ctx, x);
    Eigen::VectorXd g = grad_action(ctx, x).to_h12();
    double gn = g.norm();
    int it = 0;
    for (; it < opts.newtonMaxIter && gn > opts.newtonTol; ++it) {
        const Eigen::MatrixXd M = hessian_form(ctx, x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const double cut = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
        Eigen::VectorXd coef = es.eigenvectors().transpose() * g;
        for (int i = 0; i < coef.size(); ++i) {
            const double l = es.eigenvalues()(i);
            coef(i) = std::abs(l) > cut ? -coef(i) / l : 0.0;
        }
        const Eigen::VectorXd step = es.eigenvectors() * coef;
        double s = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, s *= 0.5) {
            FourierLoop y = x + FourierLoop::from_h12(n, K, s * step);
            Eigen::VectorXd gy = grad_action(ctx, y).to_h12();
            if (gy.norm() < (1.0 - 1e-4 * s) * gn || gy.norm() <= opts.newtonTol) {
                x = y;
                g = gy;
                gn = gy.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (gn > opts.newtonTol) {
        std::ostringstream os;
        os << "Newton did not converge: |grad A| = " << gn << " after " << it << " iterations";
        throw NumericalError(os.str());
    }
    PeriodicOrbit o = certify_orbit(ctx, x, opts);
    const double moved = h12_norm(x - guess.resized(K));
    o.basinJump = moved > 0.1 * std::max(1.0, h12_norm(guess)) ||
                  std::abs(o.actionValue - a0) > 0.1 * std::max(1.0, std::abs(a0));
    return o;
}

}  // namespace capax
