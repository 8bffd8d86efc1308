#include "capax/complexes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "capax/errors.hpp"
#include "capax/parallel.hpp"

namespace capax {

// ==== rational linear algebra ====

namespace {

using RVec = std::vector<Rational>;

// in-place row reduction; returns pivot columns
std::vector<int> rref(RMatrix& A, int cols)
{
    std::vector<int> piv;
    const int rows = static_cast<int>(A.size());
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int p = -1;
        for (int i = r; i < rows; ++i)
            if (A[i][c] != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(A[r], A[p]);
        const Rational inv = Rational(1) / A[r][c];
        for (int j = c; j < cols; ++j) A[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            const Rational f = A[i][c];
            for (int j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

int rank_of_columns(const std::vector<RVec>& vecs, int dim)
{
    if (vecs.empty()) return 0;
    RMatrix A(vecs.size(), RVec(dim));
    for (size_t i = 0; i < vecs.size(); ++i) A[i] = vecs[i];
    return static_cast<int>(rref(A, dim).size());
}

// coordinates of z in the independent columns cols (z must lie in their span)
RVec solve_in_span(const std::vector<RVec>& cols, const RVec& z)
{
    const int dim = static_cast<int>(z.size());
    const int p = static_cast<int>(cols.size());
    RMatrix A(dim, RVec(p + 1));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < p; ++j) A[i][j] = cols[j][i];
        A[i][p] = z[i];
    }
    const auto piv = rref(A, p + 1);
    if (!piv.empty() && piv.back() == p) throw NumericalError("vector is not in the span");
    RVec x(p);
    for (size_t r = 0; r < piv.size(); ++r) x[piv[r]] = A[r][p];
    return x;
}

}  // namespace

int rational_rank(RMatrix A)
{
    if (A.empty()) return 0;
    return static_cast<int>(rref(A, static_cast<int>(A[0].size())).size());
}

std::vector<std::vector<Rational>> rational_kernel(const RMatrix& A0, int cols)
{
    RMatrix A = A0;
    const auto piv = rref(A, cols);
    std::vector<bool> isPiv(cols, false);
    for (int c : piv) isPiv[c] = true;
    std::vector<RVec> basis;
    for (int f = 0; f < cols; ++f) {
        if (isPiv[f]) continue;
        RVec v(cols);
        v[f] = 1;
        for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -A[r][f];
        basis.push_back(v);
    }
    return basis;
}

// ==== the complex ====

RMatrix FilteredMorseComplex::boundary_matrix() const
{
    RMatrix D(size(), RVec(size()));
    for (const auto& [rc, v] : boundary) D[rc.first][rc.second] = v;
    return D;
}

bool boundary_squares_to_zero(const FilteredMorseComplex& cx)
{
    const RMatrix D = cx.boundary_matrix();
    const int G = cx.size();
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            Rational s = 0;
            for (int k = 0; k < G; ++k)
                if (D[i][k] != 0 && D[k][j] != 0) s += D[i][k] * D[k][j];
            if (s != 0) return false;
        }
    return true;
}

namespace {

Eigen::VectorXd gradient_h12(const ActionContext& ctx, const Eigen::VectorXd& u)
{
    return grad_action(ctx, FourierLoop::from_h12(ctx.n(), ctx.K, u)).to_h12();
}

void canonical_signs(Eigen::MatrixXd& F)
{
    for (long c = 0; c < F.cols(); ++c) {
        Eigen::Index i;
        F.col(c).cwiseAbs().maxCoeff(&i);
        if (F(i, c) < 0.0) F.col(c) *= -1.0;
    }
}

// orthonormal basis of the complement of unit vector d
Eigen::MatrixXd complement(const Eigen::VectorXd& d)
{
    const long N = d.size();
    Eigen::VectorXd v = d;
    v(0) += v(0) >= 0.0 ? 1.0 : -1.0;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(N, N) - (2.0 / v.squaredNorm()) * v * v.transpose();
    return Q.rightCols(N - 1);
}

// negative eigenspace of M restricted to d-perp, as N x q frame
Eigen::MatrixXd negative_frame(const Eigen::MatrixXd& M, const Eigen::VectorXd& d)
{
    const Eigen::MatrixXd Q = complement(d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.transpose() * M * Q);
    int q = 0;
    while (q < es.eigenvalues().size() && es.eigenvalues()(q) < 0.0) ++q;
    return Q * es.eigenvectors().leftCols(q);
}

double det_overlap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    if (A.cols() != B.cols()) return 0.0;
    if (A.cols() == 0) return 1.0;
    return (A.transpose() * B).determinant();
}

struct Shooter {
    const ActionContext& ctx;
    const std::vector<PeriodicOrbit>& gens;
    const ShootingOptions& so;
    double lo;

    int locate(const FourierLoop& y) const
    {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < gens.size(); ++i) {
            const double dist = h12_norm(y - gens[i].loop);
            if (dist < bd) {
                bd = dist;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0 && bd <= 1e-5 * std::max(1.0, h12_norm(y))) return best;
        return -1;
    }

    // slow eigenvector of M closest to ref, oriented along ref; empty if none
    Eigen::VectorXd slow_direction(const Eigen::MatrixXd& M, const Eigen::VectorXd& ref) const
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        double best = 0.5;
        Eigen::VectorXd e;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            if (std::abs(es.eigenvalues()(i)) >= so.slowCut) continue;
            const double ov = es.eigenvectors().col(i).dot(ref);
            if (std::abs(ov) > best) {
                best = std::abs(ov);
                e = ov > 0.0 ? Eigen::VectorXd(es.eigenvectors().col(i)) : Eigen::VectorXd(-es.eigenvectors().col(i));
            }
        }
        return e;
    }

    Eigen::MatrixXd hess(const Eigen::VectorXd& u) const
    {
        return hessian_form(ctx, FourierLoop::from_h12(ctx.n(), ctx.K, u));
    }

    // Pseudo-arclength continuation of the slow curve {grad A parallel to the
    // slow eigenvector}, starting at x + delta*s*v. Fast directions relax on
    // unit time scales, so flow lines between neighbouring indices shadow it.
    Trajectory follow(int xi, const Eigen::VectorXd& v, int s, const Eigen::MatrixXd& restFrame,
                      std::vector<std::string>& notes) const
    {
        const int n = ctx.n(), K = ctx.K;
        Trajectory tr;
        tr.from = xi;
        const Eigen::VectorXd x = gens[xi].loop.to_h12();
        Eigen::VectorXd u = x + so.delta * s * v;
        Eigen::VectorXd e = s * v;
        double A = action(ctx, FourierLoop::from_h12(n, K, u));
        double h = so.delta;
        double orient = s;
        Eigen::MatrixXd Fprev = restFrame;
        bool handoff = false, below = false;
        Eigen::VectorXd uPrev = u, eCross = e;

        // bordered Newton onto the slow curve within the hyperplane e.(uc - up) = 0
        auto correct = [&](const Eigen::VectorXd& up, const Eigen::VectorXd& e) -> std::optional<Eigen::VectorXd> {
            Eigen::VectorXd uc = up;
            for (int it = 0; it < 12; ++it) {
                const Eigen::MatrixXd Mc = hess(uc);
                const Eigen::VectorXd d = slow_direction(Mc, e);
                if (d.size() == 0) return std::nullopt;
                const Eigen::VectorXd gc = gradient_h12(ctx, uc);
                const Eigen::VectorXd perp = gc - gc.dot(d) * d;
                if (perp.norm() <= 1e-11 * std::max(1.0, gc.norm()) + 1e-13) return uc;
                const long N = Mc.rows();
                Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N + 1, N + 1);
                B.topLeftCorner(N, N) = Mc;
                B.col(N).head(N) = d;
                B.row(N).head(N) = e.transpose();
                Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + 1);
                rhs.head(N) = -gc;
                rhs(N) = -e.dot(uc - up);
                uc += B.partialPivLu().solve(rhs).head(N);
            }
            return std::nullopt;
        };

        for (; tr.steps < so.budget; ++tr.steps) {
            const Eigen::MatrixXd M = hess(u);
            const Eigen::VectorXd en = slow_direction(M, e);
            if (en.size() == 0) {
                notes.push_back("no slow direction near action " + std::to_string(A));
                return tr;
            }
            e = en;
            const Eigen::MatrixXd F = negative_frame(M, e);
            const double det = det_overlap(Fprev, F);
            if (std::abs(det) < 0.2) {
                notes.push_back("frame transport lost track near action " + std::to_string(A));
                return tr;
            }
            orient *= det > 0.0 ? 1.0 : -1.0;
            Fprev = F;

            bool accepted = false;
            while (!accepted && h > 1e-12) {
                const Eigen::VectorXd up = u + h * e;
                const std::optional<Eigen::VectorXd> uc = correct(up, e);
                const bool ok = uc.has_value();
                const double Ac = ok ? action(ctx, FourierLoop::from_h12(n, K, *uc)) : A;
                if (ok && Ac < A) {
                    const Eigen::VectorXd gc = gradient_h12(ctx, *uc);
                    uPrev = u;
                    eCross = e;
                    u = *uc;
                    A = Ac;
                    accepted = true;
                    h = std::min(so.hmax, 1.5 * h);
                    if (gc.dot(e) > 0.0) handoff = true;  // crossed a critical point
                } else {
                    h *= 0.5;
                }
            }
            if (!accepted) {
                notes.push_back("slow curve stalled near action " + std::to_string(A));
                return tr;
            }
            if (A < lo - 1.0) {
                below = true;
                break;
            }
            if (handoff) break;
        }
        if (!handoff) {
            tr.endAction = A;
            if (below) tr.to = -2;
            else notes.push_back("shooting budget exhausted");
            return tr;
        }

        // the critical point sits on the curve between the last two points, where
        // grad.e changes sign; straight Newton steps from either end can miss it
        // when the connection runs along a nearly flat circle
        {
            double s0 = 0.0, s1 = 1.0;
            Eigen::VectorXd best = u;
            double bestG = gradient_h12(ctx, u).norm();
            for (int it = 0; it < 60 && bestG > 0.1 * so.gradTol; ++it) {
                const double sm = 0.5 * (s0 + s1);
                const std::optional<Eigen::VectorXd> um = correct(uPrev + sm * (u - uPrev), eCross);
                if (!um) break;
                const Eigen::VectorXd gm = gradient_h12(ctx, *um);
                if (gm.norm() < bestG) {
                    bestG = gm.norm();
                    best = *um;
                }
                (gm.dot(eCross) > 0.0 ? s1 : s0) = sm;
            }
            u = best;
        }

        OrbitOptions oo;
        oo.allowDegenerate = true;
        oo.computeCz = false;
        oo.newtonTol = so.gradTol;
        PeriodicOrbit y;
        try {
            y = refine_orbit(ctx, FourierLoop::from_h12(n, K, u), oo);
        } catch (const NumericalError& e) {
            notes.push_back(std::string("endpoint Newton failed: ") + e.what());
            return tr;
        }
        tr.endAction = y.actionValue;
        const int yi = locate(y.loop);
        if (yi < 0) {
            if (y.actionValue < lo) tr.to = -2;  // below the window: not a generator
            else notes.push_back("endpoint at action " + std::to_string(y.actionValue) + " is not a generator");
            return tr;
        }
        if (yi == xi) {
            notes.push_back("slow curve returned to its source");
            return tr;
        }
        tr.to = yi;
        const Eigen::MatrixXd My = hessian_form(ctx, gens[yi].loop);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(My);
        int q = 0;
        while (q < es.eigenvalues().size() && es.eigenvalues()(q) < 0.0) ++q;
        Eigen::MatrixXd Fy = es.eigenvectors().leftCols(q);
        canonical_signs(Fy);
        const double det = det_overlap(Fprev, Fy);
        if (std::abs(det) < 0.2) {
            notes.push_back("frame mismatch at the endpoint");
            tr.to = -1;
            return tr;
        }
        orient *= det > 0.0 ? 1.0 : -1.0;
        tr.sign = orient > 0.0 ? 1 : -1;
        return tr;
    }
};

}  // namespace

FilteredMorseComplex build_complex(const ActionContext& ctx, const std::vector<PeriodicOrbit>& orbits,
                                   double lo, double hi, const ComplexOptions& opts)
{
    if (!(lo < hi)) throw InputError("action window must satisfy lo < hi");
    FilteredMorseComplex cx;
    cx.n = ctx.n();
    cx.lo = lo;
    cx.hi = hi;
    cx.multiset = opts.multiset;
    for (const auto& o : orbits) {
        const bool inWindow = o.actionValue > lo && o.actionValue < hi;
        const bool constant = o.loop.resized(0).resized(o.loop.K()).coeffs() == o.loop.coeffs();
        if (constant && o.actionValue >= lo)
            throw InputError("window start " + std::to_string(lo) + " is not above the constant orbits");
        if (!inWindow) continue;
        if (!o.nondegenerate && !opts.multiset)
            throw DegeneracyError("degenerate orbit at action " + std::to_string(o.actionValue) +
                                  " cannot generate the complex");
        cx.generators.push_back(o);
    }
    std::stable_sort(cx.generators.begin(), cx.generators.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.relIndex != b.relIndex) return a.relIndex < b.relIndex;
        return a.actionValue < b.actionValue;
    });
    if (opts.multiset) {
        cx.verified = false;
        cx.diagnostics.push_back("multiset convention: degenerate generators, boundary not computed");
        return cx;
    }

    const int G = cx.size();
    std::vector<int> sources;
    for (int x = 0; x < G; ++x)
        for (int y = 0; y < G; ++y)
            if (cx.degree(y) == cx.degree(x) - 1 && cx.filtration(y) < cx.filtration(x)) {
                sources.push_back(x);
                break;
            }

    const Shooter sh{ctx, cx.generators, opts.shooting, lo};
    std::vector<std::vector<Trajectory>> found(sources.size());
    std::vector<std::vector<std::string>> notes(sources.size());
    parallel_for(static_cast<int>(sources.size()), [&](int si) {
        const int x = sources[si];
        const Eigen::MatrixXd M = hessian_form(ctx, cx.generators[x].loop);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
        std::vector<int> slow, neg;
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const double l = es.eigenvalues()(i);
            if (l >= 0.0) break;
            if (-l <= 1e-8 * norm) continue;  // S^1-family kernel
            neg.push_back(i);
            if (-l < opts.shooting.slowCut) slow.push_back(i);
        }
        if (slow.size() != 1) {
            notes[si].push_back("generator " + std::to_string(x) + ": " + std::to_string(slow.size()) +
                                " slow unstable directions, sphere not sampled");
            return;
        }
        Eigen::VectorXd v = es.eigenvectors().col(slow[0]);
        Eigen::MatrixXd vv = v;
        canonical_signs(vv);
        v = vv.col(0);
        Eigen::MatrixXd rest(M.rows(), static_cast<long>(neg.size()) - 1);
        int c = 0;
        for (int i : neg)
            if (i != slow[0]) rest.col(c++) = es.eigenvectors().col(i);
        canonical_signs(rest);
        for (int s : {+1, -1}) found[si].push_back(sh.follow(x, v, s, rest, notes[si]));
    });

    for (size_t si = 0; si < sources.size(); ++si) {
        for (auto& n : notes[si]) {
            cx.verified = false;
            cx.diagnostics.push_back(n);
        }
        for (const auto& t : found[si]) {
            cx.trajectories.push_back(t);
            if (t.to == -1) {
                cx.verified = false;
                continue;
            }
            if (t.to < 0) continue;
            const int gapDeg = cx.degree(t.from) - cx.degree(t.to);
            if (gapDeg != 1)
                throw NumericalError("index-gap violation: trajectory from degree " + std::to_string(cx.degree(t.from)) +
                                     " to degree " + std::to_string(cx.degree(t.to)));
            cx.boundary[{t.to, t.from}] += t.sign;
        }
    }
    for (auto it = cx.boundary.begin(); it != cx.boundary.end();)
        it = (it->second == 0) ? cx.boundary.erase(it) : std::next(it);
    return cx;
}

// ==== homology ====

namespace {

struct DegreeHomology {
    std::vector<RVec> boundaries;  // independent basis of B_d
    std::vector<RVec> cycles;      // classes completing B_d inside Z_d
};

void require_regular(const FilteredMorseComplex& cx, double L)
{
    for (const auto& g : cx.generators)
        if (std::abs(g.actionValue - L) <= 1e-9 * std::max(1.0, std::abs(L))) {
            std::ostringstream os;
            os.precision(17);
            os << "level " << L << " coincides with a generator action; try " << L + 1e-6 * std::max(1.0, std::abs(L));
            throw InputError(os.str());
        }
}

DegreeHomology degree_homology(const FilteredMorseComplex& cx, int d, double L)
{
    const int G = cx.size();
    auto in = [&](int i, int deg) { return cx.degree(i) == deg && cx.filtration(i) <= L; };
    DegreeHomology h;
    // B_d: images of degree d+1 generators
    std::vector<RVec> imgs;
    for (int x = 0; x < G; ++x) {
        if (!in(x, d + 1)) continue;
        RVec col(G);
        bool any = false;
        for (const auto& [rc, v] : cx.boundary)
            if (rc.second == x) {
                col[rc.first] = v;
                any = true;
            }
        if (any) imgs.push_back(col);
    }
    for (auto& c : imgs) {
        h.boundaries.push_back(c);
        if (rank_of_columns(h.boundaries, G) < static_cast<int>(h.boundaries.size())) h.boundaries.pop_back();
    }
    // Z_d: kernel of the degree-d boundary on sublevel generators
    std::vector<int> idx;
    for (int x = 0; x < G; ++x)
        if (in(x, d)) idx.push_back(x);
    RMatrix D(G, RVec(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c)
        for (const auto& [rc, v] : cx.boundary)
            if (rc.second == idx[c]) D[rc.first][c] = v;
    const auto ker = rational_kernel(D, static_cast<int>(idx.size()));
    std::vector<RVec> span = h.boundaries;
    for (const auto& k : ker) {
        RVec z(G);
        for (size_t c = 0; c < idx.size(); ++c) z[idx[c]] = k[c];
        span.push_back(z);
        if (rank_of_columns(span, G) < static_cast<int>(span.size())) {
            span.pop_back();
            continue;
        }
        h.cycles.push_back(z);
    }
    return h;
}

std::set<int> degrees_of(const FilteredMorseComplex& cx)
{
    std::set<int> s;
    for (int i = 0; i < cx.size(); ++i) s.insert(cx.degree(i));
    return s;
}

}  // namespace

std::map<int, int> homology_ranks(const FilteredMorseComplex& cx, double L)
{
    if (!boundary_squares_to_zero(cx)) throw NumericalError("boundary does not square to zero");
    std::map<int, int> r;
    for (int d : degrees_of(cx)) {
        const int k = static_cast<int>(degree_homology(cx, d, L).cycles.size());
        if (k) r[d] = k;
    }
    return r;
}

std::map<int, int> homology_ranks(const FilteredMorseComplex& cx)
{
    return homology_ranks(cx, std::numeric_limits<double>::infinity());
}

int SublevelMap::total_rank() const
{
    int s = 0;
    for (auto& [d, r] : rank) s += r;
    return s;
}
int SublevelMap::total_source() const
{
    int s = 0;
    for (auto& [d, r] : sourceDim) s += r;
    return s;
}
int SublevelMap::total_target() const
{
    int s = 0;
    for (auto& [d, r] : targetDim) s += r;
    return s;
}

SublevelMap sublevel_map(const FilteredMorseComplex& cx, double L1, double L2)
{
    if (!(L1 <= L2)) throw InputError("sublevel map needs L1 <= L2");
    require_regular(cx, L1);
    require_regular(cx, L2);
    if (!boundary_squares_to_zero(cx)) throw NumericalError("boundary does not square to zero");
    SublevelMap sm;
    sm.L1 = L1;
    sm.L2 = L2;
    for (int d : degrees_of(cx)) {
        const DegreeHomology h1 = degree_homology(cx, d, L1);
        const DegreeHomology h2 = degree_homology(cx, d, L2);
        const int p = static_cast<int>(h1.cycles.size()), q = static_cast<int>(h2.cycles.size());
        RMatrix M(q, RVec(p));
        std::vector<RVec> cols = h2.cycles;
        cols.insert(cols.end(), h2.boundaries.begin(), h2.boundaries.end());
        for (int j = 0; j < p; ++j) {
            const RVec a = solve_in_span(cols, h1.cycles[j]);
            for (int i = 0; i < q; ++i) M[i][j] = a[i];
        }
        sm.blocks[d] = M;
        sm.sourceDim[d] = p;
        sm.targetDim[d] = q;
        sm.rank[d] = (p && q) ? rational_rank(M) : 0;
    }
    return sm;
}

SublevelMap compose(const SublevelMap& second, const SublevelMap& first)
{
    if (second.L1 != first.L2) throw InputError("maps are not composable");
    SublevelMap out;
    out.L1 = first.L1;
    out.L2 = second.L2;
    for (const auto& [d, A] : second.blocks) {
        const RMatrix& B = first.blocks.at(d);
        const int q = second.targetDim.at(d), mid = first.targetDim.at(d), p = first.sourceDim.at(d);
        RMatrix C(q, RVec(p));
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < p; ++j)
                for (int k = 0; k < mid; ++k) C[i][j] += A[i][k] * B[k][j];
        out.blocks[d] = C;
        out.sourceDim[d] = p;
        out.targetDim[d] = q;
        out.rank[d] = (p && q) ? rational_rank(C) : 0;
    }
    return out;
}

KappaResult kappa(const FilteredMorseComplex& cx, double c)
{
    KappaResult k;
    if (cx.multiset) {
        k.verified = false;
        for (const auto& g : cx.generators)
            if (g.actionValue <= c) ++k.value;
        return k;
    }
    require_regular(cx, c);
    double top = cx.hi;
    for (const auto& g : cx.generators) top = std::max(top, g.actionValue + 1.0);
    if (c >= top) c = top - 0.5;
    const SublevelMap sm = sublevel_map(cx, c, top);
    for (int j = 1;; ++j) {
        const auto it = sm.rank.find(cx.n - 1 + 2 * j);
        if (it == sm.rank.end() || it->second < 1) break;
        k.value = j;
    }
    return k;
}

int kappa_c(const FilteredMorseComplex& cx, double c) { return kappa(cx, c).value; }

// ==== EH index count ====

EhCounter::EhCounter(const ActionContext& ctx)
{
    if (ctx.H.kind != HamiltonianKind::quadraticModel)
        throw InputError("EH count needs the quadratic model H_B");
    slope_ = ctx.H.slope;
    const ActionContext unit(pure_quadratic(ctx.H.domain, 1.0), ctx.K, ctx.m);
    const Eigen::MatrixXd M = hessian_form(unit, FourierLoop(ctx.n(), ctx.K));
    const int n = ctx.n(), K = ctx.K;
    // E^+ coordinates: modes k = 1..K, block starts at (k+K) 2n
    const int start = 2 * n * (K + 1), len = 2 * n * K;
    const Eigen::MatrixXd MD =
        Eigen::MatrixXd::Identity(len, len) - M.block(start, start, len, len);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (MD + MD.transpose()), Eigen::EigenvaluesOnly);
    // the form commutes with J, so eigenvalues come in pairs; the index counts
    // complex dimensions
    const Eigen::VectorXd& ev = es.eigenvalues();
    for (int i = 0; i + 1 < len; i += 2) {
        if (std::abs(ev(i) - ev(i + 1)) > 1e-9 * std::max(1.0, std::abs(ev(i))))
            throw NumericalError("EH form is not complex linear");
        const double mu = 0.5 * (ev(i) + ev(i + 1));
        mu_.push_back(mu);
        if (mu > 0.0) thresholds_.push_back(1.0 / mu);
    }
    std::sort(thresholds_.begin(), thresholds_.end());
    limit_ = (K + 1) * ctx.H.domain.a.front();
}

int EhCounter::count(double c) const
{
    if (!(c < slope_)) throw InputError("EH count level must lie below the slope");
    if (c >= limit_) throw InputError("truncation too small for level " + std::to_string(c));
    int k = 0;
    for (double mu : mu_) {
        if (std::abs(1.0 - c * mu) < 1e-9) {
            std::ostringstream os;
            os.precision(17);
            os << "level " << c << " sits on the spectrum value " << 1.0 / mu;
            throw DegeneracyError(os.str());
        }
        if (c * mu >= 1.0) ++k;
    }
    return k;
}

int ind_eh_count(const ActionContext& ctx, double c) { return EhCounter(ctx).count(c); }

std::map<int, RMatrix> generator_matching(const FilteredMorseComplex& a, const FilteredMorseComplex& b,
                                          double actionTol)
{
    std::map<int, RMatrix> out;
    std::set<int> degs = degrees_of(a);
    for (int d : degrees_of(b)) degs.insert(d);
    for (int d : degs) {
        std::vector<int> ia, ib;
        for (int i = 0; i < a.size(); ++i)
            if (a.degree(i) == d) ia.push_back(i);
        for (int i = 0; i < b.size(); ++i)
            if (b.degree(i) == d) ib.push_back(i);
        auto byAction = [](const FilteredMorseComplex& c) {
            return [&c](int x, int y) { return c.filtration(x) < c.filtration(y); };
        };
        std::sort(ia.begin(), ia.end(), byAction(a));
        std::sort(ib.begin(), ib.end(), byAction(b));
        RMatrix M(ib.size(), RVec(ia.size()));
        for (size_t r = 0; r < ib.size(); ++r)
            for (size_t c = 0; c < ia.size(); ++c) {
                const auto& ga = a.generators[ia[c]];
                const auto& gb = b.generators[ib[r]];
                bool same;
                if (ga.reebLabel && gb.reebLabel)
                    same = ga.reebLabel->m == gb.reebLabel->m && ga.reebLabel->axis == gb.reebLabel->axis;
                else
                    same = std::abs(ga.actionValue - gb.actionValue) <= actionTol;
                if (same) M[r][c] = 1;
            }
        out[d] = M;
    }
    return out;
}

nlohmann::json complex_to_json(const FilteredMorseComplex& cx)
{
    nlohmann::json gens = nlohmann::json::array();
    for (int i = 0; i < cx.size(); ++i) {
        const auto& g = cx.generators[i];
        nlohmann::json e = {{"id", i},
                            {"degree", g.relIndex},
                            {"action", g.actionValue},
                            {"gradNorm", g.gradNorm},
                            {"family", g.family}};
        if (g.czIndex) e["czIndex"] = *g.czIndex;
        if (g.reebLabel) e["label"] = {g.reebLabel->m, g.reebLabel->axis + 1};
        gens.push_back(e);
    }
    nlohmann::json bd = nlohmann::json::array();
    for (const auto& [rc, v] : cx.boundary)
        bd.push_back({rc.first, rc.second, numerator(v).str(), denominator(v).str()});
    return {{"window", {cx.lo, cx.hi}},
            {"verified", cx.verified},
            {"generators", gens},
            {"boundary", bd},
            {"diagnostics", cx.diagnostics}};
}

}  // namespace capax
