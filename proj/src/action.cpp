#include "capax/action.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "capax/errors.hpp"

namespace capax {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

FourierLoop fit(const ActionContext& ctx, const FourierLoop& x)
{
    if (x.n() != ctx.n())
        throw InputError("loop dimension n=" + std::to_string(x.n()) + " does not match H (n=" +
                         std::to_string(ctx.n()) + ")");
    return x.K() == ctx.K ? x : x.resized(ctx.K);
}

Eigen::MatrixXd forcing_grid(const ActionContext& ctx)
{
    if (!ctx.H.forcing) return {};
    return eval_grid(ctx.H.forcing->resized(std::max(ctx.H.forcing->K(), 0)), ctx.m);
}

Eigen::VectorXd zero_mode_real(const FourierLoop& x)
{
    Eigen::VectorXd p(2 * x.n());
    for (int j = 0; j < x.n(); ++j) {
        p(2 * j) = x.get(0, j).real();
        p(2 * j + 1) = x.get(0, j).imag();
    }
    return p;
}

void set_zero_mode(FourierLoop& x, const Eigen::VectorXd& p)
{
    for (int j = 0; j < x.n(); ++j) x.at(0, j) = cplx(p(2 * j), p(2 * j + 1));
}

// smooth bump, 1 at s = 0, 0 for s >= 1
double bump(double s)
{
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

FourierLoop random_direction(int n, int K, unsigned long long seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    FourierLoop v(n, K);
    for (int k = -K; k <= K; ++k)
        for (int j = 0; j < n; ++j) v.at(k, j) = cplx(N(rng), N(rng)) / (1.0 + double(k) * k);
    v *= 1.0 / h12_norm(v);
    return v;
}

}  // namespace

ActionContext::ActionContext(HamiltonianSpec h, int k, int grid)
    : ActionContext(h, k, grid, ZeroModeSplit::standard(h.n()))
{
}

ActionContext::ActionContext(HamiltonianSpec h, int k, int grid, ZeroModeSplit z)
    : H(std::move(h)), K(k), m(grid == 0 ? 4 * k : grid), zsplit(std::move(z))
{
    if (m == 0) m = 4;
    validate();
}

void ActionContext::validate() const
{
    if (K < 1) throw InputError("truncation K must be >= 1");
    if (m < 2 * K + 1)
        throw AliasingError("grid m=" + std::to_string(m) + " < 2K+1=" + std::to_string(2 * K + 1));
    if (zsplit.n() != n()) throw InputError("zero-mode split dimension does not match H");
    zsplit.validate();
}

double action(const ActionContext& ctx, const FourierLoop& x0)
{
    const FourierLoop x = fit(ctx, x0);
    double quad = 0.0;
    for (int k = -ctx.K; k <= ctx.K; ++k)
        if (k != 0) quad += kPi * k * x.mode(k).squaredNorm();
    const Eigen::MatrixXd X = eval_grid(x, ctx.m);
    const Eigen::MatrixXd F = forcing_grid(ctx);
    double h = 0.0;
    for (int t = 0; t < ctx.m; ++t) {
        h += ctx.H.value(X.col(t));
        if (F.size()) h += F.col(t).dot(X.col(t));
    }
    return quad - h / ctx.m;
}

FourierLoop apply_L(const ActionContext& ctx, const FourierLoop& x0)
{
    FourierLoop x = fit(ctx, x0);
    for (int k = -ctx.K; k <= ctx.K; ++k)
        if (k < 0) x.coeffs().col(k + ctx.K) *= -1.0;
    set_zero_mode(x, ctx.zsplit.L0() * zero_mode_real(x));
    return x;
}

FourierLoop grad_action(const ActionContext& ctx, const FourierLoop& x0)
{
    const FourierLoop x = fit(ctx, x0);
    const Eigen::MatrixXd X = eval_grid(x, ctx.m);
    Eigen::MatrixXd G(X.rows(), X.cols());
    const Eigen::MatrixXd F = forcing_grid(ctx);
    for (int t = 0; t < ctx.m; ++t) {
        G.col(t) = ctx.H.gradient(X.col(t));
        if (F.size()) G.col(t) += F.col(t);
    }
    FourierLoop g = x;
    for (int k = -ctx.K; k < 0; ++k) g.coeffs().col(k + ctx.K) *= -1.0;
    for (int j = 0; j < x.n(); ++j) g.at(0, j) = 0.0;
    g -= jstar(project_grid(G, ctx.K));
    return g;
}

FourierLoop grad_b(const ActionContext& ctx, const FourierLoop& x)
{
    return grad_action(ctx, x) - apply_L(ctx, x);
}

FourierLoop ps_map(const ActionContext& ctx, const FourierLoop& x)
{
    // L is an involution, so L^{-1} = L
    return -1.0 * apply_L(ctx, grad_b(ctx, x));
}

Eigen::MatrixXd L_matrix(const ActionContext& ctx)
{
    const int n = ctx.n(), K = ctx.K;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(ctx.dof(), ctx.dof());
    for (int q = 0; q < 2 * K + 1; ++q) {
        const int k = q - K;
        if (k == 0)
            L.block(2 * q * n, 2 * q * n, 2 * n, 2 * n) = ctx.zsplit.L0();
        else
            for (int a = 0; a < 2 * n; ++a) L(2 * q * n + a, 2 * q * n + a) = k > 0 ? 1.0 : -1.0;
    }
    return L;
}

Eigen::MatrixXd hessian_form(const ActionContext& ctx, const FourierLoop& x0)
{
    const FourierLoop x = fit(ctx, x0);
    const int n = ctx.n(), K = ctx.K, m = ctx.m;
    const Eigen::MatrixXd X = eval_grid(x, m);

    // S(t) acts on C^n as z -> A z + B conj(z); Fourier coefficients of A, B
    // for frequencies -2K..2K.
    const int P = 4 * K + 1;
    std::vector<Eigen::MatrixXcd> Ah(P, Eigen::MatrixXcd::Zero(n, n)), Bh(P, Eigen::MatrixXcd::Zero(n, n));
    Eigen::MatrixXcd At(n, n), Bt(n, n);
    std::vector<cplx> w(m);
    for (int p = 0; p < m; ++p) w[p] = std::polar(1.0, -kTwoPi * p / m);
    for (int t = 0; t < m; ++t) {
        const Eigen::MatrixXd S = ctx.H.hessian(X.col(t));
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                const double sxx = S(2 * j, 2 * l), sxy = S(2 * j, 2 * l + 1);
                const double syx = S(2 * j + 1, 2 * l), syy = S(2 * j + 1, 2 * l + 1);
                At(j, l) = 0.5 * cplx(sxx + syy, syx - sxy);
                Bt(j, l) = 0.5 * cplx(sxx - syy, syx + sxy);
            }
        for (int p = -2 * K; p <= 2 * K; ++p) {
            long long idx = (static_cast<long long>(p) * t) % m;
            if (idx < 0) idx += m;
            const cplx e = w[idx];
            Ah[p + 2 * K] += e * At;
            Bh[p + 2 * K] += e * Bt;
        }
    }
    for (int p = 0; p < P; ++p) {
        Ah[p] /= double(m);
        Bh[p] /= double(m);
    }

    std::vector<double> s(2 * K + 1);
    for (int q = 0; q < 2 * K + 1; ++q) s[q] = (q == K) ? 1.0 : std::sqrt(kTwoPi * std::abs(q - K));
    const cplx unit[2] = {cplx(1.0, 0.0), cplx(0.0, 1.0)};

    const int N = ctx.dof();
    Eigen::MatrixXd M(N, N);
    for (int qa = 0; qa < 2 * K + 1; ++qa) {
        const int k = qa - K;
        for (int qb = 0; qb < 2 * K + 1; ++qb) {
            const int l = qb - K;
            const Eigen::MatrixXcd& Ak = Ah[k - l + 2 * K];
            const Eigen::MatrixXcd& Bk = Bh[k + l + 2 * K];
            const double norm = 1.0 / (s[qa] * s[qb]);
            for (int j = 0; j < n; ++j)
                for (int ca = 0; ca < 2; ++ca) {
                    const cplx al = std::conj(unit[ca]);
                    for (int jj = 0; jj < n; ++jj)
                        for (int cb = 0; cb < 2; ++cb) {
                            const cplx be = unit[cb];
                            const double v = (al * Ak(j, jj) * be + al * Bk(j, jj) * std::conj(be)).real();
                            M(2 * (qa * n + j) + ca, 2 * (qb * n + jj) + cb) = -v * norm;
                        }
                }
        }
    }
    for (int q = 0; q < 2 * K + 1; ++q) {
        const int k = q - K;
        if (k == 0) continue;
        for (int a = 0; a < 2 * n; ++a) M(2 * q * n + a, 2 * q * n + a) += k > 0 ? 1.0 : -1.0;
    }
    return M;
}

FourierLoop hessian_apply(const ActionContext& ctx, const FourierLoop& x0, const FourierLoop& xi0)
{
    const FourierLoop x = fit(ctx, x0);
    const FourierLoop xi = fit(ctx, xi0);
    const Eigen::MatrixXd X = eval_grid(x, ctx.m);
    const Eigen::MatrixXd Xi = eval_grid(xi, ctx.m);
    Eigen::MatrixXd G(X.rows(), X.cols());
    for (int t = 0; t < ctx.m; ++t) G.col(t) = ctx.H.hessian(X.col(t)) * Xi.col(t);
    FourierLoop r = xi;
    for (int k = -ctx.K; k < 0; ++k) r.coeffs().col(k + ctx.K) *= -1.0;
    for (int j = 0; j < xi.n(); ++j) r.at(0, j) = 0.0;
    r -= jstar(project_grid(G, ctx.K));
    return r;
}

FourierLoop perturbation_field(const ActionContext& ctx, const FourierLoop& x0)
{
    FourierLoop zero(ctx.n(), ctx.K);
    if (!ctx.perturbation) return zero;
    const auto& P = *ctx.perturbation;
    const FourierLoop x = fit(ctx, x0);
    double weight = 0.0;
    for (const auto& c : P.centers) weight = std::max(weight, bump(h12_norm(x - c) / P.radius));
    if (weight == 0.0) return zero;
    const double g = std::min(0.5 * h12_norm(grad_action(ctx, x)), P.clip);
    return (P.c * g * weight) * random_direction(ctx.n(), ctx.K, P.seed);
}

FourierLoop flow_field(const ActionContext& ctx, const FourierLoop& x)
{
    return perturbation_field(ctx, x) - grad_action(ctx, x);
}

FlowStep flow_step(const ActionContext& ctx, const FourierLoop& x0, double dt)
{
    if (!(dt > 0.0)) throw InputError("flow step needs dt > 0");
    const FourierLoop x = fit(ctx, x0);
    const double a0 = action(ctx, x);
    FourierLoop nl = grad_b(ctx, x);
    if (ctx.perturbation) nl -= perturbation_field(ctx, x);

    // orthogonal projector onto E^0_-, consistent with L0 = I - 2P
    const Eigen::MatrixXd P = 0.5 * (Eigen::MatrixXd::Identity(2 * ctx.n(), 2 * ctx.n()) - ctx.zsplit.L0());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
    const Eigen::VectorXd u0 = zero_mode_real(x), n0 = zero_mode_real(nl);

    for (int halvings = 0; halvings < 60; ++halvings, dt *= 0.5) {
        const double em = std::exp(-dt), ep = std::exp(dt);
        FourierLoop y(ctx.n(), ctx.K);
        for (int k = -ctx.K; k <= ctx.K; ++k) {
            if (k == 0) continue;
            auto col = y.coeffs().col(k + ctx.K);
            if (k > 0)
                col = em * x.coeffs().col(k + ctx.K) - (1.0 - em) * nl.coeffs().col(k + ctx.K);
            else
                col = ep * x.coeffs().col(k + ctx.K) - (ep - 1.0) * nl.coeffs().col(k + ctx.K);
        }
        const Eigen::MatrixXd E = em * (I - P) + ep * P;
        const Eigen::MatrixXd G = (1.0 - em) * (I - P) + (ep - 1.0) * P;
        set_zero_mode(y, E * u0 - G * n0);
        const double a1 = action(ctx, y);
        if (a1 <= a0 + 1e-12 * (1.0 + std::abs(a0))) return {y, dt, a1, halvings};
    }
    throw NumericalError("flow step: action increases for every dt tried");
}

}  // namespace capax
