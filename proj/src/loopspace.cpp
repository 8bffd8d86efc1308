#include "capax/loopspace.hpp"

#include <cmath>
#include <numbers>

#include "capax/errors.hpp"

namespace capax {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<cplx> twiddles(int m, double sign)
{
    std::vector<cplx> w(m);
    for (int p = 0; p < m; ++p)
        w[p] = std::polar(1.0, sign * kTwoPi * p / m);
    return w;
}

int wrap(long long a, int m)
{
    long long r = a % m;
    return static_cast<int>(r < 0 ? r + m : r);
}

void require_same_n(const FourierLoop& x, const FourierLoop& y)
{
    if (x.n() != y.n())
        throw InputError("loop dimension mismatch: n=" + std::to_string(x.n()) +
                         " vs n=" + std::to_string(y.n()));
}

}  // namespace

FourierLoop::FourierLoop(int n, int K) : n_(n), K_(K)
{
    if (n < 1 || K < 0)
        throw InputError("FourierLoop needs n >= 1 and K >= 0");
    c_ = Eigen::MatrixXcd::Zero(n, 2 * K + 1);
}

FourierLoop FourierLoop::constant(const Eigen::VectorXd& p, int K)
{
    if (p.size() % 2 != 0 || p.size() == 0)
        throw InputError("point must live in R^{2n}");
    FourierLoop x(static_cast<int>(p.size() / 2), K);
    for (int j = 0; j < x.n_; ++j)
        x.at(0, j) = cplx(p(2 * j), p(2 * j + 1));
    return x;
}

FourierLoop FourierLoop::mode_loop(int k, const Eigen::VectorXcd& v, int K)
{
    FourierLoop x(static_cast<int>(v.size()), K);
    x.set_mode(k, v);
    return x;
}

cplx FourierLoop::get(int k, int j) const
{
    if (k < -K_ || k > K_) return {0.0, 0.0};
    return c_(j, k + K_);
}

cplx& FourierLoop::at(int k, int j)
{
    if (k < -K_ || k > K_)
        throw InputError("mode " + std::to_string(k) + " outside truncation K=" +
                         std::to_string(K_));
    return c_(j, k + K_);
}

Eigen::VectorXcd FourierLoop::mode(int k) const
{
    if (k < -K_ || k > K_) return Eigen::VectorXcd::Zero(n_);
    return c_.col(k + K_);
}

void FourierLoop::set_mode(int k, const Eigen::VectorXcd& v)
{
    if (v.size() != n_) throw InputError("mode vector has wrong dimension");
    if (k < -K_ || k > K_)
        throw InputError("mode " + std::to_string(k) + " outside truncation");
    c_.col(k + K_) = v;
}

FourierLoop FourierLoop::resized(int K) const
{
    FourierLoop y(n_, K);
    int kk = std::min(K, K_);
    for (int k = -kk; k <= kk; ++k) y.c_.col(k + K) = c_.col(k + K_);
    return y;
}

FourierLoop FourierLoop::derivative() const
{
    FourierLoop d(n_, K_);
    for (int k = -K_; k <= K_; ++k)
        d.c_.col(k + K_) = cplx(0.0, kTwoPi * k) * c_.col(k + K_);
    return d;
}

Eigen::VectorXd FourierLoop::to_real() const
{
    Eigen::VectorXd v(dof());
    for (int q = 0; q < 2 * K_ + 1; ++q)
        for (int j = 0; j < n_; ++j) {
            v(2 * (q * n_ + j)) = c_(j, q).real();
            v(2 * (q * n_ + j) + 1) = c_(j, q).imag();
        }
    return v;
}

FourierLoop FourierLoop::from_real(int n, int K, const Eigen::VectorXd& v)
{
    FourierLoop x(n, K);
    if (v.size() != x.dof()) throw InputError("coordinate vector has wrong length");
    for (int q = 0; q < 2 * K + 1; ++q)
        for (int j = 0; j < n; ++j)
            x.c_(j, q) = cplx(v(2 * (q * n + j)), v(2 * (q * n + j) + 1));
    return x;
}

Eigen::VectorXd FourierLoop::to_h12() const
{
    Eigen::VectorXd v = to_real();
    for (int q = 0; q < 2 * K_ + 1; ++q) {
        int k = q - K_;
        if (k == 0) continue;
        v.segment(2 * q * n_, 2 * n_) *= std::sqrt(kTwoPi * std::abs(k));
    }
    return v;
}

FourierLoop FourierLoop::from_h12(int n, int K, const Eigen::VectorXd& v)
{
    Eigen::VectorXd w = v;
    if (w.size() != 2 * n * (2 * K + 1)) throw InputError("coordinate vector has wrong length");
    for (int q = 0; q < 2 * K + 1; ++q) {
        int k = q - K;
        if (k == 0) continue;
        w.segment(2 * q * n, 2 * n) /= std::sqrt(kTwoPi * std::abs(k));
    }
    return from_real(n, K, w);
}

FourierLoop& FourierLoop::operator+=(const FourierLoop& o)
{
    require_same_n(*this, o);
    if (o.K_ > K_) *this = resized(o.K_);
    for (int k = -o.K_; k <= o.K_; ++k) c_.col(k + K_) += o.c_.col(k + o.K_);
    return *this;
}

FourierLoop& FourierLoop::operator-=(const FourierLoop& o)
{
    require_same_n(*this, o);
    if (o.K_ > K_) *this = resized(o.K_);
    for (int k = -o.K_; k <= o.K_; ++k) c_.col(k + K_) -= o.c_.col(k + o.K_);
    return *this;
}

FourierLoop& FourierLoop::operator*=(double s)
{
    c_ *= s;
    return *this;
}

FourierLoop operator+(FourierLoop a, const FourierLoop& b) { return a += b; }
FourierLoop operator-(FourierLoop a, const FourierLoop& b) { return a -= b; }
FourierLoop operator*(double s, FourierLoop a) { return a *= s; }

FourierLoop SplitVector::recombine() const
{
    FourierLoop x = plus + minus;
    for (int j = 0; j < x.n(); ++j) x.at(0, j) = cplx(zero(2 * j), zero(2 * j + 1));
    return x;
}

ZeroModeSplit ZeroModeSplit::standard(int n)
{
    ZeroModeSplit z;
    z.plusBasis = Eigen::MatrixXd::Zero(2 * n, n);
    z.minusBasis = Eigen::MatrixXd::Zero(2 * n, n);
    for (int j = 0; j < n; ++j) {
        z.minusBasis(2 * j, j) = 1.0;
        z.plusBasis(2 * j + 1, j) = 1.0;
    }
    return z;
}

void ZeroModeSplit::validate() const
{
    const auto n = plusBasis.cols();
    if (minusBasis.cols() != n || plusBasis.rows() != 2 * n || minusBasis.rows() != 2 * n)
        throw InputError("zero-mode split needs two n-dimensional subspaces of R^{2n}");
    Eigen::MatrixXd both(2 * n, 2 * n);
    both << plusBasis, minusBasis;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(both);
    const auto& s = svd.singularValues();
    if (s(2 * n - 1) <= 1e-12 * s(0))
        throw InputError("zero-mode split: subspaces are not complementary");
}

Eigen::MatrixXd ZeroModeSplit::L0() const
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(minusBasis);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(minusBasis.rows(), minusBasis.cols());
    return Eigen::MatrixXd::Identity(Q.rows(), Q.rows()) - 2.0 * Q * Q.transpose();
}

double h12_inner(const FourierLoop& x, const FourierLoop& y)
{
    require_same_n(x, y);
    const int K = std::min(x.K(), y.K());
    double s = 0.0;
    for (int k = -K; k <= K; ++k) {
        double w = (k == 0) ? 1.0 : kTwoPi * std::abs(k);
        s += w * (x.mode(k).conjugate().cwiseProduct(y.mode(k))).sum().real();
    }
    return s;
}

double h12_norm(const FourierLoop& x) { return std::sqrt(h12_inner(x, x)); }

double l2_inner(const L2Loop& y, const FourierLoop& x)
{
    require_same_n(x, y);
    const int K = std::min(x.K(), y.K());
    double s = 0.0;
    for (int k = -K; k <= K; ++k)
        s += (y.mode(k).conjugate().cwiseProduct(x.mode(k))).sum().real();
    return s;
}

SplitVector split(const FourierLoop& x)
{
    SplitVector s{FourierLoop(x.n(), x.K()), Eigen::VectorXd::Zero(2 * x.n()),
                  FourierLoop(x.n(), x.K())};
    for (int k = 1; k <= x.K(); ++k) {
        s.plus.set_mode(k, x.mode(k));
        s.minus.set_mode(-k, x.mode(-k));
    }
    for (int j = 0; j < x.n(); ++j) {
        s.zero(2 * j) = x.get(0, j).real();
        s.zero(2 * j + 1) = x.get(0, j).imag();
    }
    return s;
}

FourierLoop jstar(const L2Loop& y)
{
    FourierLoop x = y;
    for (int k = -y.K(); k <= y.K(); ++k)
        if (k != 0) x.coeffs().col(k + y.K()) /= kTwoPi * std::abs(k);
    return x;
}

Eigen::MatrixXd eval_grid(const FourierLoop& x, int m)
{
    const int K = x.K(), n = x.n();
    if (m < 2 * K + 1)
        throw AliasingError("grid m=" + std::to_string(m) + " aliases modes up to K=" +
                            std::to_string(K) + " (need m >= 2K+1)");
    const auto w = twiddles(m, +1.0);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, m);
    std::vector<int> active;
    for (int k = -K; k <= K; ++k)
        if (!x.coeffs().col(k + K).isZero(0.0)) active.push_back(k);
    for (int t = 0; t < m; ++t) {
        for (int k : active) {
            const cplx e = w[wrap(static_cast<long long>(k) * t, m)];
            for (int j = 0; j < n; ++j) {
                const cplx z = e * x.coeffs()(j, k + K);
                out(2 * j, t) += z.real();
                out(2 * j + 1, t) += z.imag();
            }
        }
    }
    return out;
}

FourierLoop project_grid(const Eigen::MatrixXd& values, int K)
{
    const int m = static_cast<int>(values.cols());
    const int n = static_cast<int>(values.rows() / 2);
    if (m < 2 * K + 1)
        throw AliasingError("grid m=" + std::to_string(m) + " cannot resolve K=" +
                            std::to_string(K));
    const auto w = twiddles(m, -1.0);
    FourierLoop x(n, K);
    for (int t = 0; t < m; ++t) {
        for (int k = -K; k <= K; ++k) {
            const cplx e = w[wrap(static_cast<long long>(k) * t, m)];
            for (int j = 0; j < n; ++j)
                x.coeffs()(j, k + K) += e * cplx(values(2 * j, t), values(2 * j + 1, t));
        }
    }
    x.coeffs() /= static_cast<double>(m);
    return x;
}

Eigen::VectorXd eval_at(const FourierLoop& x, double t)
{
    const int K = x.K(), n = x.n();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * n);
    for (int k = -K; k <= K; ++k) {
        const auto col = x.coeffs().col(k + K);
        if (col.isZero(0.0)) continue;
        const cplx e = std::polar(1.0, kTwoPi * k * t);
        for (int j = 0; j < n; ++j) {
            const cplx z = e * col(j);
            p(2 * j) += z.real();
            p(2 * j + 1) += z.imag();
        }
    }
    return p;
}

nlohmann::json to_json(const FourierLoop& x)
{
    nlohmann::json modes = nlohmann::json::array();
    for (int k = -x.K(); k <= x.K(); ++k) {
        nlohmann::json m = nlohmann::json::array();
        for (int j = 0; j < x.n(); ++j) m.push_back({x.get(k, j).real(), x.get(k, j).imag()});
        modes.push_back(m);
    }
    return {{"n", x.n()}, {"K", x.K()}, {"modes", modes}};
}

FourierLoop loop_from_json(const nlohmann::json& j)
{
    try {
        const int n = j.at("n").get<int>();
        const int K = j.at("K").get<int>();
        const auto& modes = j.at("modes");
        FourierLoop x(n, K);
        if (modes.size() != static_cast<size_t>(2 * K + 1))
            throw InputError("loop JSON: expected 2K+1 modes");
        for (int q = 0; q < 2 * K + 1; ++q) {
            if (modes[q].size() != static_cast<size_t>(n))
                throw InputError("loop JSON: mode entry has wrong length");
            for (int c = 0; c < n; ++c)
                x.at(q - K, c) = cplx(modes[q][c].at(0).get<double>(), modes[q][c].at(1).get<double>());
        }
        return x;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("loop JSON: ") + e.what());
    }
}

}  // namespace capax
