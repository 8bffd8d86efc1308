#include "capax/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "capax/errors.hpp"

namespace capax {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}
}  // namespace

double smoothstep(double u)
{
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_integral(double u)
{
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 0.5 + (u - 1.0);
    const double u2 = u * u;
    return u2 * u2 * (2.5 + u * (-3.0 + u));
}

double smoothstep_derivative(double u)
{
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double v = u * (1.0 - u);
    return 30.0 * v * v;
}

EllipsoidSpec::EllipsoidSpec(std::vector<double> axes) : a(std::move(axes))
{
    if (a.empty()) throw InputError("ellipsoid needs at least one axis");
    for (double v : a)
        if (!(v > 0.0) || !std::isfinite(v))
            throw InputError("ellipsoid axes must be positive and finite");
    std::sort(a.begin(), a.end());
}

EllipsoidSpec EllipsoidSpec::scaled(double r) const
{
    std::vector<double> b = a;
    for (double& v : b) v *= r * r;
    return EllipsoidSpec(b);
}

bool EllipsoidSpec::inside(const EllipsoidSpec& other) const
{
    if (other.n() != n()) return false;
    for (int i = 0; i < n(); ++i)
        if (a[i] > other.a[i]) return false;
    return true;
}

double EllipsoidSpec::r_of(const Eigen::VectorXd& z) const
{
    double r = 0.0;
    for (int j = 0; j < n(); ++j) r += (z(2 * j) * z(2 * j) + z(2 * j + 1) * z(2 * j + 1)) / a[j];
    return kPi * r;
}

std::string EllipsoidSpec::label() const
{
    std::string s = "E(";
    for (int i = 0; i < n(); ++i) s += (i ? "," : "") + fmt(a[i]);
    return s + ")";
}

EllipsoidSpec ellipsoid_from_json(const nlohmann::json& j)
{
    try {
        if (j.contains("type") && j.at("type").get<std::string>() != "ellipsoid")
            throw InputError("domain type must be \"ellipsoid\"");
        return EllipsoidSpec(j.at("a").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("domain JSON: ") + e.what());
    }
}

nlohmann::json to_json(const EllipsoidSpec& e) { return {{"type", "ellipsoid"}, {"a", e.a}}; }

ReebSpectrum reeb_spectrum(const EllipsoidSpec& dom, double cutoff)
{
    if (!(cutoff > 0.0)) throw InputError("spectrum cutoff must be positive");
    ReebSpectrum s;
    s.cutoff = cutoff;
    for (int i = 0; i < dom.n(); ++i)
        for (int m = 1; m * dom.a[i] <= cutoff; ++m) s.entries.push_back({m * dom.a[i], m, i});
    std::stable_sort(s.entries.begin(), s.entries.end(), [](const ReebEntry& x, const ReebEntry& y) {
        if (x.value != y.value) return x.value < y.value;
        return x.axis < y.axis;
    });
    return s;
}

double gap(const ReebSpectrum& spec, double beta)
{
    double g = std::numeric_limits<double>::infinity();
    const ReebEntry* prev = nullptr;
    for (const auto& e : spec.entries) {
        if (e.value >= beta) break;
        if (prev) g = std::min(g, e.value - prev->value);
        prev = &e;
    }
    return g;
}

void check_irrational(const EllipsoidSpec& dom, double cutoff, double margin)
{
    auto s = reeb_spectrum(dom, cutoff);
    for (size_t q = 1; q < s.entries.size(); ++q) {
        const auto& x = s.entries[q - 1];
        const auto& y = s.entries[q];
        if (y.value - x.value <= margin * y.value)
            throw DegeneracyError("resonant spectrum: " + std::to_string(x.m) + "*a" +
                                  std::to_string(x.axis + 1) + "=" + fmt(x.value) + " vs " +
                                  std::to_string(y.m) + "*a" + std::to_string(y.axis + 1) +
                                  "=" + fmt(y.value) + " within margin " + fmt(margin));
    }
}

Exclusion nearest_exclusion(const EllipsoidSpec& dom, double beta)
{
    Exclusion ex{std::numeric_limits<double>::infinity(), 0.0, true};
    for (double v : dom.a) {
        double m = std::max(1.0, std::round(beta / v));
        double d = std::abs(beta - m * v);
        if (d < ex.distance) ex = {d, m * v, true};
    }
    double m = std::max(1.0, std::round(beta / kTwoPi));
    double d = std::abs(beta - m * kTwoPi);
    if (d < ex.distance) ex = {d, m * kTwoPi, false};
    return ex;
}

int HamiltonianSpec::n() const
{
    if (radial()) return domain.n();
    return static_cast<int>(Q.rows() / 2);
}

double HamiltonianSpec::phi(double r) const
{
    if (kind == HamiltonianKind::quadraticModel) {
        if (width == 0.0) return slope * (r - 1.0);
        if (r <= 1.0) return c0;
        const double u = (r - 1.0) / width;
        if (u >= 1.0) return slope * (r - 1.0);
        return c0 + slope * width * smoothstep_integral(u);
    }
    // admissible profile
    if (r <= 1.0) return c0 + delta * r;
    const double u = (r - 1.0) / width;
    const double base = c0 + delta * r;
    if (u >= 1.0) return base + (slope - delta) * (width * 0.5 + (r - 1.0 - width));
    return base + (slope - delta) * width * smoothstep_integral(u);
}

double HamiltonianSpec::dphi(double r) const
{
    if (kind == HamiltonianKind::quadraticModel) {
        if (width == 0.0) return slope;
        return slope * smoothstep((r - 1.0) / width);
    }
    return delta + (slope - delta) * smoothstep((r - 1.0) / width);
}

double HamiltonianSpec::d2phi(double r) const
{
    if (kind == HamiltonianKind::quadraticModel) {
        if (width == 0.0) return 0.0;
        return slope * smoothstep_derivative((r - 1.0) / width) / width;
    }
    return (slope - delta) * smoothstep_derivative((r - 1.0) / width) / width;
}

double HamiltonianSpec::value(const Eigen::VectorXd& z) const
{
    if (!radial()) {
        Eigen::VectorXd d = z - center;
        return 0.5 * d.dot(Q * d) + c0;
    }
    return phi(domain.r_of(z));
}

Eigen::VectorXd HamiltonianSpec::gradient(const Eigen::VectorXd& z) const
{
    if (!radial()) return Q * (z - center);
    const double dp = dphi(domain.r_of(z));
    Eigen::VectorXd g(z.size());
    for (int j = 0; j < domain.n(); ++j) {
        const double s = dp * kTwoPi / domain.a[j];
        g(2 * j) = s * z(2 * j);
        g(2 * j + 1) = s * z(2 * j + 1);
    }
    return g;
}

Eigen::MatrixXd HamiltonianSpec::hessian(const Eigen::VectorXd& z) const
{
    if (!radial()) return Q;
    const double r = domain.r_of(z);
    const double dp = dphi(r), d2 = d2phi(r);
    const int N = static_cast<int>(z.size());
    Eigen::VectorXd g(N);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(N, N);
    for (int j = 0; j < domain.n(); ++j) {
        const double w = kTwoPi / domain.a[j];
        g(2 * j) = w * z(2 * j);
        g(2 * j + 1) = w * z(2 * j + 1);
        h(2 * j, 2 * j) = h(2 * j + 1, 2 * j + 1) = dp * w;
    }
    if (d2 != 0.0) h.noalias() += d2 * g * g.transpose();
    return h;
}

double HamiltonianSpec::value(double t, const Eigen::VectorXd& z) const
{
    double v = value(z);
    if (forcing) v += eval_at(*forcing, t).dot(z);
    return v;
}

Eigen::VectorXd HamiltonianSpec::gradient(double t, const Eigen::VectorXd& z) const
{
    Eigen::VectorXd g = gradient(z);
    if (forcing) g += eval_at(*forcing, t);
    return g;
}

double HamiltonianSpec::level_of_period(double T) const
{
    if (kind != HamiltonianKind::admissibleProfile)
        throw InputError("period inversion needs an admissible profile");
    if (!(T > delta && T < slope))
        throw InputError("period " + fmt(T) + " outside the collar range (" + fmt(delta) + ", " +
                         fmt(slope) + ")");
    double lo = 1.0, hi = 1.0 + width;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dphi(mid) < T ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

HamiltonianSpec zero_hamiltonian(int n)
{
    return quadratic_form(Eigen::MatrixXd::Zero(2 * n, 2 * n), Eigen::VectorXd::Zero(2 * n));
}

HamiltonianSpec quadratic_form(const Eigen::MatrixXd& Q, const Eigen::VectorXd& center, double constant)
{
    if (Q.rows() != Q.cols() || Q.rows() % 2 != 0 || Q.rows() == 0 || center.size() != Q.rows())
        throw InputError("quadratic form needs a 2n x 2n matrix and a center in R^{2n}");
    HamiltonianSpec H;
    H.kind = HamiltonianKind::quadraticForm;
    H.Q = 0.5 * (Q + Q.transpose());
    H.center = center;
    H.c0 = constant;
    return H;
}

HamiltonianSpec quadratic_model(const EllipsoidSpec& dom, double a, double eps)
{
    if (!(a > 0.0)) throw InputError("quadratic model slope must be positive");
    if (!(eps > 0.0)) throw InputError("quadratic model eps must be positive");
    HamiltonianSpec H;
    H.kind = HamiltonianKind::quadraticModel;
    H.domain = dom;
    H.slope = a;
    H.epsilon = eps;
    H.width = std::min(1e-2, eps / a);
    H.c0 = 0.5 * a * H.width;
    return H;
}

HamiltonianSpec pure_quadratic(const EllipsoidSpec& dom, double a)
{
    if (!(a > 0.0)) throw InputError("quadratic slope must be positive");
    HamiltonianSpec H;
    H.kind = HamiltonianKind::quadraticModel;
    H.domain = dom;
    H.slope = a;
    return H;
}

HamiltonianSpec admissible_profile(const EllipsoidSpec& dom, double beta, const ProfileParams& p)
{
    if (!(p.eps > 0.0) || !(p.width > 0.0)) throw InputError("profile needs eps > 0 and width > 0");
    if (!(beta > 0.0)) throw InputError("slope must be positive");
    const auto ex = nearest_exclusion(dom, beta);
    if (ex.distance <= 1e-9 * std::max(1.0, beta))
        throw InputError("slope " + fmt(beta) + " hits " +
                         (ex.spectral ? "spectrum value " : "2*pi*Z at ") + fmt(ex.nearest));
    if (p.eps >= dom.a.front())
        throw InputError("eps must stay below the first spectrum value " + fmt(dom.a.front()));
    HamiltonianSpec H;
    H.kind = HamiltonianKind::admissibleProfile;
    H.domain = dom;
    H.slope = beta;
    H.epsilon = p.eps;
    H.width = p.width;
    H.delta = p.eps / 4.0;
    H.c0 = -p.eps / 2.0;
    if (beta <= H.delta) throw InputError("slope must exceed the inner slope eps/4");
    return H;
}

HamiltonianSpec with_forcing(HamiltonianSpec H, const FourierLoop& f)
{
    if (f.n() != H.n()) throw InputError("forcing dimension mismatch");
    H.forcing = f;
    return H;
}

}  // namespace capax
