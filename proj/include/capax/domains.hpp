#pragma once
// Ellipsoids, their Reeb spectra, and the Hamiltonians used on them.
//
// E(a) = { z : r(z) <= 1 },  r(z) = pi sum |z_j|^2 / a_j.
// Every Hamiltonian here except the quadratic-form kind is radial,
// H = phi(r), so a circle in the z_i-plane of multiplicity m is a
// 1-periodic orbit iff phi'(r) = m a_i.  phi' is called the period map.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "capax/loopspace.hpp"

namespace capax {

struct EllipsoidSpec {
    std::vector<double> a;  // ascending

    EllipsoidSpec() = default;
    explicit EllipsoidSpec(std::vector<double> axes);

    int n() const { return static_cast<int>(a.size()); }
    EllipsoidSpec scaled(double r) const;  // a -> r^2 a
    // componentwise a_i <= b_i, which gives E(a) inside E(b)
    bool inside(const EllipsoidSpec& other) const;
    double r_of(const Eigen::VectorXd& z) const;
    std::string label() const;
};

EllipsoidSpec ellipsoid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EllipsoidSpec& e);

struct ReebEntry {
    double value;
    int m;     // multiplier >= 1
    int axis;  // 0-based
};

struct ReebSpectrum {
    std::vector<ReebEntry> entries;
    double cutoff = 0.0;
};

ReebSpectrum reeb_spectrum(const EllipsoidSpec& dom, double cutoff);
// min successive difference among entries < beta; +inf if fewer than two
double gap(const ReebSpectrum& spec, double beta);
// Throws DegeneracyError naming the first pair of spectrum values below
// cutoff that coincide to relative precision margin.
void check_irrational(const EllipsoidSpec& dom, double cutoff, double margin = 1e-6);
// distance from beta to spectrum and to 2 pi Z, and the nearest offender
struct Exclusion {
    double distance;
    double nearest;
    bool spectral;
};
Exclusion nearest_exclusion(const EllipsoidSpec& dom, double beta);

enum class HamiltonianKind { quadraticForm, quadraticModel, admissibleProfile };

struct ProfileParams {
    double eps = 1e-2;       // C^2-smallness bound
    double width = 1e-3;     // collar width in r (admissible) or shell width (model)
};

struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::quadraticForm;
    EllipsoidSpec domain;
    double slope = 0.0;
    double epsilon = 0.0;
    double width = 0.0;   // collar / smoothing shell width in r
    double delta = 0.0;   // inner slope of the admissible profile
    double c0 = 0.0;      // phi on the inner part (model) or phi(0) (profile)

    // quadraticForm: H = 1/2 (z-p)^T Q (z-p) + c
    Eigen::MatrixXd Q;
    Eigen::VectorXd center;

    // optional time-dependent linear term f(t) . z
    std::optional<FourierLoop> forcing;

    int n() const;
    bool radial() const { return kind != HamiltonianKind::quadraticForm; }

    // radial profile, valid for radial kinds
    double phi(double r) const;
    double dphi(double r) const;
    double d2phi(double r) const;

    // autonomous part
    double value(const Eigen::VectorXd& z) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& z) const;
    // full H(t, z) including forcing
    double value(double t, const Eigen::VectorXd& z) const;
    Eigen::VectorXd gradient(double t, const Eigen::VectorXd& z) const;

    // r in the collar with phi'(r) = T; requires delta < T < slope
    double level_of_period(double T) const;
};

HamiltonianSpec zero_hamiltonian(int n);
HamiltonianSpec quadratic_form(const Eigen::MatrixXd& Q, const Eigen::VectorXd& center,
                               double constant = 0.0);
// H_B of the containment step: 0 <= H_B < eps on B, a r - a outside a
// thin shell.  Shell width is min(1e-2, eps/a) so the inner constant
// a*width/2 stays below eps.
HamiltonianSpec quadratic_model(const EllipsoidSpec& dom, double a, double eps);
// Pure form a r - a (no smoothing).
HamiltonianSpec pure_quadratic(const EllipsoidSpec& dom, double a);
// Radial admissible Hamiltonian of slope beta.
HamiltonianSpec admissible_profile(const EllipsoidSpec& dom, double beta,
                                   const ProfileParams& params = {});
HamiltonianSpec with_forcing(HamiltonianSpec H, const FourierLoop& f);

// quintic smoothstep and its antiderivative / derivative
double smoothstep(double u);
double smoothstep_integral(double u);
double smoothstep_derivative(double u);

}  // namespace capax
