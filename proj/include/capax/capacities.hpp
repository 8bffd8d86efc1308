#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "capax/complexes.hpp"
#include "capax/domains.hpp"

namespace capax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Method { EH, GH };
std::string method_name(Method m);

struct CapacitySequence {
    std::map<int, double> values;  // k -> c_k, kInf above the slope
    Method method = Method::EH;
    EllipsoidSpec domain;
    double slope = 0.0;
    int K = 0;
    bool verified = true;
    std::vector<std::string> diagnostics;

    double at(int k) const { return values.at(k); }
};

// 1.1 times the kmax-th spectrum value, moved off Spec and 2 pi Z
double select_slope(const EllipsoidSpec& dom, int kmax);
// smallest truncation carrying every spectrum multiplicity below the slope
int required_K(const EllipsoidSpec& dom, double slope);

CapacitySequence capacity_eh(const ActionContext& ctx, int kmax);

struct GhOptions {
    // profile widths for extrapolation to the characteristic function;
    // a single entry disables extrapolation and uses ctx.H as given
    std::vector<double> widths{2e-3, 1e-3, 5e-4};
    double epsPerWidth = 2.0;
    OrbitOptions orbit;
    bool multiset = false;  // degenerate ellipsoids: count generators by action
};

CapacitySequence capacity_gh(const ActionContext& ctx, int kmax, const GhOptions& opts = {});

// full GH input: admissible profile orbits and the complex for one width
struct GhLevel {
    ActionContext ctx;
    std::vector<PeriodicOrbit> orbits;
    FilteredMorseComplex complex;
};
// base supplies domain, slope, K and m; the profile is rebuilt at this width
GhLevel gh_level(const ActionContext& base, double width, const GhOptions& opts);

struct PipelineConfig {
    int K = 0;         // 0 -> required_K + 2
    int m = 0;         // 0 -> 4K
    double slope = 0;  // 0 -> select_slope
    double epsEh = 1e-2;
    GhOptions gh;
};

struct EqualityRow {
    int k;
    double eh, gh, diff;
    std::string label;  // nearest spectrum entries "m*a_i"
    bool pass;
};

struct EqualityReport {
    EllipsoidSpec domain;
    int kmax = 0, K = 0, m = 0;
    double slope = 0.0, tol = 0.0, margin = 0.0;
    std::vector<EqualityRow> rows;
    bool pass = true;
    std::vector<std::string> diagnostics;
};

EqualityReport verify_equality(const EllipsoidSpec& dom, int kmax, double tol, const PipelineConfig& cfg = {});

struct AxiomRow {
    std::string check;  // "monotone" or "conformal r=..."
    Method method;
    int k;
    double lhs, rhs;
    bool pass;
};

struct AxiomReport {
    std::vector<AxiomRow> rows;
    bool pass = true;
};

// c_k(A) <= c_k(B) when A lies in B, and c_k(rA) = r^2 c_k(A) for each r
AxiomReport axiom_checks(const EllipsoidSpec& domA, const EllipsoidSpec& domB, int kmax,
                         const std::vector<double>& scalings = {2.0}, double tol = 1e-6,
                         const PipelineConfig& cfg = {});

CapacitySequence run_pipeline(Method method, const EllipsoidSpec& dom, int kmax, const PipelineConfig& cfg);

}  // namespace capax
