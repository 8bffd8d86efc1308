#pragma once
// Filtered Morse complex of the truncated action functional over Q.
//
// Generators are orbits (S^1 families count once), graded by relative
// Morse index and filtered by action.  Boundary coefficients come from
// following the slow negative directions of each generator down to the
// next critical point.

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "capax/orbits.hpp"

namespace capax {

using Rational = boost::multiprecision::cpp_rational;
using RMatrix = std::vector<std::vector<Rational>>;  // row-major, dense

int rational_rank(RMatrix A);
// basis of ker A (columns), A given as rows x cols
std::vector<std::vector<Rational>> rational_kernel(const RMatrix& A, int cols);

struct ShootingOptions {
    double delta = 1e-4;      // seed radius
    double gradTol = 1e-9;    // convergence of the endpoint
    int budget = 100000;      // curve steps per seed
    double slowCut = 1e-2;    // |lambda| below this marks a slow direction
    double hmax = 0.05;       // max arclength step in H^{1/2}
};

struct ComplexOptions {
    ShootingOptions shooting;
    // degenerate (rational) ellipsoids: keep generators, skip shooting, and
    // report kappa as a multiset count
    bool multiset = false;
};

struct Trajectory {
    int from = -1, to = -1;  // generator positions; -1 unresolved, -2 left the window below
    int sign = 0;
    double endAction = 0.0;
    int steps = 0;
};

struct FilteredMorseComplex {
    int n = 0;
    double lo = 0.0, hi = 0.0;  // action window
    std::vector<PeriodicOrbit> generators;  // sorted by (relIndex, action)
    std::map<std::pair<int, int>, Rational> boundary;  // (row y, col x) -> #N(x, y)
    std::vector<Trajectory> trajectories;
    bool verified = true;
    bool multiset = false;
    std::vector<std::string> diagnostics;

    int size() const { return static_cast<int>(generators.size()); }
    int degree(int i) const { return generators[i].relIndex; }
    double filtration(int i) const { return generators[i].actionValue; }
    RMatrix boundary_matrix() const;
};

FilteredMorseComplex build_complex(const ActionContext& ctx, const std::vector<PeriodicOrbit>& orbits,
                                   double lo, double hi, const ComplexOptions& opts = {});
bool boundary_squares_to_zero(const FilteredMorseComplex& cx);

// degree -> rank; throws if the boundary does not square to zero
std::map<int, int> homology_ranks(const FilteredMorseComplex& cx);
// homology of the sublevel {action <= L}
std::map<int, int> homology_ranks(const FilteredMorseComplex& cx, double L);

struct SublevelMap {
    double L1 = 0.0, L2 = 0.0;
    std::map<int, RMatrix> blocks;  // degree -> matrix (dim H_d(L2) x dim H_d(L1))
    std::map<int, int> sourceDim, targetDim, rank;
    int total_rank() const;
    int total_source() const;
    int total_target() const;
};

SublevelMap sublevel_map(const FilteredMorseComplex& cx, double L1, double L2);
SublevelMap compose(const SublevelMap& second, const SublevelMap& first);

struct KappaResult {
    int value = 0;
    bool verified = true;  // false for the multiset convention
};
KappaResult kappa(const FilteredMorseComplex& cx, double c);
int kappa_c(const FilteredMorseComplex& cx, double c);

// EH index of {A <= c} for the quadratic model in ctx: eigenvalues mu of
// j* Hess(r) on E^+ are computed once; count(c) = #{mu : c mu >= 1}.
class EhCounter {
public:
    explicit EhCounter(const ActionContext& ctx);
    int count(double c) const;
    const std::vector<double>& thresholds() const { return thresholds_; }  // 1/mu, ascending
    double slope() const { return slope_; }

private:
    std::vector<double> mu_;
    std::vector<double> thresholds_;
    double slope_ = 0.0;
    double limit_ = 0.0;  // counts are complete below this level
};
int ind_eh_count(const ActionContext& ctx, double c);

// action-sorted comparison between the generator sets of two complexes
// (matched by Reeb label, then by degree and action); returns the per
// degree matrices, which must be upper triangular with unit diagonal.
std::map<int, RMatrix> generator_matching(const FilteredMorseComplex& a, const FilteredMorseComplex& b,
                                          double actionTol);

nlohmann::json complex_to_json(const FilteredMorseComplex& cx);

}  // namespace capax
