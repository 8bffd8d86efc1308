#pragma once
// 1-periodic orbits of X_H: enumeration for radial Hamiltonians, Newton
// refinement, relative Morse index and Conley-Zehnder index.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "capax/action.hpp"

namespace capax {

struct ReebLabel {
    int m = 0;
    int axis = 0;  // 0-based
    double period = 0.0;
};

struct PeriodicOrbit {
    FourierLoop loop;
    double actionValue = 0.0;
    double gradNorm = 0.0;
    int relIndex = 0;
    std::optional<int> czIndex;
    bool nondegenerate = false;
    double margin = 0.0;      // smallest |eigenvalue| / |M| after the quotient
    bool family = false;      // S^1 family, xdot quotiented out
    bool basinJump = false;   // refine_orbit moved far from its guess
    std::optional<ReebLabel> reebLabel;
};

struct FredholmPairDim {
    Eigen::MatrixXd V, W;
    int value = 0;
    bool ambiguous = false;
};

FredholmPairDim relative_dim(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                             double threshold = 1e-9);

struct OrbitOptions {
    double nuRel = 1e-12;         // eigenvalue margin relative to |M|
    double irrationality = 1e-6;  // spectrum resonance margin
    bool computeCz = true;
    bool allowDegenerate = false;
    double newtonTol = 1e-10;
    int newtonMaxIter = 40;
};

struct MorseData {
    int negatives = 0;   // strictly negative eigenvalues (after quotient)
    int index = 0;       // negatives - dim H^-
    double margin = 0.0; // min |lambda| / max |lambda|
    bool quotiented = false;
    Eigen::VectorXd eigenvalues;
};

// Spectrum of the Hessian at loop x; the time-shift direction xdot is
// projected out when H is autonomous and x is non-constant.
MorseData morse_data(const ActionContext& ctx, const FourierLoop& x);
int relative_morse_index(const ActionContext& ctx, const PeriodicOrbit& orbit,
                         const OrbitOptions& opts = {});

struct CzResult {
    int index = 0;
    double endpointMargin = 0.0;   // min |arg| of the crossing unitary at t = 1
    double symplecticDefect = 0.0; // |Phi^T J Phi - J| at t = 1
    std::vector<double> crossingTimes;
    std::vector<int> crossingSigns;
};

struct CzOptions {
    double eta = 1e-7;        // regularizing shift S -> S - eta I
    double endpointTol = 1e-9;
    double tol = 1e-11;       // integrator tolerance
};

CzResult cz_crossing(const ActionContext& ctx, const FourierLoop& x, const CzOptions& opts = {});
// Symplectic path of Phi' = J S(t) Phi for a user-supplied S(t).
CzResult cz_crossing_path(int n, const std::function<Eigen::MatrixXd(double)>& S,
                          const CzOptions& opts = {});
int cz_index_crossing(const ActionContext& ctx, const PeriodicOrbit& orbit, const CzOptions& opts = {});

std::vector<PeriodicOrbit> solve_quadratic_orbits(const ActionContext& ctx, const OrbitOptions& opts = {});
PeriodicOrbit refine_orbit(const ActionContext& ctx, const FourierLoop& guess, const OrbitOptions& opts = {});
// Critical points of a forced Hamiltonian near the S^1 families of its
// autonomous part. The forced action is sampled along each family at the given
// phases; its local extrema seed Newton. Results are deduplicated.
std::vector<PeriodicOrbit> break_families(const ActionContext& forced, const std::vector<PeriodicOrbit>& families,
                                          const std::vector<double>& phases, const OrbitOptions& opts = {});
// fill action, residual, indices for a loop believed to be critical
PeriodicOrbit certify_orbit(const ActionContext& ctx, const FourierLoop& x, const OrbitOptions& opts = {});

}  // namespace capax
