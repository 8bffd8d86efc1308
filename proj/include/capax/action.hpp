#pragma once
// The action functional on the truncated loop space.
//
//   A(x) = pi sum_k k |x_k|^2 - int_0^1 H(t, x(t)) dt
//        = 1/2 (|x+|^2 - |x-|^2) - int H
//
// grad A = P+ x - P- x - j* grad H(x(.))  (H^{1/2} gradient of A itself;
// zeros solve xdot = J grad H).  Write grad A = L x + grad b with L the
// +-1 operator extended to E^0 by the zero-mode split.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "capax/domains.hpp"
#include "capax/loopspace.hpp"

namespace capax {

// Optional non-gradient tweak Xbar of the flow field, supported in a ball
// of given H^{1/2} radius around each center and bounded by
// c * min(|grad A|/2, clip).
struct MorseSmalePerturbation {
    double c = 0.5;
    double clip = 1.0;
    double radius = 0.1;
    unsigned long long seed = 1;
    std::vector<FourierLoop> centers;
};

struct ActionContext {
    HamiltonianSpec H;
    int K = 64;
    int m = 0;  // 0 -> 4K
    ZeroModeSplit zsplit;
    std::optional<MorseSmalePerturbation> perturbation;

    ActionContext() = default;
    ActionContext(HamiltonianSpec H, int K, int m = 0);
    ActionContext(HamiltonianSpec H, int K, int m, ZeroModeSplit z);

    int n() const { return H.n(); }
    int dof() const { return 2 * n() * (2 * K + 1); }
    // real dimension of the truncated H^- = (modes k <= -1) + E^0_-
    int dim_H_minus() const { return 2 * n() * K + n(); }
    void validate() const;
};

double action(const ActionContext& ctx, const FourierLoop& x);
FourierLoop grad_action(const ActionContext& ctx, const FourierLoop& x);
FourierLoop apply_L(const ActionContext& ctx, const FourierLoop& x);
FourierLoop grad_b(const ActionContext& ctx, const FourierLoop& x);
// -L^{-1} grad b(x); equals x exactly at critical points
FourierLoop ps_map(const ActionContext& ctx, const FourierLoop& x);

// Hessian of A at x in the H^{1/2}-orthonormal coordinates of
// FourierLoop::to_h12.  On E^0 the quadratic part of A vanishes, so at
// H = 0 this block is zero.
Eigen::MatrixXd hessian_form(const ActionContext& ctx, const FourierLoop& x);
// the extended operator L in the same coordinates
Eigen::MatrixXd L_matrix(const ActionContext& ctx);
// D^2 A(x) xi as a loop (the H^{1/2} Riesz representative)
FourierLoop hessian_apply(const ActionContext& ctx, const FourierLoop& x, const FourierLoop& xi);

// -grad A + Xbar
FourierLoop flow_field(const ActionContext& ctx, const FourierLoop& x);
FourierLoop perturbation_field(const ActionContext& ctx, const FourierLoop& x);

struct FlowStep {
    FourierLoop x;
    double dt = 0.0;      // step actually taken
    double action = 0.0;  // action at x
    int halvings = 0;
};

// Exponential step: e^{-dt L} exactly, grad b (and -Xbar) explicit.
FlowStep flow_step(const ActionContext& ctx, const FourierLoop& x, double dt);

}  // namespace capax
