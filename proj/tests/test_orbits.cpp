#include <doctest.h>

#include <random>

#include "capax/action.hpp"
#include "capax/errors.hpp"
#include "capax/orbits.hpp"
#include "oracles.hpp"

using namespace capax;

namespace {
const double tau = 1.61803398875;

// H = sum_j pi theta_j |z_j|^2
HamiltonianSpec rotation_hamiltonian(const std::vector<double>& theta)
{
    const int n = static_cast<int>(theta.size());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) Q(2 * j, 2 * j) = Q(2 * j + 1, 2 * j + 1) = 2.0 * oracle::pi * theta[j];
    return quadratic_form(Q, Eigen::VectorXd::Zero(2 * n));
}

int expected_rotation_index(const std::vector<double>& theta)
{
    int s = 0;
    for (double t : theta) s += oracle::rotation_index(t);
    return s;
}

// orthonormal basis of the truncated H^-: modes k <= -1 and the x-part of E^0
Eigen::MatrixXd h_minus_basis(int n, int K)
{
    const int N = 2 * n * (2 * K + 1);
    std::vector<int> idx;
    for (int k = -K; k <= 0; ++k)
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < 2; ++c)
                if (k < 0 || c == 0) idx.push_back(((k + K) * n + j) * 2 + c);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, idx.size());
    for (size_t i = 0; i < idx.size(); ++i) B(idx[i], i) = 1.0;
    return B;
}
}  // namespace

TEST_CASE("crossing index of rotation paths")
{
    for (double th : {0.3, 0.9, 1.2, 2.5, 3.7, -0.4, -1.6}) {
        const auto S = [th](double) { return Eigen::MatrixXd(2.0 * oracle::pi * th * Eigen::MatrixXd::Identity(2, 2)); };
        CHECK(cz_crossing_path(1, S).index == oracle::rotation_index(th));
    }
    // time-dependent rate: total angle 2 pi * integral of theta(t)
    const auto S = [](double t) {
        return Eigen::MatrixXd(2.0 * oracle::pi * (1.0 + 2.2 * t) * Eigen::MatrixXd::Identity(2, 2));
    };
    CHECK(cz_crossing_path(1, S).index == oracle::rotation_index(2.1));
    // direct sums add
    const auto S2 = [](double) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 4);
        M(0, 0) = M(1, 1) = 2.0 * oracle::pi * 0.7;
        M(2, 2) = M(3, 3) = 2.0 * oracle::pi * 2.4;
        return M;
    };
    CHECK(cz_crossing_path(2, S2).index == oracle::rotation_index(0.7) + oracle::rotation_index(2.4));
    // integer rotation: the eta shift pushes the endpoint below the resonance
    const auto S1 = [](double) { return Eigen::MatrixXd(2.0 * oracle::pi * Eigen::MatrixXd::Identity(2, 2)); };
    const CzResult r1 = cz_crossing_path(1, S1);
    CHECK(r1.index == 1);
    CHECK(r1.endpointMargin == doctest::Approx(1e-7).epsilon(1e-3));
    // degenerate once the shift is compensated
    const auto Sd = [](double) {
        return Eigen::MatrixXd((2.0 * oracle::pi + 1e-7) * Eigen::MatrixXd::Identity(2, 2));
    };
    CHECK_THROWS_AS(cz_crossing_path(1, Sd), DegeneracyError);
}

TEST_CASE("relative index of quadratic forms equals the rotation count")
{
    const std::vector<std::vector<double>> cases{{0.4}, {1.3}, {2.6, 0.2}, {-0.7, 1.9}, {0.5, 1.5, 3.25}};
    for (const auto& th : cases) {
        const ActionContext ctx(rotation_hamiltonian(th), 6);
        const PeriodicOrbit o = certify_orbit(ctx, FourierLoop(static_cast<int>(th.size()), 6));
        CHECK(o.relIndex == expected_rotation_index(th));
        REQUIRE(o.czIndex);
        CHECK(*o.czIndex == o.relIndex);
    }
}

TEST_CASE("relative dimension")
{
    const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(6, 3);
    CHECK(relative_dim(W, W).value == 0);
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(6, 4);
    CHECK(relative_dim(V, W).value == 1);
    CHECK(relative_dim(W, V).value == -1);
    // rotated copy of W has dimension 0 against W
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(6, 6);
    R(0, 0) = R(3, 3) = std::cos(0.3);
    R(0, 3) = -std::sin(0.3);
    R(3, 0) = std::sin(0.3);
    CHECK(relative_dim(R * W, W).value == 0);

    // zero Hamiltonian: V^-(L) against H^- is 0; the exact Hessian is degenerate on E^0
    const ActionContext zero(zero_hamiltonian(2), 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L_matrix(zero));
    int q = 0;
    while (es.eigenvalues()(q) < 0.0) ++q;
    CHECK(relative_dim(es.eigenvectors().leftCols(q), h_minus_basis(2, 4)).value == 0);
    PeriodicOrbit o;
    o.loop = FourierLoop(2, 4);
    CHECK_THROWS_AS(relative_morse_index(zero, o), DegeneracyError);

    // negative space of a nondegenerate Hessian against H^- gives the index
    const ActionContext ctx(rotation_hamiltonian({1.4, 0.3}), 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(hessian_form(ctx, FourierLoop(2, 4)));
    q = 0;
    while (eh.eigenvalues()(q) < 0.0) ++q;
    CHECK(relative_dim(eh.eigenvectors().leftCols(q), h_minus_basis(2, 4)).value == expected_rotation_index({1.4, 0.3}));
}

TEST_CASE("ellipsoid orbits: completeness, indices, action bounds")
{
    const EllipsoidSpec E({1.0, tau});
    const double beta = 2.5, eps = 0.02;
    const ActionContext ctx(admissible_profile(E, beta, {eps, 0.01}), 12);
    const auto orbits = solve_quadratic_orbits(ctx);
    int families = 0;
    for (const auto& o : orbits) {
        CHECK(o.gradNorm <= 1e-9);
        CHECK(o.nondegenerate);
        REQUIRE(o.czIndex);
        CHECK(*o.czIndex == o.relIndex);
        if (!o.reebLabel) {
            CHECK(o.actionValue < eps);
            CHECK(o.relIndex == 2);
            continue;
        }
        ++families;
        CHECK(o.family);
        const double T = o.reebLabel->period;
        const double g = gap(reeb_spectrum(E, beta), beta);
        CHECK(std::abs(o.actionValue - T) < std::min(1.0 / beta, g / 3.0));
    }
    CHECK(families == 3);  // 1, tau, 2 below 2.5

    // sorted by action the indices climb through n - 1 + 2k
    std::vector<PeriodicOrbit> circ;
    for (const auto& o : orbits)
        if (o.reebLabel) circ.push_back(o);
    std::sort(circ.begin(), circ.end(), [](auto& a, auto& b) { return a.actionValue < b.actionValue; });
    for (size_t k = 0; k < circ.size(); ++k) CHECK(*circ[k].czIndex == 1 + 2 * static_cast<int>(k + 1));

    // same indices at 2K
    const ActionContext ctx2(admissible_profile(E, beta, {eps, 0.01}), 24);
    const auto orbits2 = solve_quadratic_orbits(ctx2);
    REQUIRE(orbits2.size() == orbits.size());
    for (size_t i = 0; i < orbits.size(); ++i) CHECK(orbits2[i].relIndex == orbits[i].relIndex);
}

TEST_CASE("iterates of the simple orbit on the disc")
{
    const ActionContext ctx(admissible_profile(EllipsoidSpec({1.0}), 5.5, {0.02, 0.05}), 12);
    const auto orbits = solve_quadratic_orbits(ctx);
    CHECK(orbits.size() == 6);
    for (const auto& o : orbits) {
        REQUIRE(o.czIndex);
        CHECK(*o.czIndex == o.relIndex);
        if (o.reebLabel) CHECK(o.relIndex == 2 * o.reebLabel->m);
        else CHECK(o.relIndex == 1);
    }
}

TEST_CASE("resonant spectrum rejected")
{
    const ActionContext ctx(admissible_profile(EllipsoidSpec({1.0, 2.0}), 2.5, {0.02, 0.01}), 8);
    CHECK_THROWS_WITH_AS(solve_quadratic_orbits(ctx), doctest::Contains("2*a1"), DegeneracyError);
    const ActionContext small(admissible_profile(EllipsoidSpec({1.0, tau}), 5.5, {0.02, 0.01}), 3);
    CHECK_THROWS_AS(solve_quadratic_orbits(small), InputError);
}

TEST_CASE("refine_orbit")
{
    const EllipsoidSpec E({1.0, tau});
    const ActionContext ctx(admissible_profile(E, 2.5, {0.02, 0.05}), 10);
    const auto orbits = solve_quadratic_orbits(ctx);
    std::mt19937_64 rng(21);
    for (const auto& o : orbits) {
        const PeriodicOrbit same = refine_orbit(ctx, o.loop);
        CHECK(h12_norm(same.loop - o.loop) <= 1e-10);
        const FourierLoop noisy = o.loop + oracle::random_loop(rng, 2, 10, 1e-4, 2.0);
        const PeriodicOrbit back = refine_orbit(ctx, noisy);
        CHECK(back.gradNorm <= 1e-10);
        CHECK(std::abs(back.actionValue - o.actionValue) <= 1e-9);
        CHECK(!back.basinJump);
    }
    const PeriodicOrbit c = refine_orbit(ctx, FourierLoop(2, 10));
    CHECK(h12_norm(c.loop) <= 1e-12);
    CHECK(!c.reebLabel);

    // a far guess in the linear zone lands on the constant orbit and says so
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2);
    v(0) = 5.0;
    const PeriodicOrbit far = refine_orbit(ctx, FourierLoop::mode_loop(7, v, 10));
    CHECK(far.basinJump);
    CHECK(h12_norm(far.loop) <= 1e-12);
}

TEST_CASE("perturbed circle family splits into two nondegenerate orbits")
{
    const HamiltonianSpec H0 = admissible_profile(EllipsoidSpec({1.0}), 1.5, {0.05, 0.5});
    const ActionContext ctx(H0, 8);
    FourierLoop f(1, 1);
    f.at(1, 0) = 0.01;
    const ActionContext forced(with_forcing(H0, f), 8);
    std::vector<double> phases;
    for (int j = 0; j < 32; ++j) phases.push_back(0.01 + j * 2.0 * oracle::pi / 32);
    const auto broken = break_families(forced, solve_quadratic_orbits(ctx), phases);
    std::vector<int> idx;
    for (const auto& o : broken) {
        CHECK(o.gradNorm <= 1e-10);
        CHECK(o.nondegenerate);
        CHECK(!o.family);
        REQUIRE(o.czIndex);
        CHECK(*o.czIndex == o.relIndex);
        if (o.reebLabel) idx.push_back(o.relIndex);
    }
    std::sort(idx.begin(), idx.end());
    CHECK(idx == std::vector<int>{2, 3});
}
