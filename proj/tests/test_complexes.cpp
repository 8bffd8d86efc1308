#include <doctest.h>

#include <random>

#include "capax/capacities.hpp"
#include "capax/complexes.hpp"
#include "capax/errors.hpp"
#include "oracles.hpp"

using namespace capax;

namespace {
const double tau = 1.61803398875;

// generator stub for hand-made complexes
PeriodicOrbit stub(int degree, double action)
{
    PeriodicOrbit o;
    o.relIndex = degree;
    o.actionValue = action;
    return o;
}

struct Window {
    ActionContext ctx;
    std::vector<PeriodicOrbit> orbits;
    FilteredMorseComplex cx;
};

Window ellipsoid_window(const std::vector<double>& a, double beta, double width, int K, bool multiset = false)
{
    Window w{ActionContext(admissible_profile(EllipsoidSpec(a), beta, {2 * width, width}), K), {}, {}};
    OrbitOptions oo;
    oo.allowDegenerate = multiset;
    oo.computeCz = !multiset;
    w.orbits = solve_quadratic_orbits(w.ctx, oo);
    ComplexOptions co;
    co.multiset = multiset;
    w.cx = build_complex(w.ctx, w.orbits, 2 * width, beta, co);
    return w;
}
}  // namespace

TEST_CASE("rational rank agrees with integer elimination")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> entry(-3, 3), dim(1, 7);
    for (int trial = 0; trial < 200; ++trial) {
        const int r = dim(rng), c = dim(rng);
        // low-rank products hit rank deficiency often
        const int inner = dim(rng);
        std::vector<std::vector<long long>> P(r, std::vector<long long>(inner)), Q(inner, std::vector<long long>(c));
        for (auto& row : P)
            for (auto& v : row) v = entry(rng);
        for (auto& row : Q)
            for (auto& v : row) v = entry(rng);
        std::vector<std::vector<long long>> A(r, std::vector<long long>(c, 0));
        RMatrix R(r, std::vector<Rational>(c));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                for (int k = 0; k < inner; ++k) A[i][j] += P[i][k] * Q[k][j];
                R[i][j] = A[i][j];
            }
        const int rank = rational_rank(R);
        CHECK(rank == oracle::integer_rank(A));
        const auto ker = rational_kernel(R, c);
        CHECK(static_cast<int>(ker.size()) == c - rank);
        for (const auto& v : ker)
            for (int i = 0; i < r; ++i) {
                Rational s = 0;
                for (int j = 0; j < c; ++j) s += R[i][j] * v[j];
                CHECK(s == 0);
            }
    }
}

TEST_CASE("homology of hand-made complexes")
{
    // standard form: pairs x -> y with unit coefficient plus isolated cycles,
    // then a random unimodular change of basis inside each degree
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> pick(0, 3), small(-2, 2);
    for (int trial = 0; trial < 40; ++trial) {
        FilteredMorseComplex cx;
        cx.n = 1;
        std::map<int, int> isolated;
        std::vector<std::pair<int, int>> pairs;
        double act = 1.0;
        for (int d = 1; d <= 4; ++d) {
            const int iso = pick(rng);
            isolated[d] = iso;
            for (int i = 0; i < iso; ++i) cx.generators.push_back(stub(d, act += 0.1));
        }
        for (int d = 2; d <= 4; ++d)
            for (int p = pick(rng); p > 0; --p) {
                cx.generators.push_back(stub(d - 1, act += 0.1));
                cx.generators.push_back(stub(d, act += 0.1));
                pairs.push_back({cx.size() - 1, cx.size() - 2});
            }
        const int G = cx.size();
        std::vector<std::vector<long long>> D(G, std::vector<long long>(G, 0));
        for (auto [x, y] : pairs) D[y][x] = 1;
        // B = U^{-1} D U with U unit upper triangular within degrees
        std::vector<std::vector<long long>> U(G, std::vector<long long>(G, 0)), Ui;
        for (int i = 0; i < G; ++i) U[i][i] = 1;
        for (int i = 0; i < G; ++i)
            for (int j = i + 1; j < G; ++j)
                if (cx.degree(i) == cx.degree(j)) U[i][j] = small(rng);
        // inverse of a unit upper triangular integer matrix by back substitution
        Ui.assign(G, std::vector<long long>(G, 0));
        for (int j = 0; j < G; ++j)
            for (int i = j; i >= 0; --i) {
                long long s = i == j ? 1 : 0;
                for (int k = i + 1; k <= j; ++k) s -= U[i][k] * Ui[k][j];
                Ui[i][j] = s;
            }
        for (int i = 0; i < G; ++i)
            for (int j = 0; j < G; ++j) {
                long long s = 0;
                for (int k = 0; k < G; ++k)
                    for (int l = 0; l < G; ++l) s += Ui[i][k] * D[k][l] * U[l][j];
                if (s) cx.boundary[{i, j}] = Rational(s);
            }
        cx.lo = 0.0;
        cx.hi = act + 1.0;
        REQUIRE(boundary_squares_to_zero(cx));
        const auto h = homology_ranks(cx);
        for (int d = 1; d <= 4; ++d) {
            const auto it = h.find(d);
            CHECK((it == h.end() ? 0 : it->second) == isolated[d]);
        }
    }

    // d^2 != 0 is rejected
    FilteredMorseComplex bad;
    bad.n = 1;
    bad.generators = {stub(1, 1.0), stub(2, 2.0), stub(3, 3.0)};
    bad.boundary[{0, 1}] = 1;
    bad.boundary[{1, 2}] = 1;
    CHECK(!boundary_squares_to_zero(bad));
    CHECK_THROWS(homology_ranks(bad));
}

TEST_CASE("sublevel maps of a filtered complex")
{
    // circle-like complex: a at 1 (deg 0), b at 2 (deg 1), c at 3 (deg 1), d at 4 (deg 2)
    // with d(c) = a - a = 0 and d(d) = b - c
    FilteredMorseComplex cx;
    cx.n = 1;
    cx.generators = {stub(0, 1.0), stub(1, 2.0), stub(1, 3.0), stub(2, 4.0)};
    cx.boundary[{1, 3}] = 1;
    cx.boundary[{2, 3}] = -1;
    cx.lo = 0.0;
    cx.hi = 5.0;
    REQUIRE(boundary_squares_to_zero(cx));

    const auto h = homology_ranks(cx);
    CHECK(h.at(0) == 1);
    CHECK(h.at(1) == 1);
    CHECK((h.count(2) == 0 || h.at(2) == 0));

    const auto h35 = homology_ranks(cx, 3.5);
    CHECK(h35.at(1) == 2);

    // identity
    const SublevelMap id = sublevel_map(cx, 3.5, 3.5);
    CHECK(id.total_rank() == id.total_source());
    for (const auto& [d, B] : id.blocks)
        for (size_t i = 0; i < B.size(); ++i)
            for (size_t j = 0; j < B[i].size(); ++j) CHECK(B[i][j] == Rational(i == j ? 1 : 0));
    // across an empty window: isomorphism
    const SublevelMap iso = sublevel_map(cx, 2.2, 2.8);
    CHECK(iso.total_rank() == iso.total_source());
    CHECK(iso.total_source() == iso.total_target());
    // crossing the action of c: new class, rank unchanged
    const SublevelMap up = sublevel_map(cx, 2.5, 3.5);
    CHECK(up.total_target() == up.total_source() + 1);
    CHECK(up.total_rank() == up.total_source());
    // crossing d kills b - c
    const SublevelMap kill = sublevel_map(cx, 3.5, 4.5);
    CHECK(kill.rank.at(1) == 1);
    CHECK(kill.sourceDim.at(1) == 2);
    // functoriality
    for (auto [l1, l2, l3] : {std::tuple{1.5, 2.5, 4.5}, std::tuple{2.5, 3.5, 4.5}, std::tuple{0.5, 3.5, 4.5}}) {
        const SublevelMap direct = sublevel_map(cx, l1, l3);
        const SublevelMap comp = compose(sublevel_map(cx, l2, l3), sublevel_map(cx, l1, l2));
        CHECK(direct.rank == comp.rank);
        CHECK(direct.blocks == comp.blocks);
    }
    CHECK_THROWS_AS(sublevel_map(cx, 2.0, 3.5), InputError);
}

TEST_CASE("perturbed circle: two generators cancel in pairs of trajectories")
{
    const HamiltonianSpec H0 = admissible_profile(EllipsoidSpec({1.0}), 1.5, {0.05, 0.5});
    FourierLoop f(1, 1);
    f.at(1, 0) = 0.01;
    const ActionContext ctx(with_forcing(H0, f), 12);
    const double z0 = std::sqrt(H0.level_of_period(1.0) / oracle::pi);
    std::vector<PeriodicOrbit> orbits;
    for (double th : {0.0, oracle::pi}) {
        Eigen::VectorXcd v(1);
        v(0) = std::polar(z0, th);
        orbits.push_back(refine_orbit(ctx, FourierLoop::mode_loop(1, v, 12)));
    }
    const FilteredMorseComplex cx = build_complex(ctx, orbits, 0.5, 1.4);
    REQUIRE(cx.size() == 2);
    CHECK(cx.degree(0) == 2);
    CHECK(cx.degree(1) == 3);
    CHECK(cx.verified);
    CHECK(boundary_squares_to_zero(cx));
    CHECK(cx.boundary.empty());
    // the two flow lines of the circle arrive with opposite signs
    int plus = 0, minus = 0;
    for (const auto& t : cx.trajectories)
        if (t.from == 1 && t.to == 0) (t.sign > 0 ? plus : minus)++;
    CHECK(plus == 1);
    CHECK(minus == 1);
    const auto h = homology_ranks(cx);
    CHECK(h.at(2) == 1);
    CHECK(h.at(3) == 1);
}

TEST_CASE("ellipsoid complex: homology, kappa, EH count")
{
    const Window w = ellipsoid_window({1.0, tau}, 3.5, 1e-3, 16);
    const auto& cx = w.cx;
    CHECK(boundary_squares_to_zero(cx));
    CHECK(cx.boundary.empty());
    const auto spec = oracle::spectrum_multiset({1.0, tau}, oracle::spectrum_count({1.0, tau}, 3.5));
    REQUIRE(cx.size() == static_cast<int>(spec.size()));
    const auto h = homology_ranks(cx);
    for (int k = 1; k <= cx.size(); ++k) CHECK(h.at(1 + 2 * k) == 1);

    CHECK(kappa_c(cx, 3.3) == 5);
    const EhCounter eh(ActionContext(quadratic_model(EllipsoidSpec({1.0, tau}), 3.5, 1e-2), 16));
    for (double c : {0.5, 1.3, 1.9, 2.5, 3.1, 3.3}) {
        CHECK(kappa_c(cx, c) == oracle::spectrum_count({1.0, tau}, c));
        CHECK(eh.count(c) == oracle::spectrum_count({1.0, tau}, c));
    }
    CHECK_THROWS_AS(eh.count(2.0), DegeneracyError);
    CHECK_THROWS_AS(eh.count(3.6), InputError);

    // the same generators at 2K, matched unitriangularly
    const Window w2 = ellipsoid_window({1.0, tau}, 3.5, 1e-3, 32);
    for (const auto& [d, M] : generator_matching(cx, w2.cx, 1e-6)) {
        REQUIRE(M.size() == M.front().size());
        for (size_t i = 0; i < M.size(); ++i)
            for (size_t j = 0; j < M.size(); ++j) {
                if (i == j) CHECK(M[i][j] == 1);
                if (i > j) CHECK(M[i][j] == 0);
            }
    }

    const nlohmann::json js = complex_to_json(cx);
    CHECK(js.at("generators").size() == spec.size());
    CHECK(js.at("boundary").empty());
    CHECK(js.at("generators")[0].at("degree") == 3);
    CHECK(js.at("window")[1] == 3.5);
}

TEST_CASE("empty and degenerate windows")
{
    const Window w = ellipsoid_window({1.0, tau}, 0.9, 1e-3, 8);
    CHECK(w.cx.size() == 0);
    CHECK(homology_ranks(w.cx).empty());
    CHECK(kappa_c(w.cx, 0.5) == 0);

    const Window r = ellipsoid_window({1.0, 1.0}, 2.5, 1e-3, 8, true);
    CHECK(r.cx.multiset);
    const KappaResult k = kappa(r.cx, 1.5);
    CHECK(k.value == 2);
    CHECK(!k.verified);
    const EhCounter eh(ActionContext(quadratic_model(EllipsoidSpec({1.0, 1.0}), 2.5, 1e-2), 8));
    CHECK(eh.count(1.5) == 2);
    CHECK(eh.count(0.9) == 0);
    CHECK(eh.count(2.2) == 4);
    CHECK_THROWS_AS(build_complex(r.ctx, r.orbits, 2e-3, 2.5), DegeneracyError);
    // the constant orbit must lie below the window
    CHECK_THROWS_AS(build_complex(w.ctx, w.orbits, 1e-6, 0.9), InputError);
}
