#include <doctest.h>

#include <random>

#include "capax/domains.hpp"
#include "capax/errors.hpp"
#include "oracles.hpp"

using namespace capax;

namespace {
const double tau = 1.61803398875;

Eigen::VectorXd random_point(std::mt19937_64& rng, int n, double scale)
{
    std::normal_distribution<double> g(0.0, scale);
    Eigen::VectorXd z(2 * n);
    for (int i = 0; i < 2 * n; ++i) z(i) = g(rng);
    return z;
}

// point at ellipsoid radius r along a random ray
Eigen::VectorXd at_radius(std::mt19937_64& rng, const EllipsoidSpec& d, double r)
{
    Eigen::VectorXd z = random_point(rng, d.n(), 1.0);
    return z * std::sqrt(r / d.r_of(z));
}
}  // namespace

TEST_CASE("reeb spectrum of E(1,1)")
{
    const ReebSpectrum s = reeb_spectrum(EllipsoidSpec({1.0, 1.0}), 2.5);
    REQUIRE(s.entries.size() == 4);
    const int m[4] = {1, 1, 2, 2}, ax[4] = {0, 1, 0, 1};
    for (int i = 0; i < 4; ++i) {
        CHECK(s.entries[i].value == m[i]);
        CHECK(s.entries[i].m == m[i]);
        CHECK(s.entries[i].axis == ax[i]);
    }
}

TEST_CASE("reeb spectrum matches enumeration, prefix and scaling")
{
    const EllipsoidSpec e({1.0, tau});
    const ReebSpectrum s = reeb_spectrum(e, 4.0);
    const std::vector<double> ref = oracle::spectrum_multiset(e.a, 6);
    REQUIRE(s.entries.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(s.entries[i].value == doctest::Approx(ref[i]).epsilon(1e-15));
        CHECK(s.entries[i].m * e.a[s.entries[i].axis] == s.entries[i].value);
    }
    const ReebSpectrum big = reeb_spectrum(e, 9.0);
    for (int i = 0; i < 6; ++i) CHECK(big.entries[i].value == s.entries[i].value);

    const ReebSpectrum sc = reeb_spectrum(e.scaled(3.0), 36.0);
    for (int i = 0; i < 6; ++i) CHECK(sc.entries[i].value == doctest::Approx(9.0 * s.entries[i].value).epsilon(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        const EllipsoidSpec d({u(rng), u(rng), u(rng)});
        const double cut = 10.0;
        const ReebSpectrum r = reeb_spectrum(d, cut);
        CHECK(static_cast<int>(r.entries.size()) == oracle::spectrum_count(d.a, cut));
        const auto m = oracle::spectrum_multiset(d.a, static_cast<int>(r.entries.size()));
        for (size_t i = 0; i < m.size(); ++i) CHECK(r.entries[i].value == doctest::Approx(m[i]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(reeb_spectrum(e, 0.0), InputError);
}

TEST_CASE("gap and irrationality")
{
    const EllipsoidSpec e({1.0, tau});
    const ReebSpectrum s = reeb_spectrum(e, 10.0);
    // entries strictly below 5
    const auto v = oracle::spectrum_multiset(e.a, oracle::spectrum_count(e.a, 5.0 - 1e-9));
    double g = 1e300;
    for (size_t i = 1; i < v.size(); ++i) g = std::min(g, v[i] - v[i - 1]);
    CHECK(gap(s, 5.0) == doctest::Approx(g).epsilon(1e-12));
    CHECK(gap(s, 5.0) > 0.0);

    CHECK_NOTHROW(check_irrational(e, 20.0));
    CHECK_THROWS_AS(check_irrational(EllipsoidSpec({1.0, 2.0}), 3.0), DegeneracyError);
    CHECK_THROWS_AS(check_irrational(EllipsoidSpec({1.0, 1.0 + 1e-7}), 3.0), DegeneracyError);
}

TEST_CASE("ellipsoid input validation and json")
{
    CHECK_THROWS_AS(EllipsoidSpec(std::vector<double>{}), InputError);
    CHECK_THROWS_AS(EllipsoidSpec({1.0, -1.0}), InputError);
    const EllipsoidSpec e({2.0, 1.0});
    CHECK(e.a[0] == 1.0);
    CHECK(EllipsoidSpec({1.0, 2.0}).inside(EllipsoidSpec({1.5, 2.5})));
    CHECK(!EllipsoidSpec({1.0, 3.0}).inside(EllipsoidSpec({1.5, 2.5})));
    CHECK(ellipsoid_from_json(to_json(e)).a == e.a);
    CHECK_THROWS_AS(ellipsoid_from_json(nlohmann::json::parse(R"({"type":"polydisk","a":[1]})")), InputError);
    CHECK_THROWS_AS(ellipsoid_from_json(nlohmann::json::parse(R"({"a":"x"})")), InputError);
}

TEST_CASE("quadratic model H_B")
{
    const EllipsoidSpec e({1.0, tau});
    const double a = 3.0, eps = 0.05;
    const HamiltonianSpec H = quadratic_model(e, a, eps);
    const double h0 = H.value(Eigen::VectorXd::Zero(4));
    CHECK(h0 >= 0.0);
    CHECK(h0 < eps);

    std::mt19937_64 rng(8);
    CHECK(H.value(at_radius(rng, e, 2.0)) == doctest::Approx(a).epsilon(1e-14));

    // exterior gradients against central differences
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd z = at_radius(rng, e, 1.05 + 2.0 * std::uniform_real_distribution<double>()(rng));
        const Eigen::VectorXd g = H.gradient(z);
        Eigen::VectorXd fd(4);
        for (int i = 0; i < 4; ++i) {
            Eigen::VectorXd dz = Eigen::VectorXd::Zero(4);
            dz(i) = 1e-6;
            fd(i) = (H.value(z + dz) - H.value(z - dz)) / 2e-6;
        }
        CHECK((g - fd).norm() <= 1e-6 * g.norm());
    }
    // H_B dominates a(r - 1) and sits in [0, eps) on B
    for (int trial = 0; trial < 2000; ++trial) {
        const double r = 3.0 * std::uniform_real_distribution<double>()(rng);
        const Eigen::VectorXd z = at_radius(rng, e, r);
        CHECK(H.value(z) >= a * (r - 1.0) - 1e-14);
        if (r <= 1.0) {
            CHECK(H.value(z) >= 0.0);
            CHECK(H.value(z) < eps);
        }
    }
    // C^1 gluing at both shell ends
    const double w = H.width;
    for (double r0 : {1.0, 1.0 + w}) {
        CHECK(std::abs(H.phi(r0 + 1e-12) - H.phi(r0 - 1e-12)) < 1e-10);
        CHECK(std::abs(H.dphi(r0 + 1e-12) - H.dphi(r0 - 1e-12)) < 1e-6);
    }
    CHECK_THROWS_AS(quadratic_model(e, 0.0, eps), InputError);
    CHECK_THROWS_AS(quadratic_model(e, a, -1.0), InputError);
}

TEST_CASE("admissible profile")
{
    const EllipsoidSpec e({1.0, tau});
    CHECK_THROWS_AS(admissible_profile(e, 2.0), InputError);
    CHECK_THROWS_AS(admissible_profile(e, tau), InputError);
    CHECK_THROWS_AS(admissible_profile(EllipsoidSpec({7.0}), 2.0 * oracle::pi), InputError);
    CHECK_THROWS_AS(admissible_profile(e, 2.5, {2.0, 1e-3}), InputError);

    const HamiltonianSpec H = admissible_profile(e, 2.5, {0.02, 0.01});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::VectorXd z = at_radius(rng, e, u(rng));
        // radial derivative d/ds H(s z) at s = 1
        CHECK(H.gradient(z).dot(z) >= 0.0);
    }
    // negative and small on the inner part
    for (double r : {0.0, 0.5, 1.0}) {
        CHECK(H.phi(r) < 0.0);
        CHECK(std::abs(H.phi(r)) < 0.02);
    }
    // derivatives and the period map
    double prev = H.dphi(0.0);
    for (int i = 1; i <= 400; ++i) {
        const double r = 1.0 + 0.02 * i / 400.0;
        CHECK(H.dphi(r) >= prev);
        prev = H.dphi(r);
        const double h = 1e-7;
        CHECK((H.phi(r + h) - H.phi(r - h)) / (2 * h) == doctest::Approx(H.dphi(r)).epsilon(1e-6));
        if (r < 1.0 + H.width - 1e-6 && r > 1.0 + 1e-6)
            CHECK((H.dphi(r + h) - H.dphi(r - h)) / (2 * h) == doctest::Approx(H.d2phi(r)).epsilon(1e-5));
    }
    for (double T : {1.0, tau, 2.0}) CHECK(H.dphi(H.level_of_period(T)) == doctest::Approx(T).epsilon(1e-12));
    CHECK_THROWS_AS(H.level_of_period(3.0), InputError);
}

TEST_CASE("nearest exclusion")
{
    const EllipsoidSpec e({1.0, tau});
    const Exclusion x = nearest_exclusion(e, 6.3);
    CHECK(!x.spectral);
    CHECK(x.nearest == doctest::Approx(2.0 * oracle::pi));
    CHECK(nearest_exclusion(e, 2.01).nearest == doctest::Approx(2.0));
}
