#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "absim/errors.hpp"
#include "absim/zernike.hpp"
#include "test_util.hpp"

using namespace absim;

namespace {

// Independent oracle: the Wyant table written out polynomial by polynomial,
// kept deliberately separate from the general radial-sum implementation.
double wyant_table(int j, double r, double t) {
    const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r, r6 = r4 * r2;
    switch (j) {
        case 0: return 1.0;
        case 1: return r * std::cos(t);
        case 2: return r * std::sin(t);
        case 3: return 2.0 * r2 - 1.0;
        case 4: return r2 * std::cos(2 * t);
        case 5: return r2 * std::sin(2 * t);
        case 6: return (3.0 * r2 - 2.0) * r * std::cos(t);
        case 7: return (3.0 * r2 - 2.0) * r * std::sin(t);
        case 8: return 6.0 * r4 - 6.0 * r2 + 1.0;
        case 9: return r3 * std::cos(3 * t);
        case 10: return r3 * std::sin(3 * t);
        case 11: return (4.0 * r2 - 3.0) * r2 * std::cos(2 * t);
        case 12: return (4.0 * r2 - 3.0) * r2 * std::sin(2 * t);
        case 13: return (10.0 * r4 - 12.0 * r2 + 3.0) * r * std::cos(t);
        case 14: return (10.0 * r4 - 12.0 * r2 + 3.0) * r * std::sin(t);
        case 15: return 20.0 * r6 - 30.0 * r4 + 12.0 * r2 - 1.0;
        case 16: return r4 * std::cos(4 * t);
        case 17: return r4 * std::sin(4 * t);
        case 18: return (5.0 * r2 - 4.0) * r3 * std::cos(3 * t);
        default: return 0.0;
    }
}

}  // namespace

TEST_CASE("wyant term decomposition") {
    CHECK(wyant_term(0).n == 0);
    CHECK(wyant_term(3).n == 2);
    CHECK(wyant_term(3).m == 0);
    CHECK(wyant_term(4).n == 2);
    CHECK(wyant_term(4).m == 2);
    CHECK_FALSE(wyant_term(4).sine);
    CHECK(wyant_term(5).sine);
    CHECK(wyant_term(8).n == 4);
    CHECK(wyant_term(8).m == 0);
    CHECK(wyant_term(13).n == 5);
    CHECK(wyant_term(13).m == 1);
    CHECK(wyant_term(18).n == 5);
    CHECK(wyant_term(18).m == 3);
    CHECK_THROWS_AS(wyant_term(19), ConfigError);
    CHECK_THROWS_AS(wyant_term(-1), ConfigError);
}

TEST_CASE("matches the explicit Wyant table on a dense grid") {
    for (int j = 0; j <= kZernikeMaxIndex; ++j) {
        for (int ir = 0; ir <= 10; ++ir) {
            const double rho = ir / 10.0;
            for (int it = 0; it < 16; ++it) {
                const double theta = 2.0 * M_PI * it / 16.0 - M_PI;
                CHECK(zernike_eval(j, rho, theta) ==
                      doctest::Approx(wyant_table(j, rho, theta)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("fixed-point values") {
    CHECK(zernike_eval(0, 0.3, 1.2) == doctest::Approx(1.0));    // piston is constant
    CHECK(zernike_eval(0, 0.9, -2.0) == doctest::Approx(1.0));
    CHECK(zernike_eval(8, 0.0, 0.0) == doctest::Approx(1.0));    // 6r^4 - 6r^2 + 1 at 0
    CHECK(zernike_eval(4, 1.0, M_PI / 4) == doctest::Approx(0.0));
    CHECK(zernike_eval(9, 1.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("edge normalization: unit value on the rho=1 crest") {
    for (int j = 0; j <= kZernikeMaxIndex; ++j) {
        const WyantTerm t = wyant_term(j);
        // Cosine and radial terms peak at theta = 0; sine terms at pi/(2m).
        const double theta = t.m > 0 && t.sine ? M_PI / (2.0 * t.m) : 0.0;
        CHECK(zernike_eval(j, 1.0, theta) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pairwise orthogonality over the 512-point disk quadrature") {
    testutil::DiskQuadrature quad;
    const int lo = 4, hi = kZernikeMaxIndex;
    std::vector<std::vector<double>> samples;
    for (int j = lo; j <= hi; ++j) {
        std::vector<double> vals(quad.rho.size());
        for (std::size_t k = 0; k < quad.rho.size(); ++k) {
            vals[k] = zernike_eval(j, quad.rho[k], quad.theta[k]);
        }
        samples.push_back(std::move(vals));
    }
    for (int a = lo; a <= hi; ++a) {
        for (int b = a + 1; b <= hi; ++b) {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t k = 0; k < quad.rho.size(); ++k) {
                const double va = samples[a - lo][k];
                const double vb = samples[b - lo][k];
                dot += quad.weight[k] * va * vb;
                na += quad.weight[k] * va * va;
                nb += quad.weight[k] * vb * vb;
            }
            CHECK(std::abs(dot) <= 1e-2 * std::sqrt(na * nb));
        }
    }
}

TEST_CASE("rho outside the unit disk is rejected") {
    CHECK_THROWS_AS(zernike_eval(4, 1.5, 0.0), ConfigError);
    CHECK_THROWS_AS(zernike_eval(4, -0.1, 0.0), ConfigError);
}
