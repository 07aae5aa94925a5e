#include <catch_amalgamated.hpp>

#include "isoperi/curves.hpp"
#include "isoperi/random.hpp"
#include "support/generators.hpp"

using namespace isoperi;
using Catch::Approx;

TEST_CASE("discrete curve validation rejects malformed input") {
    Mat two(2, 2);
    two << 0, 0, 1, 1;
    CHECK_THROWS_AS(DiscreteCurve(2, two), InputError);

    Mat dup(3, 2);
    dup << 0, 0, 1, 0, 1, 0; // repeated vertex -> zero-length edge
    CHECK_THROWS_AS(DiscreteCurve(2, dup), InputError);

    Mat bad(3, 2);
    bad << 0, 0, 1, 0, 0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(DiscreteCurve(2, bad), InputError);

    Mat ok(3, 2);
    ok << 0, 0, 1, 0, 0, 1;
    CHECK_NOTHROW(DiscreteCurve(2, ok));
}

TEST_CASE("fourier curve validation enforces structure") {
    const Vec z2 = Vec::Zero(2), z4 = Vec::Zero(4);
    CHECK_THROWS_AS(FourierCurve(1, Vec::Zero(1), {{1, 1.0, AxisPlane(0, 1)}}), InputError);
    CHECK_THROWS_AS(FourierCurve(2, z4, {{1, 1.0, AxisPlane(0, 1)}}), InputError);
    CHECK_THROWS_AS(FourierCurve(2, z2, {}), InputError);
    CHECK_THROWS_AS(FourierCurve(2, z2, {{1, -1.0, AxisPlane(0, 1)}}), InputError);
    CHECK_THROWS_AS(FourierCurve(2, z2, {{1, 1.0, AxisPlane(0, 3)}}), InputError);
    // non-increasing frequencies
    CHECK_THROWS_AS(
        FourierCurve(4, z4, {{2, 1.0, AxisPlane(0, 1)}, {1, 1.0, AxisPlane(2, 3)}}),
        InputError);
    // overlapping planes
    CHECK_THROWS_AS(
        FourierCurve(4, z4, {{1, 1.0, AxisPlane(0, 1)}, {2, 1.0, AxisPlane(1, 2)}}),
        InputError);
    CHECK_NOTHROW(
        FourierCurve(4, z4, {{1, 1.0, AxisPlane(0, 1)}, {2, 1.0, AxisPlane(2, 3)}}));
}

TEST_CASE("sampling the unit circle at four vertices hits the axes") {
    const DiscreteCurve c = gen::unit_circle(4);
    REQUIRE(c.size() == 4);
    CHECK(c.vertices(0, 0) == Approx(1.0).margin(1e-15));
    CHECK(c.vertices(0, 1) == Approx(0.0).margin(1e-15));
    CHECK(c.vertices(1, 0) == Approx(0.0).margin(1e-15));
    CHECK(c.vertices(1, 1) == Approx(1.0).margin(1e-15));
    CHECK(c.vertices(2, 0) == Approx(-1.0).margin(1e-15));
    CHECK(c.vertices(3, 1) == Approx(-1.0).margin(1e-15));
}

TEST_CASE("sampling the double loop at eight vertices") {
    const DiscreteCurve c = gen::double_loop(8);
    REQUIRE(c.size() == 8);
    // k = 0: s = 0 -> (1, 0, 1, 0)
    CHECK((c.vertices.row(0) - Eigen::RowVector4d(1, 0, 1, 0)).norm() ==
          Approx(0.0).margin(1e-15));
    // k = 1: s = pi/4 -> (cos pi/4, sin pi/4, 0, 1)
    const double r = std::sqrt(0.5);
    CHECK((c.vertices.row(1) - Eigen::RowVector4d(r, r, 0, 1)).norm() ==
          Approx(0.0).margin(1e-15));
}

TEST_CASE("sampling requires enough vertices per frequency") {
    const FourierCurve circle(2, Vec::Zero(2), {{1, 1.0, AxisPlane(0, 1)}});
    CHECK_THROWS_AS(sample_fourier(circle, 2), InputError);
    CHECK_THROWS_AS(sample_fourier(circle, 3), InputError);
    CHECK_NOTHROW(sample_fourier(circle, 4));

    const FourierCurve dbl = gen::double_loop_fourier();
    CHECK_THROWS_AS(sample_fourier(dbl, 7), InputError);
    CHECK_NOTHROW(sample_fourier(dbl, 8));
}

TEST_CASE("edge tangents are unit vectors approaching the smooth tangent at O(1/N)") {
    const FourierCurve dbl = gen::double_loop_fourier();
    std::vector<double> errs;
    for (int N : {64, 128, 256, 512}) {
        const DiscreteCurve c = sample_fourier(dbl, N);
        const auto tangents = edge_tangents(c);
        REQUIRE(static_cast<int>(tangents.size()) == N);
        double worst = 0.0;
        for (int k = 0; k < N; ++k) {
            CHECK(tangents[static_cast<size_t>(k)].norm() == Approx(1.0).margin(1e-12));
            const double s = 2.0 * M_PI * k / N; // left endpoint of edge k
            const Vec smooth = dbl.derivative(s).normalized();
            worst = std::max(worst, (tangents[static_cast<size_t>(k)] - smooth).norm());
        }
        errs.push_back(worst);
    }
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
        const double ratio = errs[i] / errs[i + 1];
        CHECK(ratio > 1.8);
        CHECK(ratio < 2.2);
    }
}

TEST_CASE("fourier loops have constant speed, so acceleration is orthogonal to velocity") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + 2 * static_cast<int>(rng.bits() % 3);
        const FourierCurve c = gen::random_fourier_curve(rng, n);
        const double s = rng.uniform(0.0, 2.0 * M_PI);
        const Vec d1 = c.derivative(s), d2 = c.second_derivative(s);
        CHECK(std::abs(d1.dot(d2)) <= 1e-12 * d1.norm() * d2.norm() + 1e-15);
        // constant speed across parameter values
        CHECK(c.derivative(0.0).norm() == Approx(d1.norm()).margin(1e-12));
    }
}

TEST_CASE("analytic curvature of the standard loops") {
    const FourierCurve circle(2, Vec::Zero(2), {{1, 1.0, AxisPlane(0, 1)}});
    for (double s : {0.0, 1.0, 3.5}) {
        const Vec k = analytic_curvature(circle, s);
        CHECK(k.norm() == Approx(1.0).margin(1e-12));
        // curvature points back toward the center
        CHECK((k + circle.position(s)).norm() == Approx(0.0).margin(1e-12));
    }

    const FourierCurve dbl = gen::double_loop_fourier();
    const Vec k0 = analytic_curvature(dbl, 0.0);
    CHECK((k0 - (-0.2) * Vec{{1.0, 0.0, 4.0, 0.0}}).norm() == Approx(0.0).margin(1e-12));
    CHECK(dbl.derivative(0.25).squaredNorm() == Approx(5.0).margin(1e-12));
}

TEST_CASE("rigid motions act equivariantly on sampled curves and tangents") {
    Rng rng(22);
    const DiscreteCurve c = gen::double_loop(64);
    const Mat r = random_rotation(4, rng);
    DiscreteCurve rotated(4, c.vertices * r.transpose());
    const auto t0 = edge_tangents(c);
    const auto t1 = edge_tangents(rotated);
    for (size_t k = 0; k < t0.size(); ++k)
        CHECK((t1[k] - r * t0[k]).norm() == Approx(0.0).margin(1e-12));

    // translation shifts every vertex, leaving tangents untouched
    DiscreteCurve shifted = c;
    shifted.vertices.rowwise() += Eigen::RowVector4d(1.0, -2.0, 0.5, 3.0);
    const auto t2 = edge_tangents(shifted);
    for (size_t k = 0; k < t0.size(); ++k)
        CHECK((t2[k] - t0[k]).norm() <= 1e-12);
}
