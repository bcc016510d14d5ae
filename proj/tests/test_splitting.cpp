#include <doctest.h>

#include <cmath>

#include "phtk/splitting.hpp"

using namespace phtk;
using models::Model;
using models::ModelKind;

TEST_CASE("MODEL-A frame at the fixed point is the coordinate frame") {
    Model m(ModelKind::A, {});
    auto f = splitting::compute_frame(m, {0, 0, 0}, 60);
    CHECK(std::fabs(f.e1[0]) == doctest::Approx(1.0));
    CHECK(std::fabs(f.e2[1]) == doctest::Approx(1.0));
    CHECK(std::fabs(f.e3[2]) == doctest::Approx(1.0));
    CHECK(f.lam1 == doctest::Approx(2.0));
    CHECK(f.lam2 == doctest::Approx(1.2));
    CHECK(f.lam3 == doctest::Approx(0.3));
    CHECK(f.residual <= 1e-9);
}

TEST_CASE("MODEL-B frame at 0 equals the coordinate frame") {
    Model m(ModelKind::B, {});
    auto f = splitting::compute_frame(m, {0, 0, 0}, 60);
    CHECK(f.lam1 == doctest::Approx(2.0));
    CHECK(f.lam2 == doctest::Approx(1.2));
    CHECK(f.lam3 == doctest::Approx(0.3));
    CHECK(std::fabs(f.e3[2]) == doctest::Approx(1.0));
}

TEST_CASE("MODEL-B frame at (0.2, 0, 0): e3 tilts by the orbitwise series") {
    Model m(ModelKind::B, {});
    auto f = splitting::compute_frame(m, {0.2, 0, 0}, 80);
    CHECK(f.residual <= 1e-9);
    // Oracle: the dominated direction of the lower 2x2 block of the orbit
    // product is (c t, 1)/|..| with c = eps/(l1 l3 - l2) = -1/6 (brute-force
    // pullback of a generic transverse vector along the forward orbit).
    double t = 0.2;
    double w = 0.0;  // component along e2 per unit e3
    for (int k = 40; k >= 0; --k) {
        double tk = t * std::pow(2.0, k);
        w = (0.3 * w - 0.1 * tk) / 1.2;
    }
    CHECK(w == doctest::Approx(-0.2 / 6.0).epsilon(1e-9));
    linalg::Vec3 oracle = linalg::normalized({0.0, w, 1.0});
    double dotp = std::fabs(linalg::dot(oracle, f.e3));
    CHECK(dotp == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lyapunov exponents on a MODEL-B segment") {
    // The segment stays in the region where the splitting is well
    // conditioned; further out the boundary slope drift of the unit-frame
    // multipliers dominates the estimate.
    Model m(ModelKind::B, {});
    linalg::Vec3 x0{0.05, 0.02, 0.0};
    auto seg = splitting::build_segment(m, x0, 3, 80);
    auto e = splitting::lyapunov_exponents(seg);
    CHECK(std::fabs(e.chi1 - std::log(2.0)) < 1e-3);
    CHECK(std::fabs(e.chi2 - std::log(1.2)) < 1e-3);
    CHECK(std::fabs(e.chi3 - std::log(0.3)) < 1e-3);

    // QR-factorized product oracle along the same orbit: accumulated
    // log-norms of the orthogonalized columns.
    linalg::Vec3 p = m.iterate(x0, -3);
    linalg::Vec3 q1{1, 0.3, 0.2}, q2{0.2, 1, 0.1}, q3{0.1, 0.2, 1};
    double s1 = 0, s2 = 0, s3 = 0;
    int n = 6;
    for (int k = 0; k < n; ++k) {
        auto d = m.forward_derivative(p);
        q1 = linalg::matvec(d, q1);
        q2 = linalg::matvec(d, q2);
        q3 = linalg::matvec(d, q3);
        double n1 = linalg::norm(q1);
        q1 = linalg::scale(1.0 / n1, q1);
        q2 = linalg::sub(q2, linalg::scale(linalg::dot(q1, q2), q1));
        double n2 = linalg::norm(q2);
        q2 = linalg::scale(1.0 / n2, q2);
        q3 = linalg::sub(q3, linalg::scale(linalg::dot(q1, q3), q1));
        q3 = linalg::sub(q3, linalg::scale(linalg::dot(q2, q3), q2));
        double n3 = linalg::norm(q3);
        q3 = linalg::scale(1.0 / n3, q3);
        s1 += std::log(n1);
        s2 += std::log(n2);
        s3 += std::log(n3);
        p = m.forward(p);
    }
    CHECK(std::fabs(e.chi1 - s1 / n) < 2e-2);
    CHECK(std::fabs(e.chi2 - s2 / n) < 2e-2);
    CHECK(std::fabs(e.chi3 - s3 / n) < 2e-2);
}

TEST_CASE("fixed-point segment has constant multipliers and exact telescoping") {
    Model m(ModelKind::C, {});
    auto seg = splitting::build_segment(m, {0, 0, 0}, 4, 60);
    auto e = splitting::lyapunov_exponents(seg);
    CHECK(e.chi1 == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(e.chi3 == doctest::Approx(std::log(0.3)).epsilon(1e-10));
    double p4 = seg.multiplier_product(1, 0, 4);
    double p22 = seg.multiplier_product(1, 0, 2) * seg.multiplier_product(1, 2, 2);
    CHECK(p4 == doctest::Approx(p22).epsilon(1e-14));
}

TEST_CASE("orientation continuity along a segment") {
    Model m(ModelKind::B, {});
    auto seg = splitting::build_segment(m, {0.05, 0.02, 0.0}, 4, 80);
    for (std::size_t k = 0; k + 1 < seg.frames.size(); ++k) {
        CHECK(linalg::dot(seg.frames[k].e1, seg.frames[k + 1].e1) > 0.0);
        CHECK(linalg::dot(seg.frames[k].e3, seg.frames[k + 1].e3) > 0.0);
    }
    // domination margins
    for (const auto& f : seg.frames) {
        CHECK(std::fabs(f.lam1 / f.lam2) > 1.2);
        CHECK(std::fabs(f.lam2 / f.lam3) > 1.2);
    }
}
