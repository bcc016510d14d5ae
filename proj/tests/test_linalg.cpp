#include <doctest.h>

#include <cmath>

#include "phtk/linalg.hpp"

using namespace phtk::linalg;

TEST_CASE("3x3 inverse and matvec") {
    Mat3 m{{{2, 0, 0}, {0.1, 1.2, 0.3}, {0, 0, 0.3}}};
    Mat3 mi = inverse(m);
    Mat3 id = matmul(m, mi);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(id[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("least squares recovers a quadratic") {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (int i = 0; i <= 20; ++i) {
        double x = -1.0 + 0.1 * i;
        a.push_back({1.0, x, x * x});
        b.push_back(0.5 - 1.5 * x + 2.25 * x * x);
    }
    auto c = lstsq(a, b);
    CHECK(c[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("poly_roots finds real and complex roots") {
    // (x - 1)(x + 2)(x^2 + 1) = x^4 + x^3 - x^2 + x - 2
    std::vector<double> c{-2, 1, -1, 1, 1};
    auto roots = poly_roots(c);
    REQUIRE(roots.size() == 4);
    int found1 = 0, found2 = 0, foundi = 0;
    for (auto z : roots) {
        if (std::abs(z - std::complex<double>(1, 0)) < 1e-8) ++found1;
        if (std::abs(z - std::complex<double>(-2, 0)) < 1e-8) ++found2;
        if (std::fabs(z.real()) < 1e-8 && std::fabs(std::fabs(z.imag()) - 1.0) < 1e-8) ++foundi;
    }
    CHECK(found1 == 1);
    CHECK(found2 == 1);
    CHECK(foundi == 2);
}

TEST_CASE("line fit") {
    std::vector<double> x{1, 2, 3, 4}, y{2.1, 4.1, 6.1, 8.1};
    auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(0.1));
}

TEST_CASE("chebyshev conversion") {
    std::vector<double> c{0.0, 0.0, 1.0};  // T_2 = 2x^2 - 1
    auto m = cheb_to_monomial(c);
    CHECK(m[0] == doctest::Approx(-1.0));
    CHECK(m[1] == doctest::Approx(0.0));
    CHECK(m[2] == doctest::Approx(2.0));
}
