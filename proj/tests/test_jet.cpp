#include <doctest.h>

#include <cmath>

#include "phtk/jet.hpp"

using namespace phtk::jets;

namespace {

// Independent series oracle: Taylor coefficients of sin(a*t) at 0.
double sin_scaled_coeff(double a, int k) {
    if (k % 2 == 0) return 0.0;
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(a, k) / fact;
}

}  // namespace

TEST_CASE("graded-lex ordering is frozen") {
    const auto& e3 = exponent_table(3, 2);
    REQUIRE(e3.size() == 10);
    CHECK(e3[0] == Exponent{0, 0, 0});
    CHECK(e3[1] == Exponent{1, 0, 0});
    CHECK(e3[2] == Exponent{0, 1, 0});
    CHECK(e3[3] == Exponent{0, 0, 1});
    CHECK(e3[4] == Exponent{2, 0, 0});
    CHECK(e3[5] == Exponent{1, 1, 0});
    CHECK(e3[6] == Exponent{1, 0, 1});
    CHECK(e3[7] == Exponent{0, 2, 0});
    CHECK(e3[8] == Exponent{0, 1, 1});
    CHECK(e3[9] == Exponent{0, 0, 2});
}

TEST_CASE("ring laws hold coefficient-wise") {
    // a, b, c with fixed pseudo-random coefficients
    Jet a(2, 4), b(2, 4), c(2, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::sin(1.0 + 3.7 * static_cast<double>(i));
        b[i] = std::cos(2.0 + 1.3 * static_cast<double>(i));
        c[i] = std::sin(0.5 + 2.9 * static_cast<double>(i));
    }
    Jet lhs = (a + b) + c;
    Jet rhs = a + (b + c);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-15));
    Jet dl = a * (b + c);
    Jet dr = a * b + a * c;
    for (std::size_t i = 0; i < dl.size(); ++i) CHECK(dl[i] == doctest::Approx(dr[i]).epsilon(1e-13));
}

TEST_CASE("truncated product equals truncation of full product") {
    // (1 + t)^3 truncated at order 2 = 1 + 3t + 3t^2
    Jet one_plus_t = Jet::variable(1, 2, 0) + 1.0;
    Jet p = one_plus_t * one_plus_t * one_plus_t;
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(3.0));
    CHECK(p[2] == doctest::Approx(3.0));
}

TEST_CASE("jet_compose: binomial identity") {
    // outer = t^2, inner = 1 + t, K = 2 -> 1 + 2t + t^2
    Jet outer(1, 2);
    outer.set_coeff({2, 0, 0}, 1.0);
    Jet inner = Jet::variable(1, 2, 0) + 1.0;
    Jet r = compose1(outer, inner);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(2.0));
    CHECK(r[2] == doctest::Approx(1.0));
}

TEST_CASE("jet_compose: identity case") {
    Jet id = Jet::variable(1, 5, 0);
    Jet j(1, 5);
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = 0.3 * static_cast<double>(i) - 1.0;
    Jet r = compose1(id, j);
    // identity outer evaluated on jet j returns j
    for (std::size_t i = 0; i < j.size(); ++i) CHECK(r[i] == doctest::Approx(j[i]));
}

TEST_CASE("jet_compose: sin at 0 composed with 2t") {
    Jet outer = sin(Jet::variable(1, 5, 0));
    Jet inner = 2.0 * Jet::variable(1, 5, 0);
    Jet r = compose1(outer, inner);
    // oracle: term-by-term Taylor of sin(2t)
    for (int k = 0; k <= 5; ++k) CHECK(r[k] == doctest::Approx(sin_scaled_coeff(2.0, k)).epsilon(1e-12));
    // 2t - (4/3)t^3 + (4/15)t^5
    CHECK(r[1] == doctest::Approx(2.0));
    CHECK(r[3] == doctest::Approx(-4.0 / 3.0));
    CHECK(r[5] == doctest::Approx(4.0 / 15.0));
}

TEST_CASE("jet_eval examples") {
    Jet j(1, 2);
    j[0] = 1.0;
    j[1] = 2.0;
    j[2] = 1.0;
    CHECK(j.eval1(1.0) == doctest::Approx(4.0));

    Jet cube(1, 3);
    cube.set_coeff({3, 0, 0}, 1.0);
    CHECK(cube.eval1(0.5) == doctest::Approx(0.125));

    Jet e = exp(Jet::variable(1, 8, 0));
    CHECK(e.eval1(0.1) == doctest::Approx(std::exp(0.1)).epsilon(1e-12));
}

TEST_CASE("chain rule: derivative of composition") {
    // f(g) with f = sin, g = t^2 + 0.3 t: d(f.g) = cos(g) * g'
    Jet g(1, 6);
    g[1] = 0.3;
    g[2] = 1.0;
    Jet fg = sin(g);
    Jet lhs = fg.partial(0);
    Jet rhs = cos(g).truncated(5) * g.partial(0);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
}

TEST_CASE("compose matches finite differences for a 3d map") {
    // F(x) = (2x1, 1.2 x2 + 0.1 sin(x1) x3, 0.3 x3) at a generic point
    auto fmap = [](std::array<double, 3> x) {
        return std::array<double, 3>{2 * x[0], 1.2 * x[1] + 0.1 * std::sin(x[0]) * x[2], 0.3 * x[2]};
    };
    std::array<double, 3> p{0.2, -0.1, 0.35};
    Jet x1 = Jet::variable(3, 4, 0, p[0]);
    Jet x2 = Jet::variable(3, 4, 1, p[1]);
    Jet x3 = Jet::variable(3, 4, 2, p[2]);
    Jet f2 = 1.2 * x2 + 0.1 * (sin(x1) * x3);

    const double h = 1e-5;
    // central second difference d^2 f2 / dx1 dx3
    auto eval = [&](double d1, double d3) {
        return fmap({p[0] + d1, p[1], p[2] + d3})[1];
    };
    double fd = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4 * h * h);
    CHECK(f2.coeff({1, 0, 1}) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("invert_map on a 3d polynomial diffeo") {
    // F(x) = (2x1, 1.2x2 + 0.1 x1 x3, 0.3 x3): explicit inverse known
    Jet x1 = Jet::variable(3, 6, 0);
    Jet x2 = Jet::variable(3, 6, 1);
    Jet x3 = Jet::variable(3, 6, 2);
    JetMap f{2.0 * x1, 1.2 * x2 + 0.1 * (x1 * x3), 0.3 * x3};
    JetMap g = invert_map(f);
    JetMap idm = compose_map(g, f);
    JetMap expect = identity_map(3, 6);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < idm[c].size(); ++i)
            CHECK(idm[c][i] == doctest::Approx(expect[c][i]).epsilon(1e-12));
}

TEST_CASE("axis restriction and slices") {
    Jet x1 = Jet::variable(3, 4, 0);
    Jet x3 = Jet::variable(3, 4, 2);
    Jet j = 1.2 * x1 + 0.5 * (x1 * x3) + 2.0 * (x1 * x1 * x3);
    Jet r = slice_x1(j, 1);  // coefficient of x3^1 as function of x1
    CHECK(r[1] == doctest::Approx(0.5));
    CHECK(r[2] == doctest::Approx(2.0));
    Jet ax = axis_restrict(j, 0);
    CHECK(ax[1] == doctest::Approx(1.2));
    CHECK(ax.tail_abs(2) == doctest::Approx(0.0));
}

TEST_CASE("arity mismatch raises contract error") {
    Jet a(1, 3), b(2, 3);
    CHECK_THROWS_AS(a + b, ContractError);
    Jet outer(2, 3);
    std::array<Jet, 1> inner{Jet::variable(1, 3, 0)};
    CHECK_THROWS_AS(compose(outer, inner), ContractError);
}
