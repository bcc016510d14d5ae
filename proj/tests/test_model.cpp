#include <doctest.h>

#include <cmath>

#include "phtk/model.hpp"
#include "phtk/scenario.hpp"

using namespace phtk;
using models::Model;
using models::ModelKind;
using models::ModelParams;

namespace {

// central finite differences of a closed-form map component
template <typename F>
double fd2(F f, linalg::Vec3 p, int i, int j, double h = 1e-5) {
    auto at = [&](double di, double dj) {
        linalg::Vec3 q = p;
        q[i] += di;
        q[j] += dj;
        return f(q);
    };
    if (i == j) return (at(h, 0) - 2 * at(0, 0) + at(-h, 0)) / (h * h);
    return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
}

}  // namespace

TEST_CASE("model_eval MODEL-A linear part and constant") {
    Model m(ModelKind::A, {});
    auto j = models::model_eval(m, {0.1, 0.1, 0.1}, 1);
    CHECK(j[0][0] == doctest::Approx(0.2));
    CHECK(j[1][0] == doctest::Approx(0.12));
    CHECK(j[2][0] == doctest::Approx(0.03));
    CHECK(j[0].coeff({1, 0, 0}) == doctest::Approx(2.0));
    CHECK(j[1].coeff({0, 1, 0}) == doctest::Approx(1.2));
    CHECK(j[2].coeff({0, 0, 1}) == doctest::Approx(0.3));
    CHECK(j[1].coeff({1, 0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("model_eval MODEL-B second order coefficient") {
    Model m(ModelKind::B, {});
    auto j = models::model_eval(m, {0, 0, 0}, 2);
    CHECK(j[1].coeff({1, 0, 1}) == doctest::Approx(0.1));
    // all other nonlinear coefficients vanish
    double other = 0.0;
    const auto& exps = jets::exponent_table(3, 2);
    for (std::size_t i = 0; i < j[1].size(); ++i) {
        int deg = exps[i][0] + exps[i][1] + exps[i][2];
        if (deg == 2 && !(exps[i][0] == 1 && exps[i][2] == 1)) other = std::max(other, std::fabs(j[1][i]));
    }
    CHECK(other == doctest::Approx(0.0));
}

TEST_CASE("model_eval MODEL-C cubic coefficients") {
    Model m(ModelKind::C, {});
    auto j = models::model_eval(m, {0, 0, 0}, 3);
    CHECK(j[1].coeff({2, 0, 1}) == doctest::Approx(0.0));
    CHECK(j[1].coeff({3, 0, 0}) == doctest::Approx(0.0));
    CHECK(j[1].coeff({1, 0, 1}) == doctest::Approx(0.1));
    // cross-check by finite differences of the closed form
    auto f2 = [&](linalg::Vec3 p) { return m.forward(p)[1]; };
    double fd = fd2(f2, {0, 0, 0}, 0, 2);
    CHECK(j[1].coeff({1, 0, 1}) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("jets match central finite differences at random points") {
    for (auto kind : {ModelKind::A, ModelKind::B, ModelKind::C}) {
        Model m(kind, {});
        // deterministic pseudo-random points
        for (int n = 0; n < 20; ++n) {
            double a = std::sin(12.3 * n + 1.0) * 0.8;
            double b = std::sin(45.6 * n + 2.0) * 0.8;
            double c = std::sin(78.9 * n + 3.0) * 0.8;
            linalg::Vec3 p{a, b, c};
            auto j = m.forward_jet(p, 3);
            for (int comp = 0; comp < 3; ++comp) {
                auto fc = [&](linalg::Vec3 q) { return m.forward(q)[comp]; };
                for (int i = 0; i < 3; ++i)
                    for (int jj = i; jj < 3; ++jj) {
                        jets::Exponent e{0, 0, 0};
                        e[i] += 1;
                        e[jj] += 1;
                        double coeff = j[comp].coeff(e) * (i == jj ? 2.0 : 1.0);
                        CHECK(coeff == doctest::Approx(fd2(fc, p, i, jj)).epsilon(1e-4).scale(1.0));
                    }
            }
        }
    }
}

TEST_CASE("inverse jets compose with forward jets to the identity") {
    for (auto kind : {ModelKind::A, ModelKind::B, ModelKind::C}) {
        Model m(kind, {});
        linalg::Vec3 p{0.3, -0.2, 0.4};
        auto fwd = m.forward_jet(p, 6);
        linalg::Vec3 fp = m.forward(p);
        auto inv = m.inverse_jet(fp, 6);
        // compose inv(fwd): feed offsets
        auto offs = fwd;
        for (int i = 0; i < 3; ++i) offs[i][0] = 0.0;
        for (int i = 0; i < 3; ++i) {
            auto comp = jets::compose(inv[i], offs);
            auto expect = jets::Jet::variable(3, 6, i, p[i]);
            for (std::size_t k = 0; k < comp.size(); ++k)
                CHECK(comp[k] == doctest::Approx(expect[k]).epsilon(1e-10));
        }
    }
}

TEST_CASE("out-of-box model_eval raises a domain error") {
    Model m(ModelKind::A, {});
    CHECK_THROWS_AS(models::model_eval(m, {1.5, 0, 0}, 2), models::DomainError);
}

TEST_CASE("scenario: minimal file and defaults") {
    auto s = scenario::parse_scenario("model = \"MODEL-A\"\n");
    CHECK(s.model_name == "MODEL-A");
    CHECK(s.params.l1 == doctest::Approx(2.0));
    CHECK(s.order == 8);
}

TEST_CASE("scenario: partial hyperbolicity rejection names the inequality") {
    std::string text = "model = \"MODEL-A\"\n[params]\nl3 = 1.5\n";
    try {
        scenario::parse_scenario(text);
        FAIL("expected rejection");
    } catch (const scenario::ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("|l3| < min(1, |l2|)") != std::string::npos);
    }
}

TEST_CASE("scenario: K >= ell+2 rejection") {
    std::string text = "model = \"MODEL-A\"\nell = 3\norder = 4\n";
    try {
        scenario::parse_scenario(text);
        FAIL("expected rejection");
    } catch (const scenario::ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("K >= ell+2") != std::string::npos);
    }
}

TEST_CASE("scenario: unknown keys are errors") {
    CHECK_THROWS_AS(scenario::parse_scenario("model = \"MODEL-A\"\nbogus = 3\n"),
                    scenario::ParseError);
}
