#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phtk/nform.hpp"

namespace phtk::charts {

using jets::Jet;
using jets::JetMap;
using linalg::Vec3;
using nform::BaseChart;

class ChartError : public std::runtime_error {
public:
    explicit ChartError(const std::string& what) : std::runtime_error(what) {}
};

/// x2 <- x2 + w(x1) * x3^power, the coordinate change of the chart
/// improvement and of the off-diagonal polynomialization.
struct ShearLayer {
    Jet w;  // univariate polynomial jet in x1
    int power = 1;
};

/// (x2, x3) <- B(x1) (x2, x3) with B(0) = I, from the cocycle trivialization.
struct LinearMixLayer {
    Jet b11, b12, b21, b22;  // univariate jets in x1
};

using Layer = std::variant<ShearLayer, LinearMixLayer>;

/// Two-dimensional linear cocycle over the expanding axis with jet-valued
/// entries [[a, r], [q, b]](t), periodic over an orbit of the given period.
struct CocycleData {
    std::vector<Jet> a, r, q, b;  // one entry set per orbit point
    std::vector<double> lam1;     // base expansion per step
    int period() const { return static_cast<int>(a.size()); }
};

struct TriangularCocycle {
    CocycleData data;
    /// accumulated basis change per orbit point, columns = new basis in old
    std::vector<std::array<Jet, 4>> basis;  // {b11, b12, b21, b22}
    /// shear functions of the last polynomialization step (xi' = u xi + xi_perp)
    std::vector<Jet> u_shear;
    int d0 = -1;
    double offdiag_tail = 0.0;
    std::vector<std::string> notes;
};

/// Series solve of the triangularization equations; kills the lower-left
/// entry. Requires separated exponents |a| > |b| on the diagonal.
TriangularCocycle triangularize(const CocycleData& input, double term_tol = 1e-14,
                                int max_terms = 500);

/// Rescales the basis so the diagonal entries become the constants a(0), b(0).
TriangularCocycle constant_diagonal(TriangularCocycle tc, double term_tol = 1e-14,
                                    int max_terms = 500);

/// Degree bound d0 = floor((log a - log b)/chi1) + 1 of the off-diagonal
/// polynomial normal form.
int offdiagonal_degree_bound(double alpha, double beta, double chi1);

/// Splits the off-diagonal at degree d0 and removes the tail by the shear
/// series; afterwards the off-diagonal is polynomial with tail <= tail_tol.
TriangularCocycle polynomialize_offdiagonal(TriangularCocycle tc, double chi1,
                                            double tail_tol = 1e-8, double term_tol = 1e-14,
                                            int max_terms = 500);

/// Residuals of the unstable-chart conditions (Def-style axis identities),
/// evaluated on a parameter grid along the expanding axis.
struct ChartConditionReport {
    double axis_conjugacy = 0.0;   // F(t,0,0) = (lam1 t, 0, 0)
    double d2F2_const = 0.0;       // d2 F2(t,0,0) - lam2
    double d3F3_const = 0.0;       // d3 F3(t,0,0) - lam3
    double d2F3_zero = 0.0;        // d2 F3(t,0,0)
    double offdiag_tail = 0.0;     // coefficients of d3F2(t,0,0) beyond d0
    int d0 = -1;
};

/// Polynomial chart built over a leaf-adapted base chart by a stack of
/// coordinate-change layers. Layers are exact polynomial maps, so the chart
/// and its inverse evaluate anywhere the base chart does.
class Chart {
public:
    Chart(BaseChart base, int order);

    const BaseChart& base() const { return base_; }
    int order() const { return order_; }
    int goodness() const { return goodness_; }
    const std::vector<Layer>& layers() const { return layers_; }
    double lam1() const { return base_.lam1(); }
    double lam2() const { return base_.lam2(); }
    double lam3() const { return base_.lam3(); }

    void push_layer(Layer layer);
    void set_goodness(int g) { goodness_ = g; }

    Vec3 from_chart(const Vec3& xi) const;
    Vec3 to_chart(const Vec3& p) const;

    JetMap chart_jet(const Vec3& xi_center, int order) const;
    JetMap conjugated_jet(const Vec3& xi_center, int order) const;

    /// Applies the inverse layer stack to a curve given in base-chart
    /// coordinates (three univariate jets in the curve parameter).
    JetMap curve_to_chart(const JetMap& base_curve) const;

    /// d3^(k) F_2(t,0,0) / k! as a univariate polynomial in t, from the
    /// anchor-centered conjugated jet.
    Jet transverse_data(int k) const;

    ChartConditionReport check_conditions(double d0_tail_tol = 1e-8, int grid = 41) const;

private:
    BaseChart base_;
    int order_;
    int goodness_ = -1;
    std::vector<Layer> layers_;
    mutable std::optional<JetMap> anchor_fjet_;  // cache

    JetMap layer_stack_jet(const Vec3& xi_center, int order) const;
    Vec3 layer_stack_forward(const Vec3& xi) const;
    Vec3 layer_stack_inverse(const Vec3& y) const;
};

/// Quotient cocycle of the chart-conjugated derivative along the expanding
/// axis: [[d2F2, d3F2], [d2F3, d3F3]](t, 0, 0).
CocycleData quotient_cocycle(const Chart& chart);

/// 0-good chart construction: leaf-adapted base chart, cocycle
/// triangularization and constant-diagonal layers, then the off-diagonal
/// polynomialization shear.
Chart build_unstable_chart(const BaseChart& base, int order, double tail_tol = 1e-8);

/// The (ell+1)-jet cocycle [[lam2, d3^(ell+1) F2(t,0,0)], [0, lam3^(ell+1)]];
/// verifies the lower-order vanishing required for it to be well defined.
CocycleData elljet_cocycle(const Chart& chart, int ell, double vanish_tol = 1e-7);

/// Chart improvement: compose with psi(t,u,s) = (t, u + T(t) s^(ell+1), s)
/// and re-polynomialize the next-level data. T must vanish at 0.
Chart improve_chart(const Chart& chart, const Jet& template_poly, int ell,
                    double tail_tol = 1e-8);

}  // namespace phtk::charts
