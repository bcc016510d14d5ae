#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "phtk/model.hpp"
#include "phtk/splitting.hpp"

namespace phtk::nform {

using linalg::Vec3;
using models::DirectedModel;
using splitting::SplittingFrame;

class LeafError : public std::runtime_error {
public:
    explicit LeafError(const std::string& what) : std::runtime_error(what) {}
};

/// Normal-form parametrization of a strong leaf: a univariate curve jet
/// Phi with Phi(0) = base, Phi'(0) = e_i and the conjugacy
/// f(Phi_x(t)) = Phi_{f(x)}(lambda t).
struct LeafParam {
    Vec3 base{};
    int index = 1;        // 1 = expanding family, 3 = contracting family
    jets::JetMap curve;   // 3 ambient components, arity-1 jets in the leaf parameter
    double radius = 0.5;
    double lambda = 0.0;  // per-step multiplier entering the conjugacy
    double contraction = 0.0;  // last coefficient change of the transport iteration

    Vec3 eval(double t) const;
    Vec3 tangent(double t) const;
};

/// Transport iteration for the leaf jet at a fixed-point anchor: the jet is
/// the attracting fixed point of Phi <- f(Phi(t/lam)) (expanding family) or
/// Phi <- f^-1(Phi(lam t)) (contracting family), seeded linearly.
LeafParam build_leaf_param(const DirectedModel& m, const SplittingFrame& frame, int index,
                           int order, double radius, double tol = 1e-13, int max_iter = 300);

/// Leaf params at every point of an orbit segment, transported via the
/// conjugacy from a linear seed at the far end (never recomputed per point).
std::vector<LeafParam> build_leaf_params(const DirectedModel& m,
                                         const splitting::OrbitSegment& segment, int index,
                                         int order, double radius, double tol = 1e-13);

/// sup over a t-grid of || f(Phi_x(t)) - Phi_{f(x)}(lambda t) ||.
double conjugacy_residual(const DirectedModel& m, const LeafParam& at_x, const LeafParam& at_fx,
                          double radius, int grid = 41);

/// Dynamically scaled leaf piece W^{i,k}_rho(x), sampled uniformly in the
/// normal-form parameter.
struct ScaledLeaf {
    Vec3 base{};
    int index = 1;
    int k = 0;
    double rho = 1.0;
    double half_width = 0.0;  // parameter half-width rho / lam^(k) (index 1)
    std::vector<double> params;
    std::vector<Vec3> points;
    double endpoint_residual = 0.0;
};

ScaledLeaf scaled_leaf(const DirectedModel& m, const LeafParam& leaf, int k, double rho,
                       int count);

/// Leaf-adapted chart at the anchor: axes are the two strong leaves, the
/// second direction is e2. Chart coordinate 1 runs along the expanding leaf
/// of the directed system.
class BaseChart {
public:
    BaseChart(DirectedModel m, SplittingFrame frame, LeafParam phi1, LeafParam phi3, int order);

    const SplittingFrame& frame() const { return frame_; }
    const LeafParam& phi1() const { return phi1_; }
    const LeafParam& phi3() const { return phi3_; }
    const DirectedModel& system() const { return m_; }
    int order() const { return order_; }
    double lam1() const { return lam1_; }
    double lam2() const { return lam2_; }
    double lam3() const { return lam3_; }

    Vec3 from_chart(const Vec3& xi) const;
    Vec3 to_chart(const Vec3& p) const;  // Newton from the frame-linear seed

    jets::JetMap chart_jet(const Vec3& xi_center, int order) const;
    /// Jet of the inverse chart centered at from_chart(xi_center); the
    /// returned jets take ambient offsets and have constant term xi_center.
    jets::JetMap inverse_chart_jet(const Vec3& xi_center, int order) const;
    /// Conjugated map F = iota^-1 . f . iota as a jet at a chart center.
    jets::JetMap conjugated_jet(const Vec3& xi_center, int order) const;

private:
    DirectedModel m_;
    SplittingFrame frame_{};
    LeafParam phi1_{}, phi3_{};
    int order_ = 0;
    double lam1_ = 0.0, lam2_ = 0.0, lam3_ = 0.0;
    linalg::Mat3 frame_mat_{}, frame_inv_{};
    bool straight_axes_ = true;  // leaf jets linear: chart polynomials valid globally
};

/// Provider of conjugated-map jets along the unstable axis; charts with
/// exactly-polynomial layers can also implement it.
using AxisJetProvider = std::function<jets::JetMap(double t, int order)>;

/// Jets in the chart's third coordinate of the contracting-leaf family over
/// the expanding axis: xi(s) = (t + sum_j A[j] s^j, sum_j C[j] s^j, s).
/// A[0] = C[0] = 0 by the axis conditions; entries run j = 0..J.
struct FamilyJets {
    double t = 0.0;
    std::vector<double> A, C;
    double convergence = 0.0;   // seed-depth sensitivity
    bool from_formal = false;   // solved per-coefficient instead of by ladder
};

/// Solves the leaf-family hierarchy at one axis parameter by the backward
/// ladder along the expanding axis (seeded at depth where the contraction
/// falls below tol). Falls back to the per-coefficient (formal) solve when
/// the ladder forcing grows, which requires the axis data to be polynomial
/// at the jet scale; otherwise throws LeafError.
FamilyJets family_jets_at(const BaseChart& chart, const AxisJetProvider& fjet, double t, int J,
                          double tol = 1e-12, int max_depth = 60);

/// The same hierarchy solved once at the anchor with coefficient functions
/// represented as univariate polynomials in t (per-coefficient solve with a
/// resonance guard). Returns {A_j(t), C_j(t)} as arity-1 jets, j = 0..J.
struct FormalFamily {
    std::vector<jets::Jet> A, C;
    std::vector<std::string> resonances;  // zeroed modes, for the run metadata
};
FormalFamily formal_family(const BaseChart& chart, const AxisJetProvider& fjet, int J,
                           int poly_order);

/// Ambient samples of the contracting leaf through Phi1(t), from family jets.
std::vector<Vec3> contracting_leaf_samples(const BaseChart& chart, const FamilyJets& fam,
                                           double s_max, int count);

/// Pointwise pullback transport of the expanding leaf through Phi3(s0):
/// samples of W^1_window(y) labelled by the e1-frame coordinate, together
/// with chart coordinates (t', Qhat, Phat).
struct TransportedLeaf {
    Vec3 base{};
    double s0 = 0.0;
    std::vector<double> params;
    std::vector<Vec3> points;
    std::vector<Vec3> chart_coords;
    double convergence = 0.0;
};
TransportedLeaf expanding_leaf_through(const BaseChart& chart, double s0, double window,
                                       int count, double tol = 1e-12);

}  // namespace phtk::nform
