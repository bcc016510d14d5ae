#include "phtk/nform.hpp"

#include <cmath>
#include <sstream>

namespace phtk::nform {

using jets::Jet;
using jets::JetMap;
using linalg::Mat3;

namespace {

Vec3 eval_curve(const JetMap& curve, double t) {
    return {curve[0].eval1(t), curve[1].eval1(t), curve[2].eval1(t)};
}

// One transport step of the expanding-family jet: Phi <- f(Phi(t/lam)),
// recentred so Phi(0) = new base.
JetMap transport_expanding(const DirectedModel& m, const JetMap& curve, double lam, int order) {
    Jet rescaled = Jet::variable(1, order, 0) * (1.0 / lam);
    JetMap shrunk;
    for (const Jet& c : curve) shrunk.push_back(jets::compose1(c, rescaled));
    Vec3 p = eval_curve(curve, 0.0);
    JetMap fj = m.step_jet(p, order);
    // f expects offsets from p
    JetMap offs = shrunk;
    for (int i = 0; i < 3; ++i) offs[i][0] = 0.0;
    JetMap local;
    for (int i = 0; i < 3; ++i) {
        Jet comp = jets::compose(fj[i], offs);
        local.push_back(comp);
    }
    return local;
}

JetMap transport_contracting(const DirectedModel& m, const JetMap& curve, double lam, int order) {
    Jet rescaled = Jet::variable(1, order, 0) * lam;
    JetMap shrunk;
    for (const Jet& c : curve) shrunk.push_back(jets::compose1(c, rescaled));
    Vec3 p = eval_curve(curve, 0.0);
    JetMap fj = m.back_jet(p, order);
    JetMap offs = shrunk;
    for (int i = 0; i < 3; ++i) offs[i][0] = 0.0;
    JetMap local;
    for (int i = 0; i < 3; ++i) local.push_back(jets::compose(fj[i], offs));
    return local;
}

double map_delta(const JetMap& a, const JetMap& b) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < a[i].size(); ++k)
            d = std::max(d, std::fabs(a[i][k] - b[i][k]));
    return d;
}

JetMap linear_seed(const Vec3& base, const Vec3& dir, int order) {
    JetMap c;
    for (int i = 0; i < 3; ++i) {
        Jet ji(1, order);
        ji[0] = base[i];
        if (order >= 1) ji[1] = dir[i];
        c.push_back(ji);
    }
    return c;
}

}  // namespace

Vec3 LeafParam::eval(double t) const { return eval_curve(curve, t); }

Vec3 LeafParam::tangent(double t) const {
    return {curve[0].partial(0).eval1(t), curve[1].partial(0).eval1(t),
            curve[2].partial(0).eval1(t)};
}

LeafParam build_leaf_param(const DirectedModel& m, const SplittingFrame& frame, int index,
                           int order, double radius, double tol, int max_iter) {
    if (index != 1 && index != 3) throw LeafError("leaf index must be 1 or 3");
    const Vec3 dir = (index == 1) ? frame.e1 : frame.e3;
    const double lam = (index == 1) ? frame.lam1 : frame.lam3;
    // Fixed-point check: the transport iteration below is stationary.
    Vec3 fx = m.step(frame.x);
    double move = linalg::norm(linalg::sub(fx, frame.x));
    if (move > 1e-10)
        throw LeafError("build_leaf_param: anchor is not a fixed point of the directed map");

    JetMap curve = linear_seed(frame.x, dir, order);
    double delta = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        JetMap next = (index == 1) ? transport_expanding(m, curve, lam, order)
                                   : transport_contracting(m, curve, lam, order);
        // pin the normalization exactly
        for (int i = 0; i < 3; ++i) {
            next[i][0] = frame.x[i];
            if (order >= 1) next[i][1] = dir[i];
        }
        delta = map_delta(next, curve);
        curve = std::move(next);
        if (delta < tol) break;
    }
    if (delta >= 1e-8) {
        std::ostringstream os;
        os << "build_leaf_param: transport iteration failed to contract (last change " << delta
           << ")";
        throw LeafError(os.str());
    }
    LeafParam lp;
    lp.base = frame.x;
    lp.index = index;
    lp.curve = curve;
    lp.radius = radius;
    lp.lambda = lam;
    lp.contraction = delta;
    return lp;
}

std::vector<LeafParam> build_leaf_params(const DirectedModel& m,
                                         const splitting::OrbitSegment& segment, int index,
                                         int order, double radius, double tol) {
    const int n = static_cast<int>(segment.points.size());
    std::vector<LeafParam> out(n);
    // Stationary segment (anchored at a fixed point): one solve serves all.
    bool stationary = true;
    for (int k = 0; k + 1 < n; ++k)
        if (linalg::norm(linalg::sub(segment.points[k + 1], segment.points[k])) > 1e-10)
            stationary = false;
    if (stationary) {
        LeafParam lp = build_leaf_param(m, segment.base(), index, order, radius, tol);
        for (int k = 0; k < n; ++k) out[k] = lp;
        return out;
    }
    // Transport from a linear seed at the far end; expanding leaves move
    // forward along the segment, contracting leaves backward.
    if (index == 1) {
        JetMap curve = linear_seed(segment.points[0], segment.frames[0].e1, order);
        for (int k = 0; k < n; ++k) {
            if (k > 0) {
                curve = transport_expanding(m, curve, segment.frames[k - 1].lam1, order);
                for (int i = 0; i < 3; ++i) curve[i][0] = segment.points[k][i];
            }
            LeafParam lp;
            lp.base = segment.points[k];
            lp.index = 1;
            lp.curve = curve;
            lp.radius = radius;
            lp.lambda = segment.frames[k].lam1;
            out[k] = lp;
        }
    } else {
        JetMap curve = linear_seed(segment.points[n - 1], segment.frames[n - 1].e3, order);
        for (int k = n - 1; k >= 0; --k) {
            if (k < n - 1) {
                curve = transport_contracting(m, curve, segment.frames[k].lam3, order);
                for (int i = 0; i < 3; ++i) curve[i][0] = segment.points[k][i];
            }
            LeafParam lp;
            lp.base = segment.points[k];
            lp.index = 3;
            lp.curve = curve;
            lp.radius = radius;
            lp.lambda = segment.frames[k].lam3;
            out[k] = lp;
        }
    }
    return out;
}

double conjugacy_residual(const DirectedModel& m, const LeafParam& at_x, const LeafParam& at_fx,
                          double radius, int grid) {
    double worst = 0.0;
    for (int i = 0; i < grid; ++i) {
        double t = -radius + 2.0 * radius * i / (grid - 1);
        Vec3 lhs = m.step(at_x.eval(t));
        Vec3 rhs = at_fx.eval(at_x.lambda * t);
        worst = std::max(worst, linalg::norm(linalg::sub(lhs, rhs)));
    }
    return worst;
}

ScaledLeaf scaled_leaf(const DirectedModel& m, const LeafParam& leaf, int k, double rho,
                       int count) {
    if (k < 0) throw LeafError("scaled_leaf: scale k must be >= 0");
    if (rho > leaf.radius + 1e-12)
        throw LeafError("scaled_leaf: scale too deep for validity radius");
    ScaledLeaf s;
    s.base = leaf.base;
    s.index = leaf.index;
    s.k = k;
    s.rho = rho;
    double lam_k = std::pow(std::fabs(leaf.lambda), k);
    // W^{1,k}_rho(x) = f^{-k}(W^1_rho(f^k x)): parameter half-width rho/lam^k.
    // W^{3,k}_rho(x) = f^{k}(W^3_rho(f^-k x)): half-width rho * lam3^k.
    s.half_width = (leaf.index == 1) ? rho / lam_k : rho * lam_k;
    for (int i = 0; i < count; ++i) {
        double t = -s.half_width + 2.0 * s.half_width * i / (count - 1);
        s.params.push_back(t);
        s.points.push_back(leaf.eval(t));
    }
    // Endpoint check: f^{+-k} of the endpoints lands at parameter +-rho of
    // the shifted-base leaf (stationary anchor: the same leaf).
    Vec3 end = s.points.back();
    Vec3 mapped = (leaf.index == 1) ? m.iterate(end, k) : m.iterate(end, -k);
    double expect_param = (leaf.index == 1) ? s.half_width * std::pow(leaf.lambda, k)
                                            : s.half_width / std::pow(leaf.lambda, k);
    Vec3 expect = leaf.eval(expect_param);
    s.endpoint_residual = linalg::norm(linalg::sub(mapped, expect));
    return s;
}

BaseChart::BaseChart(DirectedModel m, SplittingFrame frame, LeafParam phi1, LeafParam phi3,
                     int order)
    : m_(m), frame_(frame), phi1_(std::move(phi1)), phi3_(std::move(phi3)), order_(order) {
    lam1_ = frame_.lam1;
    lam2_ = frame_.lam2;
    lam3_ = frame_.lam3;
    for (int i = 0; i < 3; ++i) {
        frame_mat_[i][0] = frame_.e1[i];
        frame_mat_[i][1] = frame_.e2[i];
        frame_mat_[i][2] = frame_.e3[i];
    }
    frame_inv_ = linalg::inverse(frame_mat_);
    double nl = std::max(phi1_.curve[0].tail_abs(2),
                         std::max(phi1_.curve[1].tail_abs(2), phi1_.curve[2].tail_abs(2)));
    nl = std::max(nl, std::max(phi3_.curve[0].tail_abs(2),
                               std::max(phi3_.curve[1].tail_abs(2), phi3_.curve[2].tail_abs(2))));
    straight_axes_ = nl < 1e-10;
}

Vec3 BaseChart::from_chart(const Vec3& xi) const {
    Vec3 p1 = phi1_.eval(xi[0]);
    Vec3 p3 = phi3_.eval(xi[2]);
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = p1[i] + p3[i] - frame_.x[i] + xi[1] * frame_.e2[i];
    return r;
}

Vec3 BaseChart::to_chart(const Vec3& p) const {
    // Newton from the frame-linear seed; exact in one step for straight axes.
    Vec3 xi = linalg::matvec(frame_inv_, linalg::sub(p, frame_.x));
    for (int it = 0; it < 50; ++it) {
        Vec3 r = linalg::sub(from_chart(xi), p);
        double err = linalg::norm(r);
        if (err < 1e-13) break;
        Mat3 j{};
        Vec3 d1 = phi1_.tangent(xi[0]);
        Vec3 d3 = phi3_.tangent(xi[2]);
        for (int i = 0; i < 3; ++i) {
            j[i][0] = d1[i];
            j[i][1] = frame_.e2[i];
            j[i][2] = d3[i];
        }
        Vec3 step = linalg::matvec(linalg::inverse(j), r);
        xi = linalg::sub(xi, step);
    }
    return xi;
}

jets::JetMap BaseChart::chart_jet(const Vec3& xi_center, int order) const {
    if (!straight_axes_ && (std::fabs(xi_center[0]) > 1.5 || std::fabs(xi_center[2]) > 1.5))
        throw LeafError("chart_jet: curved leaf jets evaluated beyond validity radius");
    Jet x1 = Jet::variable(3, order, 0, 0.0);
    Jet x2 = Jet::variable(3, order, 1, 0.0);
    Jet x3 = Jet::variable(3, order, 2, 0.0);
    JetMap out;
    for (int i = 0; i < 3; ++i) {
        // Phi1(c1 + x1) + Phi3(c3 + x3) - anchor + (c2 + x2) e2
        Jet p1 = jets::compose1(phi1_.curve[i], Jet::variable(1, order, 0, xi_center[0]));
        Jet p3 = jets::compose1(phi3_.curve[i], Jet::variable(1, order, 0, xi_center[2]));
        Jet t1 = jets::compose(p1.truncated(order), std::array<Jet, 1>{x1});
        Jet t3 = jets::compose(p3.truncated(order), std::array<Jet, 1>{x3});
        out.push_back(t1 + t3 - frame_.x[i] + (x2 + xi_center[1]) * frame_.e2[i]);
    }
    return out;
}

jets::JetMap BaseChart::inverse_chart_jet(const Vec3& xi_center, int order) const {
    JetMap fwd = chart_jet(xi_center, order);
    Vec3 image{fwd[0][0], fwd[1][0], fwd[2][0]};
    JetMap centered = fwd;
    for (int i = 0; i < 3; ++i) centered[i][0] = 0.0;
    JetMap inv = jets::invert_map(centered);
    for (int i = 0; i < 3; ++i) inv[i][0] = xi_center[i];
    (void)image;
    return inv;
}

jets::JetMap BaseChart::conjugated_jet(const Vec3& xi_center, int order) const {
    JetMap iota = chart_jet(xi_center, order);
    Vec3 p{iota[0][0], iota[1][0], iota[2][0]};
    JetMap f = m_.step_jet(p, order);
    Vec3 fp{f[0][0], f[1][0], f[2][0]};
    Vec3 target_center = to_chart(fp);
    JetMap inv = inverse_chart_jet(target_center, order);

    // F = inv(f(iota)) with offsets threaded through each stage.
    JetMap iota_off = iota;
    for (int i = 0; i < 3; ++i) iota_off[i][0] = 0.0;
    JetMap f_of_iota;
    for (int i = 0; i < 3; ++i) f_of_iota.push_back(jets::compose(f[i], iota_off));
    for (int i = 0; i < 3; ++i) f_of_iota[i][0] -= fp[i];
    JetMap out;
    for (int i = 0; i < 3; ++i) out.push_back(jets::compose(inv[i], f_of_iota));
    return out;
}

namespace {

struct LadderPoint {
    double tau;
    JetMap fjet;  // conjugated-map jet at (tau, 0, 0), order J
};

// Solves all orders 1..J at tau_k given the solved coefficients at tau_{k+1}
// = lam1 * tau_k. A and C are written in place (entries 0..J).
void solve_point(const LadderPoint& lp, const std::vector<double>& A_next,
                 const std::vector<double>& C_next, double lam1_tau, std::vector<double>& A,
                 std::vector<double>& C, int J) {
    const JetMap& F = lp.fjet;
    const int order = F[0].order();
    A.assign(J + 1, 0.0);
    C.assign(J + 1, 0.0);
    for (int j = 1; j <= J; ++j) {
        // Curve jets with orders < j filled in, order j set to zero.
        Jet x1(1, order), x2(1, order), x3(1, order);
        x1[0] = lp.tau;
        if (order >= 1) x3[1] = 1.0;
        for (int i = 1; i < j; ++i) {
            x1[i] = A[i];
            x2[i] = C[i];
        }
        // Convert to 3-variable offsets for composition with F.
        std::array<Jet, 3> offs{x1, x2, x3};
        offs[0][0] = 0.0;
        JetMap img;
        for (int c = 0; c < 3; ++c) img.push_back(jets::compose(F[c], offs));
        // shat(s) = third component as a function of s, with zero unknowns
        Jet shat = img[2];
        shat[0] = 0.0;

        // Known target-side curve composed with shat.
        Jet X1(1, order), X2(1, order);
        X1[0] = F[0][0];  // F(tau,0,0) first coordinate = lam1 * tau
        for (int i = 1; i <= std::min(order, J); ++i) {
            if (i < static_cast<int>(A_next.size())) X1[i] = A_next[i];
            if (i < static_cast<int>(C_next.size())) X2[i] = C_next[i];
        }
        Jet rhs1 = jets::compose1(X1, shat);
        Jet rhs2 = jets::compose1(X2, shat);

        // Partial-derivative channels of the unknowns.
        jets::Exponent e1{1, 0, 0}, e2{0, 1, 0};
        double f11 = F[0].coeff(e1), f12 = F[0].coeff(e2);
        double f21 = F[1].coeff(e1), f22 = F[1].coeff(e2);
        double f31 = F[2].coeff(e1), f32 = F[2].coeff(e2);
        double A1n = (1 < static_cast<int>(A_next.size())) ? A_next[1] : 0.0;
        double C1n = (1 < static_cast<int>(C_next.size())) ? C_next[1] : 0.0;

        double K1 = img[0][j], K2 = img[1][j];
        double R1 = rhs1[j], R2 = rhs2[j];
        // [f11 - A1n f31, f12 - A1n f32][Aj]   [R1 - K1]
        // [f21 - C1n f31, f22 - C1n f32][Cj] = [R2 - K2]
        double m11 = f11 - A1n * f31, m12 = f12 - A1n * f32;
        double m21 = f21 - C1n * f31, m22 = f22 - C1n * f32;
        double det = m11 * m22 - m12 * m21;
        if (std::fabs(det) < 1e-12)
            throw LeafError("family_jets_at: degenerate transversal system");
        double b1 = R1 - K1, b2 = R2 - K2;
        A[j] = (m22 * b1 - m12 * b2) / det;
        C[j] = (m11 * b2 - m21 * b1) / det;
    }
    (void)lam1_tau;
}

FamilyJets run_ladder(const BaseChart& chart, const AxisJetProvider& fjet, double t, int J,
                      int depth) {
    std::vector<LadderPoint> pts(depth + 1);
    double tau = t;
    for (int k = 0; k <= depth; ++k) {
        pts[k].tau = tau;
        pts[k].fjet = fjet(tau, J);
        tau *= chart.lam1();
    }
    std::vector<double> A_next(J + 1, 0.0), C_next(J + 1, 0.0), A, C;
    for (int k = depth; k >= 0; --k) {
        solve_point(pts[k], A_next, C_next, pts[k].tau * chart.lam1(), A, C, J);
        A_next = A;
        C_next = C;
    }
    FamilyJets fam;
    fam.t = t;
    fam.A = A;
    fam.C = C;
    return fam;
}

}  // namespace

FamilyJets family_jets_at(const BaseChart& chart, const AxisJetProvider& fjet, double t, int J,
                          double tol, int max_depth) {
    // Depth from the slowest transversal contraction |lam3| / |lam2|.
    double ratio = std::fabs(chart.lam3() / chart.lam2());
    int depth = std::min(max_depth, static_cast<int>(std::ceil(std::log(tol) / std::log(ratio))) + 4);

    // Detect forcing growth: if the off-diagonal data grows so fast along the
    // ladder that the seeded solve cannot contract, use the formal solve.
    double g0 = 0.0, g1 = 0.0;
    {
        JetMap f_near = fjet(t, 2);
        JetMap f_far = fjet(t * std::pow(chart.lam1(), 6), 2);
        jets::Exponent e3{0, 0, 1};
        g0 = std::fabs(f_near[1].coeff(e3));
        g1 = std::fabs(f_far[1].coeff(e3));
    }
    double growth = (g0 > 1e-300) ? std::pow(g1 / g0, 1.0 / 6.0) : 1.0;
    double eff = ratio * std::max(1.0, growth);
    if (eff < 0.98) {
        FamilyJets a = run_ladder(chart, fjet, t, J, depth);
        FamilyJets b = run_ladder(chart, fjet, t, J, std::max(2, depth - 3));
        double diff = 0.0;
        for (int j = 1; j <= J; ++j)
            diff = std::max({diff, std::fabs(a.A[j] - b.A[j]), std::fabs(a.C[j] - b.C[j])});
        a.convergence = diff;
        if (diff < 1e-6) return a;
    }
    // Formal fallback: legitimate only if the axis data is polynomial at the
    // jet scale (checked inside formal_family by the caller's chart order).
    FormalFamily ff = formal_family(chart, fjet, J, chart.order());
    FamilyJets fam;
    fam.t = t;
    fam.from_formal = true;
    fam.A.assign(J + 1, 0.0);
    fam.C.assign(J + 1, 0.0);
    for (int j = 1; j <= J; ++j) {
        fam.A[j] = ff.A[j].eval1(t);
        fam.C[j] = ff.C[j].eval1(t);
    }
    return fam;
}

namespace {

// State for the per-mode formal solve: the family as arity-2 jets in (t, s).
struct FormalState {
    Jet A2, C2;  // arity-2, vars (t, s)
    int ord2;
};

// Residual of the family invariance F(Gamma(t,s)) = Gamma(lam1 t, shat):
// two components (first and second chart coordinate defects).
std::array<Jet, 2> formal_residual(const JetMap& F, const FormalState& st, double lam1) {
    const int ord2 = st.ord2;
    Jet tj = Jet::variable(2, ord2, 0);
    Jet sj = Jet::variable(2, ord2, 1);
    std::array<Jet, 3> offs{tj + st.A2, st.C2, sj};
    Jet img1 = jets::compose(F[0], offs);
    Jet img2 = jets::compose(F[1], offs);
    Jet shat = jets::compose(F[2], offs);
    img1[0] = 0.0;  // measure offsets from the image center (lam1 t, 0, 0)
    shat[0] = 0.0;
    // Target curve at parameter lam1 t: A(lam1 t, shat), C(lam1 t, shat).
    std::array<Jet, 2> sub{lam1 * tj, shat};
    Jet tgt1 = lam1 * tj + jets::compose(st.A2, sub);
    Jet tgt2 = jets::compose(st.C2, sub);
    return {img1 - tgt1, img2 - tgt2};
}

}  // namespace

FormalFamily formal_family(const BaseChart& chart, const AxisJetProvider& fjet, int J,
                           int poly_order) {
    // Per-coefficient solve of the family hierarchy at the anchor, with the
    // coefficient functions represented as polynomials in t. The residual is
    // linear in the current-grade unknown modes and the modes decouple, so
    // each (p, j) mode is solved by a 2x2 response system.
    const int P = poly_order;
    const int ord2 = std::min(20, P + 1);
    JetMap F = fjet(0.0, ord2);
    const double lam1 = chart.lam1();

    FormalState st{Jet(2, ord2), Jet(2, ord2), ord2};
    FormalFamily out;
    out.A.assign(J + 1, Jet(1, P));
    out.C.assign(J + 1, Jet(1, P));

    for (int grade = 1; grade <= ord2; ++grade) {
        std::array<Jet, 2> r0 = formal_residual(F, st, lam1);
        for (int j = 1; j <= std::min(J, grade); ++j) {
            int p = grade - j;
            if (p > P) continue;
            jets::Exponent mode{p, j, 0};
            // Response columns of the two unknowns at this mode.
            FormalState sa = st;
            sa.A2.set_coeff(mode, 1.0);
            std::array<Jet, 2> ra = formal_residual(F, sa, lam1);
            FormalState sc = st;
            sc.C2.set_coeff(mode, 1.0);
            std::array<Jet, 2> rc = formal_residual(F, sc, lam1);
            double m11 = ra[0].coeff(mode) - r0[0].coeff(mode);
            double m21 = ra[1].coeff(mode) - r0[1].coeff(mode);
            double m12 = rc[0].coeff(mode) - r0[0].coeff(mode);
            double m22 = rc[1].coeff(mode) - r0[1].coeff(mode);
            double b1 = -r0[0].coeff(mode), b2 = -r0[1].coeff(mode);
            double det = m11 * m22 - m12 * m21;
            double scale = std::fabs(m11 * m22) + std::fabs(m12 * m21) + 1e-30;
            if (std::fabs(det) < 1e-9 * scale) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "resonant mode (t^%d s^%d) zeroed", p, j);
                out.resonances.push_back(buf);
                continue;
            }
            double aval = (m22 * b1 - m12 * b2) / det;
            double cval = (m11 * b2 - m21 * b1) / det;
            st.A2.set_coeff(mode, aval);
            st.C2.set_coeff(mode, cval);
        }
    }
    const auto& exps = jets::exponent_table(2, ord2);
    for (std::size_t i = 0; i < st.A2.size(); ++i) {
        int p = exps[i][0], j = exps[i][1];
        if (j >= 1 && j <= J && p <= P) {
            out.A[j][p] = st.A2[i];
            out.C[j][p] = st.C2[i];
        }
    }
    return out;
}

std::vector<Vec3> contracting_leaf_samples(const BaseChart& chart, const FamilyJets& fam,
                                           double s_max, int count) {
    std::vector<Vec3> out;
    out.reserve(count);
    const int J = static_cast<int>(fam.A.size()) - 1;
    for (int i = 0; i < count; ++i) {
        double s = -s_max + 2.0 * s_max * i / (count - 1);
        double x1 = fam.t, x2 = 0.0, sp = 1.0;
        for (int j = 1; j <= J; ++j) {
            sp *= s;
            x1 += fam.A[j] * sp;
            x2 += fam.C[j] * sp;
        }
        out.push_back(chart.from_chart({x1, x2, s}));
    }
    return out;
}

TransportedLeaf expanding_leaf_through(const BaseChart& chart, double s0, double window,
                                       int count, double tol) {
    const DirectedModel& m = chart.system();
    const double lam2 = std::fabs(chart.lam2()), lam3 = std::fabs(chart.lam3());
    double ratio = lam3 / lam2;
    int K = std::min(60, static_cast<int>(std::ceil(std::log(tol) / std::log(ratio))) + 4);

    auto run = [&](int depth) {
        std::vector<Vec3> pts(count);
        double lam1K = std::pow(chart.lam1(), depth);
        double lam3K = std::pow(chart.lam3(), depth);
        Vec3 deep_base = chart.phi3().eval(lam3K * s0);
        for (int i = 0; i < count; ++i) {
            double v = -window + 2.0 * window * i / (count - 1);
            Vec3 p = deep_base;
            for (int c = 0; c < 3; ++c) p[c] += lam1K * v * chart.frame().e1[c];
            for (int k = 0; k < depth; ++k) p = m.back(p);
            pts[i] = p;
        }
        return pts;
    };
    std::vector<Vec3> pts = run(K);
    std::vector<Vec3> pts2 = run(K + 3);
    double conv = 0.0;
    for (int i = 0; i < count; ++i)
        conv = std::max(conv, linalg::norm(linalg::sub(pts[i], pts2[i])));

    TransportedLeaf out;
    out.base = chart.phi3().eval(s0);
    out.s0 = s0;
    out.convergence = conv;
    out.points = pts2;
    linalg::Mat3 fm{};
    for (int i = 0; i < 3; ++i) {
        fm[i][0] = chart.frame().e1[i];
        fm[i][1] = chart.frame().e2[i];
        fm[i][2] = chart.frame().e3[i];
    }
    linalg::Mat3 fi = linalg::inverse(fm);
    for (const Vec3& p : out.points) {
        Vec3 rel = linalg::sub(p, out.base);
        out.params.push_back(linalg::matvec(fi, rel)[0]);
        out.chart_coords.push_back(chart.to_chart(p));
    }
    return out;
}

}  // namespace phtk::nform
