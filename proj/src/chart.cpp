#include "phtk/chart.hpp"

#include <cmath>
#include <sstream>

namespace phtk::charts {

namespace {

Jet rescale_arg(const Jet& g, double factor) {
    // g(factor * t), exact coefficient scaling
    Jet r = g;
    double f = 1.0;
    for (int m = 0; m <= g.order(); ++m) {
        r[m] = g[m] * f;
        f *= factor;
    }
    return r;
}

Jet reciprocal(const Jet& g) {
    double c0 = g.constant_term();
    if (std::fabs(c0) < 1e-14) throw ChartError("jet reciprocal: vanishing constant term");
    std::vector<double> d(g.order() + 1);
    double p = 1.0 / c0;
    for (int k = 0; k <= g.order(); ++k) {
        d[k] = ((k % 2 == 0) ? 1.0 : -1.0) * p;
        p /= c0;
    }
    return jets::apply_analytic(g, d);
}

double max_abs_tail(const Jet& g, int from_degree) { return g.tail_abs(from_degree); }

}  // namespace

TriangularCocycle triangularize(const CocycleData& input, double term_tol, int max_terms) {
    const int n = input.period();
    if (n < 1) throw ChartError("triangularize: empty cocycle");
    const int order = input.a[0].order();

    TriangularCocycle out;
    out.data = input;
    out.basis.assign(n, {Jet::constant(1, order, 1.0), Jet(1, order), Jet(1, order),
                         Jet::constant(1, order, 1.0)});

    // Exponent separation check on the diagonal magnitudes.
    double la = 0.0, lb = 0.0;
    for (int i = 0; i < n; ++i) {
        la += std::log(std::fabs(input.a[i].constant_term()));
        lb += std::log(std::fabs(input.b[i].constant_term()));
    }
    if (!(la > lb)) throw ChartError("triangularize: cocycle exponents not separated (a <= b)");

    double qmax = 0.0, q0max = 0.0;
    for (int i = 0; i < n; ++i) {
        qmax = std::max(qmax, input.q[i].max_abs());
        q0max = std::max(q0max, std::fabs(input.q[i].constant_term()));
    }
    if (qmax < 1e-15) {
        out.notes.push_back("already upper triangular");
        return out;
    }
    if (q0max > 1e-10)
        throw ChartError("triangularize: basis does not align the fast line at t=0");

    // Backward fixed-point sweeps for eta (eta(0)=1) and p (p(0)=0):
    //   eta_x a_x + p_x r_x = a_x(0) eta_{f(x)}(lam1 t)
    //   eta_x q_x + p_x b_x = a_x(0) p_{f(x)}(lam1 t)
    std::vector<Jet> eta(n, Jet::constant(1, order, 1.0)), pp(n, Jet(1, order));
    double delta = 0.0;
    for (int sweep = 0; sweep < max_terms; ++sweep) {
        delta = 0.0;
        for (int x = 0; x < n; ++x) {
            int y = (x + 1) % n;
            double a0 = input.a[x].constant_term();
            Jet rhs_eta = (eta[x] * input.a[x] + pp[x] * input.r[x]) * (1.0 / a0);
            Jet rhs_p = (eta[x] * input.q[x] + pp[x] * input.b[x]) * (1.0 / a0);
            Jet new_eta = rescale_arg(rhs_eta, 1.0 / input.lam1[x]);
            Jet new_p = rescale_arg(rhs_p, 1.0 / input.lam1[x]);
            // normalization pins
            new_eta[0] = 1.0;
            new_p[0] = 0.0;
            for (int m = 0; m <= order; ++m) {
                delta = std::max(delta, std::fabs(new_eta[m] - eta[y][m]));
                delta = std::max(delta, std::fabs(new_p[m] - pp[y][m]));
            }
            eta[y] = new_eta;
            pp[y] = new_p;
        }
        if (delta < term_tol) break;
    }
    if (delta > 1e-9) {
        std::ostringstream os;
        os << "triangularize: series sweep ratio did not contract (last delta " << delta
           << "), domination failure";
        throw ChartError(os.str());
    }

    // Transform the cocycle: Anew(x, t) = Binv_{f(x)}(lam1 t) A(x, t) B_x(t)
    // with B = [[eta, 0], [p, 1]].
    CocycleData nd = input;
    for (int x = 0; x < n; ++x) {
        int y = (x + 1) % n;
        Jet e_y = rescale_arg(eta[y], input.lam1[x]);
        Jet p_y = rescale_arg(pp[y], input.lam1[x]);
        Jet inv_e = reciprocal(e_y);
        // Binv at f(x) = [[1/eta, 0], [-p/eta, 1]]
        Jet a = input.a[x], r = input.r[x], q = input.q[x], b = input.b[x];
        // A B = [[a eta + r p, r], [q eta + b p, b]]
        Jet ab11 = a * eta[x] + r * pp[x];
        Jet ab12 = r;
        Jet ab21 = q * eta[x] + b * pp[x];
        Jet ab22 = b;
        nd.a[x] = inv_e * ab11;
        nd.r[x] = inv_e * ab12;
        nd.q[x] = ab21 - p_y * (inv_e * ab11);
        nd.b[x] = ab22 - p_y * (inv_e * ab12);
        out.basis[x] = {eta[x], Jet(1, order), pp[x], Jet::constant(1, order, 1.0)};
    }
    out.data = nd;
    double q_res = 0.0;
    for (int x = 0; x < n; ++x) q_res = std::max(q_res, nd.q[x].max_abs());
    out.notes.push_back("triangularized, lower-left residual " + std::to_string(q_res));
    return out;
}

TriangularCocycle constant_diagonal(TriangularCocycle tc, double term_tol, int max_terms) {
    const int n = tc.data.period();
    const int order = tc.data.a[0].order();

    for (int x = 0; x < n; ++x) {
        if (tc.data.a[x].constant_term() < 0.0 || tc.data.b[x].constant_term() < 0.0)
            throw ChartError("constant_diagonal: orientation convention broken (negative diagonal)");
        Jet ax = jets::axis_restrict(tc.data.a[x], 0);
        for (int g = 0; g < 21; ++g) {
            double t = -1.0 + 0.1 * g;
            if (ax.eval1(t) <= 0.0)
                throw ChartError("constant_diagonal: diagonal changes sign on the grid");
        }
    }

    // c_x(t) = sum_j (b_j(lam^-_{1,j} t) - b_j(0)) with b = log(diagonal);
    // one scaling per diagonal entry.
    auto solve_scaling = [&](const std::vector<Jet>& diag) {
        std::vector<Jet> logs;
        logs.reserve(n);
        for (int x = 0; x < n; ++x) logs.push_back(jets::log(diag[x]));
        std::vector<Jet> c(n, Jet(1, order));
        for (int x = 0; x < n; ++x) {
            Jet acc(1, order);
            double arg = 1.0;
            int idx = x;
            for (int j = 1; j <= max_terms; ++j) {
                idx = (idx - 1 + n) % n;  // f^{-j}(x)
                arg /= tc.data.lam1[idx];
                Jet term = rescale_arg(logs[idx], arg);
                term[0] = 0.0;  // b_j(arg t) - b_j(0)
                acc += term;
                if (term.max_abs() < term_tol && j > 2) break;
                if (j == max_terms)
                    throw ChartError("constant_diagonal: scaling series hit the term cap");
            }
            c[x] = acc;
        }
        return c;
    };
    std::vector<Jet> ca = solve_scaling(tc.data.a);
    std::vector<Jet> cb = solve_scaling(tc.data.b);

    CocycleData nd = tc.data;
    for (int x = 0; x < n; ++x) {
        int y = (x + 1) % n;
        Jet ea = jets::exp(ca[x]);
        Jet eb = jets::exp(cb[x]);
        Jet ea_y = jets::exp(rescale_arg(ca[y], tc.data.lam1[x]));
        Jet eb_y = jets::exp(rescale_arg(cb[y], tc.data.lam1[x]));
        Jet inv_ea_y = reciprocal(ea_y);
        Jet inv_eb_y = reciprocal(eb_y);
        // Anew = diag(1/ea_y, 1/eb_y) A diag(ea, eb)
        nd.a[x] = inv_ea_y * (tc.data.a[x] * ea);
        nd.r[x] = inv_ea_y * (tc.data.r[x] * eb);
        nd.q[x] = inv_eb_y * (tc.data.q[x] * ea);
        nd.b[x] = inv_eb_y * (tc.data.b[x] * eb);
        // accumulate basis: B <- B * diag(ea, eb)
        auto& B = tc.basis[x];
        B = {B[0] * ea, B[1] * eb, B[2] * ea, B[3] * eb};
    }
    tc.data = nd;
    double var = 0.0;
    for (int x = 0; x < n; ++x) {
        var = std::max(var, max_abs_tail(tc.data.a[x], 1));
        var = std::max(var, max_abs_tail(tc.data.b[x], 1));
    }
    tc.notes.push_back("constant diagonal, variation " + std::to_string(var));
    return tc;
}

int offdiagonal_degree_bound(double alpha, double beta, double chi1) {
    double gap = (std::log(std::fabs(alpha)) - std::log(std::fabs(beta))) / chi1;
    int d0 = static_cast<int>(std::floor(gap + 1e-9)) + 1;
    while (std::log(std::fabs(alpha)) - std::log(std::fabs(beta)) - d0 * chi1 >= 0.0) ++d0;
    return d0;
}

TriangularCocycle polynomialize_offdiagonal(TriangularCocycle tc, double chi1, double tail_tol,
                                            double term_tol, int max_terms) {
    const int n = tc.data.period();
    const int order = tc.data.a[0].order();
    double la = 0.0, lb = 0.0;
    for (int x = 0; x < n; ++x) {
        la += std::log(std::fabs(tc.data.a[x].constant_term()));
        lb += std::log(std::fabs(tc.data.b[x].constant_term()));
        if (max_abs_tail(tc.data.a[x], 1) > 1e-9 || max_abs_tail(tc.data.b[x], 1) > 1e-9)
            throw ChartError("polynomialize_offdiagonal: diagonals are not constant");
    }
    la /= n;
    lb /= n;
    const int d0 = offdiagonal_degree_bound(std::exp(la), std::exp(lb), chi1);
    if (la - lb - d0 * chi1 >= 0.0)
        throw ChartError("polynomialize_offdiagonal: divergent series (d0 mis-specified)");
    tc.d0 = d0;

    // Split r = head + tail at degree d0; if the tail is already small the
    // shear is the identity.
    double tail_mag = 0.0;
    for (int x = 0; x < n; ++x) tail_mag = std::max(tail_mag, max_abs_tail(tc.data.r[x], d0 + 1));
    double lead = 1e-300;
    for (int x = 0; x < n; ++x) lead = std::max(lead, tc.data.r[x].max_abs());
    if (tail_mag <= tail_tol * lead) {
        tc.offdiag_tail = tail_mag;
        tc.u_shear.assign(n, Jet(1, order));
        tc.notes.push_back("off-diagonal already polynomial of degree <= " + std::to_string(d0));
        return tc;
    }

    // u_x(t) = sum_j (alpha_{j-1} / beta_j) rhat_j(lam^-_{1,j} t).
    std::vector<Jet> rhat(n, Jet(1, order));
    for (int x = 0; x < n; ++x) {
        rhat[x] = tc.data.r[x];
        for (int m = 0; m <= std::min(order, d0); ++m) rhat[x][m] = 0.0;
    }
    std::vector<Jet> u(n, Jet(1, order));
    for (int x = 0; x < n; ++x) {
        Jet acc(1, order);
        double arg = 1.0, anum = 1.0, bden = 1.0;
        int idx = x;
        for (int j = 1; j <= max_terms; ++j) {
            idx = (idx - 1 + n) % n;
            arg /= tc.data.lam1[idx];
            bden *= tc.data.b[idx].constant_term();
            Jet term = rescale_arg(rhat[idx], arg) * (anum / bden);
            acc += term;
            anum *= tc.data.a[idx].constant_term();
            if (term.max_abs() < term_tol && j > 2) break;
            if (j == max_terms) {
                double ratio = std::exp(la - lb - (d0 + 1) * chi1);
                throw ChartError("polynomialize_offdiagonal: series term ratio " +
                                 std::to_string(ratio) + " did not fall below tolerance");
            }
        }
        u[x] = acc;
    }

    // New basis xi' = u xi + xi_perp: B <- B * [[1, u], [0, 1]].
    CocycleData nd = tc.data;
    for (int x = 0; x < n; ++x) {
        int y = (x + 1) % n;
        Jet u_y = rescale_arg(u[y], tc.data.lam1[x]);
        // Anew = [[1, -u_y], [0, 1]] A [[1, u_x], [0, 1]]
        nd.r[x] = tc.data.r[x] + tc.data.a[x] * u[x] - u_y * tc.data.b[x];
        auto& B = tc.basis[x];
        B = {B[0], B[0] * u[x] + B[1], B[2], B[2] * u[x] + B[3]};
    }
    tc.data = nd;
    tc.u_shear = u;
    tc.offdiag_tail = 0.0;
    for (int x = 0; x < n; ++x)
        tc.offdiag_tail = std::max(tc.offdiag_tail, max_abs_tail(tc.data.r[x], d0 + 1));
    tc.notes.push_back("off-diagonal polynomialized at degree " + std::to_string(d0));
    return tc;
}

Chart::Chart(BaseChart base, int order) : base_(std::move(base)), order_(order) {}

void Chart::push_layer(Layer layer) {
    layers_.push_back(std::move(layer));
    anchor_fjet_.reset();
}

namespace {

Vec3 shear_fwd(const ShearLayer& s, const Vec3& x) {
    return {x[0], x[1] + s.w.eval1(x[0]) * std::pow(x[2], s.power), x[2]};
}
Vec3 shear_inv(const ShearLayer& s, const Vec3& x) {
    return {x[0], x[1] - s.w.eval1(x[0]) * std::pow(x[2], s.power), x[2]};
}
Vec3 mix_fwd(const LinearMixLayer& l, const Vec3& x) {
    double b11 = l.b11.eval1(x[0]), b12 = l.b12.eval1(x[0]);
    double b21 = l.b21.eval1(x[0]), b22 = l.b22.eval1(x[0]);
    return {x[0], b11 * x[1] + b12 * x[2], b21 * x[1] + b22 * x[2]};
}
Vec3 mix_inv(const LinearMixLayer& l, const Vec3& x) {
    double b11 = l.b11.eval1(x[0]), b12 = l.b12.eval1(x[0]);
    double b21 = l.b21.eval1(x[0]), b22 = l.b22.eval1(x[0]);
    double det = b11 * b22 - b12 * b21;
    return {x[0], (b22 * x[1] - b12 * x[2]) / det, (-b21 * x[1] + b11 * x[2]) / det};
}

// Jet of a layer at a chart-coordinate center, as offsets -> offsets with the
// image center in the constant terms.
JetMap shear_jet(const ShearLayer& s, const Vec3& c, int order, bool inverse) {
    Jet x1 = Jet::variable(3, order, 0, c[0]);
    Jet x2 = Jet::variable(3, order, 1, c[1]);
    Jet x3 = Jet::variable(3, order, 2, c[2]);
    Jet w_at = jets::compose(s.w, std::array<Jet, 1>{x1});
    Jet pw = Jet::constant(3, order, 1.0);
    for (int i = 0; i < s.power; ++i) pw = pw * x3;
    Jet mid = inverse ? (x2 - w_at * pw) : (x2 + w_at * pw);
    return {x1, mid, x3};
}

JetMap mix_jet(const LinearMixLayer& l, const Vec3& c, int order, bool inverse) {
    Jet x1 = Jet::variable(3, order, 0, c[0]);
    Jet x2 = Jet::variable(3, order, 1, c[1]);
    Jet x3 = Jet::variable(3, order, 2, c[2]);
    Jet b11 = jets::compose(l.b11, std::array<Jet, 1>{x1});
    Jet b12 = jets::compose(l.b12, std::array<Jet, 1>{x1});
    Jet b21 = jets::compose(l.b21, std::array<Jet, 1>{x1});
    Jet b22 = jets::compose(l.b22, std::array<Jet, 1>{x1});
    if (!inverse) return {x1, b11 * x2 + b12 * x3, b21 * x2 + b22 * x3};
    Jet det = b11 * b22 - b12 * b21;
    Jet idet = reciprocal(det);
    return {x1, idet * (b22 * x2 - b12 * x3), idet * (b11 * x3 - b21 * x2)};
}

}  // namespace

Vec3 Chart::layer_stack_forward(const Vec3& xi) const {
    Vec3 x = xi;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        if (std::holds_alternative<ShearLayer>(*it)) x = shear_fwd(std::get<ShearLayer>(*it), x);
        else x = mix_fwd(std::get<LinearMixLayer>(*it), x);
    }
    return x;
}

Vec3 Chart::layer_stack_inverse(const Vec3& y) const {
    Vec3 x = y;
    for (const Layer& l : layers_) {
        if (std::holds_alternative<ShearLayer>(l)) x = shear_inv(std::get<ShearLayer>(l), x);
        else x = mix_inv(std::get<LinearMixLayer>(l), x);
    }
    return x;
}

Vec3 Chart::from_chart(const Vec3& xi) const { return base_.from_chart(layer_stack_forward(xi)); }

Vec3 Chart::to_chart(const Vec3& p) const { return layer_stack_inverse(base_.to_chart(p)); }

JetMap Chart::layer_stack_jet(const Vec3& xi_center, int order) const {
    JetMap cur = jets::identity_map(3, order);
    for (int i = 0; i < 3; ++i) cur[i][0] = xi_center[i];
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        Vec3 c{cur[0][0], cur[1][0], cur[2][0]};
        JetMap lj = std::holds_alternative<ShearLayer>(*it)
                        ? shear_jet(std::get<ShearLayer>(*it), c, order, false)
                        : mix_jet(std::get<LinearMixLayer>(*it), c, order, false);
        JetMap offs = cur;
        for (int i = 0; i < 3; ++i) offs[i][0] -= c[i];
        JetMap next;
        for (int i = 0; i < 3; ++i) next.push_back(jets::compose(lj[i], offs));
        cur = next;
    }
    return cur;
}

JetMap Chart::chart_jet(const Vec3& xi_center, int order) const {
    JetMap stacked = layer_stack_jet(xi_center, order);
    Vec3 base_center{stacked[0][0], stacked[1][0], stacked[2][0]};
    JetMap bj = base_.chart_jet(base_center, order);
    JetMap offs = stacked;
    for (int i = 0; i < 3; ++i) offs[i][0] -= base_center[i];
    JetMap out;
    for (int i = 0; i < 3; ++i) out.push_back(jets::compose(bj[i], offs));
    return out;
}

JetMap Chart::conjugated_jet(const Vec3& xi_center, int order) const {
    // F = S^-1 . Fbase . S with S the layer stack in base-chart coordinates.
    Vec3 base_center = layer_stack_forward(xi_center);
    JetMap stacked = layer_stack_jet(xi_center, order);
    JetMap fb = base_.conjugated_jet(base_center, order);
    JetMap offs = stacked;
    for (int i = 0; i < 3; ++i) offs[i][0] -= base_center[i];
    JetMap mid;
    for (int i = 0; i < 3; ++i) mid.push_back(jets::compose(fb[i], offs));
    Vec3 image_base{mid[0][0], mid[1][0], mid[2][0]};
    Vec3 image_chart = layer_stack_inverse(image_base);
    // Inverse stack jet at the image point.
    JetMap inv = jets::identity_map(3, order);
    for (int i = 0; i < 3; ++i) inv[i][0] = image_base[i];
    for (const Layer& l : layers_) {
        Vec3 c{inv[0][0], inv[1][0], inv[2][0]};
        JetMap lj = std::holds_alternative<ShearLayer>(l)
                        ? shear_jet(std::get<ShearLayer>(l), c, order, true)
                        : mix_jet(std::get<LinearMixLayer>(l), c, order, true);
        JetMap offs2 = inv;
        for (int i = 0; i < 3; ++i) offs2[i][0] -= c[i];
        JetMap next;
        for (int i = 0; i < 3; ++i) next.push_back(jets::compose(lj[i], offs2));
        inv = next;
    }
    // inv now maps base-chart offsets at image_base to chart coordinates.
    JetMap mid_offs = mid;
    for (int i = 0; i < 3; ++i) mid_offs[i][0] -= image_base[i];
    JetMap out;
    for (int i = 0; i < 3; ++i) out.push_back(jets::compose(inv[i], mid_offs));
    (void)image_chart;
    return out;
}

JetMap Chart::curve_to_chart(const JetMap& base_curve) const {
    JetMap cur = base_curve;
    const int order = base_curve[0].order();
    for (const Layer& l : layers_) {
        if (std::holds_alternative<ShearLayer>(l)) {
            const auto& s = std::get<ShearLayer>(l);
            Jet w_at = jets::compose(s.w, std::array<Jet, 1>{cur[0]});
            Jet pw = Jet::constant(1, order, 1.0);
            for (int i = 0; i < s.power; ++i) pw = pw * cur[2];
            cur[1] = cur[1] - w_at * pw;
        } else {
            const auto& m = std::get<LinearMixLayer>(l);
            Jet b11 = jets::compose(m.b11, std::array<Jet, 1>{cur[0]});
            Jet b12 = jets::compose(m.b12, std::array<Jet, 1>{cur[0]});
            Jet b21 = jets::compose(m.b21, std::array<Jet, 1>{cur[0]});
            Jet b22 = jets::compose(m.b22, std::array<Jet, 1>{cur[0]});
            Jet det = b11 * b22 - b12 * b21;
            Jet idet = reciprocal(det);
            Jet n1 = idet * (b22 * cur[1] - b12 * cur[2]);
            Jet n2 = idet * (b11 * cur[2] - b21 * cur[1]);
            cur[1] = n1;
            cur[2] = n2;
        }
    }
    return cur;
}

Jet Chart::transverse_data(int k) const {
    if (!anchor_fjet_) anchor_fjet_ = conjugated_jet({0, 0, 0}, order_);
    return jets::slice_x1_general((*anchor_fjet_)[1], 0, k);
}

ChartConditionReport Chart::check_conditions(double d0_tail_tol, int grid) const {
    ChartConditionReport rep;
    if (!anchor_fjet_) anchor_fjet_ = conjugated_jet({0, 0, 0}, order_);
    const JetMap& F = *anchor_fjet_;
    // axis: F(t,0,0) = (lam1 t, 0, 0)
    Jet f1 = jets::slice_x1_general(F[0], 0, 0);
    Jet f2 = jets::slice_x1_general(F[1], 0, 0);
    Jet f3 = jets::slice_x1_general(F[2], 0, 0);
    Jet f1_lin = f1;
    if (f1_lin.order() >= 1) f1_lin[1] -= lam1();
    rep.axis_conjugacy = std::max({f1_lin.max_abs(), f2.max_abs(), f3.max_abs()});

    Jet d2f2 = jets::slice_x1_general(F[1], 1, 0);
    d2f2[0] -= lam2();
    Jet d3f3 = jets::slice_x1_general(F[2], 0, 1);
    d3f3[0] -= lam3();
    Jet d2f3 = jets::slice_x1_general(F[2], 1, 0);
    for (int g = 0; g < grid; ++g) {
        double t = -1.0 + 2.0 * g / (grid - 1);
        rep.d2F2_const = std::max(rep.d2F2_const, std::fabs(d2f2.eval1(t)));
        rep.d3F3_const = std::max(rep.d3F3_const, std::fabs(d3f3.eval1(t)));
        rep.d2F3_zero = std::max(rep.d2F3_zero, std::fabs(d2f3.eval1(t)));
    }
    double chi1 = std::log(std::fabs(lam1()));
    rep.d0 = offdiagonal_degree_bound(std::fabs(lam2()), std::fabs(lam3()), chi1);
    Jet r = jets::slice_x1_general(F[1], 0, 1);
    double lead = std::max(r.max_abs(), 1e-300);
    rep.offdiag_tail = r.tail_abs(rep.d0 + 1) / lead;
    (void)d0_tail_tol;
    return rep;
}

CocycleData quotient_cocycle(const Chart& chart) {
    JetMap F = chart.conjugated_jet({0, 0, 0}, chart.order());
    CocycleData cd;
    cd.a.push_back(jets::slice_x1_general(F[1], 1, 0));
    cd.r.push_back(jets::slice_x1_general(F[1], 0, 1));
    cd.q.push_back(jets::slice_x1_general(F[2], 1, 0));
    cd.b.push_back(jets::slice_x1_general(F[2], 0, 1));
    cd.lam1.push_back(chart.lam1());
    return cd;
}

Chart build_unstable_chart(const BaseChart& base, int order, double tail_tol) {
    Chart chart(base, order);
    CocycleData cd = quotient_cocycle(chart);
    TriangularCocycle tc = triangularize(cd);
    tc = constant_diagonal(std::move(tc));
    // Fold the (eta, p, scaling) trivialization into a chart layer if it is
    // not the identity.
    {
        const auto& B = tc.basis[0];
        Jet id1 = Jet::constant(1, order, 1.0);
        double dev = std::max({(B[0] - id1).max_abs(), B[1].max_abs(), B[2].max_abs(),
                               (B[3] - id1).max_abs()});
        if (dev > 1e-13) {
            LinearMixLayer mix{B[0], B[1], B[2], B[3]};
            chart.push_layer(mix);
        }
    }
    double chi1 = std::log(std::fabs(base.lam1()));
    TriangularCocycle pc = polynomialize_offdiagonal(tc, chi1, tail_tol);
    if (!pc.u_shear.empty() && pc.u_shear[0].max_abs() > 1e-13)
        chart.push_layer(ShearLayer{pc.u_shear[0], 1});
    ChartConditionReport rep = chart.check_conditions(tail_tol);
    if (rep.offdiag_tail > tail_tol)
        throw ChartError("build_unstable_chart: off-diagonal tail above tolerance after reduction");
    chart.set_goodness(0);
    return chart;
}

CocycleData elljet_cocycle(const Chart& chart, int ell, double vanish_tol) {
    // Lemma-style vanishing of the lower transverse orders.
    for (int i = 1; i <= ell; ++i) {
        Jet di = chart.transverse_data(i);
        if (di.max_abs() > vanish_tol)
            throw ChartError("elljet_cocycle: chart not (ell-1)-good on this leaf (order " +
                             std::to_string(i) + " does not vanish)");
    }
    double fact = 1.0;
    for (int i = 2; i <= ell + 1; ++i) fact *= i;
    CocycleData cd;
    cd.a.push_back(Jet::constant(1, chart.order(), chart.lam2()));
    cd.r.push_back(chart.transverse_data(ell + 1) * fact);
    cd.q.push_back(Jet(1, chart.order()));
    cd.b.push_back(Jet::constant(1, chart.order(), std::pow(chart.lam3(), ell + 1)));
    cd.lam1.push_back(chart.lam1());
    return cd;
}

Chart improve_chart(const Chart& chart, const Jet& template_poly, int ell, double tail_tol) {
    if (std::fabs(template_poly.constant_term()) > 1e-9)
        throw ChartError("improve_chart: template polynomial must vanish at 0");
    Chart next = chart;
    next.push_layer(ShearLayer{template_poly, ell + 1});

    // Re-polynomialize the next-level transverse data (the (ell+2)-jet
    // cocycle) if it carries a tail.
    Jet r_next = next.transverse_data(ell + 2);
    double chi1 = std::log(std::fabs(chart.lam1()));
    double beta = std::pow(std::fabs(chart.lam3()), ell + 2);
    int d_next = offdiagonal_degree_bound(std::fabs(chart.lam2()), beta, chi1);
    double lead = std::max(r_next.max_abs(), 1e-300);
    if (r_next.tail_abs(d_next + 1) / lead > tail_tol) {
        CocycleData cd;
        double fact = 1.0;
        for (int i = 2; i <= ell + 2; ++i) fact *= i;
        cd.a.push_back(Jet::constant(1, chart.order(), chart.lam2()));
        cd.r.push_back(r_next * fact);
        cd.q.push_back(Jet(1, chart.order()));
        cd.b.push_back(Jet::constant(1, chart.order(), beta));
        cd.lam1.push_back(chart.lam1());
        TriangularCocycle tc;
        tc.data = cd;
        tc.basis.assign(1, {Jet::constant(1, chart.order(), 1.0), Jet(1, chart.order()),
                            Jet(1, chart.order()), Jet::constant(1, chart.order(), 1.0)});
        TriangularCocycle pc = polynomialize_offdiagonal(std::move(tc), chi1, tail_tol);
        if (!pc.u_shear.empty() && pc.u_shear[0].max_abs() > 1e-13)
            next.push_layer(ShearLayer{pc.u_shear[0] * (1.0 / fact), ell + 2});
    }
    next.set_goodness(ell + 1);
    return next;
}

}  // namespace phtk::charts
