#include "phtk/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace phtk::jets {

namespace {

struct Tables {
    std::vector<Exponent> exps;
    std::vector<int> lookup;  // dense (a1,a2,a3) -> index
    int order = 0;
};

int lookup_key(const Exponent& e, int order) {
    return (e[0] * (order + 1) + e[1]) * (order + 1) + e[2];
}

const Tables& tables(int arity, int order) {
    static std::map<std::pair<int, int>, Tables> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(arity, order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    Tables t;
    t.order = order;
    for (int deg = 0; deg <= order; ++deg) {
        // lexicographically descending on (a1, a2, a3) within a degree
        if (arity == 1) {
            t.exps.push_back({deg, 0, 0});
        } else if (arity == 2) {
            for (int a1 = deg; a1 >= 0; --a1) t.exps.push_back({a1, deg - a1, 0});
        } else {
            for (int a1 = deg; a1 >= 0; --a1)
                for (int a2 = deg - a1; a2 >= 0; --a2)
                    t.exps.push_back({a1, a2, deg - a1 - a2});
        }
    }
    t.lookup.assign((order + 1) * (order + 1) * (order + 1), -1);
    for (std::size_t i = 0; i < t.exps.size(); ++i)
        t.lookup[lookup_key(t.exps[i], order)] = static_cast<int>(i);
    return cache.emplace(key, std::move(t)).first->second;
}

int index_of(const Exponent& e, int arity, int order) {
    const Tables& t = tables(arity, order);
    int deg = e[0] + e[1] + e[2];
    if (deg > order || e[0] < 0 || e[1] < 0 || e[2] < 0)
        throw ContractError("jet exponent out of range");
    return t.lookup[lookup_key(e, order)];
}

void check_same(const Jet& a, const Jet& b, const char* op) {
    if (a.arity() != b.arity() || a.order() != b.order())
        throw ContractError(std::string("jet ") + op + ": arity/order mismatch");
}

}  // namespace

const std::vector<Exponent>& exponent_table(int arity, int order) {
    if (arity < 1 || arity > 3 || order < 0 || order > 24)
        throw ContractError("jet arity must be 1..3, order 0..24");
    return tables(arity, order).exps;
}

std::size_t table_size(int arity, int order) { return exponent_table(arity, order).size(); }

Jet::Jet(int arity, int order) : arity_(arity), order_(order) {
    c_.assign(table_size(arity, order), 0.0);
}

Jet Jet::constant(int arity, int order, double value) {
    Jet j(arity, order);
    j.c_[0] = value;
    return j;
}

Jet Jet::variable(int arity, int order, int var, double center) {
    if (var < 0 || var >= arity) throw ContractError("jet variable index out of range");
    Jet j(arity, order);
    j.c_[0] = center;
    if (order >= 1) {
        Exponent e{0, 0, 0};
        e[var] = 1;
        j.set_coeff(e, 1.0);
    }
    return j;
}

double Jet::coeff(const Exponent& e) const { return c_[index_of(e, arity_, order_)]; }

void Jet::set_coeff(const Exponent& e, double v) { c_[index_of(e, arity_, order_)] = v; }

Jet& Jet::operator+=(const Jet& o) {
    check_same(*this, o, "add");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    check_same(*this, o, "sub");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

Jet Jet::operator-() const {
    Jet r = *this;
    for (double& v : r.c_) v = -v;
    return r;
}

double Jet::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != arity_) throw ContractError("jet eval: point arity mismatch");
    const auto& exps = exponent_table(arity_, order_);
    // powers of each coordinate up to order
    double pw[3][25];
    for (int v = 0; v < arity_; ++v) {
        pw[v][0] = 1.0;
        for (int p = 1; p <= order_; ++p) pw[v][p] = pw[v][p - 1] * x[v];
    }
    double s = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0.0) continue;
        double m = c_[i];
        for (int v = 0; v < arity_; ++v) m *= pw[v][exps[i][v]];
        s += m;
    }
    return s;
}

double Jet::eval1(double x) const {
    std::array<double, 1> p{x};
    return eval(p);
}

Jet Jet::partial(int var) const {
    if (var < 0 || var >= arity_) throw ContractError("jet partial: variable out of range");
    int new_order = std::max(0, order_ - 1);
    Jet r(arity_, new_order);
    const auto& exps = exponent_table(arity_, order_);
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (exps[i][var] == 0 || c_[i] == 0.0) continue;
        Exponent e = exps[i];
        e[var] -= 1;
        if (e[0] + e[1] + e[2] > new_order) continue;
        r.c_[index_of(e, arity_, new_order)] += c_[i] * exps[i][var];
    }
    return r;
}

Jet Jet::truncated(int new_order) const {
    Jet r(arity_, new_order);
    const auto& exps = exponent_table(arity_, order_);
    for (std::size_t i = 0; i < c_.size(); ++i) {
        int deg = exps[i][0] + exps[i][1] + exps[i][2];
        if (deg <= new_order) r.c_[index_of(exps[i], arity_, new_order)] = c_[i];
    }
    return r;
}

double Jet::max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::fabs(v));
    return m;
}

double Jet::tail_abs(int deg) const {
    const auto& exps = exponent_table(arity_, order_);
    double m = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (exps[i][0] + exps[i][1] + exps[i][2] >= deg) m = std::max(m, std::fabs(c_[i]));
    return m;
}

std::string Jet::to_string() const {
    std::ostringstream os;
    const auto& exps = exponent_table(arity_, order_);
    bool first = true;
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0.0) continue;
        if (!first) os << " + ";
        os << c_[i];
        for (int v = 0; v < arity_; ++v)
            if (exps[i][v] > 0) os << "*x" << (v + 1) << "^" << exps[i][v];
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
    check_same(a, b, "mul");
    Jet r(a.arity(), a.order());
    const auto& exps = exponent_table(a.arity(), a.order());
    const int order = a.order();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        int di = exps[i][0] + exps[i][1] + exps[i][2];
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j] == 0.0) continue;
            int dj = exps[j][0] + exps[j][1] + exps[j][2];
            if (di + dj > order) continue;
            Exponent e{exps[i][0] + exps[j][0], exps[i][1] + exps[j][1], exps[i][2] + exps[j][2]};
            r[index_of(e, a.arity(), order)] += a[i] * b[j];
        }
    }
    return r;
}

Jet operator*(double s, Jet a) { return a *= s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator+(Jet a, double s) {
    a[0] += s;
    return a;
}
Jet operator+(double s, Jet a) {
    a[0] += s;
    return a;
}
Jet operator-(Jet a, double s) {
    a[0] -= s;
    return a;
}

namespace {

// Single-variable polynomial shift x_var -> x_var + h, exact.
Jet shift_variable(const Jet& j, int var, double h) {
    if (h == 0.0) return j;
    Jet r(j.arity(), j.order());
    const auto& exps = exponent_table(j.arity(), j.order());
    // binomials up to order
    double binom[25][25];
    for (int n = 0; n <= j.order(); ++n) {
        binom[n][0] = 1.0;
        for (int k = 1; k <= n; ++k)
            binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0.0);
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i] == 0.0) continue;
        int a = exps[i][var];
        double hp = 1.0;
        for (int k = a; k >= 0; --k) {
            Exponent e = exps[i];
            e[var] = k;
            r[index_of(e, j.arity(), j.order())] += j[i] * binom[a][a - k] * hp;
            hp *= h;
        }
    }
    return r;
}

}  // namespace

Jet compose(const Jet& outer, std::span<const Jet> inner) {
    if (static_cast<int>(inner.size()) != outer.arity())
        throw ContractError("jet compose: inner count must equal outer arity");
    const int in_arity = inner[0].arity();
    const int order = inner[0].order();
    for (const Jet& g : inner)
        if (g.arity() != in_arity || g.order() != order)
            throw ContractError("jet compose: inner jets must share arity and order");

    // Recenter outer at the inner constant terms (exact polynomial shift).
    Jet shifted = outer;
    for (int v = 0; v < outer.arity(); ++v)
        shifted = shift_variable(shifted, v, inner[v].constant_term());

    // Zero-constant copies of the inner jets.
    std::vector<Jet> g0(inner.begin(), inner.end());
    for (Jet& g : g0) g[0] = 0.0;

    // Cache powers of each inner jet.
    std::vector<std::vector<Jet>> pw(outer.arity());
    for (int v = 0; v < outer.arity(); ++v) {
        pw[v].reserve(outer.order() + 1);
        pw[v].push_back(Jet::constant(in_arity, order, 1.0));
        for (int p = 1; p <= outer.order(); ++p) pw[v].push_back(pw[v].back() * g0[v]);
    }

    Jet r(in_arity, order);
    const auto& exps = exponent_table(outer.arity(), outer.order());
    for (std::size_t i = 0; i < shifted.size(); ++i) {
        if (shifted[i] == 0.0) continue;
        Jet term = Jet::constant(in_arity, order, shifted[i]);
        for (int v = 0; v < outer.arity(); ++v)
            if (exps[i][v] > 0) term = term * pw[v][exps[i][v]];
        r += term;
    }
    return r;
}

Jet compose1(const Jet& outer, const Jet& inner) {
    std::array<Jet, 1> in{inner};
    return compose(outer, in);
}

Jet apply_analytic(const Jet& g, std::span<const double> derivs) {
    if (static_cast<int>(derivs.size()) < g.order() + 1)
        throw ContractError("apply_analytic: need order+1 Taylor coefficients");
    Jet d = g;
    d[0] = 0.0;
    Jet r = Jet::constant(g.arity(), g.order(), derivs[0]);
    Jet p = Jet::constant(g.arity(), g.order(), 1.0);
    for (int k = 1; k <= g.order(); ++k) {
        p = p * d;
        r += derivs[k] * p;
    }
    return r;
}

Jet sin(const Jet& g) {
    std::vector<double> d(g.order() + 1);
    double c0 = g.constant_term();
    double fact = 1.0;
    for (int k = 0; k <= g.order(); ++k) {
        if (k > 0) fact *= k;
        switch (k % 4) {
            case 0: d[k] = std::sin(c0) / fact; break;
            case 1: d[k] = std::cos(c0) / fact; break;
            case 2: d[k] = -std::sin(c0) / fact; break;
            default: d[k] = -std::cos(c0) / fact; break;
        }
    }
    return apply_analytic(g, d);
}

Jet cos(const Jet& g) {
    std::vector<double> d(g.order() + 1);
    double c0 = g.constant_term();
    double fact = 1.0;
    for (int k = 0; k <= g.order(); ++k) {
        if (k > 0) fact *= k;
        switch (k % 4) {
            case 0: d[k] = std::cos(c0) / fact; break;
            case 1: d[k] = -std::sin(c0) / fact; break;
            case 2: d[k] = -std::cos(c0) / fact; break;
            default: d[k] = std::sin(c0) / fact; break;
        }
    }
    return apply_analytic(g, d);
}

Jet exp(const Jet& g) {
    std::vector<double> d(g.order() + 1);
    double e0 = std::exp(g.constant_term());
    double fact = 1.0;
    for (int k = 0; k <= g.order(); ++k) {
        if (k > 0) fact *= k;
        d[k] = e0 / fact;
    }
    return apply_analytic(g, d);
}

Jet log(const Jet& g) {
    double c0 = g.constant_term();
    if (c0 <= 0.0) throw ContractError("jet log: constant term must be positive");
    std::vector<double> d(g.order() + 1);
    d[0] = std::log(c0);
    double p = 1.0 / c0;
    for (int k = 1; k <= static_cast<int>(g.order()); ++k) {
        d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
        p /= c0;
    }
    return apply_analytic(g, d);
}

JetMap identity_map(int arity, int order) {
    JetMap m;
    for (int v = 0; v < arity; ++v) m.push_back(Jet::variable(arity, order, v));
    return m;
}

JetMap compose_map(const JetMap& outer, const JetMap& inner) {
    JetMap r;
    r.reserve(outer.size());
    for (const Jet& f : outer) r.push_back(compose(f, inner));
    return r;
}

JetMap invert_map(const JetMap& f) {
    const int n = static_cast<int>(f.size());
    if (n < 1 || n > 3) throw ContractError("invert_map: 1..3 components");
    const int order = f[0].order();
    if (f[0].arity() != n) throw ContractError("invert_map: arity must equal component count");

    // Linear part.
    double a[3][3] = {{0}};
    for (int i = 0; i < n; ++i)
        for (int v = 0; v < n; ++v) {
            Exponent e{0, 0, 0};
            e[v] = 1;
            a[i][v] = f[i].coeff(e);
        }
    // Invert via Gaussian elimination.
    double inv[3][3] = {{0}};
    {
        double m[3][6];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m[i][j] = a[i][j];
            for (int j = 0; j < n; ++j) m[i][n + j] = (i == j) ? 1.0 : 0.0;
        }
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r2 = col + 1; r2 < n; ++r2)
                if (std::fabs(m[r2][col]) > std::fabs(m[piv][col])) piv = r2;
            if (std::fabs(m[piv][col]) < 1e-14)
                throw ContractError("invert_map: singular linear part");
            std::swap(m[col], m[piv]);
            double d = m[col][col];
            for (int j = 0; j < 2 * n; ++j) m[col][j] /= d;
            for (int r2 = 0; r2 < n; ++r2) {
                if (r2 == col) continue;
                double fct = m[r2][col];
                for (int j = 0; j < 2 * n; ++j) m[r2][j] -= fct * m[col][j];
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) inv[i][j] = m[i][n + j];
    }

    // Zero-constant copy of f.
    JetMap f0 = f;
    for (Jet& c : f0) c[0] = 0.0;

    // Seed with the inverse linear map, then correct degree by degree:
    // G_{d} += (x - G(f0)) restricted to degree d, precomposed with A^{-1}.
    JetMap g;
    for (int i = 0; i < n; ++i) {
        Jet gi(n, order);
        for (int v = 0; v < n; ++v) {
            Exponent e{0, 0, 0};
            e[v] = 1;
            gi.set_coeff(e, inv[i][v]);
        }
        g.push_back(gi);
    }
    JetMap ainv_map = g;  // the linear jet map x -> A^{-1} x

    for (int d = 2; d <= order; ++d) {
        JetMap gf = compose_map(g, f0);
        for (int i = 0; i < n; ++i) {
            Jet defect = Jet::variable(n, order, i) - gf[i];
            // keep only the degree-d homogeneous part
            Jet dd(n, order);
            const auto& exps = exponent_table(n, order);
            for (std::size_t k = 0; k < defect.size(); ++k) {
                int deg = exps[k][0] + exps[k][1] + exps[k][2];
                if (deg == d) dd[k] = defect[k];
            }
            g[i] += compose(dd, ainv_map);
        }
    }
    return g;
}

Jet axis_restrict(const Jet& j, int axis) {
    Jet r(1, j.order());
    const auto& exps = exponent_table(j.arity(), j.order());
    for (std::size_t i = 0; i < j.size(); ++i) {
        bool pure = true;
        for (int v = 0; v < j.arity(); ++v)
            if (v != axis && exps[i][v] != 0) pure = false;
        if (pure) r[exps[i][axis]] += j[i];
    }
    return r;
}

Jet slice_x1(const Jet& j, int fixed3) { return slice_x1_general(j, 0, fixed3); }

Jet slice_x1_general(const Jet& j, int pow2, int pow3) {
    if (j.arity() != 3) throw ContractError("slice_x1: needs a trivariate jet");
    Jet r(1, j.order());
    const auto& exps = exponent_table(3, j.order());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (exps[i][1] == pow2 && exps[i][2] == pow3) r[exps[i][0]] += j[i];
    }
    return r;
}

}  // namespace phtk::jets
