#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phtk::jets {

/// Contract violations (arity/order mismatch, singular linear part, ...).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

using Exponent = std::array<int, 3>;  // unused trailing entries are zero

/// Exponent tuples of all monomials in `arity` variables up to total degree
/// `order`, in graded-lex order: degree ascending, ties broken
/// lexicographically descending on (a1, a2, a3). This order is frozen in the
/// serialization format.
const std::vector<Exponent>& exponent_table(int arity, int order);

/// Number of coefficients of a degree-`order` polynomial in `arity` variables.
std::size_t table_size(int arity, int order);

/// Dense truncated Taylor polynomial in 1..3 variables.
///
/// All arithmetic is exact truncation: the product of two jets equals the
/// degree-K truncation of the full polynomial product, coefficient-wise.
class Jet {
public:
    Jet() : arity_(1), order_(0), c_(1, 0.0) {}
    Jet(int arity, int order);

    static Jet constant(int arity, int order, double value);
    /// The affine jet  center + x_var.
    static Jet variable(int arity, int order, int var, double center = 0.0);

    int arity() const { return arity_; }
    int order() const { return order_; }
    std::size_t size() const { return c_.size(); }

    double& operator[](std::size_t i) { return c_[i]; }
    double operator[](std::size_t i) const { return c_[i]; }
    std::span<const double> coeffs() const { return c_; }

    double coeff(const Exponent& e) const;
    void set_coeff(const Exponent& e, double v);

    double constant_term() const { return c_[0]; }

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(double s);
    Jet operator-() const;

    double eval(std::span<const double> x) const;
    double eval1(double x) const;

    /// Partial derivative in variable `var`; result order is order-1 (min 0).
    Jet partial(int var) const;

    /// Truncate (or zero-pad) to a new order.
    Jet truncated(int new_order) const;

    /// Largest absolute coefficient.
    double max_abs() const;
    /// Largest absolute coefficient among terms of total degree >= deg.
    double tail_abs(int deg) const;

    std::string to_string() const;

private:
    int arity_;
    int order_;
    std::vector<double> c_;

    friend Jet operator+(Jet a, const Jet& b);
    friend Jet operator-(Jet a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double s, Jet a);
Jet operator*(Jet a, double s);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);

/// Composition outer(inner[0], ..., inner[m-1]); all inner jets share arity
/// and order. The outer jet is recentered at the inner constant terms first
/// (exact polynomial shift), so nonzero inner constants are allowed.
Jet compose(const Jet& outer, std::span<const Jet> inner);
Jet compose1(const Jet& outer, const Jet& inner);

/// Applies an analytic function given by its Taylor coefficients at the jet's
/// constant term: derivs[k] = f^(k)(g(0)) / k!.
Jet apply_analytic(const Jet& g, std::span<const double> derivs);
Jet sin(const Jet& g);
Jet cos(const Jet& g);
Jet exp(const Jet& g);
Jet log(const Jet& g);

/// An n-component jet map R^n -> R^n (n = arity of the components).
using JetMap = std::vector<Jet>;

JetMap identity_map(int arity, int order);
/// Component-wise composition F(G).
JetMap compose_map(const JetMap& outer, const JetMap& inner);
/// Inverse jet map: G with G(F(x) - F(0)) = x + O(order+1), centered so that
/// G(0) = 0. The linear part of F must be invertible.
JetMap invert_map(const JetMap& f);

/// Restriction of a trivariate jet to one coordinate axis: j(x e_axis).
Jet axis_restrict(const Jet& j, int axis);
/// The univariate jet in x1 collecting coefficients of x1^a x3^fixed3 with
/// x2-exponent zero (used to read cocycle data along the unstable axis).
Jet slice_x1(const Jet& j, int fixed3);
/// General slice: coefficients of x1^a x2^pow2 x3^pow3 as a jet in x1.
Jet slice_x1_general(const Jet& j, int pow2, int pow3);

}  // namespace phtk::jets
