#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace phtk::linalg {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Vec3 add(const Vec3& a, const Vec3& b);
Vec3 sub(const Vec3& a, const Vec3& b);
Vec3 scale(double s, const Vec3& a);
double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);
Vec3 cross(const Vec3& a, const Vec3& b);
Vec3 matvec(const Mat3& m, const Vec3& v);
Mat3 matmul(const Mat3& a, const Mat3& b);
Mat3 inverse(const Mat3& m);
Mat3 identity3();

/// Least-squares solve of an m x n system (m >= n) by Householder QR.
/// Returns the coefficient vector of length n.
std::vector<double> lstsq(const std::vector<std::vector<double>>& a,
                          std::span<const double> b);

/// Solve a square linear system by Gaussian elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b);

/// All complex roots of a real polynomial (coefficients in increasing degree)
/// by the Durand-Kerner iteration. Leading zero coefficients are trimmed.
std::vector<std::complex<double>> poly_roots(std::span<const double> coeffs);

/// Horner evaluation of a real polynomial (increasing-degree coefficients).
double poly_eval(std::span<const double> coeffs, double x);
/// Derivative coefficients of a polynomial.
std::vector<double> poly_derivative(std::span<const double> coeffs);

/// Chebyshev polynomial basis values T_0..T_n at x (for stable fitting).
void cheb_values(double x, std::span<double> out);
/// Convert Chebyshev-basis coefficients to monomial coefficients.
std::vector<double> cheb_to_monomial(std::span<const double> c);

/// Slope and intercept of the least-squares line through (x_i, y_i).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace phtk::linalg
