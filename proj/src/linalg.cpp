#include "phtk/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace phtk::linalg {

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 scale(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    if (n == 0.0) throw std::runtime_error("normalized: zero vector");
    return scale(1.0 / n, a);
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 matvec(const Mat3& m, const Vec3& v) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return r;
}

Mat3 matmul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
            r[i][j] = s;
        }
    return r;
}

Mat3 identity3() {
    Mat3 m{};
    for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
    return m;
}

Mat3 inverse(const Mat3& m) {
    Mat3 r{};
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::fabs(det) < 1e-300) throw std::runtime_error("inverse: singular 3x3 matrix");
    double id = 1.0 / det;
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * id;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * id;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * id;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
    return r;
}

std::vector<double> lstsq(const std::vector<std::vector<double>>& a, std::span<const double> b) {
    const int m = static_cast<int>(a.size());
    if (m == 0) throw std::runtime_error("lstsq: empty system");
    const int n = static_cast<int>(a[0].size());
    if (m < n) throw std::runtime_error("lstsq: underdetermined system");
    std::vector<std::vector<double>> r = a;
    std::vector<double> rhs(b.begin(), b.end());

    // Householder QR applied in place.
    for (int k = 0; k < n; ++k) {
        double nrm = 0.0;
        for (int i = k; i < m; ++i) nrm += r[i][k] * r[i][k];
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw std::runtime_error("lstsq: rank-deficient system");
        double alpha = (r[k][k] > 0) ? -nrm : nrm;
        std::vector<double> v(m - k);
        v[0] = r[k][k] - alpha;
        for (int i = k + 1; i < m; ++i) v[i - k] = r[i][k];
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 == 0.0) continue;
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < m; ++i) s += v[i - k] * r[i][j];
            s *= 2.0 / vnorm2;
            for (int i = k; i < m; ++i) r[i][j] -= s * v[i - k];
        }
        double s = 0.0;
        for (int i = k; i < m; ++i) s += v[i - k] * rhs[i];
        s *= 2.0 / vnorm2;
        for (int i = k; i < m; ++i) rhs[i] -= s * v[i - k];
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int j = i + 1; j < n; ++j) s -= r[i][j] * x[j];
        x[i] = s / r[i][i];
    }
    return x;
}

std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(a.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) throw std::runtime_error("solve: singular system");
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (int j = col; j < n; ++j) a[r][j] -= f * a[col][j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<std::complex<double>> poly_roots(std::span<const double> coeffs) {
    std::vector<double> c(coeffs.begin(), coeffs.end());
    while (c.size() > 1 && std::fabs(c.back()) < 1e-300) c.pop_back();
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};

    using C = std::complex<double>;
    std::vector<C> z(n);
    // Aberth-style seeds on a circle of radius from the coefficient bound.
    double radius = 0.0;
    for (int i = 0; i < n; ++i) radius = std::max(radius, std::fabs(c[i] / c[n]));
    radius = 1.0 + radius;
    for (int i = 0; i < n; ++i) {
        double ang = 2.0 * M_PI * (i + 0.25) / n;
        z[i] = radius * C(std::cos(ang), std::sin(ang));
    }
    auto eval = [&](C x) {
        C s = 0.0;
        for (int i = n; i >= 0; --i) s = s * x + c[i];
        return s;
    };
    for (int iter = 0; iter < 500; ++iter) {
        double shift = 0.0;
        for (int i = 0; i < n; ++i) {
            C num = eval(z[i]) / c[n];
            C den = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) den *= (z[i] - z[j]);
            if (std::abs(den) < 1e-300) den = 1e-300;
            C d = num / den;
            z[i] -= d;
            shift = std::max(shift, std::abs(d));
        }
        if (shift < 1e-13) break;
    }
    return z;
}

double poly_eval(std::span<const double> coeffs, double x) {
    double s = 0.0;
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i) s = s * x + coeffs[i];
    return s;
}

std::vector<double> poly_derivative(std::span<const double> coeffs) {
    if (coeffs.size() <= 1) return {0.0};
    std::vector<double> d(coeffs.size() - 1);
    for (std::size_t i = 1; i < coeffs.size(); ++i) d[i - 1] = coeffs[i] * static_cast<double>(i);
    return d;
}

void cheb_values(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() > 1) out[1] = x;
    for (std::size_t k = 2; k < out.size(); ++k) out[k] = 2.0 * x * out[k - 1] - out[k - 2];
}

std::vector<double> cheb_to_monomial(std::span<const double> c) {
    const int n = static_cast<int>(c.size());
    // rows: monomial coefficients of T_k
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    if (n > 0) t[0][0] = 1.0;
    if (n > 1) t[1][1] = 1.0;
    for (int k = 2; k < n; ++k) {
        for (int j = 0; j + 1 < n; ++j) t[k][j + 1] += 2.0 * t[k - 1][j];
        for (int j = 0; j < n; ++j) t[k][j] -= t[k - 2][j];
    }
    std::vector<double> m(n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) m[j] += c[k] * t[k][j];
    return m;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::runtime_error("fit_line: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    if (std::fabs(det) < 1e-300) throw std::runtime_error("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

}  // namespace phtk::linalg
