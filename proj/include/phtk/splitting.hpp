#pragma once

#include <vector>

#include "phtk/model.hpp"

namespace phtk::splitting {

using linalg::Vec3;
using models::Model;

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (last residual " + std::to_string(residual) + ")"),
          last_residual(residual) {}
    double last_residual;
};

/// Unit frame (e1, e2, e3) spanning the invariant splitting at x, with the
/// per-step multipliers lam_i defined by Df(x) e_i(x) = lam_i e_i(f(x)).
struct SplittingFrame {
    Vec3 x{};
    Vec3 e1{}, e2{}, e3{};
    double lam1 = 0.0, lam2 = 0.0, lam3 = 0.0;
    double residual = 0.0;  // max over i of the relative invariance defect
};

/// Power-iteration frame computation: e1 by forward iteration of Df from the
/// backward orbit, e3 by backward iteration of Df^-1 from the forward orbit,
/// e2 as the intersection of the forward 2-plane with the backward 2-plane.
SplittingFrame compute_frame(const Model& model, const Vec3& x, int n_power,
                             double tol = 1e-9);

/// Orbit segment f^{-N}(x) .. f^{N}(x) with frames, per-step multipliers and
/// accumulated products lam^{(n)}_{i}.
struct OrbitSegment {
    std::vector<Vec3> points;              // 2N+1 points, base at index N
    std::vector<SplittingFrame> frames;    // one per point
    int base_index = 0;

    const SplittingFrame& base() const { return frames[base_index]; }
    int half_length() const { return base_index; }

    /// Product lam_{i, f^{n-1}(x)} ... lam_{i, x} starting at segment index
    /// `from` (relative to points[]), n >= 0.
    double multiplier_product(int i, int from, int n) const;
};

OrbitSegment build_segment(const Model& model, const Vec3& x, int half_length, int n_power,
                           double tol = 1e-9);

struct LyapunovEstimate {
    double chi1 = 0.0, chi2 = 0.0, chi3 = 0.0;
    double band1 = 0.0, band2 = 0.0, band3 = 0.0;  // per-step deviation bands
};

/// chi_i = (1/n) log |lam^{(n)}_i| over the whole segment, with the empirical
/// per-step deviation band standing in for the analysis parameter epsilon.
LyapunovEstimate lyapunov_exponents(const OrbitSegment& segment);

}  // namespace phtk::splitting
