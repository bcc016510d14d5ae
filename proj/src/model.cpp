#include "phtk/model.hpp"

#include <cmath>
#include <sstream>

namespace phtk::models {

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "MODEL-A" || name == "A") return ModelKind::A;
    if (name == "MODEL-B" || name == "B") return ModelKind::B;
    if (name == "MODEL-C" || name == "C") return ModelKind::C;
    throw DomainError("unknown model '" + name + "' (expected MODEL-A, MODEL-B or MODEL-C)");
}

std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::A: return "MODEL-A";
        case ModelKind::B: return "MODEL-B";
        default: return "MODEL-C";
    }
}

void check_partial_hyperbolicity(const ModelParams& p) {
    auto fail = [](const std::string& msg) { throw DomainError("partial hyperbolicity: " + msg); };
    if (!(std::fabs(p.l1) > std::max(1.0, std::fabs(p.l2))))
        fail("|l1| > max(1, |l2|) violated (l1=" + std::to_string(p.l1) + ")");
    if (!(std::fabs(p.l3) < std::min(1.0, std::fabs(p.l2))))
        fail("|l3| < min(1, |l2|) violated (l3=" + std::to_string(p.l3) + ")");
    if (!(std::fabs(p.l1) > std::fabs(p.l2) && std::fabs(p.l2) > std::fabs(p.l3)))
        fail("|l1| > |l2| > |l3| violated");
}

Model::Model(ModelKind kind, ModelParams params) : kind_(kind), params_(params) {
    check_partial_hyperbolicity(params_);
    name_ = model_kind_name(kind);
}

Vec3 Model::forward(const Vec3& x) const {
    const auto& p = params_;
    switch (kind_) {
        case ModelKind::A: return {p.l1 * x[0], p.l2 * x[1], p.l3 * x[2]};
        case ModelKind::B: return {p.l1 * x[0], p.l2 * x[1] + p.eps * x[0] * x[2], p.l3 * x[2]};
        default: return {p.l1 * x[0], p.l2 * x[1] + p.eps * std::sin(x[0]) * x[2], p.l3 * x[2]};
    }
}

Vec3 Model::inverse(const Vec3& y) const {
    const auto& p = params_;
    double x1 = y[0] / p.l1;
    double x3 = y[2] / p.l3;
    switch (kind_) {
        case ModelKind::A: return {x1, y[1] / p.l2, x3};
        case ModelKind::B: return {x1, (y[1] - p.eps * x1 * x3) / p.l2, x3};
        default: return {x1, (y[1] - p.eps * std::sin(x1) * x3) / p.l2, x3};
    }
}

Vec3 Model::iterate(const Vec3& x, int n) const {
    Vec3 y = x;
    for (int i = 0; i < std::abs(n); ++i) y = (n > 0) ? forward(y) : inverse(y);
    return y;
}

JetMap Model::forward_jet(const Vec3& x, int order) const {
    const auto& p = params_;
    Jet x1 = Jet::variable(3, order, 0, x[0]);
    Jet x2 = Jet::variable(3, order, 1, x[1]);
    Jet x3 = Jet::variable(3, order, 2, x[2]);
    switch (kind_) {
        case ModelKind::A:
            return {p.l1 * x1, p.l2 * x2, p.l3 * x3};
        case ModelKind::B:
            return {p.l1 * x1, p.l2 * x2 + p.eps * (x1 * x3), p.l3 * x3};
        default:
            return {p.l1 * x1, p.l2 * x2 + p.eps * (jets::sin(x1) * x3), p.l3 * x3};
    }
}

JetMap Model::inverse_jet(const Vec3& y, int order) const {
    const auto& p = params_;
    Jet y1 = Jet::variable(3, order, 0, y[0]);
    Jet y2 = Jet::variable(3, order, 1, y[1]);
    Jet y3 = Jet::variable(3, order, 2, y[2]);
    Jet x1 = (1.0 / p.l1) * y1;
    Jet x3 = (1.0 / p.l3) * y3;
    switch (kind_) {
        case ModelKind::A:
            return {x1, (1.0 / p.l2) * y2, x3};
        case ModelKind::B:
            return {x1, (1.0 / p.l2) * (y2 - p.eps * (x1 * x3)), x3};
        default:
            return {x1, (1.0 / p.l2) * (y2 - p.eps * (jets::sin(x1) * x3)), x3};
    }
}

Mat3 Model::forward_derivative(const Vec3& x) const {
    const auto& p = params_;
    Mat3 m{};
    m[0][0] = p.l1;
    m[1][1] = p.l2;
    m[2][2] = p.l3;
    if (kind_ == ModelKind::B) {
        m[1][0] = p.eps * x[2];
        m[1][2] = p.eps * x[0];
    } else if (kind_ == ModelKind::C) {
        m[1][0] = p.eps * std::cos(x[0]) * x[2];
        m[1][2] = p.eps * std::sin(x[0]);
    }
    return m;
}

Mat3 Model::inverse_derivative(const Vec3& y) const {
    return linalg::inverse(forward_derivative(inverse(y)));
}

bool Model::in_working_box(const Vec3& x) const {
    return std::fabs(x[0]) <= 1.0 && std::fabs(x[1]) <= 1.0 && std::fabs(x[2]) <= 1.0;
}

std::uint64_t Model::hash() const {
    // FNV-1a over the kind tag and raw parameter bytes
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    int k = static_cast<int>(kind_);
    mix(&k, sizeof(k));
    mix(&params_.l1, sizeof(double));
    mix(&params_.l2, sizeof(double));
    mix(&params_.l3, sizeof(double));
    mix(&params_.eps, sizeof(double));
    return h;
}

JetMap model_eval(const Model& model, const Vec3& x, int order) {
    if (!model.in_working_box(x)) {
        std::ostringstream os;
        os << "model_eval: point (" << x[0] << ", " << x[1] << ", " << x[2]
           << ") outside working box [-1,1]^3";
        throw DomainError(os.str());
    }
    return model.forward_jet(x, order);
}

}  // namespace phtk::models
