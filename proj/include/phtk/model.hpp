#pragma once

#include <cstdint>
#include <string>

#include "phtk/jet.hpp"
#include "phtk/linalg.hpp"

namespace phtk::models {

using jets::Jet;
using jets::JetMap;
using linalg::Mat3;
using linalg::Vec3;

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

enum class ModelKind { A, B, C };

ModelKind model_kind_from_name(const std::string& name);
std::string model_kind_name(ModelKind k);

struct ModelParams {
    double l1 = 2.0;
    double l2 = 1.2;
    double l3 = 0.3;
    double eps = 0.1;
};

/// A closed-form 3D diffeomorphism with an explicit inverse. The built-in
/// maps are entire on R^3; `model_eval` enforces the working box [-1,1]^3
/// for callers, while dynamical recursions (frame transport, leaf ladders,
/// template sums) use the unchecked evaluators, which remain valid wherever
/// the orbit data takes them.
class Model {
public:
    Model(ModelKind kind, ModelParams params);

    ModelKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const ModelParams& params() const { return params_; }

    Vec3 forward(const Vec3& x) const;
    Vec3 inverse(const Vec3& x) const;
    Vec3 iterate(const Vec3& x, int n) const;  // n may be negative

    /// Jet of f (or f^-1) at x to the given order, unchecked domain.
    JetMap forward_jet(const Vec3& x, int order) const;
    JetMap inverse_jet(const Vec3& x, int order) const;

    Mat3 forward_derivative(const Vec3& x) const;
    Mat3 inverse_derivative(const Vec3& x) const;

    bool in_working_box(const Vec3& x) const;

    /// Hash of (kind, params); keys the orbit/chart caches.
    std::uint64_t hash() const;

private:
    ModelKind kind_;
    ModelParams params_;
    std::string name_;
};

/// Spec'd operation: jet of f at x to order K. Rejects out-of-box points.
JetMap model_eval(const Model& model, const Vec3& x, int order);

/// Validates the partial hyperbolicity inequalities; throws DomainError with
/// the violated inequality in the message.
void check_partial_hyperbolicity(const ModelParams& p);

/// A model together with an orientation of time: `reversed() == true` swaps
/// the roles of f and f^-1, which swaps stable and unstable structures.
class DirectedModel {
public:
    DirectedModel(const Model& m, bool reversed) : model_(&m), reversed_(reversed) {}

    const Model& base() const { return *model_; }
    bool reversed() const { return reversed_; }

    Vec3 step(const Vec3& x) const { return reversed_ ? model_->inverse(x) : model_->forward(x); }
    Vec3 back(const Vec3& x) const { return reversed_ ? model_->forward(x) : model_->inverse(x); }
    Vec3 iterate(const Vec3& x, int n) const { return model_->iterate(x, reversed_ ? -n : n); }
    JetMap step_jet(const Vec3& x, int order) const {
        return reversed_ ? model_->inverse_jet(x, order) : model_->forward_jet(x, order);
    }
    JetMap back_jet(const Vec3& x, int order) const {
        return reversed_ ? model_->forward_jet(x, order) : model_->inverse_jet(x, order);
    }
    Mat3 step_derivative(const Vec3& x) const {
        return reversed_ ? model_->inverse_derivative(x) : model_->forward_derivative(x);
    }

    DirectedModel turned() const { return DirectedModel(*model_, !reversed_); }

private:
    const Model* model_;
    bool reversed_;
};

}  // namespace phtk::models
