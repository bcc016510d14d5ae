#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phtk/model.hpp"

namespace phtk::scenario {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : std::runtime_error("scenario field '" + field + "': " + what), field(field) {}
    std::string field;
};

/// Fully validated run configuration. Defaults match the built-in models.
struct Scenario {
    std::string model_name = "MODEL-A";
    models::ModelParams params;
    linalg::Vec3 anchor{0.0, 0.0, 0.0};
    int order = 8;        // jet order K
    int ell = 0;          // requested template order
    double radius = 0.5;  // leaf validity radius rho
    int t_grid = 257;
    int s_grid = 33;
    int k_min = 2;
    int k_max = 8;
    int samples_per_scale = 33;
    double qni_v = 3.0;
    double qni_nu = 0.1;
    double eps_dev = 0.01;
    double tol_conjugacy = 1e-7;
    double tol_poly_tail = 1e-8;
    double tol_frame = 1e-9;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    models::Model make_model() const;
    std::uint64_t hash() const;
    /// Canonical serialization used for hashing and the manifest.
    std::string canonical_text() const;
};

/// Parses the TOML-like scenario format; unknown keys are errors.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Checks all invariants eagerly; throws ValidationError naming the field.
void validate(const Scenario& s);

}  // namespace phtk::scenario
