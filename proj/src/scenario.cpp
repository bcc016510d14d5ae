#include "phtk/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace phtk::scenario {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw ParseError("trailing characters in number '" + v + "'", line);
        return d;
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        throw ParseError("expected a number, got '" + v + "'", line);
    }
}

std::string parse_string(const std::string& v, int line) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    throw ParseError("expected a quoted string, got '" + v + "'", line);
}

std::vector<double> parse_array(const std::string& v, int line) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ParseError("expected an array [..], got '" + v + "'", line);
    std::vector<double> out;
    std::string body = v.substr(1, v.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number(item, line));
    }
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    std::stringstream ss(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "params" && section != "grids" && section != "tolerances" &&
                section != "qni")
                throw ParseError("unknown section [" + section + "]", lineno);
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        std::string fq = section.empty() ? key : section + "." + key;

        if (fq == "model") s.model_name = parse_string(val, lineno);
        else if (fq == "order") s.order = static_cast<int>(parse_number(val, lineno));
        else if (fq == "ell") s.ell = static_cast<int>(parse_number(val, lineno));
        else if (fq == "radius") s.radius = parse_number(val, lineno);
        else if (fq == "out_dir") s.out_dir = parse_string(val, lineno);
        else if (fq == "seed") s.seed = static_cast<std::uint64_t>(parse_number(val, lineno));
        else if (fq == "anchor") {
            auto a = parse_array(val, lineno);
            if (a.size() != 3) throw ParseError("anchor needs 3 components", lineno);
            s.anchor = {a[0], a[1], a[2]};
        } else if (fq == "params.l1") s.params.l1 = parse_number(val, lineno);
        else if (fq == "params.l2") s.params.l2 = parse_number(val, lineno);
        else if (fq == "params.l3") s.params.l3 = parse_number(val, lineno);
        else if (fq == "params.eps") s.params.eps = parse_number(val, lineno);
        else if (fq == "grids.t") s.t_grid = static_cast<int>(parse_number(val, lineno));
        else if (fq == "grids.s") s.s_grid = static_cast<int>(parse_number(val, lineno));
        else if (fq == "grids.kmin") s.k_min = static_cast<int>(parse_number(val, lineno));
        else if (fq == "grids.kmax") s.k_max = static_cast<int>(parse_number(val, lineno));
        else if (fq == "qni.v") s.qni_v = parse_number(val, lineno);
        else if (fq == "qni.nu") s.qni_nu = parse_number(val, lineno);
        else if (fq == "qni.samples_per_scale")
            s.samples_per_scale = static_cast<int>(parse_number(val, lineno));
        else if (fq == "tolerances.conjugacy") s.tol_conjugacy = parse_number(val, lineno);
        else if (fq == "tolerances.poly_tail") s.tol_poly_tail = parse_number(val, lineno);
        else if (fq == "tolerances.frame") s.tol_frame = parse_number(val, lineno);
        else if (fq == "tolerances.eps_dev") s.eps_dev = parse_number(val, lineno);
        else throw ParseError("unknown key '" + fq + "'", lineno);
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("path", "cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

void validate(const Scenario& s) {
    models::model_kind_from_name(s.model_name);  // throws on bad name
    try {
        models::check_partial_hyperbolicity(s.params);
    } catch (const models::DomainError& e) {
        throw ValidationError("params", e.what());
    }
    if (!(s.radius > 0.0 && s.radius <= 1.0))
        throw ValidationError("radius", "must lie in (0, 1]");
    if (s.order < 1 || s.order > 16) throw ValidationError("order", "must lie in 1..16");
    if (s.ell < 0) throw ValidationError("ell", "must be >= 0");
    if (s.order < s.ell + 2)
        throw ValidationError("order", "K >= ell+2 required (K=" + std::to_string(s.order) +
                                           ", ell=" + std::to_string(s.ell) + ")");
    if (s.t_grid < 2 || s.s_grid < 2) throw ValidationError("grids", "grids must be non-empty");
    if (s.k_min < 1 || s.k_max < s.k_min)
        throw ValidationError("grids", "need 1 <= kmin <= kmax");
    if (s.samples_per_scale < 2)
        throw ValidationError("qni.samples_per_scale", "must be >= 2");
    if (!(s.qni_nu > 0.0 && s.qni_nu < 1.0)) throw ValidationError("qni.nu", "must lie in (0,1)");
    if (!(s.qni_v > 0.0)) throw ValidationError("qni.v", "must be positive");
    for (double c : s.anchor)
        if (std::fabs(c) > 1.0)
            throw ValidationError("anchor", "must lie in the working box [-1,1]^3");
}

models::Model Scenario::make_model() const {
    return models::Model(models::model_kind_from_name(model_name), params);
}

std::string Scenario::canonical_text() const {
    char buf[2048];
    std::snprintf(buf, sizeof(buf),
                  "model=%s l1=%.17g l2=%.17g l3=%.17g eps=%.17g "
                  "anchor=%.17g,%.17g,%.17g order=%d ell=%d radius=%.17g "
                  "t=%d s=%d kmin=%d kmax=%d sps=%d V=%.17g nu=%.17g epsdev=%.17g "
                  "tolc=%.17g tolp=%.17g tolf=%.17g seed=%llu",
                  model_name.c_str(), params.l1, params.l2, params.l3, params.eps, anchor[0],
                  anchor[1], anchor[2], order, ell, radius, t_grid, s_grid, k_min, k_max,
                  samples_per_scale, qni_v, qni_nu, eps_dev, tol_conjugacy, tol_poly_tail,
                  tol_frame, static_cast<unsigned long long>(seed));
    return std::string(buf);
}

std::uint64_t Scenario::hash() const {
    std::string t = canonical_text();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : t) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace phtk::scenario
