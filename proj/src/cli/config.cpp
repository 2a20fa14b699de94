#include "eikonal/cli.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace eikonal::cli {

using nlohmann::json;

namespace {

const json* find(const json& obj, const std::string& key)
{
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& field)
{
    if (!j.is_number())
        throw ConfigError(field, field + " must be a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& field)
{
    if (!j.is_number_integer())
        throw ConfigError(field, field + " must be an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& field)
{
    if (!j.is_string())
        throw ConfigError(field, field + " must be a string");
    return j.get<std::string>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix)
{
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError(prefix + key, "unknown key " + prefix + key);
}

num::SolverConfig parse_solver(const json& j)
{
    if (!j.is_object())
        throw ConfigError("solver", "solver must be an object");
    reject_unknown(j,
        {"tol_residual", "tol_step", "max_iterations", "damping", "max_backtracks", "seed_grid_radius",
            "seed_grid_count", "dedupe_distance", "rcond_min", "boundary_margin"},
        "solver.");
    num::SolverConfig s;
    auto num_field = [&](const char* key, double& slot) {
        if (const json* v = find(j, key))
            slot = number(*v, std::string("solver.") + key);
    };
    auto int_field = [&](const char* key, int& slot) {
        if (const json* v = find(j, key))
            slot = integer(*v, std::string("solver.") + key);
    };
    num_field("tol_residual", s.tol_residual);
    num_field("tol_step", s.tol_step);
    int_field("max_iterations", s.max_iterations);
    num_field("damping", s.damping);
    int_field("max_backtracks", s.max_backtracks);
    num_field("seed_grid_radius", s.seed_grid_radius);
    int_field("seed_grid_count", s.seed_grid_count);
    num_field("dedupe_distance", s.dedupe_distance);
    num_field("rcond_min", s.rcond_min);
    num_field("boundary_margin", s.boundary_margin);
    try {
        s.validate();
    } catch (const PreconditionError& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.substr(0, msg.find(' ')), msg);
    }
    return s;
}

std::vector<double> number_array(const json& j, const std::string& field, std::size_t size)
{
    if (!j.is_array() || j.size() != size)
        throw ConfigError(field, field + " must be an array of " + std::to_string(size) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < size; ++i)
        out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<Axis> parse_grid(const json& j, std::size_t dim)
{
    if (!j.is_object())
        throw ConfigError("grid", "grid must be an object with min, max, count arrays");
    reject_unknown(j, {"min", "max", "count"}, "grid.");
    for (const char* key : {"min", "max", "count"})
        if (!find(j, key))
            throw ConfigError(std::string("grid.") + key, std::string("grid.") + key + " is required");
    const auto lo = number_array(j["min"], "grid.min", dim);
    const auto hi = number_array(j["max"], "grid.max", dim);
    const json& counts = j["count"];
    if (!counts.is_array() || counts.size() != dim)
        throw ConfigError("grid.count", "grid.count must be an array of " + std::to_string(dim) + " integers");
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < dim; ++i) {
        const int n = integer(counts[i], "grid.count[" + std::to_string(i) + "]");
        if (n < 1)
            throw ConfigError("grid.count", "grid counts must be >= 1");
        axes.push_back({lo[i], hi[i], n});
    }
    return axes;
}

family3d::Variants parse_variants(const json& j)
{
    if (!j.is_object())
        throw ConfigError("variants", "variants must be \"auto\" or an object");
    reject_unknown(j, {"constraint", "p", "r"}, "variants.");
    family3d::Variants v;
    if (const json* c = find(j, "constraint")) {
        const auto parsed = family3d::parse_constraint_variant(text(*c, "variants.constraint"));
        if (!parsed)
            throw ConfigError("variants.constraint", "unknown constraint variant " + c->dump());
        v.constraint = *parsed;
    }
    if (const json* p = find(j, "p")) {
        const auto parsed = family3d::parse_p_variant(text(*p, "variants.p"));
        if (!parsed)
            throw ConfigError("variants.p", "unknown p variant " + p->dump());
        v.p = *parsed;
    }
    if (const json* r = find(j, "r")) {
        const auto parsed = family3d::parse_r_variant(text(*r, "variants.r"));
        if (!parsed)
            throw ConfigError("variants.r", "unknown r variant " + r->dump());
        v.r = *parsed;
    }
    return v;
}

} // namespace

RunConfig parse_config(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("config", "config must be a JSON object");
    reject_unknown(doc,
        {"kind", "g", "k", "h", "variants", "branches", "solver", "grid", "point", "fd_step", "output", "seed",
            "samples", "g_min", "r_base"},
        "");

    RunConfig c;
    if (const json* v = find(doc, "kind")) {
        const std::string kind = text(*v, "kind");
        if (kind == "3d")
            c.kind = Kind::ThreeD;
        else if (kind == "2d")
            c.kind = Kind::TwoD;
        else
            throw ConfigError("kind", "kind must be \"3d\" or \"2d\"");
    }
    if (c.kind == Kind::TwoD) {
        c.g = "z";
        c.k = "0";
        c.h = "0";
    }
    if (const json* v = find(doc, "g"))
        c.g = text(*v, "g");
    if (const json* v = find(doc, "k"))
        c.k = text(*v, "k");
    if (const json* v = find(doc, "h")) {
        if (c.kind != Kind::TwoD)
            throw ConfigError("h", "h is only meaningful for kind 2d");
        c.h = text(*v, "h");
    }
    if (const json* v = find(doc, "variants")) {
        if (v->is_string()) {
            if (v->get<std::string>() != "auto")
                throw ConfigError("variants", "variants must be \"auto\" or an object");
            if (c.kind != Kind::ThreeD)
                throw ConfigError("variants", "\"auto\" variants are only permitted for kind 3d");
            c.variants.reset();
        } else {
            c.variants = parse_variants(*v);
        }
    }
    if (const json* v = find(doc, "branches")) {
        const auto m = family3d::parse_branch_mode(text(*v, "branches"));
        if (!m)
            throw ConfigError("branches", "branches must be one of auto, positive, negative, both");
        c.branches = *m;
    }
    if (const json* v = find(doc, "solver"))
        c.solver = parse_solver(*v);
    const auto dim = static_cast<std::size_t>(c.dimension());
    if (const json* v = find(doc, "grid"))
        c.grid = parse_grid(*v, dim);
    if (const json* v = find(doc, "point"))
        c.point = number_array(*v, "point", dim);
    if (const json* v = find(doc, "fd_step")) {
        c.fd_step = number(*v, "fd_step");
        if (!(c.fd_step > 0.0))
            throw ConfigError("fd_step", "fd_step must be > 0");
    }
    if (const json* v = find(doc, "output"))
        c.output = text(*v, "output");
    if (const json* v = find(doc, "seed")) {
        if (!v->is_number_unsigned())
            throw ConfigError("seed", "seed must be a nonnegative integer");
        c.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(doc, "samples")) {
        c.samples = integer(*v, "samples");
        if (c.samples < 1)
            throw ConfigError("samples", "samples must be ≥ 1");
    }
    if (const json* v = find(doc, "g_min")) {
        c.g_min = number(*v, "g_min");
        if (!(c.g_min > 0.0))
            throw ConfigError("g_min", "g_min must be > 0");
    }
    if (const json* v = find(doc, "r_base"))
        c.r_base = number(*v, "r_base");
    return c;
}

RunConfig load_config(const std::string& path_or_dash)
{
    std::ostringstream buf;
    if (path_or_dash == "-") {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream in(path_or_dash);
        if (!in)
            throw ConfigError("config", "cannot read config file " + path_or_dash);
        buf << in.rdbuf();
    }
    return parse_config(buf.str());
}

std::vector<double> parse_point(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw ConfigError("point", "point component '" + item + "' is not a number");
        out.push_back(value);
    }
    return out;
}

namespace {

expr::Expression parse_field(const std::string& name, const std::string& source, std::vector<std::string> vars)
{
    try {
        return expr::Expression::parse(source, std::move(vars));
    } catch (const expr::ParseError& e) {
        throw ConfigError(name, "parse error in " + name + " at position " + std::to_string(e.position()) + ": "
            + e.detail());
    }
}

} // namespace

family3d::Family3D build_family3d(const RunConfig& config)
{
    if (config.kind != Kind::ThreeD)
        throw ConfigError("kind", "this command needs kind 3d");
    family3d::FamilyOptions options;
    options.variants = config.variants.value_or(family3d::Variants{});
    options.g_min = config.g_min;
    options.r_base = config.r_base;
    auto g = parse_field("g", config.g, {"z1", "z2"});
    auto k = parse_field("k", config.k, {"z1", "z2"});
    try {
        return family3d::Family3D(std::move(g), std::move(k), options);
    } catch (const Error& e) {
        throw ConfigError("g", std::string("invalid family: ") + e.what());
    }
}

family2d::Family2D build_family2d(const RunConfig& config)
{
    if (config.kind != Kind::TwoD)
        throw ConfigError("kind", "this command needs kind 2d");
    family2d::Family2DOptions options;
    options.r_base = config.r_base;
    auto g = parse_field("g", config.g, {"z"});
    auto k = parse_field("k", config.k, {"z"});
    auto h = parse_field("h", config.h, {"z"});
    try {
        return family2d::Family2D(std::move(g), std::move(k), std::move(h), options);
    } catch (const Error& e) {
        throw ConfigError("g", std::string("invalid family: ") + e.what());
    }
}

verify::AuditOptions audit_options(const RunConfig& config)
{
    verify::AuditOptions o;
    o.samples = config.samples;
    o.seed = config.seed;
    o.solver = config.solver;
    o.fd_step = config.fd_step;
    return o;
}

family3d::Family3D resolved_family3d(const RunConfig& config)
{
    family3d::Family3D family = build_family3d(config);
    if (config.variants)
        return family;
    const verify::AuditReport report = verify::closure_audit(family, audit_options(config));
    return family.with_variants(report.best().variants);
}

} // namespace eikonal::cli
