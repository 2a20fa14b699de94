#pragma once

#include "eikonal/family2d.hpp"
#include "eikonal/family3d.hpp"
#include "eikonal/residuals.hpp"
#include "eikonal/verify.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eikonal::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 1,
    kNoBranch = 2,
    kAuditGateFailure = 3,
    kSelfcheckFailure = 4,
};

/// A malformed run configuration; `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class Kind { ThreeD, TwoD };

struct Axis {
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    double at(int i) const { return count == 1 ? min : min + (max - min) * i / (count - 1); }
};

struct RunConfig {
    Kind kind = Kind::ThreeD;
    std::string g = "1";
    std::string k = "0";
    std::string h = "0";
    /// nullopt means "auto": run the closure audit and use its selection.
    std::optional<family3d::Variants> variants = family3d::Variants{};
    family3d::BranchMode branches = family3d::BranchMode::Auto;
    num::SolverConfig solver;
    std::vector<Axis> grid;
    std::optional<std::vector<double>> point;
    double fd_step = 1e-5;
    std::string output;
    std::uint64_t seed = 12345;
    int samples = 40;
    double g_min = 0.25;
    double r_base = 0.0;

    int dimension() const { return kind == Kind::ThreeD ? 4 : 3; }
};

/// Parses a JSON document. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path_or_dash);

/// "0,0.6,0,0.8" -> {0, 0.6, 0, 0.8}. Throws ConfigError.
std::vector<double> parse_point(const std::string& text);

/// Builds the families named by a config. Throws ConfigError (for parse
/// errors, "parse error in g at position 3: ...") or SingularFamilyError.
family3d::Family3D build_family3d(const RunConfig& config);
family2d::Family2D build_family2d(const RunConfig& config);

/// 3D family with resolved variants (runs the audit when they are "auto").
family3d::Family3D resolved_family3d(const RunConfig& config);

verify::AuditOptions audit_options(const RunConfig& config);
std::string audit_json(const verify::AuditReport& report, const RunConfig& config);

// Commands write their report to `out`, diagnostics to `err`, and return an
// ExitCode. Exceptions are mapped to exit codes by run_guarded.

int cmd_eval(const RunConfig& config, const std::vector<double>& point, std::ostream& out, std::ostream& err);
/// CSV over the config grid, row-major with the last axis fastest.
int cmd_grid(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Residuals, hodograph-image check and fiber closure at `samples` audit points
/// (or at the configured point). Exit 3 when a residual gate fails.
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_family2d(const RunConfig& config, const std::vector<double>& point, std::ostream& out,
    std::ostream& err);

struct SelfcheckHooks {
    /// Metric used by the plane-wave and null-vector items.
    verify::Metric metric;
};

int cmd_selfcheck(std::ostream& out, const SelfcheckHooks& hooks = {});

/// Runs a command body, mapping ConfigError/ParseError to 1 and other
/// library errors to `fallback`.
int run_guarded(const std::function<int()>& body, std::ostream& err, int fallback = kConfigError);

} // namespace eikonal::cli
