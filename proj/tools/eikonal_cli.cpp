#include "eikonal/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace eikonal::cli;

struct CommonArgs {
    std::string config_path;
    std::string config_flag;
    std::string point;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("path", args.config_path, "config file, or - for standard input");
    cmd->add_option("--config", args.config_flag, "config file, or - for standard input");
    cmd->add_option("--point", args.point, "spacetime point, comma separated");
    cmd->add_option("--out", args.out, "output path (default: config output, else stdout)");
    cmd->add_option("--seed", args.seed, "random seed");
    cmd->add_option("--samples", args.samples, "sample count for audit and verify");
}

RunConfig load(const CommonArgs& args)
{
    const std::string path = !args.config_flag.empty() ? args.config_flag : args.config_path;
    if (path.empty())
        throw ConfigError("config", "a config path (or -) is required");
    RunConfig config = load_config(path);
    if (args.seed)
        config.seed = *args.seed;
    if (args.samples) {
        if (*args.samples < 1)
            throw ConfigError("samples", "samples must be ≥ 1");
        config.samples = *args.samples;
    }
    if (!args.point.empty())
        config.point = parse_point(args.point);
    if (!args.out.empty())
        config.output = args.out;
    return config;
}

std::vector<double> required_point(const RunConfig& config)
{
    if (!config.point)
        throw ConfigError("point", "a point is required (--point or config \"point\")");
    return *config.point;
}

// Runs `body` against a buffer, then copies it to the configured output.
int with_output(const RunConfig& config, const std::function<int(std::ostream&)>& body)
{
    std::ostringstream buf;
    const int code = body(buf);
    if (config.output.empty()) {
        std::cout << buf.str();
        return code;
    }
    std::ofstream file(config.output, std::ios::binary);
    if (!file || !(file << buf.str()) || !file.flush())
        throw ConfigError("output", "cannot write output file " + config.output);
    return code;
}

std::array<double, 4> parse_metric(const std::string& text)
{
    const auto parts = parse_point(text);
    if (parts.size() != 4)
        throw ConfigError("metric", "metric needs four diagonal entries");
    return {parts[0], parts[1], parts[2], parts[3]};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact parametric solutions of the coupled eikonal system"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* eval = app.add_subcommand("eval", "evaluate all branches at one point");
    auto* grid = app.add_subcommand("grid", "evaluate the config grid and write CSV");
    auto* verify = app.add_subcommand("verify", "residual, hodograph-image and fiber checks");
    auto* audit = app.add_subcommand("audit", "closure variant audit, JSON report");
    auto* fam2d = app.add_subcommand("family2d", "evaluate a 2+1D family at one point");
    auto* selfcheck = app.add_subcommand("selfcheck", "run the built-in check suite");
    for (auto* cmd : {eval, grid, verify, audit, fam2d})
        add_common(cmd, args);
    std::string metric;
    selfcheck->add_option("--metric", metric, "diagonal metric override (fault injection)")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kConfigError;
    }

    auto& err = std::cerr;
    if (selfcheck->parsed()) {
        return run_guarded(
            [&] {
                SelfcheckHooks hooks;
                if (!metric.empty())
                    hooks.metric.diag = parse_metric(metric);
                return cmd_selfcheck(std::cout, hooks);
            },
            err);
    }
    return run_guarded(
        [&]() -> int {
            const RunConfig config = load(args);
            if (eval->parsed()) {
                const auto point = required_point(config);
                return with_output(config, [&](std::ostream& o) { return cmd_eval(config, point, o, err); });
            }
            if (grid->parsed())
                return with_output(config, [&](std::ostream& o) { return cmd_grid(config, o, err); });
            if (verify->parsed())
                return with_output(config, [&](std::ostream& o) { return cmd_verify(config, o, err); });
            if (audit->parsed())
                return with_output(config, [&](std::ostream& o) { return cmd_audit(config, o, err); });
            const auto point = required_point(config);
            return with_output(config, [&](std::ostream& o) { return cmd_family2d(config, point, o, err); });
        },
        err);
}
