// Command-line front end for the correlation-network portfolio pipeline.

#include "netfolio/error.hpp"
#include "netfolio/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <functional>
#include <optional>

using namespace netfolio;

namespace {

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Config:
        return 2;
    case ErrorKind::Stage:
        return 4;
    case ErrorKind::Numerical:
        return 5;
    default:
        return 3;
    }
}

void print(const StageReport& r)
{
    fmt::print("{}: {}\n", r.stage, r.status == StageStatus::Cached ? "up to date" : "done");
    for (const auto& w : r.warnings) {
        fmt::print(stderr, "warning: {}\n", w);
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Correlation-network community detection and portfolio experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> window;
    std::optional<int> step;
    std::optional<double> tail;
    std::optional<int> m;
    std::optional<int> samples;
    std::optional<int> trials;
    std::optional<std::string> input;
    bool plot_data = false;
    bool literal_alpha = false;

    app.add_option("--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--input", input, "input panel (CSV)");
    app.add_option("--window", window, "window width in trading days");
    app.add_option("--step", step, "shift between windows");
    app.add_option("--tail", tail, "expected-shortfall tail fraction");
    app.add_option("--m", m, "portfolio size");
    app.add_option("--samples", samples, "random selections per mode and window");
    app.add_option("--trials", trials, "community-detection restarts");
    app.add_flag("--plot-data", plot_data, "also write log-log and binned plotting tables");
    app.add_flag("--literal-alpha", literal_alpha, "read alpha as the tail mass itself");

    std::function<void(const PipelineConfig&)> action;
    app.add_subcommand("synthetic", "generate a block-correlated return panel")
        ->callback([&] { action = [](const PipelineConfig& c) { print(cmd_synthetic(c)); }; });
    app.add_subcommand("correlate", "rolling-window correlation matrices")
        ->callback([&] { action = [](const PipelineConfig& c) { print(cmd_correlate(c)); }; });
    app.add_subcommand("analyze", "PMFG construction and community detection per window")
        ->callback([&] { action = [](const PipelineConfig& c) { print(cmd_analyze(c)); }; });
    app.add_subcommand("portfolio", "frontier and expected-shortfall experiments")
        ->callback([&] { action = [](const PipelineConfig& c) { print(cmd_portfolio(c)); }; });
    app.add_subcommand("run-all", "every stage in order")->callback([&] {
        action = [](const PipelineConfig& c) {
            for (const auto& r : cmd_run_all(c)) {
                print(r);
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    KeyValues overrides;
    const auto set = [&](const char* key, const auto& value) {
        if (value) {
            overrides[key] = fmt::format("{}", *value);
        }
    };
    set("seed", seed);
    set("out", out);
    set("input", input);
    set("window", window);
    set("step", step);
    set("tail", tail);
    set("m", m);
    set("samples", samples);
    set("trials", trials);
    if (plot_data) {
        overrides["plot_data"] = "true";
    }
    if (literal_alpha) {
        overrides["alpha_reading"] = "literal";
    }

    try {
        const auto cfg = load_config(config_path, overrides);
        action(cfg);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    }
    return 0;
}
