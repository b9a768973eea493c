// stateprep: run declarative experiment configs.
//
//   stateprep run <config.json> [--out DIR] [--seed N]
//   stateprep validate <config.json>
//   stateprep list-experiments
//
// Exit codes: 0 ok, 2 validation/parse/IO error, 3 physics error, 4 numeric error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "stateprep/cli/experiments.hpp"

namespace fs = std::filesystem;
using namespace stateprep;
using namespace stateprep::cli;

namespace
{

constexpr int kExitValidation = 2;
constexpr int kExitPhysics = 3;
constexpr int kExitNumeric = 4;

unsigned thread_budget()
{
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("STATEPREP_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) {
                threads = std::min(threads, static_cast<unsigned>(v));
            }
        } catch (const std::exception &) {
            std::cerr << "warning: ignoring malformed STATEPREP_THREADS='" << env << "'\n";
        }
    }
    return threads;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Loaded
{
    std::string text;
    json root;
    Plan plan;
};

Loaded load(const std::string &path)
{
    Loaded l;
    l.text = read_file(path);
    l.root = parse_config_text(l.text);
    l.plan = plan_experiment(l.root);
    return l;
}

int report_config_error(const ConfigError &e, const std::string &path)
{
    for (const auto &d : e.diagnostics) {
        std::cerr << path << ": " << d.path << ": " << d.message << '\n';
    }
    return kExitValidation;
}

int cmd_validate(const std::string &path)
{
    try {
        const Loaded l = load(path);
        std::cout << "OK";
        if (!l.plan.resolved.empty()) {
            std::cout << " " << l.plan.resolved.dump();
        }
        std::cout << '\n';
        return 0;
    } catch (const ConfigError &e) {
        return report_config_error(e, path);
    }
}

int cmd_run(const std::string &path, const std::string &out_dir, std::optional<std::uint64_t> seed_override)
{
    Loaded l;
    try {
        l = load(path);
    } catch (const ConfigError &e) {
        return report_config_error(e, path);
    }
    const Plan &plan = l.plan;
    const std::uint64_t seed = seed_override ? *seed_override : plan.seed.value_or(0);

    Outcome outcome;
    try {
        outcome = plan.run(seed, thread_budget());
    } catch (const PhysicsError &e) {
        std::cerr << plan.kind << "[" << plan.name << "]: physics error: " << e.what() << '\n';
        return kExitPhysics;
    } catch (const NumericError &e) {
        std::cerr << plan.kind << "[" << plan.name << "]: numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const ValidationError &e) {
        std::cerr << plan.kind << "[" << plan.name << "]: " << e.what() << '\n';
        return kExitValidation;
    }

    const std::string hash = hex64(fnv1a64(l.text));
    outcome.table.config_hash = hash;
    outcome.table.tool_version = STATEPREP_VERSION;
    outcome.table.timestamp = utc_timestamp();

    const json output = l.root.value("output", json::object());
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    const fs::path csv_path = dir / output.value("csv", plan.name + ".csv");
    const fs::path summary_path = dir / output.value("summary", plan.name + ".summary.json");

    json summary = outcome.summary;
    summary["experiment"] = plan.kind;
    summary["name"] = plan.name;
    summary["seed"] = seed;
    summary["config_hash"] = hash;
    summary["tool_version"] = STATEPREP_VERSION;
    summary["resolved"] = plan.resolved;
    summary["csv"] = csv_path.filename().string();

    try {
        for (const fs::path &p : {csv_path, summary_path}) {
            if (p.has_parent_path()) {
                fs::create_directories(p.parent_path());
            }
        }
        std::ofstream csv(csv_path, std::ios::binary);
        write_csv(csv, outcome.table);
        std::ofstream js(summary_path, std::ios::binary);
        js << summary.dump(2) << '\n';
        if (!csv || !js) {
            throw std::runtime_error("write failed");
        }
    } catch (const std::exception &e) {
        std::cerr << "cannot write results to " << dir.string() << ": " << e.what() << '\n';
        return kExitValidation;
    }

    std::cout << plan.kind << "[" << plan.name << "]: " << outcome.line << " -> " << csv_path.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"stateprep: conditional states of entangled photons after finite-duration measurements"};
    app.set_version_flag("--version", STATEPREP_VERSION);
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    auto *run = app.add_subcommand("run", "run an experiment config and write CSV + JSON summary");
    run->add_option("config", config, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (default: current directory)");
    run->add_option("--seed", seed, "override the config seed");

    auto *validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config, "experiment config (JSON)")->required();

    app.add_subcommand("list-experiments", "list the supported experiment kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config, out_dir, seed);
        }
        if (validate->parsed()) {
            return cmd_validate(config);
        }
        for (const auto &[kind, text] : experiment_kinds()) {
            std::cout << kind << "\t" << text << (is_stochastic(kind) ? " (seed required)" : "") << '\n';
        }
        return 0;
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const PhysicsError &e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kExitPhysics;
    } catch (const NumericError &e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
