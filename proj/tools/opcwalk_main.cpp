// Command-line entry point: opcwalk <command> --config <file.json> --out <dir>
// [--threads N] [--seed S].  Exit codes: 0 ok, 2 config error, 3 partial
// results (a budget ran out; outputs are present but incomplete).

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "opcwalk/config.hpp"
#include "opcwalk/runner.hpp"

namespace {

void print_error_json(const std::vector<std::string>& errors) {
    nlohmann::json doc;
    doc["errors"] = errors;
    std::fprintf(stderr, "%s\n", doc.dump(2).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for weighted walks on oriented percolation backbones"};

    std::string command, config_path, out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;

    std::string verbs;
    for (const std::string& name : opcwalk::command_names()) verbs += (verbs.empty() ? "" : ", ") + name;
    app.add_option("command", command, "one of: " + verbs)
        ->required()
        ->check(CLI::IsMember(opcwalk::command_names()));
    app.add_option("--config", config_path, "JSON experiment configuration")->required();
    app.add_option("--out", out_dir, "output directory (created if missing)")->required();
    app.add_option("--threads", threads, "worker threads (overrides the config)");
    app.add_option("--seed", seed, "master seed (overrides the config)")->each([&](const std::string&) {
        seed_given = true;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a config error; --help is not
    }

    std::ifstream in(config_path);
    if (!in) {
        print_error_json({"cannot read config file: " + config_path});
        return 2;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    opcwalk::ConfigParse parsed = opcwalk::validate_config(buffer.str(), command);
    if (!parsed.ok()) {
        print_error_json(parsed.errors);
        return 2;
    }

    opcwalk::ExperimentConfig cfg = parsed.config;
    cfg.output_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (seed_given) cfg.master_seed = seed;

    try {
        const opcwalk::RunManifest manifest = opcwalk::run_experiment(cfg);
        std::printf("%s: wrote %zu files to %s%s\n", cfg.command.c_str(), manifest.files.size() + 1,
                    cfg.output_dir.c_str(), manifest.partial ? " (partial: a budget ran out)" : "");
        return manifest.partial ? 3 : 0;
    } catch (const std::invalid_argument& e) {
        print_error_json({e.what()});
        return 2;
    } catch (const std::exception& e) {
        print_error_json({e.what()});
        return 1;
    }
}
