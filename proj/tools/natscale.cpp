#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "natscale/config.hpp"
#include "natscale/error.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app{"Natural-scale diffusion toolkit"};
    app.set_version_flag("--version", natscale::kVersion);
    std::string command, config_path, out_dir;
    std::optional<std::uint64_t> seed, paths;
    std::optional<double> lambda;
    app.add_option("command", command, "classify | eigen | green | defect | hittime | simulate | audit")
        ->required()
        ->check(CLI::IsMember({"classify", "eigen", "green", "defect", "hittime", "simulate", "audit"}));
    app.add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory for the report and CSV files");
    app.add_option("--seed", seed, "random seed (falls back to NATSCALE_SEED)");
    app.add_option("--paths", paths, "Monte Carlo path count");
    app.add_option("--lambda", lambda, "probe lambda")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    natscale::RunConfig cfg;
    try {
        std::ifstream in(config_path);
        const auto j = nlohmann::json::parse(in);
        cfg = natscale::parse_run_config(j);
        const auto cmd = natscale::parse_command(command);
        if (j.contains("command") && cfg.command != cmd)
            throw natscale::InvalidArgument("config key 'command' disagrees with the command line");
        cfg.command = cmd;
    } catch (const natscale::RefusedVerdict& e) {
        std::cerr << "natscale: refused: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "natscale: " << e.what() << "\n";
        return 1;
    }
    if (seed) {
        cfg.seed = *seed;
    } else if (!cfg.seed) {
        if (const char* env = std::getenv("NATSCALE_SEED")) {
            try {
                cfg.seed = std::stoull(env);
            } catch (const std::exception&) {
                std::cerr << "natscale: NATSCALE_SEED is not an unsigned integer\n";
                return 1;
            }
        }
    }
    if (paths) cfg.n_paths = *paths;
    if (lambda) cfg.lambda = *lambda;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    const auto result = natscale::run(cfg);
    try {
        const fs::path dir(cfg.out_dir);
        fs::create_directories(dir);
        std::ofstream(dir / (command + ".json")) << result.report.dump(2) << "\n";
        for (const auto& [name, body] : result.csv) std::ofstream(dir / name) << body;
    } catch (const std::exception& e) {
        std::cerr << "natscale: cannot write report: " << e.what() << "\n";
        return 1;
    }
    if (result.report.contains("refused")) std::cerr << "natscale: refused: " << result.report["refused"].get<std::string>() << "\n";
    if (result.report.contains("error")) std::cerr << "natscale: " << result.report["error"].get<std::string>() << "\n";
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
}
