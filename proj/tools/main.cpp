#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/artifacts.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/verify.hpp"
#include "leedecay/errors.hpp"

namespace {

// 0 success, 1 verification failure, 2 configuration or output error,
// 3 numerical failure (root finding, integration, grid coverage, regime).
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
    using namespace leedecay;
    using namespace leedecay::cli;

    CLI::App app{"Lee-model dissipation simulator"};
    app.set_version_flag("--version", std::string("leedecay ") + LEEDECAY_VERSION);
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    app.add_option("--config", config_path, "key=value config file (defaults used when omitted)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides [run] out)");
    app.add_option("--seed", seed, "random seed (overrides [run] seed)");
    app.add_option("--threads", threads, "worker threads for parallel loops")->check(CLI::Range(1u, 256u));
    app.require_subcommand(1);
    app.fallthrough();

    auto* pole = app.add_subcommand("pole", "physical mass, width and renormalization constants");
    auto* kernels = app.add_subcommand("kernels", "tabulate the dispersive and noise kernels");
    auto* sector = app.add_subcommand("sector", "exact survival amplitude of the one-excitation sector");
    auto* master = app.add_subcommand("master", "density-matrix evolution with decoherence");
    auto* langevin = app.add_subcommand("langevin", "stochastic amplitude ensemble");
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        RunConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        if (seed) config.seed = *seed;
        if (!out_dir.empty()) config.out_dir = out_dir;
        config.validate();

        std::vector<Artifact> artifacts;
        int status = 0;
        if (*pole) {
            artifacts = cmd_pole(config);
        } else if (*kernels) {
            artifacts = cmd_kernels(config, threads);
        } else if (*sector) {
            artifacts = cmd_sector(config, threads);
        } else if (*master) {
            artifacts = cmd_master(config);
        } else if (*langevin) {
            artifacts = cmd_langevin(config, threads);
        } else if (*verify) {
            const auto start = std::chrono::steady_clock::now();
            VerifyReport report = run_verify(config, threads, [](const CriterionResult& r) {
                std::cout << format_line(r) << std::endl;
            });
            const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::printf("%s: %zu criteria in %.1f s\n", report.passed() ? "PASSED" : "FAILED",
                        report.criteria.size(), total);
            artifacts = std::move(report.artifacts);
            status = report.passed() ? 0 : kExitVerifyFailed;
        }
        write_artifacts(config.out_dir, artifacts);
        for (const Artifact& a : artifacts) std::cout << "wrote " << (std::filesystem::path(config.out_dir) / a.name).string() << "\n";
        return status;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const OutputError& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const RootFindingError& e) {
        std::cerr << "root finding failed: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IntegrationError& e) {
        std::cerr << "integration failed at t = " << e.time() << ": " << e.what() << "\n";
        return kExitNumerical;
    } catch (const CoverageError& e) {
        std::cerr << "grid coverage: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
