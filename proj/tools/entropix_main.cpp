// entropix — CLI for the XY-chain entropic fluctuation toolkit.
//
//   entropix <task> --config <file> [--out <dir>] [--threads <n>] [--tol <x>]
//
// Exit status: 0 success, 2 config error, 3 numerical-verification failure,
// 4 resource cap exceeded.
#include "entropix/errors.hpp"
#include "entropix/runner.hpp"
#include "entropix/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCap = 4;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    double tol = 0.0;
};

int execute(const std::string& task, const CommonOptions& opts) {
    using namespace entropix;
    try {
        runner::RunConfig config = runner::load_config_file(opts.config_path);
        if (config.task != task) {
            // the subcommand is authoritative; a mismatching config task is a
            // config error rather than a silent override
            if (!config.task.empty() && config.task != task) {
                throw ConfigError("config.task '" + config.task +
                                  "' does not match subcommand '" + task + "'");
            }
        }
        if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
        if (opts.threads > 0) config.threads = opts.threads;
        if (opts.tol > 0) {
            config.quad_tol = opts.tol;
            config.oracle_tol = opts.tol;
        }
        const runner::RunOutcome outcome = runner::run(config);
        for (const auto& f : outcome.written_files) {
            std::cout << "wrote " << f << "\n";
        }
        if (!outcome.verification_passed) {
            std::cerr << "verification FAILED:\n" << outcome.failures.dump(2) << "\n";
            return kExitNumeric;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CapError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kExitCap;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropic fluctuations of open XY spin chains"};
    app.set_version_flag("--version", entropix::kVersion);
    app.require_subcommand(1);

    const std::vector<std::string> tasks = {"functional", "limit",  "scattering", "flux",
                                            "rates",      "verify", "converge"};
    const std::map<std::string, std::string> descriptions = {
        {"functional", "finite-volume, finite-time entropic functional sweep"},
        {"limit", "large-time functionals e_+ / e_{p,+} from scattering data"},
        {"scattering", "m-functions, transmission, and the transport window"},
        {"flux", "Landauer-Buttiker steady fluxes and entropy production"},
        {"rates", "large-deviation rate functions via Legendre transform"},
        {"verify", "determinant formulas against the 2^N Fock oracle"},
        {"converge", "finite-time functionals against their large-time limits"}};

    CommonOptions opts;
    std::string chosen;
    for (const auto& task : tasks) {
        CLI::App* sub = app.add_subcommand(task, descriptions.at(task));
        sub->add_option("--config", opts.config_path, "JSON run configuration (schema v1)")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--threads", opts.threads, "worker threads (overrides config)");
        sub->add_option("--tol", opts.tol, "quadrature/oracle tolerance (overrides config)");
        sub->callback([&chosen, task] { chosen = task; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }
    return execute(chosen, opts);
}
