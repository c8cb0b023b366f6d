#include <iostream>
#include <string>

#include "grkbs/config.hpp"
#include "grkbs/experiment.hpp"

namespace {

void print_usage(const char* prog) {
    std::cerr << "Usage:\n"
              << "  " << prog << " run <config.json> [--output-dir DIR]\n"
              << "  " << prog << " verify <config.json>\n"
              << "\n"
              << "Exit status: 0 success, 2 non-converged training run, 1 error.\n"
              << "GRKBS_SEED overrides the config seed when set.\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        print_usage(argv[0]);
        return 1;
    }
    const std::string command = argv[1];
    const std::string config_path = argv[2];

    std::string output_dir_override;
    for (int i = 3; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--output-dir" && i + 1 < argc) {
            output_dir_override = argv[++i];
        } else {
            std::cerr << "unknown option: " << arg << "\n";
            print_usage(argv[0]);
            return 1;
        }
    }

    try {
        grkbs::ExperimentConfig cfg = grkbs::load_experiment_config(config_path);
        if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
        if (command == "run") {
            return grkbs::run_experiment(cfg);
        }
        if (command == "verify") {
            cfg.mode = "verify_quotient";
            return grkbs::run_experiment(cfg);
        }
        std::cerr << "unknown command: " << command << "\n";
        print_usage(argv[0]);
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
