#include "grkbs/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "grkbs/dataset.hpp"
#include "grkbs/pde.hpp"
#include "grkbs/solver.hpp"
#include "grkbs/verification.hpp"

namespace grkbs {

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string report_json(const ExperimentConfig& cfg, const SparseSolution& sol) {
    nlohmann::ordered_json j;
    j["mode"] = cfg.mode;
    j["objective"] = sol.objective;
    j["atom_count"] = sol.atom_count;
    j["bound_mN"] = sol.bound_mN;
    j["certificate_sup"] = sol.certificate_sup;
    j["converged"] = sol.converged;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

int run_train(const ExperimentConfig& cfg) {
    const bool pmann = cfg.mode == "train_pmann";
    const auto started = std::chrono::steady_clock::now();
    const auto elapsed_ms = [&]() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - started)
            .count();
    };

    FeatureMapConfig fcfg = cfg.feature;
    std::unique_ptr<AtomFeatureMap> map;
    if (pmann) {
        if (cfg.pde.grid_points.size() != 1) {
            throw std::invalid_argument("train_pmann requires exactly one grid_points value");
        }
        EllipticProblem problem;
        problem.length = cfg.pde.length;
        problem.grid_points = cfg.pde.grid_points[0];
        problem.k_coeff = cfg.pde.k_coeff.to_callable();
        problem.a_coeff = cfg.pde.a_coeff.to_callable();
        auto op = assemble(problem);
        auto basis = eigenbasis(op, cfg.pde.modes);
        fcfg.output_dim = op.size();
        if (!cfg.pde.profile.empty()) {
            if (cfg.pde.profile.size() != op.size()) {
                throw std::invalid_argument("pde profile length must match grid_points");
            }
            fcfg.output_weights = Eigen::Map<const Eigen::VectorXd>(
                cfg.pde.profile.data(), static_cast<Eigen::Index>(cfg.pde.profile.size()));
        } else {
            fcfg.output_weights = default_profile(op);
        }
        map = std::make_unique<PmannFeatureMap>(std::move(op), std::move(basis), fcfg);
    } else {
        map = std::make_unique<DirectFeatureMap>(fcfg);
    }

    const TrainingSet data = load_dataset(cfg.dataset_path, fcfg.input_dim, map->output_dim());

    std::vector<MetricsRecord> metrics;
    const SparseSolution solution =
        solve_atp(*map, data, cfg.solver, [&](const IterationStat& s) {
            metrics.push_back({s.step, s.objective, s.atom_count, s.certificate_sup, elapsed_ms()});
        });

    const std::filesystem::path out_dir(cfg.output_dir);
    write_text_file((out_dir / "model.json").string(), to_json_string(solution, 2) + "\n");
    emit_metrics(metrics, (out_dir / "metrics.jsonl").string());
    write_text_file((out_dir / "report.json").string(), report_json(cfg, solution) + "\n");
    return solution.converged ? 0 : 2;
}

int run_verify_quotient(const ExperimentConfig& cfg) {
    const auto records = run_quotient_suite(cfg.seed);
    const std::filesystem::path out_dir(cfg.output_dir);
    write_text_file((out_dir / "quotient_report.json").string(), to_json_string(records) + "\n");
    bool all_pass = true;
    for (const auto& r : records) all_pass = all_pass && r.pass;
    if (!all_pass) {
        std::cerr << "verify_quotient: one or more checks failed\n";
        return 1;
    }
    return 0;
}

int run_pde_convergence(const ExperimentConfig& cfg) {
    if (cfg.pde.grid_points.size() < 2) {
        throw std::invalid_argument("pde_convergence requires at least two grid_points values");
    }
    if (!cfg.pde.k_coeff.is_constant()) {
        throw std::invalid_argument("pde_convergence requires a constant k coefficient");
    }
    const auto a_fun = cfg.pde.a_coeff.to_callable();

    std::string csv = "h,max_error,ratio\n";
    char buf[96];
    double prev_err = 0.0;
    for (std::size_t i = 0; i < cfg.pde.grid_points.size(); ++i) {
        const std::size_t M = cfg.pde.grid_points[i];
        const double h = cfg.pde.length / static_cast<double>(M - 1);
        const double err = manufactured_max_error(cfg.pde.length, M, cfg.pde.k_coeff.value, a_fun);
        if (i == 0) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,\n", h, err);
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", h, err, prev_err / err);
        }
        csv += buf;
        prev_err = err;
    }
    const std::filesystem::path out_dir(cfg.output_dir);
    write_text_file((out_dir / "pde_convergence.csv").string(), csv);
    return 0;
}

}  // namespace

void emit_metrics(const std::vector<MetricsRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics file: " + path);
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["step"] = r.step;
        j["objective"] = r.objective;
        j["atom_count"] = r.atom_count;
        j["certificate_sup"] = r.certificate_sup;
        j["wall_ms"] = r.wall_ms;
        out << j.dump() << '\n';
    }
}

int run_experiment(const ExperimentConfig& cfg) {
    try {
        std::filesystem::create_directories(cfg.output_dir);
        if (cfg.mode == "train" || cfg.mode == "train_pmann") return run_train(cfg);
        if (cfg.mode == "verify_quotient") return run_verify_quotient(cfg);
        if (cfg.mode == "pde_convergence") return run_pde_convergence(cfg);
        throw std::invalid_argument("unknown mode: " + cfg.mode);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace grkbs
