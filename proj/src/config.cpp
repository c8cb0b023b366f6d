#include "grkbs/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace grkbs {

std::function<double(double)> CoefficientSpec::to_callable() const {
    if (kind == "constant") {
        const double v = value;
        return [v](double) { return v; };
    }
    if (kind == "affine") {
        const double a0 = intercept, a1 = slope;
        return [a0, a1](double y) { return a0 + a1 * y; };
    }
    throw std::invalid_argument("unknown coefficient kind: " + kind);
}

namespace {

CoefficientSpec parse_coefficient(const nlohmann::json& j) {
    CoefficientSpec spec;
    if (j.is_number()) {
        spec.kind = "constant";
        spec.value = j.get<double>();
        return spec;
    }
    spec.kind = j.at("kind").get<std::string>();
    if (spec.kind == "constant") {
        spec.value = j.at("value").get<double>();
    } else if (spec.kind == "affine") {
        spec.intercept = j.at("intercept").get<double>();
        spec.slope = j.value("slope", 0.0);
    } else {
        throw std::invalid_argument("unknown coefficient kind: " + spec.kind);
    }
    return spec;
}

FeatureMapConfig parse_feature(const nlohmann::json& j) {
    FeatureMapConfig cfg;
    cfg.activation = activation_from_string(j.at("activation").get<std::string>());
    cfg.envelope = envelope_from_string(j.value("envelope", std::string("constant_one")));
    cfg.box = ParameterBox(j.at("box").at("lower").get<std::vector<double>>(),
                           j.at("box").at("upper").get<std::vector<double>>());
    cfg.input_dim = j.at("input_dim").get<std::size_t>();
    cfg.output_dim = j.at("output_dim").get<std::size_t>();
    if (j.contains("output_weights")) {
        const auto w = j.at("output_weights").get<std::vector<double>>();
        cfg.output_weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
    cfg.validate();
    return cfg;
}

void parse_solver(const nlohmann::json& j, SolverOptions& opts) {
    opts.lambda = j.value("lambda", opts.lambda);
    opts.max_atoms = j.value("max_atoms", opts.max_atoms);
    opts.max_iters = j.value("max_iters", opts.max_iters);
    opts.certificate_grid = j.value("certificate_grid", opts.certificate_grid);
    opts.local_ascent_steps = j.value("local_ascent_steps", opts.local_ascent_steps);
    opts.fc_iters = j.value("fc_iters", opts.fc_iters);
    opts.tol_objective = j.value("tol_objective", opts.tol_objective);
    opts.prune_tol = j.value("prune_tol", opts.prune_tol);
    opts.merge_tol = j.value("merge_tol", opts.merge_tol);
    opts.seed = j.value("seed", opts.seed);
    opts.validate();
}

PdeBlock parse_pde(const nlohmann::json& j) {
    PdeBlock pde;
    pde.length = j.value("length", 1.0);
    const auto& gp = j.at("grid_points");
    if (gp.is_array()) {
        pde.grid_points = gp.get<std::vector<std::size_t>>();
    } else {
        pde.grid_points = {gp.get<std::size_t>()};
    }
    pde.modes = j.value("modes", std::size_t{1});
    if (j.contains("k_coeff")) pde.k_coeff = parse_coefficient(j.at("k_coeff"));
    if (j.contains("a_coeff")) pde.a_coeff = parse_coefficient(j.at("a_coeff"));
    if (j.contains("profile")) pde.profile = j.at("profile").get<std::vector<double>>();
    return pde;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);

    ExperimentConfig cfg;
    cfg.mode = j.at("mode").get<std::string>();
    if (cfg.mode != "train" && cfg.mode != "train_pmann" && cfg.mode != "verify_quotient" &&
        cfg.mode != "pde_convergence") {
        throw std::invalid_argument("unknown mode: " + cfg.mode);
    }

    if (j.contains("feature")) {
        cfg.feature = parse_feature(j.at("feature"));
        cfg.has_feature = true;
    }
    if (j.contains("pde")) {
        cfg.pde = parse_pde(j.at("pde"));
        cfg.has_pde = true;
    }
    if (j.contains("solver")) parse_solver(j.at("solver"), cfg.solver);
    cfg.dataset_path = j.value("dataset_path", std::string());
    cfg.output_dir = j.value("output_dir", std::string());
    cfg.seed = j.value("seed", std::uint64_t{0});

    const bool is_train = cfg.mode == "train" || cfg.mode == "train_pmann";
    if (is_train) {
        if (!cfg.has_feature) throw std::invalid_argument("mode " + cfg.mode + " requires a feature block");
        if (cfg.dataset_path.empty()) throw std::invalid_argument("mode " + cfg.mode + " requires dataset_path");
    }
    if ((cfg.mode == "train_pmann" || cfg.mode == "pde_convergence") && !cfg.has_pde) {
        throw std::invalid_argument("mode " + cfg.mode + " requires a pde block");
    }
    if (cfg.output_dir.empty()) throw std::invalid_argument("output_dir must be set");

    if (const char* env = std::getenv("GRKBS_SEED")) {
        std::size_t used = 0;
        const std::string text(env);
        unsigned long long parsed = 0;
        try {
            parsed = std::stoull(text, &used, 10);
        } catch (const std::exception&) {
            throw std::invalid_argument("GRKBS_SEED must be a decimal integer");
        }
        if (used != text.size()) throw std::invalid_argument("GRKBS_SEED must be a decimal integer");
        cfg.seed = static_cast<std::uint64_t>(parsed);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

}  // namespace grkbs
