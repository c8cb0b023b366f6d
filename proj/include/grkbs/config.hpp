#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grkbs/feature_map.hpp"
#include "grkbs/solver.hpp"

namespace grkbs {

struct CoefficientSpec {
    std::string kind = "constant";  // constant | affine
    double value = 1.0;             // constant
    double intercept = 1.0;         // affine: intercept + slope * y
    double slope = 0.0;

    std::function<double(double)> to_callable() const;
    bool is_constant() const { return kind == "constant"; }
};

struct PdeBlock {
    double length = 1.0;
    std::vector<std::size_t> grid_points;  // one entry for training, >= 2 for convergence
    std::size_t modes = 1;
    CoefficientSpec k_coeff;
    CoefficientSpec a_coeff;
    std::vector<double> profile;           // explicit grid profile; empty = cos(pi y / L)
};

struct ExperimentConfig {
    std::string mode;  // train | train_pmann | verify_quotient | pde_convergence
    bool has_feature = false;
    FeatureMapConfig feature;
    bool has_pde = false;
    PdeBlock pde;
    SolverOptions solver;
    std::string dataset_path;
    std::string output_dir;
    std::uint64_t seed = 0;
};

/// Parse the experiment config JSON. The GRKBS_SEED environment variable,
/// when set to a decimal integer, overrides the config seed.
ExperimentConfig load_experiment_config(const std::string& path);

ExperimentConfig parse_experiment_config(const std::string& json_text);

}  // namespace grkbs
