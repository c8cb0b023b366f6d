#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "grkbs/feature_map.hpp"
#include "grkbs/measure.hpp"
#include "grkbs/pde.hpp"

namespace grkbs {

struct TrainingSet {
    std::vector<Eigen::VectorXd> xs;
    std::vector<Eigen::VectorXd> ys;

    std::size_t size() const { return xs.size(); }
    void validate() const;
};

enum class LossKind { squared };

/// Pointwise loss L(y, w); squared is the only member shipped and is
/// convex, proper and coercive in w.
double loss_value(LossKind kind, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

struct SolverOptions {
    LossKind loss = LossKind::squared;
    double lambda = 1.0;
    std::size_t max_atoms = 200;
    std::size_t max_iters = 100;
    std::size_t certificate_grid = 32;   // points per theta coordinate
    std::size_t local_ascent_steps = 40;
    std::size_t fc_iters = 2000;
    double tol_objective = 1e-9;
    double prune_tol = kDefaultPruneTol;
    double merge_tol = kDefaultMergeTol;
    std::uint64_t seed = 0;
    // When nonempty, atom search is restricted to exactly these points and
    // local ascent is skipped.
    std::vector<std::vector<double>> restrict_grid;

    void validate() const;
};

struct SparseSolution {
    AtomicMeasure measure;
    double objective = 0.0;
    std::size_t atom_count = 0;
    std::size_t bound_mN = 0;
    double certificate_sup = 0.0;
    std::vector<double> history;
    bool converged = false;
};

struct IterationStat {
    std::size_t step = 0;
    double objective = 0.0;
    std::size_t atom_count = 0;
    double certificate_sup = 0.0;
};

using IterationCallback = std::function<void(const IterationStat&)>;

/// Atom feature of the form v(x, theta) = s(x, theta) * u with a range
/// profile u fixed by the configuration. Both the plain feature map and the
/// composed PDE map take this shape, which is what lets one solver drive
/// both training modes.
class AtomFeatureMap {
public:
    virtual ~AtomFeatureMap() = default;

    virtual const ParameterBox& box() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual const Eigen::VectorXd& range_profile() const = 0;
    virtual double scalar(const Eigen::VectorXd& x, std::span<const double> theta) const = 0;
    virtual Eigen::VectorXd scalar_grad(const Eigen::VectorXd& x,
                                        std::span<const double> theta) const = 0;
    /// False when the scalar feature has kinks (relu); atom search then
    /// refines by golden section instead of gradient ascent.
    virtual bool gradient_smooth() const = 0;

    Eigen::VectorXd feature(const Eigen::VectorXd& x, std::span<const double> theta) const {
        return scalar(x, theta) * range_profile();
    }
    Eigen::VectorXd evaluate_measure(const Eigen::VectorXd& x, const AtomicMeasure& m) const;
};

/// v(x, theta) = rho(x, theta) beta(theta) * embedding.
class DirectFeatureMap final : public AtomFeatureMap {
public:
    explicit DirectFeatureMap(FeatureMapConfig cfg);

    const ParameterBox& box() const override { return cfg_.box; }
    std::size_t input_dim() const override { return cfg_.input_dim; }
    std::size_t output_dim() const override { return cfg_.output_dim; }
    const Eigen::VectorXd& range_profile() const override { return embedding_; }
    double scalar(const Eigen::VectorXd& x, std::span<const double> theta) const override;
    Eigen::VectorXd scalar_grad(const Eigen::VectorXd& x,
                                std::span<const double> theta) const override;
    bool gradient_smooth() const override { return cfg_.activation != ActivationKind::relu; }

    const FeatureMapConfig& config() const { return cfg_; }

private:
    FeatureMapConfig cfg_;
    Eigen::VectorXd embedding_;
};

/// Composed map: spectral projection of the PDE solve of the grid feature,
/// v(x, theta) = rho(x, theta) beta(theta) * project(solve(profile)).
class PmannFeatureMap final : public AtomFeatureMap {
public:
    PmannFeatureMap(DiscreteEllipticOperator op, EigenBasis basis, FeatureMapConfig cfg);

    const ParameterBox& box() const override { return cfg_.box; }
    std::size_t input_dim() const override { return cfg_.input_dim; }
    std::size_t output_dim() const override { return static_cast<std::size_t>(profile_image_.size()); }
    const Eigen::VectorXd& range_profile() const override { return profile_image_; }
    double scalar(const Eigen::VectorXd& x, std::span<const double> theta) const override;
    Eigen::VectorXd scalar_grad(const Eigen::VectorXd& x,
                                std::span<const double> theta) const override;
    bool gradient_smooth() const override { return cfg_.activation != ActivationKind::relu; }

    const DiscreteEllipticOperator& op() const { return op_; }
    const EigenBasis& basis() const { return basis_; }
    const FeatureMapConfig& config() const { return cfg_; }

private:
    DiscreteEllipticOperator op_;
    EigenBasis basis_;
    FeatureMapConfig cfg_;
    Eigen::VectorXd profile_image_;
};

/// Stepwise composed feature for a whole measure (the fused path lives in
/// PmannFeatureMap::evaluate_measure).
Eigen::VectorXd pmann_feature(const DiscreteEllipticOperator& op, const EigenBasis& basis,
                              const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                              const AtomicMeasure& m);

/// Regularized empirical risk: (1/N) sum ||y_i - f_mu(x_i)||^2 + lambda * tv(mu).
double objective(const AtomFeatureMap& map, const TrainingSet& data, const AtomicMeasure& m,
                 const SolverOptions& opts);

/// Normalized dual pairing |sum_i <g_i, v(x_i, theta)>| / lambda with
/// g_i = -(2/N)(y_i - f_mu(x_i)); values above 1 certify a descent atom.
double certificate(const AtomFeatureMap& map, const TrainingSet& data, const AtomicMeasure& m,
                   std::span<const double> theta, const SolverOptions& opts);

struct AtomCandidate {
    std::vector<double> theta;
    double value = 0.0;
};

/// Grid argmax of the certificate (lowest flattened index wins ties)
/// followed by local refinement.
AtomCandidate insert_atom(const AtomFeatureMap& map, const TrainingSet& data,
                          const AtomicMeasure& m, const SolverOptions& opts);

/// Weight re-optimization over a fixed atom set by proximal gradient with
/// fixed step 1/L; monotone in the objective from any warm start.
Eigen::VectorXd fully_corrective(const AtomFeatureMap& map, const TrainingSet& data,
                                 const std::vector<std::vector<double>>& atoms,
                                 const SolverOptions& opts,
                                 const Eigen::VectorXd& warm_start = Eigen::VectorXd());

/// Conditional-gradient training loop: insert atom, fully correct, prune,
/// merge, until the certificate drops to 1 + tol or iterations run out.
SparseSolution solve_atp(const AtomFeatureMap& map, const TrainingSet& data,
                         const SolverOptions& opts, const IterationCallback& on_iteration = {});

/// Coordinate-descent minimizer over measures supported on a fixed grid;
/// independent comparison target for grid-restricted solve_atp runs.
SparseSolution grid_restricted_oracle(const AtomFeatureMap& map, const TrainingSet& data,
                                      const std::vector<std::vector<double>>& grid,
                                      const SolverOptions& opts);

std::string to_json_string(const SparseSolution& s, int indent = 2);

}  // namespace grkbs
