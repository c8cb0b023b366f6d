#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "grkbs/measure.hpp"

namespace grkbs {

enum class ActivationKind { relu, tanh, gaussian };
enum class EnvelopeKind { constant_one, cosine_bump };

ActivationKind activation_from_string(const std::string& s);
EnvelopeKind envelope_from_string(const std::string& s);
std::string to_string(ActivationKind a);
std::string to_string(EnvelopeKind e);

/// Integral neural feature map acting on atomic measures.
///
/// An atom theta = (w, b) contributes the scalar sigma(w.x + b) * beta(theta),
/// pushed into the output space by a fixed embedding vector of length
/// output_dim (all ones when output_weights is empty, the unit scalar for
/// output_dim == 1).
struct FeatureMapConfig {
    ActivationKind activation = ActivationKind::relu;
    EnvelopeKind envelope = EnvelopeKind::constant_one;
    ParameterBox box;                 // dim must equal input_dim + 1
    std::size_t input_dim = 1;
    std::size_t output_dim = 1;
    Eigen::VectorXd output_weights;   // optional; size output_dim when set

    void validate() const;
    Eigen::VectorXd embedding() const;
};

double activation_value(ActivationKind a, double t);
double activation_derivative(ActivationKind a, double t);

/// Envelope factor beta(theta); cosine_bump vanishes on the box boundary.
double envelope_value(EnvelopeKind e, const ParameterBox& box, std::span<const double> theta);

/// Scalar part rho(x, theta) * beta(theta) of the atom feature.
double scalar_feature(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                      std::span<const double> theta);

/// Gradient of the scalar feature with respect to theta (relu uses the
/// one-sided derivative away from the kink).
Eigen::VectorXd scalar_feature_grad(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                                    std::span<const double> theta);

/// Feature of a unit atom at theta: scalar_feature * embedding.
Eigen::VectorXd atom_feature(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                             std::span<const double> theta);

/// Linear extension of atom_feature to a measure: sum of weight_i * v(x, theta_i).
Eigen::VectorXd evaluate(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                         const AtomicMeasure& m);

/// Upper bound on ||v(x, theta)||_E over the box: dense grid scan followed
/// by coordinate-wise golden-section refinement around the incumbent.
double operator_norm_bound(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                           std::size_t grid_per_coord = 32, std::size_t refine_sweeps = 20);

/// Stack of feature maps with matching interface dimensions; the first
/// layers.size() - 1 layers carry fixed parameter measures.
struct LayerStack {
    std::vector<FeatureMapConfig> layers;
    std::vector<AtomicMeasure> parameters;  // one per non-final layer

    void validate() const;
};

/// Iterated forward pass: e0 = phi_0(x)(mu_0), e_i = phi_i(e_{i-1})(mu_i),
/// and the final layer applied to final_measure.
Eigen::VectorXd compose_forward(const LayerStack& stack, const Eigen::VectorXd& x,
                                const AtomicMeasure& final_measure);

}  // namespace grkbs
