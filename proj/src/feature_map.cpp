#include "grkbs/feature_map.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace grkbs {

ActivationKind activation_from_string(const std::string& s) {
    if (s == "relu") return ActivationKind::relu;
    if (s == "tanh") return ActivationKind::tanh;
    if (s == "gaussian") return ActivationKind::gaussian;
    throw std::invalid_argument("unknown activation: " + s);
}

EnvelopeKind envelope_from_string(const std::string& s) {
    if (s == "constant_one") return EnvelopeKind::constant_one;
    if (s == "cosine_bump") return EnvelopeKind::cosine_bump;
    throw std::invalid_argument("unknown envelope: " + s);
}

std::string to_string(ActivationKind a) {
    switch (a) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::gaussian: return "gaussian";
    }
    return "?";
}

std::string to_string(EnvelopeKind e) {
    return e == EnvelopeKind::constant_one ? "constant_one" : "cosine_bump";
}

void FeatureMapConfig::validate() const {
    if (input_dim < 1 || output_dim < 1) {
        throw std::invalid_argument("FeatureMapConfig: dimensions must be positive");
    }
    if (box.dim() != input_dim + 1) {
        throw std::invalid_argument("FeatureMapConfig: box dim must be input_dim + 1");
    }
    if (output_weights.size() != 0 && static_cast<std::size_t>(output_weights.size()) != output_dim) {
        throw std::invalid_argument("FeatureMapConfig: output_weights size must equal output_dim");
    }
}

Eigen::VectorXd FeatureMapConfig::embedding() const {
    if (output_weights.size() != 0) return output_weights;
    return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(output_dim));
}

double activation_value(ActivationKind a, double t) {
    switch (a) {
        case ActivationKind::relu: return t > 0.0 ? t : 0.0;
        case ActivationKind::tanh: return std::tanh(t);
        case ActivationKind::gaussian: return std::exp(-t * t);
    }
    return 0.0;
}

double activation_derivative(ActivationKind a, double t) {
    switch (a) {
        case ActivationKind::relu: return t > 0.0 ? 1.0 : 0.0;
        case ActivationKind::tanh: {
            const double th = std::tanh(t);
            return 1.0 - th * th;
        }
        case ActivationKind::gaussian: return -2.0 * t * std::exp(-t * t);
    }
    return 0.0;
}

double envelope_value(EnvelopeKind e, const ParameterBox& box, std::span<const double> theta) {
    if (e == EnvelopeKind::constant_one) return 1.0;
    double prod = 1.0;
    for (std::size_t k = 0; k < box.dim(); ++k) {
        const double t = (theta[k] - box.lower[k]) / (box.upper[k] - box.lower[k]);
        prod *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t));
    }
    return prod;
}

namespace {

double preactivation(const Eigen::VectorXd& x, std::span<const double> theta) {
    double t = theta[theta.size() - 1];  // bias
    for (Eigen::Index k = 0; k < x.size(); ++k) t += theta[static_cast<std::size_t>(k)] * x[k];
    return t;
}

}  // namespace

double scalar_feature(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                      std::span<const double> theta) {
    if (static_cast<std::size_t>(x.size()) != cfg.input_dim) {
        throw std::invalid_argument("scalar_feature: input dimension mismatch");
    }
    if (theta.size() != cfg.box.dim()) {
        throw std::invalid_argument("scalar_feature: theta dimension mismatch");
    }
    return activation_value(cfg.activation, preactivation(x, theta)) *
           envelope_value(cfg.envelope, cfg.box, theta);
}

Eigen::VectorXd scalar_feature_grad(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                                    std::span<const double> theta) {
    const std::size_t d = cfg.box.dim();
    const double t = preactivation(x, theta);
    const double sigma = activation_value(cfg.activation, t);
    const double dsigma = activation_derivative(cfg.activation, t);
    const double beta = envelope_value(cfg.envelope, cfg.box, theta);

    Eigen::VectorXd grad(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        const double dt_dk = (k + 1 == d) ? 1.0 : x[static_cast<Eigen::Index>(k)];
        double g = dsigma * dt_dk * beta;
        if (cfg.envelope == EnvelopeKind::cosine_bump) {
            const double width = cfg.box.upper[k] - cfg.box.lower[k];
            const double u = (theta[k] - cfg.box.lower[k]) / width;
            const double factor = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
            // beta = prod_j factor_j; derivative of factor_k w.r.t theta_k
            const double dfactor = std::numbers::pi * std::sin(2.0 * std::numbers::pi * u) / width;
            if (factor != 0.0) {
                g += sigma * (beta / factor) * dfactor;
            } else {
                double rest = 1.0;
                for (std::size_t j = 0; j < d; ++j) {
                    if (j == k) continue;
                    const double uj = (theta[j] - cfg.box.lower[j]) / (cfg.box.upper[j] - cfg.box.lower[j]);
                    rest *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * uj));
                }
                g += sigma * rest * dfactor;
            }
        }
        grad[static_cast<Eigen::Index>(k)] = g;
    }
    return grad;
}

Eigen::VectorXd atom_feature(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                             std::span<const double> theta) {
    return scalar_feature(cfg, x, theta) * cfg.embedding();
}

Eigen::VectorXd evaluate(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                         const AtomicMeasure& m) {
    if (!m.empty() && !(m.box() == cfg.box)) {
        throw std::invalid_argument("evaluate: measure box does not match the feature map box");
    }
    double acc = 0.0;
    for (const auto& a : m.atoms()) {
        acc += a.weight * scalar_feature(cfg, x, a.location);
    }
    return acc * cfg.embedding();
}

namespace {

// Deterministic golden-section maximization of f over [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters = 48) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

}  // namespace

double operator_norm_bound(const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                           std::size_t grid_per_coord, std::size_t refine_sweeps) {
    cfg.validate();
    const std::size_t d = cfg.box.dim();
    const double embed_norm = cfg.embedding().norm();
    const auto value = [&](std::span<const double> theta) {
        return std::abs(scalar_feature(cfg, x, theta)) * embed_norm;
    };

    // Dense scan, lowest flattened index wins ties.
    std::vector<double> theta(d), best_theta(d);
    double best = -1.0;
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> step(d);
    for (std::size_t k = 0; k < d; ++k) {
        step[k] = (cfg.box.upper[k] - cfg.box.lower[k]) / static_cast<double>(grid_per_coord - 1);
    }
    while (true) {
        for (std::size_t k = 0; k < d; ++k) theta[k] = cfg.box.lower[k] + static_cast<double>(idx[k]) * step[k];
        const double v = value(theta);
        if (v > best) {
            best = v;
            best_theta = theta;
        }
        std::size_t k = d;
        while (k > 0) {
            --k;
            if (++idx[k] < grid_per_coord) break;
            idx[k] = 0;
            if (k == 0) goto scan_done;
        }
    }
scan_done:

    // Coordinate-wise golden-section around the incumbent, radius halved per sweep.
    std::vector<double> point = best_theta;
    std::vector<double> radius = step;
    for (std::size_t sweep = 0; sweep < refine_sweeps; ++sweep) {
        for (std::size_t k = 0; k < d; ++k) {
            const double lo = std::max(cfg.box.lower[k], point[k] - radius[k]);
            const double hi = std::min(cfg.box.upper[k], point[k] + radius[k]);
            const double cand = golden_max(
                [&](double t) {
                    std::vector<double> probe = point;
                    probe[k] = t;
                    return value(probe);
                },
                lo, hi);
            std::vector<double> probe = point;
            probe[k] = cand;
            if (value(probe) > value(point)) point = probe;
        }
        for (auto& r : radius) r *= 0.5;
    }
    return std::max(best, value(point));
}

void LayerStack::validate() const {
    if (layers.empty()) throw std::invalid_argument("LayerStack: at least one layer required");
    if (parameters.size() + 1 != layers.size()) {
        throw std::invalid_argument("LayerStack: need one parameter measure per non-final layer");
    }
    for (auto& layer : layers) layer.validate();
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
        if (layers[i].output_dim != layers[i + 1].input_dim) {
            throw std::invalid_argument("LayerStack: output_dim of layer " + std::to_string(i) +
                                        " does not chain into layer " + std::to_string(i + 1));
        }
    }
}

Eigen::VectorXd compose_forward(const LayerStack& stack, const Eigen::VectorXd& x,
                                const AtomicMeasure& final_measure) {
    stack.validate();
    Eigen::VectorXd state = x;
    for (std::size_t i = 0; i + 1 < stack.layers.size(); ++i) {
        state = evaluate(stack.layers[i], state, stack.parameters[i]);
    }
    return evaluate(stack.layers.back(), state, final_measure);
}

}  // namespace grkbs
