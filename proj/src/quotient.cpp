#include "grkbs/quotient.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace grkbs {

void FiniteConfig::validate() const {
    if (maps.empty()) throw std::invalid_argument("FiniteConfig: at least one input point required");
    if (dim_F == 0) throw std::invalid_argument("FiniteConfig: dim_F must be positive");
    const auto rows = maps[0].rows();
    for (const auto& A : maps) {
        if (A.rows() != rows || static_cast<std::size_t>(A.cols()) != dim_F) {
            throw std::invalid_argument("FiniteConfig: all maps must be m x dim_F with one shared m");
        }
    }
}

Eigen::MatrixXd FiniteConfig::stacked() const {
    validate();
    const auto m = maps[0].rows();
    Eigen::MatrixXd S(static_cast<Eigen::Index>(maps.size()) * m, static_cast<Eigen::Index>(dim_F));
    for (std::size_t i = 0; i < maps.size(); ++i) {
        S.middleRows(static_cast<Eigen::Index>(i) * m, m) = maps[i];
    }
    return S;
}

namespace {

NullspaceBasis nullspace_of_stack(const Eigen::MatrixXd& S) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullV);
    const auto& sing = svd.singularValues();
    const double sigma_max = sing.size() > 0 ? sing[0] : 0.0;
    const double cutoff = kNullspaceRelTol * (sigma_max > 0.0 ? sigma_max : 1.0);

    const Eigen::Index k = S.cols();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sing.size(); ++i) {
        if (sing[i] > cutoff) ++rank;
    }
    NullspaceBasis ns;
    ns.rank_deficiency = static_cast<std::size_t>(k - rank);
    ns.basis = svd.matrixV().rightCols(k - rank);
    return ns;
}

}  // namespace

NullspaceBasis nullspace(const FiniteConfig& cfg) {
    return nullspace_of_stack(cfg.stacked());
}

namespace {

double l1_norm(const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); }

// Exact minimization of t -> ||base + t * dir||_1: the objective is convex
// piecewise linear, so the minimum sits at a breakpoint.
double line_search_l1(const Eigen::VectorXd& base, const Eigen::VectorXd& dir) {
    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        if (dir[i] != 0.0) breaks.push_back(-base[i] / dir[i]);
    }
    std::sort(breaks.begin(), breaks.end());
    double best_t = 0.0;
    double best_v = l1_norm(base);
    for (double t : breaks) {
        const double v = l1_norm(base + t * dir);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
    }
    return best_t;
}

double l1_coset_minimum(const Eigen::VectorXd& mu, const Eigen::MatrixXd& B) {
    const Eigen::Index d = B.cols();
    if (d == 0) return l1_norm(mu);

    const auto objective = [&](const Eigen::VectorXd& z) { return l1_norm(mu + B * z); };

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Zero(d));
    starts.push_back(-B.transpose() * mu);  // euclidean minimizer
    std::mt19937_64 rng(20240517);
    const double radius = 2.0 * (B.transpose() * mu).cwiseAbs().maxCoeff() + 1.0;
    std::uniform_real_distribution<double> unif(-radius, radius);
    while (starts.size() < 20) {
        Eigen::VectorXd z(d);
        for (Eigen::Index i = 0; i < d; ++i) z[i] = unif(rng);
        starts.push_back(std::move(z));
    }

    double best = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        Eigen::VectorXd z = start;
        const double scale = std::max(1.0, objective(z));
        for (int t = 1; t <= 500; ++t) {
            const Eigen::VectorXd r = mu + B * z;
            Eigen::VectorXd sg = B.transpose() * r.cwiseSign();
            const double gn = sg.norm();
            if (gn == 0.0) break;
            z -= (scale / static_cast<double>(t)) * sg / gn;
            best = std::min(best, objective(z));
        }
        // Coordinate polish with exact piecewise-linear line searches.
        for (int sweep = 0; sweep < 60; ++sweep) {
            bool moved = false;
            for (Eigen::Index i = 0; i < d; ++i) {
                const Eigen::VectorXd base = mu + B * z;
                const double t = line_search_l1(base, B.col(i));
                if (t != 0.0) {
                    z[i] += t;
                    moved = true;
                }
            }
            if (!moved) break;
        }
        best = std::min(best, objective(z));
    }
    return best;
}

}  // namespace

double quotient_norm(const FiniteConfig& cfg, const Eigen::VectorXd& mu, const NullspaceBasis& ns) {
    if (static_cast<std::size_t>(mu.size()) != cfg.dim_F) {
        throw std::invalid_argument("quotient_norm: mu has wrong dimension");
    }
    if (cfg.norm_kind == NormKind::euclidean) {
        if (ns.basis.cols() == 0) return mu.norm();
        return (mu - ns.basis * (ns.basis.transpose() * mu)).norm();
    }
    return l1_coset_minimum(mu, ns.basis);
}

double rkbs_norm(const FiniteConfig& cfg, const std::vector<Eigen::VectorXd>& target) {
    cfg.validate();
    if (target.size() != cfg.maps.size()) {
        throw std::invalid_argument("rkbs_norm: one target vector per input required");
    }
    const auto m = static_cast<Eigen::Index>(cfg.output_dim());
    const Eigen::MatrixXd S = cfg.stacked();
    Eigen::VectorXd y(S.rows());
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i].size() != m) throw std::invalid_argument("rkbs_norm: target dimension mismatch");
        y.segment(static_cast<Eigen::Index>(i) * m, m) = target[i];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd preimage = svd.solve(y);
    const double residual = (S * preimage - y).norm();
    if (residual > 1e-8 * std::max(1.0, y.norm())) {
        throw std::invalid_argument("rkbs_norm: not in range");
    }
    return quotient_norm(cfg, preimage, nullspace(cfg));
}

Eigen::VectorXd kernel_eval(const FiniteConfig& cfg, std::size_t x_index, const Eigen::VectorXd& mu) {
    cfg.validate();
    if (x_index >= cfg.maps.size()) throw std::out_of_range("kernel_eval: x_index out of range");
    if (static_cast<std::size_t>(mu.size()) != cfg.dim_F) {
        throw std::invalid_argument("kernel_eval: mu has wrong dimension");
    }
    return cfg.maps[x_index] * mu;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& A) {
    if (A.cols() == 0) return A;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
    return Q;
}

double max_principal_angle(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
    if (U.cols() != V.cols()) return 0.5 * std::numbers::pi;
    if (U.cols() == 0) return 0.0;
    // sin(theta_max) = sigma_max of the complement projection; the acos of
    // near-unit singular values cannot resolve angles below ~1e-8.
    const Eigen::MatrixXd RU = V - U * (U.transpose() * V);
    const Eigen::MatrixXd RV = U - V * (V.transpose() * U);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_u(RU);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_v(RV);
    const double s = std::max(svd_u.singularValues().maxCoeff(), svd_v.singularValues().maxCoeff());
    return std::asin(std::clamp(s, 0.0, 1.0));
}

EquivalenceReport check_equivalence(const FiniteConfig& cfg1, const FiniteConfig& cfg2,
                                    const Eigen::MatrixXd& J) {
    cfg1.validate();
    cfg2.validate();
    if (cfg1.maps.size() != cfg2.maps.size() || cfg1.output_dim() != cfg2.output_dim()) {
        throw std::invalid_argument("check_equivalence: configurations must share inputs and m");
    }
    if (static_cast<std::size_t>(J.rows()) != cfg2.dim_F ||
        static_cast<std::size_t>(J.cols()) != cfg1.dim_F) {
        throw std::invalid_argument("check_equivalence: J must map cfg1 space to cfg2 space");
    }

    std::mt19937_64 rng(987654321);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto random_mu = [&](std::size_t dim) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
        return v;
    };
    const auto norm_of = [&](const Eigen::VectorXd& v) {
        return cfg1.norm_kind == NormKind::l1 ? l1_norm(v) : v.norm();
    };

    EquivalenceReport report;

    double norm_violation = 0.0;
    double diagram_violation = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd mu = random_mu(cfg1.dim_F);
        norm_violation = std::max(norm_violation, std::abs(norm_of(J * mu) - norm_of(mu)));
        for (std::size_t i = 0; i < cfg1.maps.size(); ++i) {
            const double dev = (cfg2.maps[i] * (J * mu) - cfg1.maps[i] * mu).norm();
            diagram_violation = std::max(diagram_violation, dev);
        }
    }
    report.norm_preserving = norm_violation <= 1e-10;
    report.diagram_commutes = diagram_violation <= 1e-10;

    const NullspaceBasis ns1 = nullspace(cfg1);
    const NullspaceBasis ns2 = nullspace(cfg2);
    if (ns1.basis.cols() != ns2.basis.cols()) {
        report.nullspace_match = false;
    } else if (ns1.basis.cols() == 0) {
        report.nullspace_match = true;
    } else {
        const Eigen::MatrixXd mapped = orthonormal_columns(J * ns1.basis);
        report.nullspace_match = max_principal_angle(mapped, ns2.basis) <= 1e-8;
    }
    return report;
}

NestedNullspaceReport nested_nullspace_check(
    const FiniteConfig& cfg0,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& layer1_map,
    const Eigen::VectorXd& mu0) {
    cfg0.validate();
    if (static_cast<std::size_t>(mu0.size()) != cfg0.dim_F) {
        throw std::invalid_argument("nested_nullspace_check: mu0 has wrong dimension");
    }

    // Image points e_i = A0(x_i) mu0.
    std::vector<Eigen::VectorXd> images;
    images.reserve(cfg0.maps.size());
    for (const auto& A0 : cfg0.maps) images.push_back(A0 * mu0);

    // (a) composed-map nullspace: every i contributes ker A1(e_i).
    Eigen::MatrixXd composed_stack;
    for (const auto& e : images) {
        const Eigen::MatrixXd A1 = layer1_map(e);
        if (composed_stack.size() == 0) {
            composed_stack = A1;
        } else {
            Eigen::MatrixXd grown(composed_stack.rows() + A1.rows(), A1.cols());
            grown << composed_stack, A1;
            composed_stack = std::move(grown);
        }
    }

    // (b) restricted-map nullspace over the distinct image points.
    std::vector<Eigen::VectorXd> distinct;
    for (const auto& e : images) {
        bool seen = false;
        for (const auto& d : distinct) {
            if (d.size() == e.size() && d == e) {
                seen = true;
                break;
            }
        }
        if (!seen) distinct.push_back(e);
    }
    Eigen::MatrixXd restricted_stack;
    for (const auto& e : distinct) {
        const Eigen::MatrixXd A1 = layer1_map(e);
        if (restricted_stack.size() == 0) {
            restricted_stack = A1;
        } else {
            Eigen::MatrixXd grown(restricted_stack.rows() + A1.rows(), A1.cols());
            grown << restricted_stack, A1;
            restricted_stack = std::move(grown);
        }
    }

    const NullspaceBasis composed = nullspace_of_stack(composed_stack);
    const NullspaceBasis restricted = nullspace_of_stack(restricted_stack);

    NestedNullspaceReport report;
    report.composed_dim = static_cast<std::size_t>(composed.basis.cols());
    report.restricted_dim = static_cast<std::size_t>(restricted.basis.cols());
    report.dims_match = report.composed_dim == report.restricted_dim;
    report.max_principal_angle =
        report.dims_match ? max_principal_angle(composed.basis, restricted.basis)
                          : 0.5 * std::numbers::pi;
    return report;
}

std::string to_json_string(const std::vector<CheckRecord>& records, int indent) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json item;
        item["check"] = r.check;
        item["pass"] = r.pass;
        item["max_violation"] = r.max_violation;
        arr.push_back(std::move(item));
    }
    return arr.dump(indent);
}

}  // namespace grkbs
