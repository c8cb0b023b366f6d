#include "grkbs/solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace grkbs {

void TrainingSet::validate() const {
    if (xs.empty() || xs.size() != ys.size()) {
        throw std::invalid_argument("TrainingSet: need matching nonempty xs and ys");
    }
    for (const auto& x : xs) {
        if (x.size() != xs[0].size()) throw std::invalid_argument("TrainingSet: ragged inputs");
    }
    for (const auto& y : ys) {
        if (y.size() != ys[0].size()) throw std::invalid_argument("TrainingSet: ragged targets");
    }
}

void SolverOptions::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("SolverOptions: lambda must be positive");
    if (!(tol_objective > 0.0) || !(prune_tol > 0.0)) {
        throw std::invalid_argument("SolverOptions: tolerances must be positive");
    }
    if (certificate_grid < 2 && restrict_grid.empty()) {
        throw std::invalid_argument("SolverOptions: certificate_grid must be >= 2");
    }
}

Eigen::VectorXd AtomFeatureMap::evaluate_measure(const Eigen::VectorXd& x,
                                                 const AtomicMeasure& m) const {
    if (!m.empty() && !(m.box() == box())) {
        throw std::invalid_argument("evaluate_measure: measure box does not match the map box");
    }
    double acc = 0.0;
    for (const auto& a : m.atoms()) acc += a.weight * scalar(x, a.location);
    return acc * range_profile();
}

DirectFeatureMap::DirectFeatureMap(FeatureMapConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    embedding_ = cfg_.embedding();
}

double DirectFeatureMap::scalar(const Eigen::VectorXd& x, std::span<const double> theta) const {
    return scalar_feature(cfg_, x, theta);
}

Eigen::VectorXd DirectFeatureMap::scalar_grad(const Eigen::VectorXd& x,
                                              std::span<const double> theta) const {
    return scalar_feature_grad(cfg_, x, theta);
}

PmannFeatureMap::PmannFeatureMap(DiscreteEllipticOperator op, EigenBasis basis, FeatureMapConfig cfg)
    : op_(std::move(op)), basis_(std::move(basis)), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.output_dim != op_.size()) {
        throw std::invalid_argument("PmannFeatureMap: feature map must emit a grid function");
    }
    profile_image_ = project(basis_, op_.solve(cfg_.embedding()));
}

double PmannFeatureMap::scalar(const Eigen::VectorXd& x, std::span<const double> theta) const {
    return scalar_feature(cfg_, x, theta);
}

Eigen::VectorXd PmannFeatureMap::scalar_grad(const Eigen::VectorXd& x,
                                             std::span<const double> theta) const {
    return scalar_feature_grad(cfg_, x, theta);
}

Eigen::VectorXd pmann_feature(const DiscreteEllipticOperator& op, const EigenBasis& basis,
                              const FeatureMapConfig& cfg, const Eigen::VectorXd& x,
                              const AtomicMeasure& m) {
    return project(basis, op.solve(evaluate(cfg, x, m)));
}

namespace {

void check_dims(const AtomFeatureMap& map, const TrainingSet& data) {
    data.validate();
    if (static_cast<std::size_t>(data.xs[0].size()) != map.input_dim()) {
        throw std::invalid_argument("solver: input dimension mismatch");
    }
    if (static_cast<std::size_t>(data.ys[0].size()) != map.output_dim()) {
        throw std::invalid_argument("solver: target dimension mismatch");
    }
}

// Per-sample pairings <r_i, u> with the residuals r_i = y_i - f_mu(x_i);
// the certificate reduces to (2 / (N lambda)) |sum_i d_i s(x_i, theta)|.
Eigen::VectorXd residual_pairings(const AtomFeatureMap& map, const TrainingSet& data,
                                  const AtomicMeasure& m) {
    const auto N = static_cast<Eigen::Index>(data.size());
    const Eigen::VectorXd& u = map.range_profile();
    Eigen::VectorXd d(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::VectorXd r = data.ys[static_cast<std::size_t>(i)] -
                                  map.evaluate_measure(data.xs[static_cast<std::size_t>(i)], m);
        d[i] = r.dot(u);
    }
    return d;
}

double pairing_sum(const AtomFeatureMap& map, const TrainingSet& data, const Eigen::VectorXd& d,
                   std::span<const double> theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        s += d[static_cast<Eigen::Index>(i)] * map.scalar(data.xs[i], theta);
    }
    return s;
}

Eigen::VectorXd pairing_sum_grad(const AtomFeatureMap& map, const TrainingSet& data,
                                 const Eigen::VectorXd& d, std::span<const double> theta) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(theta.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        g += d[static_cast<Eigen::Index>(i)] * map.scalar_grad(data.xs[i], theta);
    }
    return g;
}

constexpr double kGoldenInv = 0.6180339887498949;

template <typename F>
double golden_max_1d(F&& f, double lo, double hi, int iters = 48) {
    double a = lo, b = hi;
    double c = b - kGoldenInv * (b - a);
    double d = a + kGoldenInv * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGoldenInv * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGoldenInv * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

// Gram pieces of the fixed-support weight problem:
//   F(c) = y2/N - 2 b.c + c.G c + lambda ||c||_1.
struct QuadraticPieces {
    Eigen::MatrixXd G;
    Eigen::VectorXd b;
    double y_sq_mean = 0.0;
};

QuadraticPieces build_quadratic(const AtomFeatureMap& map, const TrainingSet& data,
                                const std::vector<std::vector<double>>& atoms) {
    const auto N = static_cast<Eigen::Index>(data.size());
    const auto p = static_cast<Eigen::Index>(atoms.size());
    const Eigen::VectorXd& u = map.range_profile();
    const double u_sq = u.squaredNorm();

    Eigen::MatrixXd S(N, p);
    Eigen::VectorXd dy(N);
    double y_sq = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto& x = data.xs[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) {
            S(i, j) = map.scalar(x, atoms[static_cast<std::size_t>(j)]);
            if (!std::isfinite(S(i, j))) {
                throw std::runtime_error("sampling operator: non-finite feature at atom " +
                                         std::to_string(j));
            }
        }
        dy[i] = data.ys[static_cast<std::size_t>(i)].dot(u);
        y_sq += data.ys[static_cast<std::size_t>(i)].squaredNorm();
    }
    QuadraticPieces q;
    q.G = (u_sq / static_cast<double>(N)) * (S.transpose() * S);
    q.b = (1.0 / static_cast<double>(N)) * (S.transpose() * dy);
    q.y_sq_mean = y_sq / static_cast<double>(N);
    return q;
}

double quadratic_objective(const QuadraticPieces& q, const Eigen::VectorXd& c, double lambda) {
    return q.y_sq_mean - 2.0 * q.b.dot(c) + c.dot(q.G * c) + lambda * c.cwiseAbs().sum();
}

double soft_threshold(double x, double tau) {
    if (x > tau) return x - tau;
    if (x < -tau) return x + tau;
    return 0.0;
}

}  // namespace

double loss_value(LossKind kind, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    switch (kind) {
        case LossKind::squared: return (y - w).squaredNorm();
    }
    throw std::invalid_argument("loss_value: unknown loss kind");
}

double objective(const AtomFeatureMap& map, const TrainingSet& data, const AtomicMeasure& m,
                 const SolverOptions& opts) {
    check_dims(map, data);
    opts.validate();
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        loss += loss_value(opts.loss, data.ys[i], map.evaluate_measure(data.xs[i], m));
    }
    const double value = loss / static_cast<double>(data.size()) + opts.lambda * m.tv_norm();
    if (!std::isfinite(value)) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            for (const auto& x : data.xs) {
                if (!std::isfinite(map.scalar(x, m.atoms()[j].location))) {
                    throw std::runtime_error("objective: non-finite value at atom " +
                                             std::to_string(j));
                }
            }
        }
        throw std::runtime_error("objective: non-finite value");
    }
    return value;
}

double certificate(const AtomFeatureMap& map, const TrainingSet& data, const AtomicMeasure& m,
                   std::span<const double> theta, const SolverOptions& opts) {
    check_dims(map, data);
    if (!map.box().contains(theta)) throw std::invalid_argument("certificate: theta outside the box");
    const Eigen::VectorXd d = residual_pairings(map, data, m);
    const double scale = 2.0 / (static_cast<double>(data.size()) * opts.lambda);
    return scale * std::abs(pairing_sum(map, data, d, theta));
}

namespace {

AtomCandidate search_certificate_max(const AtomFeatureMap& map, const TrainingSet& data,
                                     const AtomicMeasure& m, const SolverOptions& opts) {
    const ParameterBox& box = map.box();
    const std::size_t dim = box.dim();
    const Eigen::VectorXd d = residual_pairings(map, data, m);
    const double scale = 2.0 / (static_cast<double>(data.size()) * opts.lambda);
    const auto cert_abs = [&](std::span<const double> theta) {
        return std::abs(pairing_sum(map, data, d, theta));
    };

    std::vector<double> best_theta(dim);
    double best = -1.0;

    if (!opts.restrict_grid.empty()) {
        for (const auto& point : opts.restrict_grid) {
            if (point.size() != dim || !box.contains(point)) {
                throw std::invalid_argument("insert_atom: restrict_grid point outside the box");
            }
            const double v = cert_abs(point);
            if (v > best) {
                best = v;
                best_theta = point;
            }
        }
        return {best_theta, scale * best};
    }

    // Tensor grid scan, coordinate 0 outermost, lowest flattened index wins ties.
    const std::size_t G = opts.certificate_grid;
    std::vector<double> step(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        step[k] = (box.upper[k] - box.lower[k]) / static_cast<double>(G - 1);
    }
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> theta(dim);
    while (true) {
        for (std::size_t k = 0; k < dim; ++k) {
            theta[k] = box.lower[k] + static_cast<double>(idx[k]) * step[k];
        }
        const double v = cert_abs(theta);
        if (v > best) {
            best = v;
            best_theta = theta;
        }
        std::size_t k = dim;
        bool done = true;
        while (k > 0) {
            --k;
            if (++idx[k] < G) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if (done) break;
    }

    // Local refinement around the incumbent.
    if (opts.local_ascent_steps > 0) {
        std::vector<double> point = best_theta;
        if (map.gradient_smooth()) {
            // Projected gradient ascent on |S(theta)| with backtracking.
            double trial_step = 0.0;
            for (std::size_t k = 0; k < dim; ++k) trial_step = std::max(trial_step, step[k]);
            for (std::size_t it = 0; it < opts.local_ascent_steps; ++it) {
                const double s_val = pairing_sum(map, data, d, point);
                if (s_val == 0.0) break;
                Eigen::VectorXd g = pairing_sum_grad(map, data, d, point);
                if (s_val < 0.0) g = -g;
                const double gn = g.norm();
                if (gn < 1e-15) break;
                double stp = trial_step;
                bool improved = false;
                const double current = std::abs(s_val);
                for (int bt = 0; bt < 30; ++bt) {
                    std::vector<double> cand(dim);
                    for (std::size_t k = 0; k < dim; ++k) {
                        cand[k] = std::clamp(point[k] + stp * g[static_cast<Eigen::Index>(k)] / gn,
                                             box.lower[k], box.upper[k]);
                    }
                    if (cert_abs(cand) > current) {
                        point = cand;
                        improved = true;
                        break;
                    }
                    stp *= 0.5;
                }
                if (!improved) break;
            }
        } else {
            // Golden-section coordinate sweeps handle the relu kinks.
            std::vector<double> radius = step;
            for (std::size_t sweep = 0; sweep < opts.local_ascent_steps; ++sweep) {
                for (std::size_t k = 0; k < dim; ++k) {
                    const double lo = std::max(box.lower[k], point[k] - radius[k]);
                    const double hi = std::min(box.upper[k], point[k] + radius[k]);
                    const double cand_k = golden_max_1d(
                        [&](double t) {
                            std::vector<double> probe = point;
                            probe[k] = t;
                            return cert_abs(probe);
                        },
                        lo, hi);
                    std::vector<double> probe = point;
                    probe[k] = cand_k;
                    if (cert_abs(probe) > cert_abs(point)) point = probe;
                }
                for (auto& r : radius) r *= 0.5;
            }
        }
        const double refined = cert_abs(point);
        if (refined > best) {
            best = refined;
            best_theta = point;
        }
    }
    return {best_theta, scale * best};
}

}  // namespace

AtomCandidate insert_atom(const AtomFeatureMap& map, const TrainingSet& data,
                          const AtomicMeasure& m, const SolverOptions& opts) {
    check_dims(map, data);
    opts.validate();
    return search_certificate_max(map, data, m, opts);
}

Eigen::VectorXd fully_corrective(const AtomFeatureMap& map, const TrainingSet& data,
                                 const std::vector<std::vector<double>>& atoms,
                                 const SolverOptions& opts, const Eigen::VectorXd& warm_start) {
    check_dims(map, data);
    opts.validate();
    if (atoms.empty()) throw std::invalid_argument("fully_corrective: atom set must be nonempty");
    const auto p = static_cast<Eigen::Index>(atoms.size());

    const QuadraticPieces q = build_quadratic(map, data, atoms);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.G, Eigen::EigenvaluesOnly);
    const double lip = 2.0 * std::max(0.0, es.eigenvalues().maxCoeff());
    Eigen::VectorXd c = warm_start.size() == p ? warm_start : Eigen::VectorXd::Zero(p);
    if (lip <= 0.0) return Eigen::VectorXd::Zero(p);

    const double step = 1.0 / lip;
    double prev = quadratic_objective(q, c, opts.lambda);
    for (std::size_t it = 0; it < opts.fc_iters; ++it) {
        const Eigen::VectorXd grad = 2.0 * (q.G * c - q.b);
        for (Eigen::Index j = 0; j < p; ++j) {
            c[j] = soft_threshold(c[j] - step * grad[j], step * opts.lambda);
        }
        const double cur = quadratic_objective(q, c, opts.lambda);
        if (std::abs(prev - cur) <= opts.tol_objective) break;
        prev = cur;
    }
    return c;
}

SparseSolution solve_atp(const AtomFeatureMap& map, const TrainingSet& data,
                         const SolverOptions& opts, const IterationCallback& on_iteration) {
    check_dims(map, data);
    opts.validate();

    SparseSolution sol;
    sol.bound_mN = map.output_dim() * data.size();
    sol.measure = AtomicMeasure(map.box(), {});
    sol.history.push_back(objective(map, data, sol.measure, opts));

    std::vector<std::vector<double>> atoms;
    Eigen::VectorXd weights;

    const auto rebuild_atoms = [&]() {
        atoms.clear();
        weights.resize(static_cast<Eigen::Index>(sol.measure.size()));
        Eigen::Index j = 0;
        for (const auto& a : sol.measure.atoms()) {
            atoms.push_back(a.location);
            weights[j++] = a.weight;
        }
    };

    // An insertion candidate this close to an existing atom (max-norm,
    // relative to the box span) adds a nearly collinear feature column;
    // tightening the corrective step is the productive move instead.
    double span = 0.0;
    for (std::size_t k = 0; k < map.box().dim(); ++k) {
        span = std::max(span, map.box().upper[k] - map.box().lower[k]);
    }
    const double cluster_radius =
        opts.restrict_grid.empty() ? std::max(opts.merge_tol, 1e-6 * span) : opts.merge_tol;
    const double consolidate_radius =
        opts.restrict_grid.empty() ? std::max(opts.merge_tol, 0.02 * span) : opts.merge_tol;
    const auto near_existing = [&](const std::vector<double>& theta) {
        for (const auto& loc : atoms) {
            double dist = 0.0;
            for (std::size_t k = 0; k < loc.size(); ++k) {
                dist = std::max(dist, std::abs(loc[k] - theta[k]));
            }
            if (dist <= cluster_radius) return true;
        }
        return false;
    };

    const auto measure_of = [&](const std::vector<std::vector<double>>& locs,
                                const Eigen::VectorXd& wts) {
        std::vector<Atom> raw;
        for (std::size_t j = 0; j < locs.size(); ++j) {
            raw.push_back({locs[j], wts[static_cast<Eigen::Index>(j)]});
        }
        return AtomicMeasure(map.box(), std::move(raw));
    };

    const auto run_corrective = [&](const SolverOptions& fc_opts) {
        weights = fully_corrective(map, data, atoms, fc_opts, weights);
        const AtomicMeasure fc_measure = measure_of(atoms, weights);
        AtomicMeasure best = merge_atoms(fc_measure, opts.merge_tol, opts.prune_tol);
        double best_obj = objective(map, data, best, opts);
        const double obj_fc = objective(map, data, fc_measure, opts);
        if (obj_fc < best_obj) {
            best = fc_measure;
            best_obj = obj_fc;
        }

        // Consolidation: cluster nearby atoms onto one representative and
        // re-correct on the reduced support. The newest atom in a cluster
        // carries the freshest position estimate and the heaviest carries
        // the most weight; both orderings are tried and a candidate is
        // accepted only when it does not raise the objective, so the
        // recorded history stays non-increasing exactly.
        if (consolidate_radius > opts.merge_tol && best.size() > 1) {
            const auto consolidated = [&](std::vector<Atom> ordered) -> AtomicMeasure {
                const AtomicMeasure clustered = merge_atoms(
                    AtomicMeasure(map.box(), std::move(ordered)), consolidate_radius, opts.prune_tol);
                if (clustered.size() >= best.size() || clustered.empty()) return clustered;
                std::vector<std::vector<double>> c_atoms;
                Eigen::VectorXd c_weights(static_cast<Eigen::Index>(clustered.size()));
                Eigen::Index j = 0;
                for (const auto& a : clustered.atoms()) {
                    c_atoms.push_back(a.location);
                    c_weights[j++] = a.weight;
                }
                c_weights = fully_corrective(map, data, c_atoms, fc_opts, c_weights);
                return merge_atoms(measure_of(c_atoms, c_weights), opts.merge_tol, opts.prune_tol);
            };

            std::vector<Atom> newest_first(best.atoms());
            std::reverse(newest_first.begin(), newest_first.end());
            std::vector<Atom> by_weight(best.atoms());
            std::stable_sort(by_weight.begin(), by_weight.end(), [](const Atom& a, const Atom& b) {
                return std::abs(a.weight) > std::abs(b.weight);
            });
            for (auto& ordered : {newest_first, by_weight}) {
                const AtomicMeasure refit = consolidated(ordered);
                if (refit.size() < best.size() && !refit.empty()) {
                    const double obj_refit = objective(map, data, refit, opts);
                    if (obj_refit <= best_obj) {
                        best = refit;
                        best_obj = obj_refit;
                    }
                }
            }
        }

        sol.measure = best;
        sol.history.push_back(best_obj);
        rebuild_atoms();
    };

    bool certified = false;
    bool intensified = false;
    for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
        const AtomCandidate pick = insert_atom(map, data, sol.measure, opts);
        sol.certificate_sup = pick.value;
        if (pick.value <= 1.0 + opts.tol_objective) {
            certified = true;
            break;
        }

        const double prev_obj = sol.history.back();
        if (!near_existing(pick.theta) && atoms.size() < opts.max_atoms) {
            intensified = false;
            atoms.push_back(pick.theta);
            Eigen::VectorXd grown(weights.size() + 1);
            grown.head(weights.size()) = weights;
            grown[weights.size()] = 0.0;
            weights = grown;
            run_corrective(opts);
        } else if (!intensified && !atoms.empty()) {
            // Certificate still above threshold at an existing atom: the
            // weights are the slack, not the support. One tightened pass.
            intensified = true;
            SolverOptions tight = opts;
            tight.fc_iters = opts.fc_iters * 10;
            tight.tol_objective = std::max(1e-16, opts.tol_objective * 1e-6);
            run_corrective(tight);
        } else {
            sol.history.push_back(prev_obj);
        }

        if (on_iteration) {
            on_iteration({iter, sol.history.back(), sol.measure.size(), pick.value});
        }
        if (intensified && prev_obj - sol.history.back() <= 0.0) {
            break;  // stalled: tightened pass made no progress
        }
    }

    if (!certified) {
        sol.certificate_sup = insert_atom(map, data, sol.measure, opts).value;
        certified = sol.certificate_sup <= 1.0 + opts.tol_objective;
    }
    sol.converged = certified;
    sol.objective = sol.history.back();
    sol.atom_count = sol.measure.size();
    return sol;
}

SparseSolution grid_restricted_oracle(const AtomFeatureMap& map, const TrainingSet& data,
                                      const std::vector<std::vector<double>>& grid,
                                      const SolverOptions& opts) {
    check_dims(map, data);
    opts.validate();
    if (grid.empty()) throw std::invalid_argument("grid_restricted_oracle: grid must be nonempty");
    for (const auto& point : grid) {
        if (!map.box().contains(point)) {
            throw std::invalid_argument("grid_restricted_oracle: grid point outside the box");
        }
    }

    const auto p = static_cast<Eigen::Index>(grid.size());
    const QuadraticPieces q = build_quadratic(map, data, grid);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p);

    SparseSolution sol;
    sol.bound_mN = map.output_dim() * data.size();
    double prev = quadratic_objective(q, c, opts.lambda);
    sol.history.push_back(prev);
    for (std::size_t sweep = 0; sweep < 100000; ++sweep) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double gjj = q.G(j, j);
            if (gjj <= 0.0) {
                c[j] = 0.0;
                continue;
            }
            const double partial = q.b[j] - (q.G.row(j).dot(c) - gjj * c[j]);
            c[j] = soft_threshold(partial, 0.5 * opts.lambda) / gjj;
        }
        const double cur = quadratic_objective(q, c, opts.lambda);
        sol.history.push_back(cur);
        if (std::abs(prev - cur) <= 1e-10) break;
        prev = cur;
    }

    std::vector<Atom> raw;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::abs(c[j]) >= opts.prune_tol) raw.push_back({grid[static_cast<std::size_t>(j)], c[j]});
    }
    sol.measure = AtomicMeasure(map.box(), std::move(raw));
    sol.objective = objective(map, data, sol.measure, opts);
    sol.atom_count = sol.measure.size();

    double cert_sup = 0.0;
    for (const auto& point : grid) {
        cert_sup = std::max(cert_sup, certificate(map, data, sol.measure, point, opts));
    }
    sol.certificate_sup = cert_sup;
    sol.converged = cert_sup <= 1.0 + opts.tol_objective;
    return sol;
}

std::string to_json_string(const SparseSolution& s, int indent) {
    nlohmann::ordered_json j;
    j["measure"] = nlohmann::ordered_json::parse(to_json_string(s.measure));
    j["objective"] = s.objective;
    j["atom_count"] = s.atom_count;
    j["bound_mN"] = s.bound_mN;
    j["certificate_sup"] = s.certificate_sup;
    j["history"] = s.history;
    j["converged"] = s.converged;
    return j.dump(indent);
}

}  // namespace grkbs
