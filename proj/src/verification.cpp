#include "grkbs/verification.hpp"

#include <Eigen/Dense>
#include <random>

namespace grkbs {

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = gauss(rng);
    }
    return A;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
    Eigen::MatrixXd Q = qr.householderQ();
    // Fix signs from the R diagonal so the draw is deterministic in shape.
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

/// Rank-deficient configuration: maps share a common kernel of dim >= 1.
FiniteConfig random_deficient_config(std::mt19937_64& rng, std::size_t k, std::size_t s,
                                     std::size_t m, std::size_t deficiency) {
    const auto rank = static_cast<Eigen::Index>(k - deficiency);
    const Eigen::MatrixXd C = random_matrix(rng, rank, static_cast<Eigen::Index>(k));
    FiniteConfig cfg;
    cfg.dim_F = k;
    for (std::size_t i = 0; i < s; ++i) {
        cfg.maps.push_back(random_matrix(rng, static_cast<Eigen::Index>(m), rank) * C);
    }
    return cfg;
}

}  // namespace

std::vector<CheckRecord> run_quotient_suite(std::uint64_t seed, std::size_t instances) {
    std::mt19937_64 rng(seed);

    double viol_rkbs = 0.0;
    double viol_coset = 0.0;
    double viol_equiv_pos = 0.0;       // count of positive pairs not reported equivalent
    double viol_equiv_neg = 0.0;       // count of perturbed pairs still matching nullspaces
    double viol_nested = 0.0;          // max principal angle
    double viol_trivial = 0.0;

    for (std::size_t inst = 0; inst < instances; ++inst) {
        std::uniform_int_distribution<std::size_t> k_dist(3, 6), s_dist(2, 4), m_dist(1, 3);
        const std::size_t k = k_dist(rng);
        const std::size_t s = s_dist(rng);
        const std::size_t m = m_dist(rng);
        std::uniform_int_distribution<std::size_t> def_dist(1, k - 2);
        const std::size_t deficiency = def_dist(rng);

        const FiniteConfig cfg = random_deficient_config(rng, k, s, m, deficiency);
        const NullspaceBasis ns = nullspace(cfg);

        // Minimal preimage norm vs quotient norm of a least-squares preimage.
        {
            const Eigen::VectorXd mu = random_vector(rng, static_cast<Eigen::Index>(k));
            std::vector<Eigen::VectorXd> target;
            for (const auto& A : cfg.maps) target.push_back(A * mu);
            const double via_rkbs = rkbs_norm(cfg, target);
            const double via_quotient = quotient_norm(cfg, mu, ns);
            viol_rkbs = std::max(viol_rkbs, std::abs(via_rkbs - via_quotient));
        }

        // Kernel well-definedness on cosets.
        if (ns.basis.cols() > 0) {
            const Eigen::VectorXd mu = random_vector(rng, static_cast<Eigen::Index>(k));
            const Eigen::VectorXd z = random_vector(rng, ns.basis.cols());
            const Eigen::VectorXd shifted = mu + ns.basis * z;
            for (std::size_t i = 0; i < cfg.maps.size(); ++i) {
                const double dev = (kernel_eval(cfg, i, shifted) - kernel_eval(cfg, i, mu)).norm();
                viol_coset = std::max(viol_coset, dev);
            }
        }

        // Equivalent pair built from an orthogonal change of coordinates.
        {
            const Eigen::MatrixXd J = random_orthogonal(rng, static_cast<Eigen::Index>(k));
            FiniteConfig cfg2 = cfg;
            for (auto& A : cfg2.maps) A = A * J.transpose();
            const EquivalenceReport rep = check_equivalence(cfg, cfg2, J);
            if (!rep.all()) viol_equiv_pos += 1.0;

            // Perturbed negative: one map replaced by an independent draw.
            FiniteConfig cfg2_bad = cfg2;
            cfg2_bad.maps[0] = random_matrix(rng, static_cast<Eigen::Index>(m),
                                             static_cast<Eigen::Index>(k));
            const EquivalenceReport bad = check_equivalence(cfg, cfg2_bad, J);
            if (bad.nullspace_match) viol_equiv_neg += 1.0;
        }

        // Nested nullspace identity for a composed layer.
        {
            std::uniform_int_distribution<std::size_t> dim_dist(2, 4);
            const std::size_t k0 = dim_dist(rng), m0 = dim_dist(rng), k1 = k, m1 = m;
            FiniteConfig cfg0;
            cfg0.dim_F = k0;
            for (std::size_t i = 0; i < 3; ++i) {
                cfg0.maps.push_back(random_matrix(rng, static_cast<Eigen::Index>(m0),
                                                  static_cast<Eigen::Index>(k0)));
            }
            const Eigen::VectorXd mu0 = random_vector(rng, static_cast<Eigen::Index>(k0));
            const Eigen::MatrixXd R =
                random_matrix(rng, static_cast<Eigen::Index>(k1 - 1), static_cast<Eigen::Index>(k1));
            std::vector<Eigen::MatrixXd> basis_mats;
            for (std::size_t j = 0; j <= m0; ++j) {
                basis_mats.push_back(random_matrix(rng, static_cast<Eigen::Index>(m1),
                                                   static_cast<Eigen::Index>(k1 - 1)));
            }
            const auto layer1 = [&](const Eigen::VectorXd& e) {
                Eigen::MatrixXd A = basis_mats[0];
                for (Eigen::Index j = 0; j < e.size(); ++j) {
                    A += e[j] * basis_mats[static_cast<std::size_t>(j) + 1];
                }
                return Eigen::MatrixXd(A * R);
            };
            const NestedNullspaceReport rep = nested_nullspace_check(cfg0, layer1, mu0);
            viol_nested = std::max(viol_nested, rep.dims_match ? rep.max_principal_angle : 1.0);
        }

        // Full-rank regime: quotient norm collapses to the plain norm.
        {
            FiniteConfig full;
            full.dim_F = k;
            for (std::size_t i = 0; i < s + 2; ++i) {
                full.maps.push_back(random_matrix(rng, static_cast<Eigen::Index>(std::max<std::size_t>(m, 2)),
                                                  static_cast<Eigen::Index>(k)));
            }
            const NullspaceBasis full_ns = nullspace(full);
            if (full_ns.basis.cols() != 0) {
                viol_trivial = std::max(viol_trivial, 1.0);
            } else {
                const Eigen::VectorXd mu = random_vector(rng, static_cast<Eigen::Index>(k));
                viol_trivial =
                    std::max(viol_trivial, std::abs(quotient_norm(full, mu, full_ns) - mu.norm()));
            }
        }
    }

    std::vector<CheckRecord> records;
    records.push_back({"rkbs_norm_equals_quotient_norm", viol_rkbs <= 1e-10, viol_rkbs});
    records.push_back({"kernel_coset_invariance", viol_coset <= 1e-10, viol_coset});
    records.push_back({"equivalence_positive_pairs", viol_equiv_pos == 0.0, viol_equiv_pos});
    records.push_back({"equivalence_perturbed_negatives", viol_equiv_neg == 0.0, viol_equiv_neg});
    records.push_back({"nested_nullspace_angles", viol_nested <= 1e-8, viol_nested});
    records.push_back({"trivial_configuration_norm", viol_trivial <= 1e-12, viol_trivial});
    return records;
}

}  // namespace grkbs
