#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace grkbs {

enum class NormKind { euclidean, l1 };

/// Configuration map sampled on a finite input set: one m x k matrix per
/// input point, all acting on the same k-dimensional coordinate space.
struct FiniteConfig {
    std::size_t dim_F = 0;                 // k
    std::vector<Eigen::MatrixXd> maps;     // s matrices, each m x k
    NormKind norm_kind = NormKind::euclidean;

    void validate() const;
    std::size_t input_count() const { return maps.size(); }
    std::size_t output_dim() const { return maps.empty() ? 0 : static_cast<std::size_t>(maps[0].rows()); }

    /// All maps stacked into one (s*m) x k matrix.
    Eigen::MatrixXd stacked() const;
};

struct NullspaceBasis {
    Eigen::MatrixXd basis;        // k x d, orthonormal columns
    std::size_t rank_deficiency = 0;
};

constexpr double kNullspaceRelTol = 1e-10;

/// Intersection of the kernels of all maps, via SVD of the stacked matrix.
/// Singular values <= 1e-10 * sigma_max count as zero (sigma_max taken as 1
/// when the whole spectrum vanishes).
NullspaceBasis nullspace(const FiniteConfig& cfg);

/// Distance-to-nullspace norm of the coset mu + N. Euclidean uses the
/// orthogonal projection; l1 runs multi-start subgradient descent followed
/// by an exact coordinate line-search polish.
double quotient_norm(const FiniteConfig& cfg, const Eigen::VectorXd& mu, const NullspaceBasis& ns);

/// Minimal preimage norm of a target sample (one m-vector per input).
/// Throws "not in range" if the stacked least-squares residual exceeds
/// 1e-8 * max(1, ||target||).
double rkbs_norm(const FiniteConfig& cfg, const std::vector<Eigen::VectorXd>& target);

/// Evaluation through the configuration map: A(x_index) * mu.
Eigen::VectorXd kernel_eval(const FiniteConfig& cfg, std::size_t x_index, const Eigen::VectorXd& mu);

struct EquivalenceReport {
    bool norm_preserving = false;
    bool nullspace_match = false;
    bool diagram_commutes = false;

    bool all() const { return norm_preserving && nullspace_match && diagram_commutes; }
};

/// Tests whether J carries cfg1 onto an equivalent configuration cfg2:
/// J preserves the norm on random vectors, J maps nullspace onto nullspace
/// (principal angles), and A2(x) J = A1(x) on random vectors.
EquivalenceReport check_equivalence(const FiniteConfig& cfg1, const FiniteConfig& cfg2,
                                    const Eigen::MatrixXd& J);

struct NestedNullspaceReport {
    std::size_t composed_dim = 0;
    std::size_t restricted_dim = 0;
    double max_principal_angle = 0.0;  // pi/2 sentinel on dimension mismatch
    bool dims_match = false;
};

/// Compares the nullspace of the composed map x -> A1(A0(x) mu0) with the
/// nullspace of A1 restricted to the finite image set {A0(x_i) mu0}.
NestedNullspaceReport nested_nullspace_check(
    const FiniteConfig& cfg0,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& layer1_map,
    const Eigen::VectorXd& mu0);

/// Largest principal angle between the column spans of two orthonormal
/// bases, computed in sine form so angles near zero stay resolvable.
double max_principal_angle(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V);

/// Orthonormalize the columns of a matrix (thin QR; empty stays empty).
Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& A);

struct CheckRecord {
    std::string check;
    bool pass = false;
    double max_violation = 0.0;
};

std::string to_json_string(const std::vector<CheckRecord>& records, int indent = 2);

}  // namespace grkbs
