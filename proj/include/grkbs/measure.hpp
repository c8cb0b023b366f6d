#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace grkbs {

/// Compact box of admissible atom locations (per-coordinate bounds).
struct ParameterBox {
    std::vector<double> lower;
    std::vector<double> upper;

    ParameterBox() = default;
    ParameterBox(std::vector<double> lo, std::vector<double> hi);

    std::size_t dim() const { return lower.size(); }
    bool contains(std::span<const double> theta) const;
    bool operator==(const ParameterBox& other) const = default;
};

/// One signed point mass: location inside the box, finite weight.
struct Atom {
    std::vector<double> location;
    double weight = 0.0;
};

struct DecomposedAtom {
    double gamma = 0.0;   // positive magnitude
    int sign = 1;         // +1 or -1
    std::vector<double> location;
};

constexpr double kDefaultMergeTol = 1e-9;
constexpr double kDefaultPruneTol = 1e-10;

/// Finite signed atomic measure on a parameter box.
///
/// Atom locations are unique (exact duplicates are merged at construction,
/// atoms that cancel to exactly zero weight are dropped), so the total
/// variation norm is the plain sum of |weight| and is zero only for the
/// empty measure.
class AtomicMeasure {
public:
    AtomicMeasure() = default;
    AtomicMeasure(ParameterBox box, std::vector<Atom> atoms);

    const ParameterBox& box() const { return box_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    double tv_norm() const;

    AtomicMeasure scaled(double alpha) const;

private:
    ParameterBox box_;
    std::vector<Atom> atoms_;
};

/// Concatenate-then-merge addition; boxes must match.
AtomicMeasure add(const AtomicMeasure& a, const AtomicMeasure& b);

/// Cluster atoms whose locations are within location_tol in max-norm
/// (weights summed onto the first representative), then drop atoms with
/// |weight| < prune_tol. Idempotent at fixed tolerance.
AtomicMeasure merge_atoms(const AtomicMeasure& m, double location_tol = kDefaultMergeTol,
                          double prune_tol = kDefaultPruneTol);

/// Split each atom (theta, c) into (|c|, sign(c), theta). Throws on an
/// empty measure. Summing the gammas in order reproduces tv_norm bit for bit.
std::vector<DecomposedAtom> canonical_decomposition(const AtomicMeasure& m);

/// Rebuild the measure from a canonical decomposition.
AtomicMeasure reconstruct(const ParameterBox& box, const std::vector<DecomposedAtom>& parts);

std::string to_json_string(const AtomicMeasure& m, int indent = -1);
AtomicMeasure measure_from_json_string(const std::string& text);

}  // namespace grkbs
