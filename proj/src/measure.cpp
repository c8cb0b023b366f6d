#include "grkbs/measure.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace grkbs {

namespace {

bool same_location(std::span<const double> a, std::span<const double> b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] != b[k]) return false;
    }
    return true;
}

double max_norm_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, std::abs(a[k] - b[k]));
    }
    return d;
}

}  // namespace

ParameterBox::ParameterBox(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty()) {
        throw std::invalid_argument("ParameterBox: bound vectors must be nonempty and equal length");
    }
    for (std::size_t k = 0; k < lower.size(); ++k) {
        if (!(lower[k] < upper[k])) {
            throw std::invalid_argument("ParameterBox: lower[" + std::to_string(k) +
                                        "] must be < upper[" + std::to_string(k) + "]");
        }
    }
}

bool ParameterBox::contains(std::span<const double> theta) const {
    if (theta.size() != dim()) return false;
    for (std::size_t k = 0; k < dim(); ++k) {
        if (theta[k] < lower[k] || theta[k] > upper[k]) return false;
    }
    return true;
}

AtomicMeasure::AtomicMeasure(ParameterBox box, std::vector<Atom> atoms) : box_(std::move(box)) {
    atoms_.reserve(atoms.size());
    for (auto& a : atoms) {
        if (!std::isfinite(a.weight)) {
            throw std::invalid_argument("AtomicMeasure: atom weight must be finite");
        }
        if (!box_.contains(a.location)) {
            throw std::invalid_argument("AtomicMeasure: atom location outside the box");
        }
        bool merged = false;
        for (auto& kept : atoms_) {
            if (same_location(kept.location, a.location)) {
                kept.weight += a.weight;
                merged = true;
                break;
            }
        }
        if (!merged) atoms_.push_back(std::move(a));
    }
    std::erase_if(atoms_, [](const Atom& a) { return a.weight == 0.0; });
}

double AtomicMeasure::tv_norm() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += std::abs(a.weight);
    return s;
}

AtomicMeasure AtomicMeasure::scaled(double alpha) const {
    std::vector<Atom> scaled_atoms = atoms_;
    for (auto& a : scaled_atoms) a.weight *= alpha;
    return AtomicMeasure(box_, std::move(scaled_atoms));
}

AtomicMeasure add(const AtomicMeasure& a, const AtomicMeasure& b) {
    if (!a.empty() && !b.empty() && !(a.box() == b.box())) {
        throw std::invalid_argument("add: measures live on different boxes");
    }
    const ParameterBox& box = a.empty() ? b.box() : a.box();
    std::vector<Atom> atoms = a.atoms();
    atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
    return merge_atoms(AtomicMeasure(box, std::move(atoms)), 0.0, 0.0);
}

AtomicMeasure merge_atoms(const AtomicMeasure& m, double location_tol, double prune_tol) {
    if (location_tol < 0.0) throw std::invalid_argument("merge_atoms: location_tol must be >= 0");
    // Representative locations are frozen at first occurrence, so the output
    // atoms are pairwise farther than location_tol apart and a second merge
    // at the same tolerance is the identity.
    std::vector<Atom> merged;
    merged.reserve(m.size());
    for (const auto& a : m.atoms()) {
        bool attached = false;
        for (auto& rep : merged) {
            if (max_norm_distance(rep.location, a.location) <= location_tol) {
                rep.weight += a.weight;
                attached = true;
                break;
            }
        }
        if (!attached) merged.push_back(a);
    }
    std::erase_if(merged, [prune_tol](const Atom& a) { return std::abs(a.weight) < prune_tol; });
    return AtomicMeasure(m.box(), std::move(merged));
}

std::vector<DecomposedAtom> canonical_decomposition(const AtomicMeasure& m) {
    if (m.empty()) throw std::invalid_argument("canonical_decomposition: no atoms");
    std::vector<DecomposedAtom> parts;
    parts.reserve(m.size());
    for (const auto& a : m.atoms()) {
        parts.push_back({std::abs(a.weight), a.weight < 0.0 ? -1 : 1, a.location});
    }
    return parts;
}

AtomicMeasure reconstruct(const ParameterBox& box, const std::vector<DecomposedAtom>& parts) {
    std::vector<Atom> atoms;
    atoms.reserve(parts.size());
    for (const auto& p : parts) {
        atoms.push_back({p.location, p.sign >= 0 ? p.gamma : -p.gamma});
    }
    return AtomicMeasure(box, std::move(atoms));
}

std::string to_json_string(const AtomicMeasure& m, int indent) {
    nlohmann::ordered_json j;
    j["box"]["lower"] = m.box().lower;
    j["box"]["upper"] = m.box().upper;
    j["atoms"] = nlohmann::ordered_json::array();
    for (const auto& a : m.atoms()) {
        nlohmann::ordered_json atom;
        atom["theta"] = a.location;
        atom["weight"] = a.weight;
        j["atoms"].push_back(std::move(atom));
    }
    return j.dump(indent);
}

AtomicMeasure measure_from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ParameterBox box(j.at("box").at("lower").get<std::vector<double>>(),
                     j.at("box").at("upper").get<std::vector<double>>());
    std::vector<Atom> atoms;
    for (const auto& atom : j.at("atoms")) {
        atoms.push_back({atom.at("theta").get<std::vector<double>>(), atom.at("weight").get<double>()});
    }
    return AtomicMeasure(std::move(box), std::move(atoms));
}

}  // namespace grkbs
