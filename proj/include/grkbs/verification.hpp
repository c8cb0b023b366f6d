#pragma once

#include <cstdint>
#include <vector>

#include "grkbs/quotient.hpp"

namespace grkbs {

/// Seeded randomized verification of the quotient/kernel structure:
/// minimal-preimage norms against quotient norms, kernel coset invariance,
/// constructed equivalent and perturbed non-equivalent configuration pairs,
/// nested-nullspace agreement, and the full-rank (trivial) regime.
std::vector<CheckRecord> run_quotient_suite(std::uint64_t seed, std::size_t instances = 50);

}  // namespace grkbs
