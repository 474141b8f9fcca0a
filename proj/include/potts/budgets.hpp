#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

namespace potts {

// Enumeration budgets for every exact routine.  Each field can be overridden
// through the environment variable named next to it (see from_env) or by
// passing an explicit Budgets value.
struct Budgets {
  // Configurations visited by exact partition-function / histogram sweeps.
  std::uint64_t z_states = 10'000'000;  // POTTS_Z_BUDGET
  // Vertex subsets visited by alpha_r, shell sums and brute-force scans.
  std::uint64_t subsets = 2'000'000;  // POTTS_SUBSET_BUDGET
  // State-space size for materialized transition operators.
  std::uint64_t operator_states = 4096;  // POTTS_OPERATOR_BUDGET
  // State-space size for distribution-vector iteration (operator never built).
  std::uint64_t vector_states = 1'000'000;  // POTTS_VECTOR_BUDGET
  // State-space size for the 2^|Omega| global-conductance scan.
  std::uint64_t conductance_states = 16;  // POTTS_CONDUCTANCE_BUDGET
  // Multigraphs visited by the extremal brute-force oracle.
  std::uint64_t multigraphs = 10'000'000;  // POTTS_MULTIGRAPH_BUDGET

  static Budgets from_env() {
    Budgets b;
    auto load = [](const char* name, std::uint64_t& field) {
      if (const char* v = std::getenv(name)) {
        const std::uint64_t parsed = std::strtoull(v, nullptr, 10);
        if (parsed > 0) field = parsed;
      }
    };
    load("POTTS_Z_BUDGET", b.z_states);
    load("POTTS_SUBSET_BUDGET", b.subsets);
    load("POTTS_OPERATOR_BUDGET", b.operator_states);
    load("POTTS_VECTOR_BUDGET", b.vector_states);
    load("POTTS_CONDUCTANCE_BUDGET", b.conductance_states);
    load("POTTS_MULTIGRAPH_BUDGET", b.multigraphs);
    return b;
  }
};

}  // namespace potts
