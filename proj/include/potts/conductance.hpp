#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "potts/budgets.hpp"
#include "potts/dynamics.hpp"
#include "potts/errors.hpp"
#include "potts/gibbs.hpp"
#include "potts/graph.hpp"
#include "potts/rational.hpp"

namespace potts {

// Membership mask over state ranks.
using StateSubset = std::vector<std::uint8_t>;

// Q(A,B) = sum over x in A, y in B of pi(x) P(x,y), exact.
inline Rational q_flow(const SparseOperator& op, const std::vector<Rational>& pi,
                       const StateSubset& a, const StateSubset& b) {
  if (a.size() != op.n_states || b.size() != op.n_states)
    throw ParameterError("q_flow: subset mask size mismatch");
  Rational acc(0);
  for (std::uint64_t x = 0; x < op.n_states; ++x) {
    if (!a[x]) continue;
    for (const auto& [y, pr] : op.rows[x])
      if (b[y]) acc += pi[x] * pr;
  }
  return acc;
}

inline Rational q_flow(const Graph& g, const ModelParams& p, const StateSubset& a,
                       const StateSubset& b, const Budgets& budgets = Budgets{}) {
  const auto op = glauber_operator(g, p, budgets);
  const auto pi = gibbs_vector(g, p, budgets);
  return q_flow(op, pi, a, b);
}

inline StateSubset complement(const StateSubset& a) {
  StateSubset out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ? 0 : 1;
  return out;
}

// Phi(A) = Q(A, A-bar) / (pi(A) pi(A-bar)); A must be proper and nonempty.
inline Rational phi_of_set(const SparseOperator& op, const std::vector<Rational>& pi,
                           const StateSubset& a) {
  Rational pi_a(0);
  for (std::uint64_t x = 0; x < op.n_states; ++x)
    if (a[x]) pi_a += pi[x];
  if (sgn(pi_a) == 0 || pi_a == 1)
    throw ParameterError("phi_of_set: subset must be proper and nonempty");
  const Rational q = q_flow(op, pi, a, complement(a));
  return q / (pi_a * (Rational(1) - pi_a));
}

inline Rational phi_of_set(const Graph& g, const ModelParams& p, const StateSubset& a,
                           const Budgets& budgets = Budgets{}) {
  const auto op = glauber_operator(g, p, budgets);
  const auto pi = gibbs_vector(g, p, budgets);
  return phi_of_set(op, pi, a);
}

// Phi = min over all proper nonempty A of Phi(A), by exhaustive enumeration
// of the 2^|Omega| subsets.  |Omega| must fit the conductance budget.
inline Rational global_conductance(const Graph& g, const ModelParams& p,
                                   const Budgets& budgets = Budgets{}) {
  const std::uint64_t states = state_count(g.vertex_count(), p.q(), budgets.conductance_states,
                                           "global_conductance (POTTS_CONDUCTANCE_BUDGET); "
                                           "use phi_of_set on candidate subsets instead");
  const auto op = glauber_operator(g, p, budgets);
  const auto pi = gibbs_vector(g, p, budgets);

  // flows between distinct states, precomputed once
  struct Flow {
    std::uint64_t x, y;
    Rational f;
  };
  std::vector<Flow> flows;
  for (std::uint64_t x = 0; x < states; ++x)
    for (const auto& [y, pr] : op.rows[x])
      if (y != x) flows.push_back({x, y, pi[x] * pr});

  std::optional<Rational> best;
  const std::uint64_t total = std::uint64_t{1} << states;
  for (std::uint64_t mask = 1; mask + 1 < total; ++mask) {
    Rational pi_a(0);
    for (std::uint64_t x = 0; x < states; ++x)
      if (mask & (std::uint64_t{1} << x)) pi_a += pi[x];
    Rational q(0);
    for (const auto& fl : flows)
      if ((mask & (std::uint64_t{1} << fl.x)) && !(mask & (std::uint64_t{1} << fl.y))) q += fl.f;
    const Rational phi = q / (pi_a * (Rational(1) - pi_a));
    if (!best || phi < *best) best = phi;
  }
  if (!best) throw ParameterError("global_conductance: state space too small");
  return *best;
}

// --- r-balls and r-shells around a colour -------------------------------------

// B_r(i) = {sigma : sigma_i >= n-r} as a state mask (enumerable Omega only).
inline StateSubset ball_mask(const Graph& g, int q, int r, int colour,
                             const Budgets& budgets = Budgets{}) {
  const int n = g.vertex_count();
  const std::uint64_t states = state_count(n, q, budgets.vector_states, "ball_mask");
  StateSubset mask(states, 0);
  for (std::uint64_t rank = 0; rank < states; ++rank) {
    const Configuration x = Configuration::decode(rank, n, q);
    const int count = static_cast<int>(std::count(x.colours.begin(), x.colours.end(), colour));
    if (count >= n - r) mask[rank] = 1;
  }
  return mask;
}

// Unnormalized shell and ball weights around a colour.  W_shell(r) is
// computed through the subset identity
//   sum over |A| = r of lambda^{E(V minus A)} * Z(G[A], lambda, q-1),
// never touching the full state space; W_ball sums the shells below.  Z is
// exact when q^n fits the budget, otherwise the monochromatic lower bound
// lambda^m * q is reported (flagged by z_exact).
struct ShellSums {
  int r = 0;
  int colour = 0;
  Rational w_shell;
  Rational w_ball;
  Rational z;
  bool z_exact = false;
};

namespace detail {

inline Rational shell_weight(const Graph& g, const ModelParams& p, int r,
                             const Budgets& budgets) {
  const int n = g.vertex_count();
  if (r == 0)
    return qpow(p.lambda(), static_cast<unsigned long>(g.edge_count()));
  const Integer subsets = binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(r));
  if (subsets > Integer(static_cast<unsigned long>(budgets.subsets)))
    throw CapacityError("shell_sums: C(n,r) exceeds subset budget (POTTS_SUBSET_BUDGET)");

  Rational total(0);
  std::vector<int> pick(static_cast<std::size_t>(r));
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  std::vector<int> index_of(static_cast<std::size_t>(n), -1);
  for (;;) {
    std::fill(in.begin(), in.end(), 0);
    for (std::size_t i = 0; i < pick.size(); ++i) {
      in[static_cast<std::size_t>(pick[i])] = 1;
      index_of[static_cast<std::size_t>(pick[i])] = static_cast<int>(i);
    }
    // edges outside A and the induced subgraph on A
    int outside = 0;
    std::vector<std::pair<Vertex, Vertex>> induced;
    for (const auto& [u, v] : g.edges()) {
      const bool iu = in[static_cast<std::size_t>(u)], iv = in[static_cast<std::size_t>(v)];
      if (!iu && !iv)
        outside++;
      else if (iu && iv)
        induced.push_back({index_of[static_cast<std::size_t>(u)], index_of[static_cast<std::size_t>(v)]});
    }
    Rational z_a(1);
    if (p.q() - 1 >= 2) {
      const Graph sub(r, std::move(induced));
      const auto counts = mu_histogram(sub, p.q() - 1, budgets);
      z_a = 0;
      for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k] != 0) z_a += Rational(counts[k]) * qpow(p.lambda(), k);
    }
    // q-1 == 1: exactly one colouring of A, with every induced edge monochromatic
    else
      z_a = qpow(p.lambda(), static_cast<unsigned long>(induced.size()));
    total += qpow(p.lambda(), static_cast<unsigned long>(outside)) * z_a;
    int i = r - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) break;
    pick[static_cast<std::size_t>(i)]++;
    for (int j = i + 1; j < r; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return total;
}

}  // namespace detail

inline ShellSums shell_sums(const Graph& g, const ModelParams& p, int r, int colour,
                            const Budgets& budgets = Budgets{}) {
  const int n = g.vertex_count();
  if (!p.exact()) throw ParameterError("shell_sums: exact mode required");
  if (colour < 0 || colour >= p.q()) throw ParameterError("shell_sums: colour out of range");
  if (r < 0 || r >= n) throw ParameterError("shell_sums: need 0 <= r < n");
  ShellSums sums;
  sums.r = r;
  sums.colour = colour;
  sums.w_shell = detail::shell_weight(g, p, r, budgets);
  sums.w_ball = 0;
  for (int j = 0; j <= r; ++j) sums.w_ball += detail::shell_weight(g, p, j, budgets);
  try {
    sums.z = partition_function(g, p, budgets);
    sums.z_exact = true;
  } catch (const CapacityError&) {
    sums.z = qpow(p.lambda(), static_cast<unsigned long>(g.edge_count())) * p.q();
    sums.z_exact = false;
  }
  return sums;
}

// Oracle path: the same sums by classifying a full sweep of Omega.
inline ShellSums shell_sums_enumerated(const Graph& g, const ModelParams& p, int r, int colour,
                                       const Budgets& budgets = Budgets{}) {
  const int n = g.vertex_count();
  if (colour < 0 || colour >= p.q()) throw ParameterError("shell_sums: colour out of range");
  if (r < 0 || r >= n) throw ParameterError("shell_sums: need 0 <= r < n");
  const std::uint64_t states =
      state_count(n, p.q(), budgets.vector_states, "shell_sums_enumerated (POTTS_VECTOR_BUDGET)");
  ShellSums sums;
  sums.r = r;
  sums.colour = colour;
  sums.w_shell = 0;
  sums.w_ball = 0;
  sums.z = 0;
  sums.z_exact = true;
  std::vector<Rational> pow_cache(static_cast<std::size_t>(g.edge_count()) + 1);
  for (std::size_t k = 0; k < pow_cache.size(); ++k) pow_cache[k] = qpow(p.lambda(), k);
  for (std::uint64_t rank = 0; rank < states; ++rank) {
    const Configuration x = Configuration::decode(rank, n, p.q());
    const int count = static_cast<int>(std::count(x.colours.begin(), x.colours.end(), colour));
    const Rational w = pow_cache[static_cast<std::size_t>(mono_edges(g, x))];
    sums.z += w;
    if (count == n - r) sums.w_shell += w;
    if (count >= n - r) sums.w_ball += w;
  }
  return sums;
}

// 2 pi(S_r) / pi(B_r) = 2 W_shell / W_ball: the shell upper bound on
// Phi(B_r).  Requires q >= 2 (the pi(complement) >= 1/2 step of its proof).
inline Rational phi_ball_bound(const Graph& g, const ModelParams& p, int r,
                               const Budgets& budgets = Budgets{}) {
  if (p.q() < 2) throw ParameterError("phi_ball_bound requires q >= 2");
  if (r >= g.vertex_count()) throw ParameterError("phi_ball_bound: B_n is all of Omega");
  const ShellSums sums = shell_sums(g, p, r, 0, budgets);
  return 2 * sums.w_shell / sums.w_ball;
}

// tau(M) >= (e-1) / (2e Phi).
inline double conductance_mixing_lower(double phi) {
  if (!(phi > 0)) return std::numeric_limits<double>::infinity();
  const double e = std::exp(1.0);
  return (e - 1) / (2 * e * phi);
}

}  // namespace potts
