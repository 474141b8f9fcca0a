#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "potts/blocks.hpp"
#include "potts/budgets.hpp"
#include "potts/errors.hpp"
#include "potts/gibbs.hpp"
#include "potts/graph.hpp"
#include "potts/rational.hpp"
#include "potts/rng.hpp"

namespace potts {

// --- single steps -----------------------------------------------------------
//
// Randomness contract (documented so trajectories replay across builds):
// glauber_step draws the vertex first (rng.below(n)), then one 64-bit word
// for the colour, inverted through the exact local CDF.  block_step draws one
// 64-bit word for the block (inverted through psi), then one 64-bit word for
// the block configuration.

inline int invert_cdf_u64(const std::vector<Rational>& weights, const Rational& total,
                          std::uint64_t u) {
  // least i with cum_i > u/2^64 * total, exact arithmetic
  const Rational target = dyadic_u64(u) * total;
  Rational cum(0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (target < cum) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

inline Configuration glauber_step(const Graph& g, const ModelParams& p, const Configuration& x,
                                  Rng& rng) {
  p.require_ferromagnetic();
  check_compatible(g, x);
  const int n = g.vertex_count();
  const Vertex v = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(n)));
  const std::uint64_t u = rng.next_u64();
  Configuration out = x;
  if (p.exact()) {
    const auto counts = local_counts(g, x, v);
    std::vector<Rational> w(counts.size());
    Rational total(0);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      w[c] = qpow(p.lambda(), static_cast<unsigned long>(counts[c]));
      total += w[c];
    }
    out.colours[static_cast<std::size_t>(v)] = invert_cdf_u64(w, total, u);
  } else {
    const auto w = local_weights_float(g, p, x, v);
    double total = 0;
    for (double t : w) total += t;
    const double target = static_cast<double>(u >> 11) * 0x1.0p-53 * total;
    double cum = 0;
    int chosen = static_cast<int>(w.size()) - 1;
    for (std::size_t c = 0; c < w.size(); ++c) {
      cum += w[c];
      if (target < cum) {
        chosen = static_cast<int>(c);
        break;
      }
    }
    out.colours[static_cast<std::size_t>(v)] = chosen;
  }
  return out;
}

inline Configuration block_step(const Graph& g, const ModelParams& p, const BlockSystem& sys,
                                const Configuration& x, Rng& rng,
                                const Budgets& budgets = Budgets{}) {
  p.require_ferromagnetic();
  check_compatible(g, x);
  const std::uint64_t ub = rng.next_u64();
  const std::uint64_t uc = rng.next_u64();
  const int b = invert_cdf_u64(sys.psi, Rational(1), ub);
  const VertexSet& s = sys.blocks[static_cast<std::size_t>(b)];
  if (!p.exact()) throw ParameterError("block_step: exact mode required");
  const BlockLaw law = block_distribution(g, p, x, s, budgets);
  const int rank = invert_cdf_u64(law.dist.p, Rational(1), uc);
  return overwrite(x, s, law.decode(static_cast<std::uint64_t>(rank)));
}

// --- trajectories ------------------------------------------------------------

struct Trajectory {
  std::vector<long> steps;
  std::vector<Configuration> states;

  // CSV with "step,colour_0,...,colour_{n-1}" header.
  std::string csv() const {
    std::string s = "step";
    const int n = states.empty() ? 0 : static_cast<int>(states.front().colours.size());
    for (int i = 0; i < n; ++i) s += ",colour_" + std::to_string(i);
    s += "\n";
    for (std::size_t i = 0; i < steps.size(); ++i)
      s += std::to_string(steps[i]) + "," + states[i].csv() + "\n";
    return s;
  }
};

// Runs `steps` Glauber (or block) updates from `start`, recording the state
// at step 0 and after every `thin`-th step.  Reproducible from the seed.
inline Trajectory run_chain(const Graph& g, const ModelParams& p, const Configuration& start,
                            long steps, std::uint64_t seed, long thin = 1,
                            const BlockSystem* blocks = nullptr,
                            const Budgets& budgets = Budgets{}) {
  if (steps < 0 || thin < 1) throw ParameterError("run_chain: bad steps/thin");
  Rng rng(seed);
  Trajectory t;
  Configuration x = start;
  t.steps.push_back(0);
  t.states.push_back(x);
  for (long i = 1; i <= steps; ++i) {
    x = blocks ? block_step(g, p, *blocks, x, rng, budgets) : glauber_step(g, p, x, rng);
    if (i % thin == 0) {
      t.steps.push_back(i);
      t.states.push_back(x);
    }
  }
  return t;
}

// --- exact transition operators ----------------------------------------------

// Row-stochastic operator over state ranks with exact rational entries;
// rows are sparse and sorted by target.
struct SparseOperator {
  std::uint64_t n_states = 0;
  std::vector<std::vector<std::pair<std::uint64_t, Rational>>> rows;

  Rational prob(std::uint64_t x, std::uint64_t y) const {
    const auto& row = rows.at(x);
    auto it = std::lower_bound(row.begin(), row.end(), y,
                               [](const auto& e, std::uint64_t t) { return e.first < t; });
    if (it == row.end() || it->first != y) return Rational(0);
    return it->second;
  }

  // mu <- mu P
  std::vector<Rational> apply_left(const std::vector<Rational>& mu) const {
    std::vector<Rational> out(n_states, Rational(0));
    for (std::uint64_t x = 0; x < n_states; ++x) {
      if (sgn(mu[x]) == 0) continue;
      for (const auto& [y, pr] : rows[x]) out[y] += mu[x] * pr;
    }
    return out;
  }
};

namespace detail {

inline void add_to_row(std::map<std::uint64_t, Rational>& row, std::uint64_t y, const Rational& p) {
  row[y] += p;
}

}  // namespace detail

inline SparseOperator glauber_operator(const Graph& g, const ModelParams& p,
                                       const Budgets& budgets = Budgets{}) {
  p.require_ferromagnetic();
  if (!p.exact()) throw ParameterError("glauber_operator: exact mode required");
  const int n = g.vertex_count();
  const int q = p.q();
  const std::uint64_t states =
      state_count(n, q, budgets.operator_states, "glauber_operator (POTTS_OPERATOR_BUDGET)");
  SparseOperator op;
  op.n_states = states;
  op.rows.resize(states);
  std::vector<Rational> lambda_pow(static_cast<std::size_t>(g.max_degree()) + 1);
  for (std::size_t k = 0; k < lambda_pow.size(); ++k) lambda_pow[k] = qpow(p.lambda(), k);

  std::vector<std::uint64_t> digit(static_cast<std::size_t>(n));
  digit[0] = 1;
  for (int i = 1; i < n; ++i) digit[static_cast<std::size_t>(i)] = digit[static_cast<std::size_t>(i - 1)] * q;

  Configuration x{std::vector<int>(static_cast<std::size_t>(n), 0), q};
  for (std::uint64_t rank = 0; rank < states; ++rank) {
    x = Configuration::decode(rank, n, q);
    std::map<std::uint64_t, Rational> row;
    for (Vertex v = 0; v < n; ++v) {
      const auto counts = local_counts(g, x, v);
      Rational z_local(0);
      for (int c = 0; c < q; ++c) z_local += lambda_pow[static_cast<std::size_t>(counts[c])];
      for (int c = 0; c < q; ++c) {
        const std::uint64_t y =
            rank + (static_cast<std::uint64_t>(c) - static_cast<std::uint64_t>(x.colours[v])) *
                       digit[static_cast<std::size_t>(v)];
        detail::add_to_row(row, y,
                           lambda_pow[static_cast<std::size_t>(counts[c])] / (z_local * n));
      }
    }
    op.rows[rank].assign(row.begin(), row.end());
  }
  return op;
}

inline SparseOperator block_operator(const Graph& g, const ModelParams& p, const BlockSystem& sys,
                                     const Budgets& budgets = Budgets{}) {
  p.require_ferromagnetic();
  if (!p.exact()) throw ParameterError("block_operator: exact mode required");
  const int n = g.vertex_count();
  const int q = p.q();
  const std::uint64_t states =
      state_count(n, q, budgets.operator_states, "block_operator (POTTS_OPERATOR_BUDGET)");
  SparseOperator op;
  op.n_states = states;
  op.rows.resize(states);
  for (std::uint64_t rank = 0; rank < states; ++rank) {
    const Configuration x = Configuration::decode(rank, n, q);
    std::map<std::uint64_t, Rational> row;
    for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
      const BlockLaw law = block_distribution(g, p, x, sys.blocks[b], budgets);
      for (std::size_t cr = 0; cr < law.dist.p.size(); ++cr) {
        const Configuration y = overwrite(x, sys.blocks[b], law.decode(cr));
        detail::add_to_row(row, y.rank(), sys.psi[b] * law.dist.p[cr]);
      }
    }
    op.rows[rank].assign(row.begin(), row.end());
  }
  return op;
}

inline bool rows_stochastic(const SparseOperator& op) {
  for (const auto& row : op.rows) {
    Rational sum(0);
    for (const auto& [y, pr] : row) {
      if (sgn(pr) < 0) return false;
      sum += pr;
    }
    if (sum != 1) return false;
  }
  return true;
}

// pi(x) P(x,y) == pi(y) P(y,x) for every transition, exact.
inline bool detailed_balance(const SparseOperator& op, const std::vector<Rational>& pi) {
  for (std::uint64_t x = 0; x < op.n_states; ++x)
    for (const auto& [y, pr] : op.rows[x])
      if (pi[x] * pr != pi[y] * op.prob(y, x)) return false;
  return true;
}

// pi P == pi, exact.
inline bool stationary(const SparseOperator& op, const std::vector<Rational>& pi) {
  const auto out = op.apply_left(pi);
  for (std::uint64_t x = 0; x < op.n_states; ++x)
    if (out[x] != pi[x]) return false;
  return true;
}

// --- exact TV curves (implicit operator, exact arithmetic) -------------------

struct TVCurve {
  std::vector<long> times;
  std::vector<Rational> tv;

  std::string csv() const {
    std::string s = "t,tv\n";
    for (std::size_t i = 0; i < times.size(); ++i)
      s += std::to_string(times[i]) + "," + to_string(tv[i]) + "\n";
    return s;
  }
};

namespace detail {

// One Glauber evolution step of a distribution vector, operator applied on
// the fly (memory O(q^n), operator never materialized).
inline std::vector<Rational> glauber_evolve(const Graph& g, const ModelParams& p,
                                            const std::vector<Rational>& mu) {
  const int n = g.vertex_count();
  const int q = p.q();
  std::vector<Rational> out(mu.size(), Rational(0));
  std::vector<Rational> lambda_pow(static_cast<std::size_t>(g.max_degree()) + 1);
  for (std::size_t k = 0; k < lambda_pow.size(); ++k) lambda_pow[k] = qpow(p.lambda(), k);
  std::vector<std::uint64_t> digit(static_cast<std::size_t>(n));
  digit[0] = 1;
  for (int i = 1; i < n; ++i) digit[static_cast<std::size_t>(i)] = digit[static_cast<std::size_t>(i - 1)] * static_cast<std::uint64_t>(q);

  for (std::uint64_t rank = 0; rank < mu.size(); ++rank) {
    if (sgn(mu[rank]) == 0) continue;
    const Configuration x = Configuration::decode(rank, n, q);
    for (Vertex v = 0; v < n; ++v) {
      const auto counts = local_counts(g, x, v);
      Rational z_local(0);
      for (int c = 0; c < q; ++c) z_local += lambda_pow[static_cast<std::size_t>(counts[c])];
      const Rational scale = mu[rank] / (z_local * n);
      for (int c = 0; c < q; ++c) {
        const std::uint64_t y =
            rank + (static_cast<std::uint64_t>(c) - static_cast<std::uint64_t>(x.colours[v])) *
                       digit[static_cast<std::size_t>(v)];
        out[y] += scale * lambda_pow[static_cast<std::size_t>(counts[c])];
      }
    }
  }
  return out;
}

inline Rational tv_against(const std::vector<Rational>& mu, const std::vector<Rational>& pi) {
  Rational acc(0);
  for (std::size_t i = 0; i < mu.size(); ++i) acc += abs(mu[i] - pi[i]);
  return acc / 2;
}

}  // namespace detail

// Exact TV(t) for t = 0..t_max from a start distribution.
inline TVCurve tv_curve(const Graph& g, const ModelParams& p, std::vector<Rational> start,
                        long t_max, const Budgets& budgets = Budgets{}) {
  p.require_ferromagnetic();
  const std::uint64_t states =
      state_count(g.vertex_count(), p.q(), budgets.vector_states, "tv_curve (POTTS_VECTOR_BUDGET)");
  if (start.size() != states) throw ParameterError("tv_curve: start vector has wrong size");
  const auto pi = gibbs_vector(g, p, budgets);
  TVCurve curve;
  for (long t = 0;; ++t) {
    curve.times.push_back(t);
    curve.tv.push_back(detail::tv_against(start, pi));
    if (t == t_max) break;
    start = detail::glauber_evolve(g, p, start);
  }
  return curve;
}

inline TVCurve tv_curve(const Graph& g, const ModelParams& p, const Configuration& start,
                        long t_max, const Budgets& budgets = Budgets{}) {
  const std::uint64_t states =
      state_count(g.vertex_count(), p.q(), budgets.vector_states, "tv_curve (POTTS_VECTOR_BUDGET)");
  std::vector<Rational> mu(states, Rational(0));
  mu[start.rank()] = 1;
  return tv_curve(g, p, std::move(mu), t_max, budgets);
}

// max over the supplied starts of min{t : TV(t) <= eps}.  A lower bound on
// the true mixing time unless the starts cover all of Omega.
inline long mixing_time_exact(const Graph& g, const ModelParams& p, double eps,
                              const std::vector<Configuration>& starts,
                              const Budgets& budgets = Budgets{}, long t_cap = 1'000'000) {
  if (eps >= 1) return 0;
  if (eps <= 0) throw ParameterError("mixing_time_exact: eps must be positive");
  p.require_ferromagnetic();
  const std::uint64_t states = state_count(g.vertex_count(), p.q(), budgets.vector_states,
                                           "mixing_time_exact (POTTS_VECTOR_BUDGET)");
  const auto pi = gibbs_vector(g, p, budgets);
  long worst = 0;
  for (const auto& start : starts) {
    check_compatible(g, start);
    std::vector<Rational> mu(states, Rational(0));
    mu[start.rank()] = 1;
    long t = 0;
    while (detail::tv_against(mu, pi).get_d() > eps) {
      mu = detail::glauber_evolve(g, p, mu);
      if (++t > t_cap) throw CapacityError("mixing_time_exact: exceeded step cap");
    }
    worst = std::max(worst, t);
  }
  return worst;
}

// Exact mixing time: maximized over every state of Omega.
inline long mixing_time_exact_all_starts(const Graph& g, const ModelParams& p, double eps,
                                         const Budgets& budgets = Budgets{},
                                         long t_cap = 1'000'000) {
  const std::uint64_t states = state_count(g.vertex_count(), p.q(), budgets.operator_states,
                                           "mixing_time_exact_all_starts (POTTS_OPERATOR_BUDGET)");
  std::vector<Configuration> starts;
  starts.reserve(states);
  for (std::uint64_t r = 0; r < states; ++r)
    starts.push_back(Configuration::decode(r, g.vertex_count(), p.q()));
  return mixing_time_exact(g, p, eps, starts, budgets, t_cap);
}

// --- path coupling ------------------------------------------------------------

// Two configurations at Hamming distance exactly one.
struct AdjacentPair {
  Configuration a;
  Configuration b;
  Vertex u = -1;  // the disagreement vertex

  static AdjacentPair of(Configuration a, Configuration b) {
    if (a.colours.size() != b.colours.size() || a.q != b.q)
      throw ParameterError("adjacent pair: mismatched configurations");
    Vertex u = -1;
    for (std::size_t i = 0; i < a.colours.size(); ++i) {
      if (a.colours[i] != b.colours[i]) {
        if (u >= 0) throw ParameterError("adjacent pair: Hamming distance exceeds 1");
        u = static_cast<Vertex>(i);
      }
    }
    if (u < 0) throw ParameterError("adjacent pair: configurations are equal");
    return AdjacentPair{std::move(a), std::move(b), u};
  }
};

// One maximally-coupled Glauber step: the same uniformly chosen vertex in
// both copies, colours drawn through maximal_coupling of the two local laws.
// Draw order: vertex, then one 64-bit word shared by both copies.
inline std::pair<Configuration, Configuration> coupled_glauber_step(const Graph& g,
                                                                    const ModelParams& p,
                                                                    const AdjacentPair& pair,
                                                                    Rng& rng) {
  p.require_ferromagnetic();
  const int n = g.vertex_count();
  const Vertex v = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(n)));
  const Rational u = dyadic_u64(rng.next_u64());
  const Distribution phi_a = local_distribution(g, p, pair.a, v);
  const Distribution phi_b = local_distribution(g, p, pair.b, v);
  const auto [ca, cb] = maximal_coupling(phi_a, phi_b, u);
  Configuration a = pair.a, b = pair.b;
  a.colours[static_cast<std::size_t>(v)] = ca;
  b.colours[static_cast<std::size_t>(v)] = cb;
  return {std::move(a), std::move(b)};
}

// Exact expected Hamming distance after one maximally-coupled step:
// 1 - 1/n + (1/n) sum over neighbours v of u of TV(phi_A^v, phi_B^v).
inline Rational contraction_exact(const Graph& g, const ModelParams& p, const AdjacentPair& pair) {
  check_compatible(g, pair.a);
  check_compatible(g, pair.b);
  const int n = g.vertex_count();
  Rational acc = Rational(1) - Rational(1, n);
  for (const auto& [v, mult] : g.neighbours(pair.u)) {
    const Distribution phi_a = local_distribution(g, p, pair.a, v);
    const Distribution phi_b = local_distribution(g, p, pair.b, v);
    acc += tv_distance(phi_a, phi_b) / n;
  }
  return acc;
}

// Exhaustive one-step contraction scan over every adjacent pair of the
// instance.  pairs = q^n * n * (q-1) ordered pairs; must fit the budget.
struct ContractionReport {
  Rational max_contraction;
  std::uint64_t pairs_checked = 0;
  Configuration argmax_a;
  Configuration argmax_b;
};

inline ContractionReport contraction_scan(const Graph& g, const ModelParams& p,
                                          const Budgets& budgets = Budgets{}) {
  const int n = g.vertex_count();
  const int q = p.q();
  const std::uint64_t states =
      state_count(n, q, budgets.vector_states, "contraction_scan (POTTS_VECTOR_BUDGET)");
  ContractionReport report{Rational(0), 0, {}, {}};
  for (std::uint64_t rank = 0; rank < states; ++rank) {
    const Configuration a = Configuration::decode(rank, n, q);
    for (Vertex u = 0; u < n; ++u) {
      for (int c = 0; c < q; ++c) {
        if (c == a.colours[static_cast<std::size_t>(u)]) continue;
        Configuration b = a;
        b.colours[static_cast<std::size_t>(u)] = c;
        const auto pair = AdjacentPair{a, std::move(b), u};
        const Rational value = contraction_exact(g, p, pair);
        report.pairs_checked++;
        if (value > report.max_contraction) {
          report.max_contraction = value;
          report.argmax_a = pair.a;
          report.argmax_b = pair.b;
        }
      }
    }
  }
  return report;
}

// Worst-case one-step TV between the local laws at a disagreeing neighbour,
// maximized over all neighbour colour profiles: g(lambda, q) by brute force
// over compositions a_1 + ... + a_q = maxdeg with a_1 >= 1 (the profile seen
// by A, where the disagreement vertex is coloured 1 in A and 2 in B).
inline Rational worst_pair_tv(int maxdeg, int q, const Rational& lambda) {
  if (maxdeg < 1 || q < 2) throw ParameterError("worst_pair_tv: need degree >= 1, q >= 2");
  std::vector<int> a(static_cast<std::size_t>(q), 0);
  Rational best(0);
  auto evaluate = [&]() {
    std::vector<Rational> wa(static_cast<std::size_t>(q)), wb(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) {
      int bi = a[static_cast<std::size_t>(i)];
      if (i == 0) bi -= 1;  // b_1 = a_1 - 1
      if (i == 1) bi += 1;  // b_2 = a_2 + 1
      wa[static_cast<std::size_t>(i)] = qpow(lambda, static_cast<unsigned long>(a[static_cast<std::size_t>(i)]));
      wb[static_cast<std::size_t>(i)] = qpow(lambda, static_cast<unsigned long>(bi));
    }
    best = std::max(best, tv_distance(Distribution::from_weights(wa),
                                      Distribution::from_weights(wb)));
  };
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == q - 1) {
      a[static_cast<std::size_t>(i)] = left;
      if (a[0] >= 1) evaluate();
      return;
    }
    for (int take = 0; take <= left; ++take) {
      a[static_cast<std::size_t>(i)] = take;
      self(self, i + 1, left - take);
    }
  };
  rec(rec, 0, maxdeg);
  return best;
}

}  // namespace potts
