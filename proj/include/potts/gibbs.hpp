#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "potts/budgets.hpp"
#include "potts/errors.hpp"
#include "potts/graph.hpp"
#include "potts/rational.hpp"

namespace potts {

enum class Mode { Exact, FloatLog };

// Activity + colour count.  Exact mode keeps lambda as an exact rational and
// drives every all-rational code path; float-log mode works with log(lambda)
// doubles for larger sweeps.  lambda < 1 is rejected outright; lambda = 1 is
// admitted for extremal computations only and dynamics additionally require
// lambda > 1.
class ModelParams {
 public:
  static ModelParams exact(const Rational& lambda, int q) {
    check_q(q);
    if (lambda < 1) throw ParameterError("activity must satisfy lambda >= 1");
    ModelParams p;
    p.lambda_ = lambda;
    p.log_lambda_ = log_value(lambda);
    p.q_ = q;
    p.mode_ = Mode::Exact;
    return p;
  }

  static ModelParams float_log(double lambda, int q) {
    check_q(q);
    if (!(lambda >= 1)) throw ParameterError("activity must satisfy lambda >= 1");
    ModelParams p;
    p.lambda_ = Rational(0);
    p.log_lambda_ = std::log(lambda);
    p.q_ = q;
    p.mode_ = Mode::FloatLog;
    return p;
  }

  const Rational& lambda() const {
    if (mode_ != Mode::Exact) throw ParameterError("exact lambda requested in float-log mode");
    return lambda_;
  }
  double log_lambda() const { return log_lambda_; }
  int q() const { return q_; }
  Mode mode() const { return mode_; }
  bool exact() const { return mode_ == Mode::Exact; }

  // Dynamics run strictly ferromagnetically.
  void require_ferromagnetic() const {
    if (log_lambda_ <= 0) throw ParameterError("dynamics require lambda > 1");
  }

 private:
  static void check_q(int q) {
    if (q < 2) throw ParameterError("colour count must be at least 2");
  }

  Rational lambda_;
  double log_lambda_ = 0;
  int q_ = 0;
  Mode mode_ = Mode::Exact;
};

// One state of the chain: a colour in {0..q-1} per vertex.
struct Configuration {
  std::vector<int> colours;
  int q = 0;

  static Configuration constant(int n, int q, int colour) {
    if (colour < 0 || colour >= q) throw ParameterError("colour out of range");
    return Configuration{std::vector<int>(n, colour), q};
  }

  // State rank with vertex 0 as the fastest digit.
  std::uint64_t rank() const {
    std::uint64_t r = 0;
    for (std::size_t i = colours.size(); i-- > 0;)
      r = r * static_cast<std::uint64_t>(q) + static_cast<std::uint64_t>(colours[i]);
    return r;
  }

  static Configuration decode(std::uint64_t rank, int n, int q) {
    Configuration c{std::vector<int>(n, 0), q};
    for (int i = 0; i < n; ++i) {
      c.colours[i] = static_cast<int>(rank % static_cast<std::uint64_t>(q));
      rank /= static_cast<std::uint64_t>(q);
    }
    return c;
  }

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < colours.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(colours[i]);
    }
    return s;
  }

  bool operator==(const Configuration& other) const = default;
};

inline void check_compatible(const Graph& g, const Configuration& x) {
  if (static_cast<int>(x.colours.size()) != g.vertex_count())
    throw ParameterError("configuration length does not match vertex count");
  for (int c : x.colours)
    if (c < 0 || c >= x.q) throw ParameterError("configuration colour out of range");
}

// mu(sigma): monochromatic edges, multiplicity counted.
inline int mono_edges(const Graph& g, const Configuration& x) {
  check_compatible(g, x);
  int count = 0;
  for (const auto& [u, v] : g.edges())
    if (x.colours[u] == x.colours[v]) count++;
  return count;
}

// q^n as a checked uint64.
inline std::uint64_t state_count(int n, int q, std::uint64_t budget, const char* who) {
  Integer total = ipow(static_cast<unsigned long>(q), static_cast<unsigned long>(n));
  if (total > Integer(static_cast<unsigned long>(budget)))
    throw CapacityError(std::string(who) + ": q^n = " + to_string(total) +
                        " exceeds budget " + std::to_string(budget));
  return mpz_get_ui(total.get_mpz_t());
}

namespace detail {

// Odometer sweep over [q]^V in rank order, maintaining mu incrementally.
// visit(rank, mu) is called for every configuration.
template <typename Visit>
void sweep_configurations(const Graph& g, int q, std::uint64_t states, Visit&& visit) {
  const int n = g.vertex_count();
  std::vector<int> colour(n, 0);
  int mu = g.edge_count();  // all-0 configuration is fully monochromatic
  visit(std::uint64_t{0}, mu);
  for (std::uint64_t rank = 1; rank < states; ++rank) {
    int i = 0;
    for (;;) {
      const int old = colour[i];
      const int next = (old + 1) % q;
      for (const auto& [w, mult] : g.neighbours(i)) {
        if (colour[w] == old) mu -= mult;
        if (colour[w] == next) mu += mult;
      }
      colour[i] = next;
      if (next != 0) break;
      ++i;  // carry
    }
    visit(rank, mu);
  }
}

}  // namespace detail

// counts[k] = number of configurations with exactly k monochromatic edges.
// Independent of lambda; the basis for every exact partition function.
inline std::vector<Integer> mu_histogram(const Graph& g, int q,
                                         const Budgets& budgets = Budgets{}) {
  const std::uint64_t states =
      state_count(g.vertex_count(), q, budgets.z_states, "mu_histogram (POTTS_Z_BUDGET)");
  std::vector<Integer> counts(static_cast<std::size_t>(g.edge_count()) + 1, Integer(0));
  detail::sweep_configurations(g, q, states,
                               [&](std::uint64_t, int mu) { counts[static_cast<std::size_t>(mu)] += 1; });
  return counts;
}

// Z(G, lambda, q) = sum_k counts[k] lambda^k, exact.
inline Rational partition_function(const Graph& g, const ModelParams& p,
                                   const Budgets& budgets = Budgets{}) {
  if (!p.exact()) throw ParameterError("partition_function: exact mode required (use log_partition_function)");
  const auto counts = mu_histogram(g, p.q(), budgets);
  Rational z(0);
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] != 0) z += Rational(counts[k]) * qpow(p.lambda(), k);
  return z;
}

// log Z by log-sum-exp over the (exact) mu histogram; works in both modes.
inline double log_partition_function(const Graph& g, const ModelParams& p,
                                     const Budgets& budgets = Budgets{}) {
  const auto counts = mu_histogram(g, p.q(), budgets);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    const double t = log_value(counts[k]) + static_cast<double>(k) * p.log_lambda();
    terms.push_back(t);
    best = std::max(best, t);
  }
  double sum = 0;
  for (double t : terms) sum += std::exp(t - best);
  return best + std::log(sum);
}

inline Rational gibbs_prob(const Graph& g, const ModelParams& p, const Configuration& x,
                           const Budgets& budgets = Budgets{}) {
  return qpow(p.lambda(), static_cast<unsigned long>(mono_edges(g, x))) /
         partition_function(g, p, budgets);
}

// Exact Gibbs vector over state ranks (normalized).
inline std::vector<Rational> gibbs_vector(const Graph& g, const ModelParams& p,
                                          const Budgets& budgets = Budgets{}) {
  if (!p.exact()) throw ParameterError("gibbs_vector: exact mode required");
  const std::uint64_t states =
      state_count(g.vertex_count(), p.q(), budgets.vector_states, "gibbs_vector (POTTS_VECTOR_BUDGET)");
  std::vector<Rational> w(states);
  std::vector<Rational> pow_cache(static_cast<std::size_t>(g.edge_count()) + 1);
  for (std::size_t k = 0; k < pow_cache.size(); ++k) pow_cache[k] = qpow(p.lambda(), k);
  Rational z(0);
  detail::sweep_configurations(g, p.q(), states, [&](std::uint64_t rank, int mu) {
    w[rank] = pow_cache[static_cast<std::size_t>(mu)];
    z += w[rank];
  });
  for (auto& x : w) x /= z;
  return w;
}

// Finite distribution with exact rational weights summing to 1.
struct Distribution {
  std::vector<Rational> p;

  static Distribution from_weights(std::vector<Rational> w) {
    Rational total(0);
    for (const auto& x : w) {
      if (sgn(x) < 0) throw ParameterError("distribution weight is negative");
      total += x;
    }
    if (sgn(total) <= 0) throw ParameterError("distribution has zero total weight");
    for (auto& x : w) x /= total;
    return Distribution{std::move(w)};
  }

  int size() const { return static_cast<int>(p.size()); }

  // JSON array of (index, weight-as-string) pairs.
  std::string json() const {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) s += ",";
      s += "[" + std::to_string(i) + ",\"" + to_string(p[i]) + "\"]";
    }
    return s + "]";
  }
};

inline Rational tv_distance(const Distribution& a, const Distribution& b) {
  if (a.p.size() != b.p.size()) throw ParameterError("tv_distance: mismatched supports");
  Rational acc(0);
  for (std::size_t i = 0; i < a.p.size(); ++i) acc += abs(a.p[i] - b.p[i]);
  return acc / 2;
}

// n(X,v,c) for every colour c: neighbours of v coloured c, with multiplicity.
inline std::vector<int> local_counts(const Graph& g, const Configuration& x, Vertex v) {
  std::vector<int> counts(x.q, 0);
  for (const auto& [w, mult] : g.neighbours(v)) counts[x.colours[w]] += mult;
  return counts;
}

// phi_X^v: heat-bath law at v given X, weights lambda^{n(X,v,c)}.
inline Distribution local_distribution(const Graph& g, const ModelParams& p,
                                       const Configuration& x, Vertex v) {
  check_compatible(g, x);
  const auto counts = local_counts(g, x, v);
  std::vector<Rational> w(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c)
    w[c] = qpow(p.lambda(), static_cast<unsigned long>(counts[c]));
  return Distribution::from_weights(std::move(w));
}

// Unnormalized local weights in float-log mode (plain doubles; exponents are
// at most the max degree, so no overflow concern).
inline std::vector<double> local_weights_float(const Graph& g, const ModelParams& p,
                                               const Configuration& x, Vertex v) {
  const auto counts = local_counts(g, x, v);
  std::vector<double> w(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c)
    w[c] = std::exp(static_cast<double>(counts[c]) * p.log_lambda());
  return w;
}

// X^{(S,c)}: splice block configuration c (aligned with s.members) into X.
inline Configuration overwrite(const Configuration& x, const VertexSet& s,
                               const std::vector<int>& c) {
  if (c.size() != s.members.size()) throw ParameterError("overwrite: block configuration size mismatch");
  Configuration out = x;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] < 0 || c[i] >= x.q) throw ParameterError("overwrite: colour out of range");
    out.colours[static_cast<std::size_t>(s.members[i])] = c[i];
  }
  return out;
}

// mu_{X,S}(c): monochromatic edges of X^{(S,c)} incident with S.
inline int block_mu(const Graph& g, const Configuration& x, const VertexSet& s,
                    const std::vector<int>& c) {
  const Configuration y = overwrite(x, s, c);
  int count = 0;
  for (const auto& [u, v] : g.edges())
    if ((s.contains(u) || s.contains(v)) && y.colours[u] == y.colours[v]) count++;
  return count;
}

// phi_{X,S} over [q]^S plus its normalizer Z_{X,S}.  Block configurations are
// indexed in rank order (first member of S fastest).
struct BlockLaw {
  Distribution dist;
  Rational z;  // Z_{X,S}, unnormalized
  int block_size = 0;
  int q = 0;

  std::vector<int> decode(std::uint64_t rank) const {
    std::vector<int> c(block_size);
    for (int i = 0; i < block_size; ++i) {
      c[i] = static_cast<int>(rank % static_cast<std::uint64_t>(q));
      rank /= static_cast<std::uint64_t>(q);
    }
    return c;
  }
};

inline BlockLaw block_distribution(const Graph& g, const ModelParams& p, const Configuration& x,
                                   const VertexSet& s, const Budgets& budgets = Budgets{}) {
  check_compatible(g, x);
  const std::uint64_t states =
      state_count(s.size(), p.q(), budgets.z_states, "block_distribution (POTTS_Z_BUDGET)");
  std::vector<Rational> w(states);
  Rational z(0);
  std::vector<int> c(s.members.size(), 0);
  for (std::uint64_t rank = 0; rank < states; ++rank) {
    std::uint64_t r = rank;
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] = static_cast<int>(r % static_cast<std::uint64_t>(p.q()));
      r /= static_cast<std::uint64_t>(p.q());
    }
    w[rank] = qpow(p.lambda(), static_cast<unsigned long>(block_mu(g, x, s, c)));
    z += w[rank];
  }
  auto dist = Distribution::from_weights(std::move(w));
  return BlockLaw{std::move(dist), std::move(z), s.size(), p.q()};
}

// --- couplings ---

// Index sampled by exact inversion: least i with cumulative weight > u.
inline int sample_index(const Distribution& d, const Rational& u) {
  if (sgn(u) < 0 || u >= 1) throw ParameterError("sample_index: u must lie in [0,1)");
  Rational cum(0);
  for (std::size_t i = 0; i < d.p.size(); ++i) {
    cum += d.p[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(d.p.size()) - 1;  // u == 1-epsilon rounding guard
}

// Maximal coupling of (a, b) driven by one uniform u in [0,1): with
// probability 1-TV sample the overlap (equal outcomes), otherwise sample the
// two residuals comonotonically (their supports are disjoint, so outcomes
// differ).  Marginals are exactly a and b; P[equal] = 1 - TV(a,b).
inline std::pair<int, int> maximal_coupling(const Distribution& a, const Distribution& b,
                                            const Rational& u) {
  if (a.p.size() != b.p.size()) throw ParameterError("maximal_coupling: mismatched supports");
  if (sgn(u) < 0 || u >= 1) throw ParameterError("maximal_coupling: u must lie in [0,1)");
  Rational overlap(0);
  for (std::size_t i = 0; i < a.p.size(); ++i) overlap += std::min(a.p[i], b.p[i]);
  if (u < overlap) {
    Rational cum(0);
    for (std::size_t i = 0; i < a.p.size(); ++i) {
      cum += std::min(a.p[i], b.p[i]);
      if (u < cum) return {static_cast<int>(i), static_cast<int>(i)};
    }
  }
  // residual branch; tv = 1 - overlap > 0 here
  const Rational tv = Rational(1) - overlap;
  const Rational w = (u - overlap) / tv;
  int x = -1, y = -1;
  Rational cum_a(0), cum_b(0);
  for (std::size_t i = 0; i < a.p.size() && (x < 0 || y < 0); ++i) {
    if (x < 0) {
      cum_a += std::max(Rational(0), a.p[i] - b.p[i]) / tv;
      if (w < cum_a) x = static_cast<int>(i);
    }
    if (y < 0) {
      cum_b += std::max(Rational(0), b.p[i] - a.p[i]) / tv;
      if (w < cum_b) y = static_cast<int>(i);
    }
  }
  if (x < 0) x = static_cast<int>(a.p.size()) - 1;
  if (y < 0) y = static_cast<int>(a.p.size()) - 1;
  return {x, y};
}

// The exact joint law of maximal_coupling as a partition of [0,1) into
// intervals on which the outcome pair is constant.  Lets tests integrate over
// the coupling's randomness in closed form.
struct CouplingSegment {
  Rational length;
  int x;
  int y;
};

inline std::vector<CouplingSegment> coupling_segments(const Distribution& a,
                                                      const Distribution& b) {
  if (a.p.size() != b.p.size()) throw ParameterError("coupling_segments: mismatched supports");
  std::vector<CouplingSegment> segs;
  Rational overlap(0);
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    const Rational m = std::min(a.p[i], b.p[i]);
    if (sgn(m) > 0) segs.push_back({m, static_cast<int>(i), static_cast<int>(i)});
    overlap += m;
  }
  const Rational tv = Rational(1) - overlap;
  if (sgn(tv) == 0) return segs;

  // merge the residual breakpoints of both coordinates
  std::vector<Rational> cuts = {Rational(0), tv};
  Rational cum(0);
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    const Rational r = std::max(Rational(0), a.p[i] - b.p[i]);
    if (sgn(r) > 0) {
      cum += r;
      if (cum < tv) cuts.push_back(cum);
    }
  }
  cum = 0;
  for (std::size_t i = 0; i < b.p.size(); ++i) {
    const Rational r = std::max(Rational(0), b.p[i] - a.p[i]);
    if (sgn(r) > 0) {
      cum += r;
      if (cum < tv) cuts.push_back(cum);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto invert = [](const Distribution& d, const Distribution& other, const Rational& w) {
    Rational c(0);
    for (std::size_t i = 0; i < d.p.size(); ++i) {
      c += std::max(Rational(0), d.p[i] - other.p[i]);
      if (w < c) return static_cast<int>(i);
    }
    return static_cast<int>(d.p.size()) - 1;
  };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Rational mid = (cuts[k] + cuts[k + 1]) / 2;
    segs.push_back({cuts[k + 1] - cuts[k], invert(a, b, mid), invert(b, a, mid)});
  }
  return segs;
}

// --- extremal machinery ---

// (1 + (lambda^D - 1)/q)^ceil(m/D) * q^n, exact.
inline Rational extremal_bound(int n, int m, int maxdeg, const ModelParams& p) {
  if (maxdeg <= 0) throw ParameterError("extremal_bound needs degree >= 1");
  if (n <= 0 || m < 0) throw ParameterError("extremal_bound: bad n or m");
  const Rational base = Rational(1) + (qpow(p.lambda(), static_cast<unsigned long>(maxdeg)) - 1) / p.q();
  const unsigned long ceil_md = static_cast<unsigned long>((m + maxdeg - 1) / maxdeg);
  return qpow(base, ceil_md) * Rational(ipow(static_cast<unsigned long>(p.q()),
                                             static_cast<unsigned long>(n)));
}

// Exhaustive maximum of Z over loopless multigraphs with n vertices, m edges
// and maximum degree at most maxdeg; returns the maximum and one maximizer.
struct MaxZResult {
  Rational z;
  Graph graph;
  std::uint64_t graphs_examined = 0;
};

inline MaxZResult brute_force_max_Z(int n, int m, int maxdeg, const ModelParams& p,
                                    const Budgets& budgets = Budgets{}) {
  if (n <= 0 || m < 0 || maxdeg <= 0) throw ParameterError("brute_force_max_Z: bad parameters");
  state_count(n, p.q(), budgets.z_states, "brute_force_max_Z (POTTS_Z_BUDGET)");

  std::vector<std::pair<Vertex, Vertex>> slots;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) slots.push_back({u, v});

  std::vector<int> degree(n, 0);
  std::vector<int> mult(slots.size(), 0);
  std::optional<MaxZResult> best;
  std::uint64_t examined = 0;

  std::vector<Rational> lambda_pow(static_cast<std::size_t>(m) + 1);
  for (std::size_t k = 0; k <= static_cast<std::size_t>(m); ++k) lambda_pow[k] = qpow(p.lambda(), k);

  auto evaluate = [&]() {
    examined++;
    if (examined > budgets.multigraphs)
      throw CapacityError("brute_force_max_Z: more than " + std::to_string(budgets.multigraphs) +
                          " multigraphs (POTTS_MULTIGRAPH_BUDGET)");
    std::vector<std::pair<Vertex, Vertex>> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < slots.size(); ++i)
      for (int c = 0; c < mult[i]; ++c) edges.push_back(slots[i]);
    Graph g(n, std::move(edges));
    const auto counts = mu_histogram(g, p.q(), budgets);
    Rational z(0);
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] != 0) z += Rational(counts[k]) * lambda_pow[k];
    if (!best || z > best->z) best = MaxZResult{z, std::move(g), 0};
  };

  auto rec = [&](auto&& self, std::size_t slot, int placed) -> void {
    if (placed == m) {
      evaluate();
      return;
    }
    if (slot == slots.size()) return;
    const auto [u, v] = slots[slot];
    const int cap = std::min({maxdeg - degree[u], maxdeg - degree[v], m - placed});
    for (int c = 0; c <= std::max(cap, 0); ++c) {
      mult[slot] = c;
      degree[u] += c;
      degree[v] += c;
      self(self, slot + 1, placed + c);
      degree[u] -= c;
      degree[v] -= c;
      mult[slot] = 0;
    }
  };
  rec(rec, 0, 0);
  if (!best) throw ParameterError("brute_force_max_Z: no multigraph with these parameters");
  best->graphs_examined = examined;
  return *best;
}

// --- forest monochromatic-edge law ---

inline Distribution binomial_pmf(int m, const Rational& p) {
  std::vector<Rational> w(static_cast<std::size_t>(m) + 1);
  const Rational q1 = Rational(1) - p;
  for (int k = 0; k <= m; ++k)
    w[static_cast<std::size_t>(k)] = Rational(binomial(static_cast<unsigned long>(m),
                                                       static_cast<unsigned long>(k))) *
                                     qpow(p, static_cast<unsigned long>(k)) *
                                     qpow(q1, static_cast<unsigned long>(m - k));
  return Distribution{std::move(w)};
}

// Law of the monochromatic-edge count of a forest under a uniform
// configuration.  The fast path runs the root-to-leaf argument (every edge is
// independently monochromatic with probability 1/q, convolved edge by edge);
// the oracle path enumerates all q^n configurations.
enum class ForestPmfPath { Fast, Enumerate };

inline Distribution forest_mono_pmf(const Graph& forest, int q,
                                    ForestPmfPath path = ForestPmfPath::Fast,
                                    const Budgets& budgets = Budgets{}) {
  if (q < 2) throw ParameterError("forest_mono_pmf: q must be at least 2");
  std::vector<int> all_ids(forest.edge_count());
  std::iota(all_ids.begin(), all_ids.end(), 0);
  if (!edges_acyclic(forest, all_ids)) throw ParameterError("forest_mono_pmf: input graph has a cycle");

  if (path == ForestPmfPath::Enumerate) {
    const auto counts = mu_histogram(forest, q, budgets);
    std::vector<Rational> w(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) w[k] = Rational(counts[k]);
    return Distribution::from_weights(std::move(w));
  }

  const Rational p_mono(1, q);
  std::vector<Rational> pmf = {Rational(1)};
  for (int e = 0; e < forest.edge_count(); ++e) {
    std::vector<Rational> next(pmf.size() + 1, Rational(0));
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += pmf[k] * (Rational(1) - p_mono);
      next[k + 1] += pmf[k] * p_mono;
    }
    pmf = std::move(next);
  }
  return Distribution{std::move(pmf)};
}

}  // namespace potts
