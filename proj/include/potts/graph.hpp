#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "potts/budgets.hpp"
#include "potts/errors.hpp"
#include "potts/rational.hpp"
#include "potts/rng.hpp"

namespace potts {

using Vertex = int;

// Loopless multigraph on vertices 0..n-1.  Edges are stored as a sorted
// multiset of normalized pairs (u < v), one entry per parallel copy; the
// position of a pair in edges() is its edge id.  The adjacency index
// aggregates multiplicities and is always consistent with the edge multiset.
class Graph {
 public:
  Graph(int n, std::vector<std::pair<Vertex, Vertex>> edge_list) : n_(n) {
    if (n <= 0) throw ParameterError("graph needs at least one vertex");
    for (auto& [u, v] : edge_list) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        throw ParameterError("edge endpoint out of range: (" + std::to_string(u) + "," +
                             std::to_string(v) + ") with n=" + std::to_string(n));
      if (u == v) throw ParameterError("loop edge rejected at vertex " + std::to_string(u));
      if (u > v) std::swap(u, v);
    }
    std::sort(edge_list.begin(), edge_list.end());
    edges_ = std::move(edge_list);

    adj_.resize(n_);
    degree_.assign(n_, 0);
    for (const auto& [u, v] : edges_) {
      bump(u, v);
      bump(v, u);
      degree_[u]++;
      degree_[v]++;
    }
    for (auto& row : adj_) std::sort(row.begin(), row.end());
    max_degree_ = degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
  }

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int max_degree() const { return max_degree_; }
  int degree(Vertex v) const { return degree_.at(v); }

  const std::vector<std::pair<Vertex, Vertex>>& edges() const { return edges_; }

  // (neighbour, multiplicity), sorted by neighbour.
  const std::vector<std::pair<Vertex, int>>& neighbours(Vertex v) const { return adj_.at(v); }

  bool is_simple() const {
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (edges_[i] == edges_[i - 1]) return false;
    return true;
  }

  bool is_regular() const {
    return std::all_of(degree_.begin(), degree_.end(),
                       [&](int d) { return d == max_degree_; });
  }

  bool is_connected() const {
    std::vector<char> seen(n_, 0);
    std::vector<Vertex> stack = {0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (const auto& [w, mult] : adj_[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          reached++;
          stack.push_back(w);
        }
      }
    }
    return reached == n_;
  }

 private:
  void bump(Vertex at, Vertex other) {
    for (auto& [w, mult] : adj_[at]) {
      if (w == other) {
        mult++;
        return;
      }
    }
    adj_[at].push_back({other, 1});
  }

  int n_;
  std::vector<std::pair<Vertex, Vertex>> edges_;
  std::vector<std::vector<std::pair<Vertex, int>>> adj_;
  std::vector<int> degree_;
  int max_degree_ = 0;
};

inline Graph build_from_edge_list(int n, std::vector<std::pair<Vertex, Vertex>> edges) {
  return Graph(n, std::move(edges));
}

// Toroidal L-grid: vertices (Z/LZ)^2 labelled row*L+col, 4-regular and
// simple.  L < 3 would create parallel edges and is rejected.
inline Graph toroidal_grid(int L) {
  if (L < 3) throw ParameterError("toroidal grid needs side length >= 3");
  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(static_cast<std::size_t>(2) * L * L);
  auto id = [L](int r, int c) { return ((r % L + L) % L) * L + ((c % L + L) % L); };
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) {
      edges.push_back({id(r, c), id(r, c + 1)});
      edges.push_back({id(r, c), id(r + 1, c)});
    }
  return Graph(L * L, std::move(edges));
}

// One configuration-model pairing: nd points in n buckets of d, paired
// uniformly at random.  Returns bucket pairs (possibly loops / repeats).
// Draw order: repeatedly match the lowest unpaired point with a uniform draw
// among the remaining ones.
inline std::vector<std::pair<Vertex, Vertex>> configuration_model_pairing(int n, int d, Rng& rng) {
  std::vector<int> points(static_cast<std::size_t>(n) * d);
  std::iota(points.begin(), points.end(), 0);
  std::vector<std::pair<Vertex, Vertex>> pairs;
  pairs.reserve(points.size() / 2);
  while (!points.empty()) {
    const int a = points.front();
    points.erase(points.begin());
    const std::size_t j = static_cast<std::size_t>(rng.below(points.size()));
    const int b = points[j];
    points.erase(points.begin() + static_cast<std::ptrdiff_t>(j));
    pairs.push_back({a / d, b / d});
  }
  return pairs;
}

inline bool pairing_is_simple(int n, const std::vector<std::pair<Vertex, Vertex>>& pairs) {
  std::vector<std::pair<Vertex, Vertex>> norm;
  norm.reserve(pairs.size());
  for (auto [u, v] : pairs) {
    if (u == v) return false;
    norm.push_back({std::min(u, v), std::max(u, v)});
  }
  std::sort(norm.begin(), norm.end());
  (void)n;
  return std::adjacent_find(norm.begin(), norm.end()) == norm.end();
}

// Uniformly random simple d-regular graph on [n] via the configuration model
// with plain rejection of non-simple pairings.  Deterministic given seed.
// If attempts_out is supplied it receives the number of pairings drawn.
inline Graph random_regular(int n, int d, std::uint64_t seed, long* attempts_out = nullptr) {
  if (n <= 0 || d <= 0) throw ParameterError("random_regular needs n, degree >= 1");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw ParameterError("random_regular: n*degree must be even");
  if (d >= n) throw ParameterError("random_regular: degree must be < n");
  Rng rng(seed);
  long attempts = 0;
  for (;;) {
    attempts++;
    auto pairs = configuration_model_pairing(n, d, rng);
    if (pairing_is_simple(n, pairs)) {
      if (attempts_out) *attempts_out = attempts;
      return Graph(n, std::move(pairs));
    }
  }
}

// H(n,m,maxdeg): m/maxdeg disjoint vertex pairs joined by maxdeg parallel
// edges each; remaining vertices isolated.
inline Graph extremal_graph(int n, int m, int maxdeg) {
  if (maxdeg <= 0) throw ParameterError("extremal_graph needs degree >= 1");
  if (m % maxdeg != 0)
    throw ParameterError("extremal_graph: degree " + std::to_string(maxdeg) +
                         " does not divide m=" + std::to_string(m));
  const int pairs = m / maxdeg;
  if (2 * pairs > n)
    throw ParameterError("extremal_graph: m/degree pairs exceed n/2 capacity");
  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(m);
  for (int i = 0; i < pairs; ++i)
    for (int c = 0; c < maxdeg; ++c) edges.push_back({2 * i, 2 * i + 1});
  return Graph(n, std::move(edges));
}

// Sorted duplicate-free set of vertex labels of an n-vertex graph.
struct VertexSet {
  std::vector<Vertex> members;

  static VertexSet of(std::vector<Vertex> v, int n) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
      throw ParameterError("vertex set has duplicates");
    if (!v.empty() && (v.front() < 0 || v.back() >= n))
      throw ParameterError("vertex set label out of range");
    return VertexSet{std::move(v)};
  }

  static VertexSet full(int n) {
    std::vector<Vertex> v(n);
    std::iota(v.begin(), v.end(), 0);
    return VertexSet{std::move(v)};
  }

  bool contains(Vertex v) const { return std::binary_search(members.begin(), members.end(), v); }
  int size() const { return static_cast<int>(members.size()); }
  bool empty() const { return members.empty(); }
};

// Vertices outside S with a neighbour in S.
inline VertexSet boundary(const Graph& g, const VertexSet& s) {
  std::vector<char> in(g.vertex_count(), 0), out(g.vertex_count(), 0);
  for (Vertex v : s.members) in.at(v) = 1;
  for (Vertex v : s.members)
    for (const auto& [w, mult] : g.neighbours(v))
      if (!in[w]) out[w] = 1;
  std::vector<Vertex> members;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    if (out[v]) members.push_back(v);
  return VertexSet{std::move(members)};
}

// Edges (with multiplicity) inside t_prime touching t.  Requires t <= t_prime.
inline int vol(const Graph& g, const VertexSet& t, const VertexSet& t_prime) {
  for (Vertex v : t.members)
    if (!t_prime.contains(v)) throw ParameterError("vol: T must be a subset of T'");
  int count = 0;
  for (const auto& [u, v] : g.edges())
    if (t_prime.contains(u) && t_prime.contains(v) && (t.contains(u) || t.contains(v))) count++;
  return count;
}

// e_G(S): edges with both ends in S, multiplicity counted.
inline int interior_edges(const Graph& g, const VertexSet& s) {
  int count = 0;
  for (const auto& [u, v] : g.edges())
    if (s.contains(u) && s.contains(v)) count++;
  return count;
}

// alpha_r(G) = max_{|S|=r} e_G(S) / r, exact by exhaustive enumeration of all
// r-subsets.  The C(n,r) subset count must fit the budget.
inline Rational alpha_r(const Graph& g, int r, const Budgets& budgets = Budgets{}) {
  const int n = g.vertex_count();
  if (r < 1 || 2 * r > n) throw ParameterError("alpha_r needs 1 <= r <= n/2");
  const Integer subsets = binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(r));
  if (subsets > Integer(static_cast<unsigned long>(budgets.subsets)))
    throw CapacityError("alpha_r: C(" + std::to_string(n) + "," + std::to_string(r) + ") = " +
                        to_string(subsets) + " exceeds subset budget " +
                        std::to_string(budgets.subsets) + " (POTTS_SUBSET_BUDGET)");

  std::vector<int> pick(r);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<char> in(n, 0);
  int best = 0;
  for (;;) {
    std::fill(in.begin(), in.end(), 0);
    for (int v : pick) in[v] = 1;
    int e = 0;
    for (int v : pick)
      for (const auto& [w, mult] : g.neighbours(v))
        if (w > v && in[w]) e += mult;
    best = std::max(best, e);
    // next combination
    int i = r - 1;
    while (i >= 0 && pick[i] == n - r + i) --i;
    if (i < 0) break;
    pick[i]++;
    for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  return Rational(best, r);
}

namespace detail {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace detail

// True when the given edge ids of g span no cycle.
inline bool edges_acyclic(const Graph& g, const std::vector<int>& edge_ids) {
  detail::Dsu dsu(g.vertex_count());
  for (int id : edge_ids) {
    const auto& [u, v] = g.edges().at(id);
    if (!dsu.unite(u, v)) return false;
  }
  return true;
}

// Exactly maxdeg spanning forests (as edge-id sets) partitioning E, balanced
// to sizes floor(m/maxdeg) / ceil(m/maxdeg).
struct ForestDecomposition {
  std::vector<std::vector<int>> forests;
};

// Repeated maximum-spanning-forest extraction (lowest edge ids first), then
// rebalancing: move an edge that joins two components of a smaller forest out
// of a larger one until sizes differ by at most 1.
inline ForestDecomposition forest_decomposition(const Graph& g) {
  const int n = g.vertex_count();
  const int m = g.edge_count();
  const int rounds = std::max(g.max_degree(), 1);

  std::vector<char> taken(m, 0);
  ForestDecomposition fd;
  fd.forests.assign(rounds, {});
  for (int i = 0; i < rounds; ++i) {
    detail::Dsu dsu(n);
    for (int id = 0; id < m; ++id) {
      if (taken[id]) continue;
      const auto& [u, v] = g.edges()[id];
      if (dsu.unite(u, v)) {
        fd.forests[i].push_back(id);
        taken[id] = 1;
      }
    }
  }
  if (std::count(taken.begin(), taken.end(), 1) != m)
    throw std::logic_error("forest_decomposition: extraction left edges behind");

  for (;;) {
    auto sizes = [&](int i) { return static_cast<int>(fd.forests[i].size()); };
    int big = 0, small = 0;
    for (int i = 1; i < rounds; ++i) {
      if (sizes(i) > sizes(big)) big = i;
      if (sizes(i) < sizes(small)) small = i;
    }
    if (sizes(big) - sizes(small) <= 1) break;

    detail::Dsu dsu(n);
    for (int id : fd.forests[small]) {
      const auto& [u, v] = g.edges()[id];
      dsu.unite(u, v);
    }
    bool moved = false;
    for (std::size_t k = 0; k < fd.forests[big].size(); ++k) {
      const int id = fd.forests[big][k];
      const auto& [u, v] = g.edges()[id];
      if (dsu.find(u) != dsu.find(v)) {
        fd.forests[big].erase(fd.forests[big].begin() + static_cast<std::ptrdiff_t>(k));
        fd.forests[small].push_back(id);
        std::sort(fd.forests[small].begin(), fd.forests[small].end());
        moved = true;
        break;
      }
    }
    if (!moved) throw std::logic_error("forest_decomposition: no rebalancing edge found");
  }
  return fd;
}

// --- edge-list file format: "n m" then m lines "u v" (0-based) ---

inline Graph read_edge_list(std::istream& in) {
  int n = 0, m = 0;
  if (!(in >> n >> m)) throw ParameterError("edge list: missing 'n m' header");
  if (n <= 0 || m < 0) throw ParameterError("edge list: bad header values");
  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(m);
  for (int i = 0; i < m; ++i) {
    int u = 0, v = 0;
    if (!(in >> u >> v)) throw ParameterError("edge list: expected " + std::to_string(m) +
                                              " edges, got " + std::to_string(i));
    edges.push_back({u, v});
  }
  return Graph(n, std::move(edges));
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.vertex_count() << " " << g.edge_count() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << " " << v << "\n";
}

inline Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  return read_edge_list(in);
}

}  // namespace potts
