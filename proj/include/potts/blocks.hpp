#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "potts/errors.hpp"
#include "potts/graph.hpp"
#include "potts/rational.hpp"

namespace potts {

// A covering family of blocks plus the selection distribution psi.
struct BlockSystem {
  std::vector<VertexSet> blocks;
  std::vector<Rational> psi;  // normalized, aligned with blocks
  std::string kind;           // "k-block" | "grid" | "custom"
  int param = 0;              // k or r where applicable

  int max_block_size() const {
    int s = 0;
    for (const auto& b : blocks) s = std::max(s, b.size());
    return s;
  }

  Rational psi_min() const {
    Rational m = psi.at(0);
    for (const auto& w : psi) m = std::min(m, w);
    return m;
  }

  static BlockSystem custom(std::vector<VertexSet> blocks, std::vector<Rational> weights, int n) {
    if (blocks.empty()) throw ParameterError("block system needs at least one block");
    if (blocks.size() != weights.size())
      throw ParameterError("block system: psi size mismatch");
    std::vector<char> covered(n, 0);
    for (const auto& b : blocks) {
      if (b.empty()) throw ParameterError("block system: empty block");
      for (Vertex v : b.members) {
        if (v < 0 || v >= n) throw ParameterError("block system: vertex out of range");
        covered[v] = 1;
      }
    }
    if (std::count(covered.begin(), covered.end(), 1) != n)
      throw ParameterError("block system: blocks do not cover V");
    Rational total(0);
    for (const auto& w : weights) {
      if (sgn(w) <= 0) throw ParameterError("block system: psi weights must be positive");
      total += w;
    }
    for (auto& w : weights) w /= total;
    return BlockSystem{std::move(blocks), std::move(weights), "custom", 0};
  }

  // {kind, blocks, psi} as JSON.
  std::string json() const {
    std::string s = "{\"kind\":\"" + kind + "\",\"param\":" + std::to_string(param) + ",\"blocks\":[";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (i) s += ",";
      s += "[";
      for (std::size_t j = 0; j < blocks[i].members.size(); ++j) {
        if (j) s += ",";
        s += std::to_string(blocks[i].members[j]);
      }
      s += "]";
    }
    s += "],\"psi\":[";
    for (std::size_t i = 0; i < psi.size(); ++i) {
      if (i) s += ",";
      s += "\"" + to_string(psi[i]) + "\"";
    }
    return s + "]}";
  }
};

inline BlockSystem singleton_blocks(int n) {
  std::vector<VertexSet> blocks;
  std::vector<Rational> psi;
  for (int v = 0; v < n; ++v) {
    blocks.push_back(VertexSet{{v}});
    psi.push_back(Rational(1, n));
  }
  auto sys = BlockSystem::custom(std::move(blocks), std::move(psi), n);
  sys.kind = "singleton";
  return sys;
}

// S_v = the first k vertices discovered by a breadth-first search from v,
// neighbours visited in ascending label order; psi uniform over the n blocks.
inline BlockSystem k_block_bfs(const Graph& g, int k) {
  const int n = g.vertex_count();
  if (k < 2 || k > n - 1) throw ParameterError("k_block_bfs needs 2 <= k <= n-1");
  if (!g.is_connected()) throw ParameterError("k_block_bfs needs a connected graph");
  std::vector<VertexSet> blocks;
  std::vector<Rational> psi;
  for (Vertex v = 0; v < n; ++v) {
    std::vector<Vertex> order = {v};
    std::vector<char> seen(n, 0);
    seen[v] = 1;
    std::queue<Vertex> q;
    q.push(v);
    while (!q.empty() && static_cast<int>(order.size()) < k) {
      const Vertex x = q.front();
      q.pop();
      for (const auto& [w, mult] : g.neighbours(x)) {
        if (!seen[w]) {
          seen[w] = 1;
          order.push_back(w);
          q.push(w);
          if (static_cast<int>(order.size()) == k) break;
        }
      }
    }
    blocks.push_back(VertexSet::of(std::move(order), n));
    psi.push_back(Rational(1, n));
  }
  auto sys = BlockSystem::custom(std::move(blocks), std::move(psi), n);
  sys.kind = "k-block";
  sys.param = k;
  return sys;
}

// All r x r subgrids of the toroidal L-grid, one block per top-left corner;
// psi uniform over the L^2 blocks.
inline BlockSystem grid_blocks(int L, int r) {
  if (L < 3) throw ParameterError("grid_blocks: torus side must be >= 3");
  if (r < 1 || r > L - 2) throw ParameterError("grid_blocks needs 1 <= r <= L-2");
  std::vector<VertexSet> blocks;
  std::vector<Rational> psi;
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      std::vector<Vertex> members;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) members.push_back(((a + i) % L) * L + ((b + j) % L));
      blocks.push_back(VertexSet::of(std::move(members), L * L));
      psi.push_back(Rational(1, L * L));
    }
  auto sys = BlockSystem::custom(std::move(blocks), std::move(psi), L * L);
  sys.kind = "grid";
  sys.param = r;
  return sys;
}

// log of partial^+ = max over blocks of |dS|^min(|S|,|dS|); returned in log
// form because values like (4r)^(4r) overflow every native type.
inline double partial_plus_log(const Graph& g, const BlockSystem& sys) {
  double best = 0;  // |dS| = 0 contributes |dS|^0 = 1
  for (const auto& s : sys.blocks) {
    const int ds = boundary(g, s).size();
    if (ds == 0) continue;
    const int e = std::min(s.size(), ds);
    best = std::max(best, e * std::log(static_cast<double>(ds)));
  }
  return best;
}

// Psi = max_v psi_boundary(v) / psi(v), exact.
inline Rational psi_ratio(const Graph& g, const BlockSystem& sys) {
  const int n = g.vertex_count();
  std::vector<Rational> in_weight(n, Rational(0)), boundary_weight(n, Rational(0));
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    for (Vertex v : sys.blocks[b].members) in_weight[v] += sys.psi[b];
    for (Vertex v : boundary(g, sys.blocks[b]).members) boundary_weight[v] += sys.psi[b];
  }
  Rational best(0);
  for (int v = 0; v < n; ++v) {
    if (sgn(in_weight[v]) == 0)
      throw ParameterError("psi_ratio: blocks do not cover vertex " + std::to_string(v));
    best = std::max(best, boundary_weight[v] / in_weight[v]);
  }
  return best;
}

namespace detail {

// Exact mu+ contribution of one block.  mu_{X,S}(c) depends on X only through
// X restricted to dS, so the maximization over X reduces to: a colour-class
// partition of S (the configuration c up to renaming) plus an assignment of
// each boundary vertex either to one of c's colours or to a colour outside
// c's palette.  A dynamic program over the set of "hit" (non-free) classes
// maximizes the monochromatic count for every attainable free-colour count.
struct BlockStructure {
  int size = 0;            // |S|
  int boundary_size = 0;   // |dS|
  std::vector<std::array<int, 3>> inner;              // (i, j, mult), i<j positions in S
  std::vector<std::vector<std::pair<int, int>>> cross;  // per boundary vertex: (i, mult)

  std::string signature() const {
    std::string s = std::to_string(size) + "|" + std::to_string(boundary_size) + "|";
    for (const auto& e : inner)
      s += std::to_string(e[0]) + "," + std::to_string(e[1]) + "," + std::to_string(e[2]) + ";";
    s += "|";
    for (const auto& row : cross) {
      for (const auto& [i, mult] : row) s += std::to_string(i) + "," + std::to_string(mult) + ";";
      s += "/";
    }
    return s;
  }
};

inline BlockStructure block_structure(const Graph& g, const VertexSet& s) {
  BlockStructure bs;
  bs.size = s.size();
  const VertexSet ds = boundary(g, s);
  bs.boundary_size = ds.size();
  auto pos_in = [](const VertexSet& set, Vertex v) {
    return static_cast<int>(std::lower_bound(set.members.begin(), set.members.end(), v) -
                            set.members.begin());
  };
  std::map<std::pair<int, int>, int> inner;
  bs.cross.resize(static_cast<std::size_t>(bs.boundary_size));
  for (const auto& [u, v] : g.edges()) {
    const bool su = s.contains(u), sv = s.contains(v);
    if (su && sv) {
      auto key = std::minmax(pos_in(s, u), pos_in(s, v));
      inner[{key.first, key.second}]++;
    } else if (su || sv) {
      const Vertex in_s = su ? u : v;
      const Vertex out_s = su ? v : u;
      if (!ds.contains(out_s)) continue;  // cannot happen; boundary is exact
      auto& row = bs.cross[static_cast<std::size_t>(pos_in(ds, out_s))];
      const int ip = pos_in(s, in_s);
      bool found = false;
      for (auto& [i, mult] : row)
        if (i == ip) {
          mult++;
          found = true;
        }
      if (!found) row.push_back({ip, 1});
    }
  }
  for (const auto& [key, mult] : inner) bs.inner.push_back({key.first, key.second, mult});
  return bs;
}

inline Rational block_mu_plus(const BlockStructure& bs, int palette) {
  const int k = bs.size;
  Rational best(0);
  std::vector<int> cls(static_cast<std::size_t>(k), 0);

  auto evaluate = [&](int t) {
    // palette must hold the t block colours
    if (t > palette) return;
    int m_in = 0;
    for (const auto& e : bs.inner)
      if (cls[static_cast<std::size_t>(e[0])] == cls[static_cast<std::size_t>(e[1])]) m_in += e[2];

    const int masks = 1 << t;
    std::vector<long> dp(static_cast<std::size_t>(masks), -1);
    dp[0] = 0;
    std::vector<int> active = {0};
    std::vector<long> gain(static_cast<std::size_t>(t), 0);
    const bool other_available = palette > t;
    for (const auto& row : bs.cross) {
      std::fill(gain.begin(), gain.end(), 0);
      for (const auto& [i, mult] : row) gain[static_cast<std::size_t>(cls[static_cast<std::size_t>(i)])] += mult;
      std::vector<long> next(dp);
      std::vector<int> next_active = active;
      auto relax = [&](int mask, long value) {
        if (next[static_cast<std::size_t>(mask)] < 0) next_active.push_back(mask);
        next[static_cast<std::size_t>(mask)] = std::max(next[static_cast<std::size_t>(mask)], value);
      };
      for (int mask : active) {
        const long base = dp[static_cast<std::size_t>(mask)];
        if (!other_available) {
          // every boundary vertex must take a palette colour
          for (int j = 0; j < t; ++j) relax(mask | (1 << j), base + gain[static_cast<std::size_t>(j)]);
          next[static_cast<std::size_t>(mask)] = -1;  // staying "other" is not possible
        } else {
          for (int j = 0; j < t; ++j)
            if (gain[static_cast<std::size_t>(j)] > 0)
              relax(mask | (1 << j), base + gain[static_cast<std::size_t>(j)]);
        }
      }
      if (!other_available) {
        // rebuild the active list: masks invalidated above
        std::vector<int> cleaned;
        std::sort(next_active.begin(), next_active.end());
        next_active.erase(std::unique(next_active.begin(), next_active.end()), next_active.end());
        for (int mask : next_active)
          if (next[static_cast<std::size_t>(mask)] >= 0) cleaned.push_back(mask);
        next_active = std::move(cleaned);
      } else {
        std::sort(next_active.begin(), next_active.end());
        next_active.erase(std::unique(next_active.begin(), next_active.end()), next_active.end());
      }
      dp = std::move(next);
      active = std::move(next_active);
    }
    for (int mask : active) {
      if (dp[static_cast<std::size_t>(mask)] < 0) continue;
      const int free_colours = t - __builtin_popcount(static_cast<unsigned>(mask));
      if (free_colours == k) continue;  // excluded from the max
      const Rational ratio(m_in + dp[static_cast<std::size_t>(mask)], k - free_colours);
      best = std::max(best, ratio);
    }
  };

  // Restricted-growth enumeration of set partitions of the block
  auto rec = [&](auto&& self, int i, int t) -> void {
    if (i == k) {
      evaluate(t);
      return;
    }
    for (int j = 0; j <= t && j < palette; ++j) {
      cls[static_cast<std::size_t>(i)] = j;
      self(self, i + 1, std::max(t, j + 1));
    }
  };
  rec(rec, 0, 0);
  return best;
}

}  // namespace detail

// Exact mu+ of a block system: maximize mu_{X,S}(c)/(|S|-f) over blocks S,
// boundary colourings X|dS (up to colour renaming, over a palette of
// min(q_cap, |S|+|dS|) colours) and block configurations c.  Budget: each
// block needs |S| <= 9 and |dS| <= 16.
inline Rational mu_plus_exact(const Graph& g, const BlockSystem& sys, int q_cap) {
  if (q_cap < 2) throw ParameterError("mu_plus_exact: q_cap must be at least 2");
  Rational best(0);
  std::map<std::string, Rational> memo;
  for (const auto& s : sys.blocks) {
    const auto bs = detail::block_structure(g, s);
    if (bs.size > 9)
      throw CapacityError("mu_plus_exact: block size " + std::to_string(bs.size) +
                          " exceeds the enumeration budget of 9");
    if (bs.boundary_size > 16)
      throw CapacityError("mu_plus_exact: boundary size " + std::to_string(bs.boundary_size) +
                          " exceeds the enumeration budget of 16");
    const int palette = std::min(q_cap, bs.size + bs.boundary_size);
    const std::string key = bs.signature() + "#" + std::to_string(palette);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, detail::block_mu_plus(bs, palette)).first;
    best = std::max(best, it->second);
  }
  return best;
}

// Closed-form upper bounds on mu+.
inline Rational mu_plus_upper_kblock(int maxdeg, int k) {
  if (k < 2) throw ParameterError("mu_plus_upper_kblock needs k >= 2");
  return Rational(maxdeg - 1) + Rational(1, k);
}
inline Rational mu_plus_upper_grid(int r) {
  if (r < 1) throw ParameterError("mu_plus_upper_grid needs r >= 1");
  return Rational(2) + Rational(2, r);
}
inline Rational mu_plus_upper_generic(int maxdeg) { return Rational(maxdeg); }

// The three parameters feeding the block rapid-mixing threshold.
struct BlockParams {
  int s = 0;                    // max block size
  double log_partial_plus = 0;  // log of partial^+
  Rational psi;                 // Psi
  Rational mu_plus;             // exact value or an upper bound
  bool mu_plus_is_exact = false;
};

inline BlockParams block_params(const Graph& g, const BlockSystem& sys, int q_cap) {
  BlockParams bp;
  bp.s = sys.max_block_size();
  bp.log_partial_plus = partial_plus_log(g, sys);
  bp.psi = psi_ratio(g, sys);
  try {
    bp.mu_plus = mu_plus_exact(g, sys, q_cap);
    bp.mu_plus_is_exact = true;
  } catch (const CapacityError&) {
    if (sys.kind == "k-block")
      bp.mu_plus = mu_plus_upper_kblock(g.max_degree(), sys.param);
    else if (sys.kind == "grid")
      bp.mu_plus = mu_plus_upper_grid(sys.param);
    else
      bp.mu_plus = mu_plus_upper_generic(g.max_degree());
    bp.mu_plus_is_exact = false;
  }
  return bp;
}

// --- grid isoperimetry checker ---

struct GridIsoperimetryReport {
  int r = 0;
  std::uint64_t subsets_checked = 0;
  std::uint64_t violations = 0;
  // subset sizes where either inequality is met with equality
  std::vector<int> tight_inner_sizes;
  std::vector<int> tight_outer_sizes;
  double min_inner_slack = 0;  // min over T of 2t'-2*sqrt(t') - vol(T,T)
  double min_outer_slack = 0;  // min over T of vol(T,S+dS) - 2t'-2*sqrt(t')
};

// Checks vol(T,T) <= 2t'-2sqrt(t') and vol(T,S u dS) >= 2t'+2sqrt(t') for
// every T inside an r x r subgrid of a torus of side r+2, by exhaustive
// enumeration of the 2^(r^2) subsets.  Comparisons are exact (squared form).
inline GridIsoperimetryReport grid_isoperimetry(int r, int exhaustive_limit = 16) {
  if (r < 1) throw ParameterError("grid_isoperimetry needs r >= 1");
  if (r * r > exhaustive_limit)
    throw CapacityError("grid_isoperimetry: r^2 = " + std::to_string(r * r) +
                        " exceeds the exhaustive limit " + std::to_string(exhaustive_limit));
  const int L = r + 2 < 3 ? 3 : r + 2;
  const Graph g = toroidal_grid(L);
  std::vector<Vertex> cell(static_cast<std::size_t>(r) * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) cell[static_cast<std::size_t>(i) * r + j] = i * L + j;
  const VertexSet s = VertexSet::of(std::vector<Vertex>(cell.begin(), cell.end()), L * L);
  const VertexSet ds = boundary(g, s);
  std::vector<char> in_closure(static_cast<std::size_t>(L) * L, 0);
  for (Vertex v : s.members) in_closure[static_cast<std::size_t>(v)] = 1;
  for (Vertex v : ds.members) in_closure[static_cast<std::size_t>(v)] = 1;

  GridIsoperimetryReport report;
  report.r = r;
  report.min_inner_slack = std::numeric_limits<double>::infinity();
  report.min_outer_slack = std::numeric_limits<double>::infinity();
  std::vector<char> in_t(static_cast<std::size_t>(L) * L, 0);
  const std::uint64_t total = std::uint64_t{1} << (r * r);
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    std::fill(in_t.begin(), in_t.end(), 0);
    int tp = 0;
    for (int b = 0; b < r * r; ++b)
      if (mask & (std::uint64_t{1} << b)) {
        in_t[static_cast<std::size_t>(cell[static_cast<std::size_t>(b)])] = 1;
        tp++;
      }
    int vol_inner = 0, vol_outer = 0;
    for (const auto& [u, v] : g.edges()) {
      const bool tu = in_t[static_cast<std::size_t>(u)], tv = in_t[static_cast<std::size_t>(v)];
      if (tu && tv) vol_inner++;
      if ((tu || tv) && in_closure[static_cast<std::size_t>(u)] && in_closure[static_cast<std::size_t>(v)])
        vol_outer++;
    }
    // vol_inner <= 2t' - 2 sqrt(t')  <=>  vol_inner <= 2t' and (2t'-vol_inner)^2 >= 4t'
    const long di = 2L * tp - vol_inner;
    const bool inner_ok = vol_inner <= 2 * tp && di * di >= 4L * tp;
    const bool inner_tight = inner_ok && di * di == 4L * tp;
    // vol_outer >= 2t' + 2 sqrt(t')  <=>  vol_outer >= 2t' and (vol_outer-2t')^2 >= 4t'
    const long do_ = vol_outer - 2L * tp;
    const bool outer_ok = vol_outer >= 2 * tp && do_ * do_ >= 4L * tp;
    const bool outer_tight = outer_ok && do_ * do_ == 4L * tp;
    if (!inner_ok || !outer_ok) report.violations++;
    const double root = 2.0 * std::sqrt(static_cast<double>(tp));
    report.min_inner_slack = std::min(report.min_inner_slack, 2.0 * tp - root - vol_inner);
    report.min_outer_slack = std::min(report.min_outer_slack, vol_outer - 2.0 * tp - root);
    if (inner_tight &&
        std::find(report.tight_inner_sizes.begin(), report.tight_inner_sizes.end(), tp) ==
            report.tight_inner_sizes.end())
      report.tight_inner_sizes.push_back(tp);
    if (outer_tight &&
        std::find(report.tight_outer_sizes.begin(), report.tight_outer_sizes.end(), tp) ==
            report.tight_outer_sizes.end())
      report.tight_outer_sizes.push_back(tp);
    report.subsets_checked++;
  }
  std::sort(report.tight_inner_sizes.begin(), report.tight_inner_sizes.end());
  std::sort(report.tight_outer_sizes.begin(), report.tight_outer_sizes.end());
  return report;
}

}  // namespace potts
