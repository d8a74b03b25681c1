#include "rgg/small_graph.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rgg {

SmallGraph::SmallGraph(int order) : order_(order) {
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("SmallGraph: order must be in [0, 8]");
}

SmallGraph::SmallGraph(int order, std::initializer_list<std::pair<int, int>> edges) : SmallGraph(order) {
  for (auto [a, b] : edges) add_edge(a, b);
}

SmallGraph SmallGraph::from_bit_string(int order, std::string_view bits) {
  if (static_cast<int>(bits.size()) != pair_count(order))
    throw std::invalid_argument("SmallGraph: bit-string length does not match order");
  std::uint32_t code = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("SmallGraph: bit-string must contain only 0/1");
    code = (code << 1) | static_cast<std::uint32_t>(c == '1');
  }
  return from_code(order, code);
}

SmallGraph SmallGraph::from_code(int order, std::uint32_t code) {
  SmallGraph g(order);
  int bit = pair_count(order) - 1;
  for (int v = 1; v < order; ++v) {
    for (int u = 0; u < v; ++u, --bit) {
      if ((code >> bit) & 1u) g.add_edge(u, v);
    }
  }
  return g;
}

void SmallGraph::add_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("SmallGraph: self-loops are not allowed");
  if (a < 0 || b < 0 || a >= order_ || b >= order_) throw std::out_of_range("SmallGraph: vertex out of range");
  rows_[a] |= static_cast<std::uint8_t>(1u << b);
  rows_[b] |= static_cast<std::uint8_t>(1u << a);
}

int SmallGraph::degree(int v) const { return std::popcount(rows_[v]); }

int SmallGraph::edge_count() const {
  int twice = 0;
  for (int v = 0; v < order_; ++v) twice += degree(v);
  return twice / 2;
}

int SmallGraph::dominating_count() const {
  int q = 0;
  for (int v = 0; v < order_; ++v) q += degree(v) == order_ - 1 ? 1 : 0;
  return q;
}

bool SmallGraph::connected() const {
  if (order_ <= 1) return true;
  std::uint32_t seen = 1, frontier = 1;
  while (frontier) {
    std::uint32_t next = 0;
    for (int v = 0; v < order_; ++v) {
      if ((frontier >> v) & 1u) next |= rows_[v];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == (1u << order_) - 1;
}

SmallGraph SmallGraph::relabelled(std::span<const int> perm) const {
  SmallGraph h(order_);
  for (int a = 0; a < order_; ++a) {
    for (int b = a + 1; b < order_; ++b) {
      if (adjacent(a, b)) h.add_edge(perm[a], perm[b]);
    }
  }
  return h;
}

SmallGraph SmallGraph::induced(std::span<const int> vertices) const {
  SmallGraph h(static_cast<int>(vertices.size()));
  for (int a = 0; a < h.order_; ++a) {
    for (int b = a + 1; b < h.order_; ++b) {
      if (adjacent(vertices[a], vertices[b])) h.add_edge(a, b);
    }
  }
  return h;
}

std::uint32_t SmallGraph::code() const {
  std::uint32_t code = 0;
  for (int v = 1; v < order_; ++v) {
    for (int u = 0; u < v; ++u) code = (code << 1) | static_cast<std::uint32_t>(adjacent(u, v));
  }
  return code;
}

std::string SmallGraph::bit_string() const {
  std::string s;
  for (int v = 1; v < order_; ++v) {
    for (int u = 0; u < v; ++u) s.push_back(adjacent(u, v) ? '1' : '0');
  }
  return s;
}

namespace {

// Depth-first search over relabellings. Position v of the relabelled graph is filled
// by original vertex slot[v]; after placing position v the next v bits of the
// bit-string are fixed, so any branch whose prefix already exceeds the best is cut.
struct CanonicalSearch {
  const SmallGraph& g;
  int n;
  int total_bits;
  std::array<int, SmallGraph::kMaxOrder> slot{};
  std::uint32_t best = 0;
  bool have_best = false;

  void run(int v, std::uint32_t used, std::uint32_t prefix, int prefix_bits) {
    if (v == n) {
      if (!have_best || prefix < best) {
        best = prefix;
        have_best = true;
      }
      return;
    }
    for (int cand = 0; cand < n; ++cand) {
      if ((used >> cand) & 1u) continue;
      std::uint32_t p = prefix;
      for (int u = 0; u < v; ++u) p = (p << 1) | static_cast<std::uint32_t>(g.adjacent(slot[u], cand));
      const int bits = prefix_bits + v;
      if (have_best && p > (best >> (total_bits - bits))) continue;
      slot[v] = cand;
      run(v + 1, used | (1u << cand), p, bits);
    }
  }
};

}  // namespace

SmallGraph canonical_form(const SmallGraph& g) {
  if (g.order() > SmallGraph::kMaxOrder) throw std::invalid_argument("canonical_form: graph too large");
  if (g.order() <= 1) return g;
  CanonicalSearch search{g, g.order(), SmallGraph::pair_count(g.order())};
  search.run(0, 0, 0, 0);
  return SmallGraph::from_code(g.order(), search.best);
}

IsomorphismClassifier::IsomorphismClassifier(std::span<const SmallGraph> targets, int order) : order_(order) {
  if (order < 1 || order > SmallGraph::kMaxOrder) throw std::invalid_argument("IsomorphismClassifier: bad order");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].order() != order) throw std::invalid_argument("IsomorphismClassifier: target order mismatch");
    canonical_codes_.emplace_back(canonical_form(targets[i]).code(), static_cast<int>(i));
  }
  std::sort(canonical_codes_.begin(), canonical_codes_.end());
  if (order <= 6) {
    table_.resize(std::size_t{1} << SmallGraph::pair_count(order));
    for (std::uint32_t c = 0; c < table_.size(); ++c) table_[c] = resolve(c);
  }
}

int IsomorphismClassifier::resolve(std::uint32_t code) const {
  const std::uint32_t canon = canonical_form(SmallGraph::from_code(order_, code)).code();
  const auto it = std::lower_bound(canonical_codes_.begin(), canonical_codes_.end(), std::make_pair(canon, -1));
  return it != canonical_codes_.end() && it->first == canon ? it->second : -1;
}

int IsomorphismClassifier::classify(std::uint32_t code) {
  if (!table_.empty()) return table_[code];
  if (auto it = memo_.find(code); it != memo_.end()) return it->second;
  return memo_[code] = resolve(code);
}

bool has_induced_claw(const SmallGraph& g) {
  for (int c = 0; c < g.order(); ++c) {
    for (int a = 0; a < g.order(); ++a) {
      if (a == c || !g.adjacent(c, a)) continue;
      for (int b = a + 1; b < g.order(); ++b) {
        if (b == c || !g.adjacent(c, b) || g.adjacent(a, b)) continue;
        for (int e = b + 1; e < g.order(); ++e) {
          if (e == c || !g.adjacent(c, e) || g.adjacent(a, e) || g.adjacent(b, e)) continue;
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace rgg
