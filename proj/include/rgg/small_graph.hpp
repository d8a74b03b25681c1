#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rgg {

/// Simple undirected graph on at most 8 labelled vertices.
///
/// The adjacency bit-string lists the upper triangle column by column:
/// (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ... The first pair is the most
/// significant bit of `code()`, so comparing codes compares bit-strings
/// lexicographically.
class SmallGraph {
 public:
  static constexpr int kMaxOrder = 8;

  SmallGraph() = default;
  explicit SmallGraph(int order);
  SmallGraph(int order, std::initializer_list<std::pair<int, int>> edges);
  static SmallGraph from_bit_string(int order, std::string_view bits);
  static SmallGraph from_code(int order, std::uint32_t code);

  int order() const { return order_; }
  bool adjacent(int a, int b) const { return (rows_[a] >> b) & 1u; }
  void add_edge(int a, int b);
  int degree(int v) const;
  int edge_count() const;
  std::uint8_t neighbours(int v) const { return rows_[v]; }

  /// Number of vertices adjacent to every other vertex.
  int dominating_count() const;
  bool connected() const;

  /// Graph with vertex v relabelled as perm[v].
  SmallGraph relabelled(std::span<const int> perm) const;
  SmallGraph induced(std::span<const int> vertices) const;

  std::uint32_t code() const;
  std::string bit_string() const;

  friend bool operator==(const SmallGraph& a, const SmallGraph& b) {
    return a.order_ == b.order_ && a.rows_ == b.rows_;
  }
  friend std::strong_ordering operator<=>(const SmallGraph& a, const SmallGraph& b) {
    if (auto c = a.order_ <=> b.order_; c != 0) return c;
    return a.code() <=> b.code();
  }

  static constexpr int pair_count(int order) { return order * (order - 1) / 2; }

 private:
  int order_ = 0;
  std::array<std::uint8_t, kMaxOrder> rows_{};
};

/// Lexicographically smallest bit-string over all relabellings. Two graphs are
/// isomorphic iff their canonical forms are equal.
SmallGraph canonical_form(const SmallGraph& g);

/// Maps labelled graphs of one order to the index of the matching target class (or -1).
/// Orders up to 6 use a precomputed table over all labelled graphs; larger orders
/// memoise canonical forms.
class IsomorphismClassifier {
 public:
  IsomorphismClassifier(std::span<const SmallGraph> targets, int order);

  int order() const { return order_; }
  int classify(std::uint32_t code);
  int classify(const SmallGraph& g) { return classify(g.code()); }

 private:
  int resolve(std::uint32_t code) const;

  int order_;
  std::vector<std::pair<std::uint32_t, int>> canonical_codes_;  // sorted
  std::vector<int> table_;
  std::unordered_map<std::uint32_t, int> memo_;
};

/// True if some vertex has three pairwise non-adjacent neighbours.
bool has_induced_claw(const SmallGraph& g);

}  // namespace rgg
