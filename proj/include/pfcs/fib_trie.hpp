#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pfcs/prefix.hpp"

namespace pfcs {

/// Residency of a generated cache prefix, as tracked by the full table.
enum class RouteLocation : std::uint8_t { Uncached, InTcam, InSram };

const char* to_string(RouteLocation location);

struct LpmMatch {
  Prefix prefix;
  NextHop next_hop;

  friend bool operator==(const LpmMatch&, const LpmMatch&) = default;
};

struct GeneratedRoute {
  CacheRoute route;
  RouteLocation location = RouteLocation::Uncached;

  friend bool operator==(const GeneratedRoute&, const GeneratedRoute&) = default;
};

struct TrieStats {
  std::size_t real_routes = 0;
  std::size_t generated_total = 0;
  std::size_t in_tcam = 0;
  std::size_t in_sram = 0;
  std::size_t uncached = 0;

  friend bool operator==(const TrieStats&, const TrieStats&) = default;
};

/// The full forwarding table. A one-bit-per-level binary trie holding the
/// real routes plus the non-overlapping cache prefixes generated from them,
/// each tagged with the tier it currently lives in.
///
/// Invariants kept across every mutation:
///  - generated prefixes are pairwise disjoint;
///  - a generated prefix strictly covers no real route, so every address
///    under it has the generated prefix's next hop as its LPM result;
///  - a generated prefix P longer than the LPM match it was derived from is
///    minimal: the prefix one bit shorter strictly covers some real route.
///
/// Single writer. Const member functions may run concurrently between
/// mutations.
class FibTrie {
 public:
  FibTrie();

  /// Duplicate prefixes are allowed; the last one wins.
  static FibTrie build(std::span<const Route> routes);

  std::optional<LpmMatch> lpm(Ipv4Address address) const;

  /// Returns the shortest prefix of `address` that is at least as long as
  /// its LPM match and strictly covers no real route, with the matched next
  /// hop, and records it as an Uncached generated prefix. If a generated
  /// prefix already covers `address` it is returned unchanged. nullopt iff
  /// no real route contains `address`.
  std::optional<CacheRoute> generate_cacheable(Ipv4Address address);

  /// The generated prefix covering `address`, if any. Does not generate.
  std::optional<GeneratedRoute> generated_covering(Ipv4Address address) const;

  /// The generated prefix exactly equal to `prefix`, if any.
  std::optional<GeneratedRoute> generated(const Prefix& prefix) const;

  /// Throws UnknownCachePrefix if `prefix` is not a generated prefix.
  void set_location(const Prefix& prefix, RouteLocation location);
  RouteLocation get_location(const Prefix& prefix) const;

  /// Adds or replaces a real route. Every generated prefix overlapping
  /// `prefix` is discarded and returned with the location it had.
  std::vector<GeneratedRoute> insert_route(const Prefix& prefix, NextHop next_hop);

  /// Removes a real route (UnknownRoute if absent). Discards and returns
  /// every generated prefix that overlaps `prefix`, plus those whose
  /// minimality depended on it.
  std::vector<GeneratedRoute> withdraw_route(const Prefix& prefix);

  std::optional<NextHop> route(const Prefix& prefix) const;

  TrieStats stats() const;

  /// Real routes in address order (shorter prefix first on ties).
  std::vector<Route> routes() const;

  /// Generated prefixes in address order.
  std::vector<GeneratedRoute> generated_routes() const;

  /// Nodes currently allocated, including the root.
  std::size_t node_count() const noexcept { return nodes_.size() - free_.size(); }

 private:
  using NodeIndex = std::int32_t;
  static constexpr NodeIndex kNone = -1;
  static constexpr NodeIndex kRoot = 0;

  struct CacheMarker {
    NextHop next_hop;
    RouteLocation location = RouteLocation::Uncached;
  };

  struct Node {
    std::array<NodeIndex, 2> child{kNone, kNone};
    std::optional<NextHop> route;
    std::optional<CacheMarker> marker;
    // Real routes and generated markers in this subtree, this node included.
    std::uint32_t routes_below = 0;
    std::uint32_t markers_below = 0;

    bool empty() const noexcept {
      return !route && !marker && child[0] == kNone && child[1] == kNone;
    }
  };

  // Node indices from the root down to `prefix`, creating nodes on demand.
  // The result has prefix.length() + 1 entries.
  std::vector<NodeIndex> materialize(const Prefix& prefix);
  // Same walk without creating nodes; stops early at the first gap.
  std::vector<NodeIndex> walk(const Prefix& prefix) const;

  NodeIndex allocate();
  void release(NodeIndex index);
  // Recomputes the subtree counters of one node from its children.
  void refresh(NodeIndex index);
  void refresh_path(std::span<const NodeIndex> path);
  // Refreshes bottom-up and frees nodes left with nothing in them.
  void prune(std::span<const NodeIndex> path);

  void count_location(RouteLocation location, int delta);
  void drop_marker(NodeIndex index, const Prefix& prefix,
                   std::vector<GeneratedRoute>& out);
  // Drops every marker strictly below `index`, freeing emptied nodes.
  void drop_subtree_markers(NodeIndex index, const Prefix& prefix,
                            std::vector<GeneratedRoute>& out);
  // `path` comes from walk/materialize of `prefix`.
  void invalidate_overlapping(std::span<const NodeIndex> path,
                              const Prefix& prefix,
                              std::vector<GeneratedRoute>& out);

  std::vector<Node> nodes_;
  std::vector<NodeIndex> free_;
  std::unordered_map<Prefix, NodeIndex> generated_index_;
  std::size_t in_tcam_ = 0;
  std::size_t in_sram_ = 0;
  std::size_t uncached_ = 0;
};

}  // namespace pfcs
