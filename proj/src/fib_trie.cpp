#include "pfcs/fib_trie.hpp"

#include <fmt/format.h>

#include "pfcs/errors.hpp"

namespace pfcs {

const char* to_string(RouteLocation location) {
  switch (location) {
    case RouteLocation::Uncached: return "Uncached";
    case RouteLocation::InTcam: return "InTcam";
    case RouteLocation::InSram: return "InSram";
  }
  return "?";
}

namespace {

Prefix child_prefix(const Prefix& parent, unsigned bit) {
  std::uint32_t addr = parent.address().value();
  if (bit != 0) addr |= std::uint32_t{1} << (31U - parent.length());
  return prefix_of(Ipv4Address(addr), parent.length() + 1);
}

}  // namespace

FibTrie::FibTrie() { nodes_.emplace_back(); }

FibTrie FibTrie::build(std::span<const Route> routes) {
  FibTrie trie;
  for (const auto& r : routes) trie.insert_route(r.prefix, r.next_hop);
  return trie;
}

FibTrie::NodeIndex FibTrie::allocate() {
  if (!free_.empty()) {
    NodeIndex index = free_.back();
    free_.pop_back();
    nodes_[index] = Node{};
    return index;
  }
  nodes_.emplace_back();
  return static_cast<NodeIndex>(nodes_.size() - 1);
}

void FibTrie::release(NodeIndex index) {
  nodes_[index] = Node{};
  free_.push_back(index);
}

std::vector<FibTrie::NodeIndex> FibTrie::materialize(const Prefix& prefix) {
  std::vector<NodeIndex> path;
  path.reserve(prefix.length() + 1);
  path.push_back(kRoot);
  for (unsigned depth = 0; depth < prefix.length(); ++depth) {
    unsigned bit = prefix.address().bit(depth);
    NodeIndex next = nodes_[path.back()].child[bit];
    if (next == kNone) {
      next = allocate();
      nodes_[path.back()].child[bit] = next;
    }
    path.push_back(next);
  }
  return path;
}

std::vector<FibTrie::NodeIndex> FibTrie::walk(const Prefix& prefix) const {
  std::vector<NodeIndex> path;
  path.reserve(prefix.length() + 1);
  path.push_back(kRoot);
  for (unsigned depth = 0; depth < prefix.length(); ++depth) {
    NodeIndex next = nodes_[path.back()].child[prefix.address().bit(depth)];
    if (next == kNone) break;
    path.push_back(next);
  }
  return path;
}

void FibTrie::refresh(NodeIndex index) {
  Node& node = nodes_[index];
  std::uint32_t routes = node.route ? 1 : 0;
  std::uint32_t markers = node.marker ? 1 : 0;
  for (NodeIndex c : node.child) {
    if (c == kNone) continue;
    routes += nodes_[c].routes_below;
    markers += nodes_[c].markers_below;
  }
  node.routes_below = routes;
  node.markers_below = markers;
}

void FibTrie::refresh_path(std::span<const NodeIndex> path) {
  for (auto it = path.rbegin(); it != path.rend(); ++it) refresh(*it);
}

void FibTrie::prune(std::span<const NodeIndex> path) {
  for (std::size_t i = path.size(); i-- > 1;) {
    refresh(path[i]);
    if (!nodes_[path[i]].empty()) continue;
    Node& parent = nodes_[path[i - 1]];
    for (NodeIndex& c : parent.child) {
      if (c == path[i]) c = kNone;
    }
    release(path[i]);
  }
  refresh(kRoot);
}

void FibTrie::count_location(RouteLocation location, int delta) {
  auto apply = [delta](std::size_t& counter) {
    counter = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(counter) + delta);
  };
  switch (location) {
    case RouteLocation::Uncached: apply(uncached_); break;
    case RouteLocation::InTcam: apply(in_tcam_); break;
    case RouteLocation::InSram: apply(in_sram_); break;
  }
}

void FibTrie::drop_marker(NodeIndex index, const Prefix& prefix,
                          std::vector<GeneratedRoute>& out) {
  Node& node = nodes_[index];
  out.push_back({{prefix, node.marker->next_hop}, node.marker->location});
  count_location(node.marker->location, -1);
  generated_index_.erase(prefix);
  node.marker.reset();
}

void FibTrie::drop_subtree_markers(NodeIndex index, const Prefix& prefix,
                                   std::vector<GeneratedRoute>& out) {
  for (unsigned bit = 0; bit < 2; ++bit) {
    NodeIndex c = nodes_[index].child[bit];
    if (c == kNone || nodes_[c].markers_below == 0) continue;
    Prefix sub = child_prefix(prefix, bit);
    if (nodes_[c].marker) drop_marker(c, sub, out);
    drop_subtree_markers(c, sub, out);
    refresh(c);
    if (nodes_[c].empty()) {
      nodes_[index].child[bit] = kNone;
      release(c);
    }
  }
}

void FibTrie::invalidate_overlapping(std::span<const NodeIndex> path,
                                     const Prefix& prefix,
                                     std::vector<GeneratedRoute>& out) {
  for (std::size_t depth = 0; depth < path.size(); ++depth) {
    if (nodes_[path[depth]].marker) {
      drop_marker(path[depth], prefix_of(prefix.address(), depth), out);
    }
  }
  if (path.size() == prefix.length() + 1) {
    drop_subtree_markers(path.back(), prefix, out);
  }
  refresh_path(path);
}

std::optional<LpmMatch> FibTrie::lpm(Ipv4Address address) const {
  std::optional<LpmMatch> best;
  NodeIndex n = kRoot;
  for (unsigned depth = 0;; ++depth) {
    const Node& node = nodes_[n];
    if (node.route) best = LpmMatch{prefix_of(address, depth), *node.route};
    if (depth == 32) break;
    n = node.child[address.bit(depth)];
    if (n == kNone) break;
  }
  return best;
}

std::optional<GeneratedRoute> FibTrie::generated_covering(Ipv4Address address) const {
  NodeIndex n = kRoot;
  for (unsigned depth = 0;; ++depth) {
    const Node& node = nodes_[n];
    if (node.markers_below == 0) return std::nullopt;
    if (node.marker) {
      return GeneratedRoute{{prefix_of(address, depth), node.marker->next_hop},
                            node.marker->location};
    }
    if (depth == 32) return std::nullopt;
    n = node.child[address.bit(depth)];
    if (n == kNone) return std::nullopt;
  }
}

std::optional<CacheRoute> FibTrie::generate_cacheable(Ipv4Address address) {
  if (auto existing = generated_covering(address)) return existing->route;

  auto match = lpm(address);
  if (!match) return std::nullopt;

  // Extend the match one bit at a time until nothing real hangs below.
  unsigned depth = match->prefix.length();
  NodeIndex n = walk(match->prefix).back();
  while (n != kNone) {
    const Node& node = nodes_[n];
    std::uint32_t strictly_below = node.routes_below - (node.route ? 1 : 0);
    if (strictly_below == 0) break;
    n = node.child[address.bit(depth)];
    ++depth;
  }

  CacheRoute generated{prefix_of(address, depth), match->next_hop};
  auto path = materialize(generated.prefix);
  nodes_[path.back()].marker = CacheMarker{generated.next_hop, RouteLocation::Uncached};
  for (NodeIndex i : path) ++nodes_[i].markers_below;
  generated_index_.emplace(generated.prefix, path.back());
  ++uncached_;
  return generated;
}

std::optional<GeneratedRoute> FibTrie::generated(const Prefix& prefix) const {
  auto it = generated_index_.find(prefix);
  if (it == generated_index_.end()) return std::nullopt;
  const CacheMarker& marker = *nodes_[it->second].marker;
  return GeneratedRoute{{prefix, marker.next_hop}, marker.location};
}

void FibTrie::set_location(const Prefix& prefix, RouteLocation location) {
  auto it = generated_index_.find(prefix);
  if (it == generated_index_.end()) {
    throw UnknownCachePrefix(fmt::format("{} is not a generated prefix", to_string(prefix)));
  }
  CacheMarker& marker = *nodes_[it->second].marker;
  count_location(marker.location, -1);
  count_location(location, +1);
  marker.location = location;
}

RouteLocation FibTrie::get_location(const Prefix& prefix) const {
  auto it = generated_index_.find(prefix);
  if (it == generated_index_.end()) {
    throw UnknownCachePrefix(fmt::format("{} is not a generated prefix", to_string(prefix)));
  }
  return nodes_[it->second].marker->location;
}

std::vector<GeneratedRoute> FibTrie::insert_route(const Prefix& prefix, NextHop next_hop) {
  auto path = materialize(prefix);
  nodes_[path.back()].route = next_hop;
  refresh_path(path);

  std::vector<GeneratedRoute> invalidated;
  invalidate_overlapping(path, prefix, invalidated);
  prune(path);
  return invalidated;
}

std::vector<GeneratedRoute> FibTrie::withdraw_route(const Prefix& prefix) {
  auto path = walk(prefix);
  if (path.size() != prefix.length() + 1 || !nodes_[path.back()].route) {
    throw UnknownRoute(fmt::format("{} is not a route in the table", to_string(prefix)));
  }
  nodes_[path.back()].route.reset();
  refresh_path(path);

  std::vector<GeneratedRoute> invalidated;
  invalidate_overlapping(path, prefix, invalidated);

  // A generated sibling of an ancestor was only minimal because that
  // ancestor still strictly covered a real route. Once it does not, the
  // sibling could be shadowed by a shorter generated prefix later.
  for (unsigned depth = 0; depth < prefix.length(); ++depth) {
    const Node& ancestor = nodes_[path[depth]];
    std::uint32_t strictly_below = ancestor.routes_below - (ancestor.route ? 1 : 0);
    if (strictly_below != 0) continue;
    unsigned away = 1U - prefix.address().bit(depth);
    NodeIndex sibling = ancestor.child[away];
    if (sibling == kNone || !nodes_[sibling].marker) continue;
    Prefix parent = prefix_of(prefix.address(), depth);
    drop_marker(sibling, child_prefix(parent, away), invalidated);
    refresh(sibling);
    if (nodes_[sibling].empty()) {
      nodes_[path[depth]].child[away] = kNone;
      release(sibling);
    }
  }
  prune(path);
  return invalidated;
}

std::optional<NextHop> FibTrie::route(const Prefix& prefix) const {
  auto path = walk(prefix);
  if (path.size() != prefix.length() + 1) return std::nullopt;
  return nodes_[path.back()].route;
}

TrieStats FibTrie::stats() const {
  return TrieStats{nodes_[kRoot].routes_below, generated_index_.size(), in_tcam_,
                   in_sram_, uncached_};
}

std::vector<Route> FibTrie::routes() const {
  std::vector<Route> out;
  out.reserve(nodes_[kRoot].routes_below);
  struct Frame {
    NodeIndex node;
    Prefix prefix;
  };
  std::vector<Frame> stack{{kRoot, Prefix{}}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const Node& node = nodes_[f.node];
    if (node.routes_below == 0) continue;
    if (node.route) out.push_back({f.prefix, *node.route});
    for (unsigned bit = 2; bit-- > 0;) {
      if (node.child[bit] != kNone) stack.push_back({node.child[bit], child_prefix(f.prefix, bit)});
    }
  }
  return out;
}

std::vector<GeneratedRoute> FibTrie::generated_routes() const {
  std::vector<GeneratedRoute> out;
  out.reserve(generated_index_.size());
  struct Frame {
    NodeIndex node;
    Prefix prefix;
  };
  std::vector<Frame> stack{{kRoot, Prefix{}}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const Node& node = nodes_[f.node];
    if (node.markers_below == 0) continue;
    if (node.marker) out.push_back({{f.prefix, node.marker->next_hop}, node.marker->location});
    for (unsigned bit = 2; bit-- > 0;) {
      if (node.child[bit] != kNone) stack.push_back({node.child[bit], child_prefix(f.prefix, bit)});
    }
  }
  return out;
}

}  // namespace pfcs
