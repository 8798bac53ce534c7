#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pfcs/prefix.hpp"

namespace pfcs {

enum class TierKind : std::uint8_t { Tcam, Sram };

const char* to_string(TierKind tier);

struct CacheEntry {
  CacheRoute route;
  std::uint64_t hits = 0;
  std::uint64_t inserted_at = 0;

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

struct InstallResult {
  bool installed = false;
  std::optional<CacheRoute> evicted;
};

/// One capacity-bounded cache memory holding pairwise-disjoint prefixes.
///
/// Each entry carries a hit counter. The lightest hitters, ordered by
/// (hits, inserted_at, prefix address), are the eviction victims; halving
/// every counter with age() keeps that order tracking recent traffic.
class CacheTier {
 public:
  /// `capacity` must be positive.
  CacheTier(TierKind kind, std::size_t capacity);

  TierKind kind() const noexcept { return kind_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t occupancy() const noexcept { return entries_.size(); }
  bool full() const noexcept { return entries_.size() >= capacity_; }

  /// Hit iff an entry contains `address`; the entry's counter is bumped.
  std::optional<CacheRoute> lookup(Ipv4Address address);

  /// Same as lookup without touching counters.
  const CacheEntry* peek(Ipv4Address address) const;
  const CacheEntry* find(const Prefix& prefix) const;

  /// Inserts `route` with a zero counter, evicting the lightest hitter
  /// first when full. An equal prefix is replaced in place. Throws
  /// OverlapViolation when `route` properly overlaps another entry.
  InstallResult install(const CacheRoute& route, std::uint64_t seq);

  /// Up to `k` lightest entries, lightest first.
  std::vector<CacheEntry> select_victims(std::size_t k) const;

  /// Halves every hit counter.
  void age();

  bool remove(const Prefix& prefix);

  /// Entries keyed by first address; disjointness makes the key unique.
  const std::map<std::uint32_t, CacheEntry>& entries() const noexcept { return entries_; }

  /// Fault injection for validation tooling: rewrites an entry's next hop
  /// without telling anyone. Returns false if `prefix` is not cached.
  bool corrupt_next_hop(const Prefix& prefix, NextHop next_hop);

 private:
  struct VictimKey {
    std::uint64_t hits;
    std::uint64_t inserted_at;
    std::uint32_t address;

    friend auto operator<=>(const VictimKey&, const VictimKey&) = default;
  };

  static VictimKey key_of(const CacheEntry& e) {
    return {e.hits, e.inserted_at, e.route.prefix.address().value()};
  }

  std::map<std::uint32_t, CacheEntry>::iterator locate(Ipv4Address address);
  void erase(std::map<std::uint32_t, CacheEntry>::iterator it);

  TierKind kind_;
  std::size_t capacity_;
  std::map<std::uint32_t, CacheEntry> entries_;
  std::set<VictimKey> by_load_;
};

}  // namespace pfcs
