#include "pfcs/cache_tier.hpp"

#include <fmt/format.h>

#include "pfcs/errors.hpp"

namespace pfcs {

const char* to_string(TierKind tier) {
  return tier == TierKind::Tcam ? "TCAM" : "SRAM";
}

CacheTier::CacheTier(TierKind kind, std::size_t capacity)
    : kind_(kind), capacity_(capacity) {
  if (capacity == 0) throw InvalidSpec("cache tier capacity must be positive");
}

std::map<std::uint32_t, CacheEntry>::iterator CacheTier::locate(Ipv4Address address) {
  auto it = entries_.upper_bound(address.value());
  if (it == entries_.begin()) return entries_.end();
  --it;
  return contains(it->second.route.prefix, address) ? it : entries_.end();
}

const CacheEntry* CacheTier::peek(Ipv4Address address) const {
  auto it = entries_.upper_bound(address.value());
  if (it == entries_.begin()) return nullptr;
  --it;
  return contains(it->second.route.prefix, address) ? &it->second : nullptr;
}

const CacheEntry* CacheTier::find(const Prefix& prefix) const {
  auto it = entries_.find(prefix.address().value());
  if (it == entries_.end() || it->second.route.prefix != prefix) return nullptr;
  return &it->second;
}

std::optional<CacheRoute> CacheTier::lookup(Ipv4Address address) {
  auto it = locate(address);
  if (it == entries_.end()) return std::nullopt;
  CacheEntry& entry = it->second;
  auto node = by_load_.extract(key_of(entry));
  ++entry.hits;
  node.value() = key_of(entry);
  by_load_.insert(std::move(node));
  return entry.route;
}

void CacheTier::erase(std::map<std::uint32_t, CacheEntry>::iterator it) {
  by_load_.erase(key_of(it->second));
  entries_.erase(it);
}

InstallResult CacheTier::install(const CacheRoute& route, std::uint64_t seq) {
  const std::uint32_t first = route.prefix.first();

  if (auto same = entries_.find(first); same != entries_.end()) {
    if (same->second.route.prefix != route.prefix) {
      throw OverlapViolation(fmt::format("{}: {} overlaps cached {}", to_string(kind_),
                                         to_string(route.prefix),
                                         to_string(same->second.route.prefix)));
    }
    by_load_.erase(key_of(same->second));
    same->second = CacheEntry{route, 0, seq};
    by_load_.insert(key_of(same->second));
    return {true, std::nullopt};
  }

  auto next = entries_.upper_bound(first);
  const CacheEntry* clash = nullptr;
  if (next != entries_.end() && next->first <= route.prefix.last()) clash = &next->second;
  if (next != entries_.begin()) {
    const CacheEntry& before = std::prev(next)->second;
    if (contains(before.route.prefix, route.prefix.address())) clash = &before;
  }
  if (clash != nullptr) {
    throw OverlapViolation(fmt::format("{}: {} overlaps cached {}", to_string(kind_),
                                       to_string(route.prefix),
                                       to_string(clash->route.prefix)));
  }

  InstallResult result{true, std::nullopt};
  if (full()) {
    auto victim = entries_.find(by_load_.begin()->address);
    result.evicted = victim->second.route;
    erase(victim);
  }
  CacheEntry entry{route, 0, seq};
  by_load_.insert(key_of(entry));
  entries_.emplace(first, entry);
  return result;
}

std::vector<CacheEntry> CacheTier::select_victims(std::size_t k) const {
  std::vector<CacheEntry> out;
  out.reserve(std::min(k, by_load_.size()));
  for (const auto& key : by_load_) {
    if (out.size() == k) break;
    out.push_back(entries_.at(key.address));
  }
  return out;
}

void CacheTier::age() {
  by_load_.clear();
  for (auto& [first, entry] : entries_) {
    entry.hits /= 2;
    by_load_.insert(key_of(entry));
  }
}

bool CacheTier::remove(const Prefix& prefix) {
  auto it = entries_.find(prefix.first());
  if (it == entries_.end() || it->second.route.prefix != prefix) return false;
  erase(it);
  return true;
}

bool CacheTier::corrupt_next_hop(const Prefix& prefix, NextHop next_hop) {
  auto it = entries_.find(prefix.first());
  if (it == entries_.end() || it->second.route.prefix != prefix) return false;
  it->second.route.next_hop = next_hop;
  return true;
}

}  // namespace pfcs
