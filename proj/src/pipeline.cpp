#include "pfcs/pipeline.hpp"

#include <fmt/format.h>

#include "pfcs/errors.hpp"

namespace pfcs {

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidSpec(fmt::format("{} must be positive", what));
  };
  require(tcam_capacity > 0, "tcam capacity");
  require(sram_capacity > 0, "sram capacity");
  require(victim_set_size > 0, "victim set size");
  require(aging_epoch > 0, "aging epoch");
  require(stats_window > 0, "stats window");
}

namespace {

const PipelineConfig& checked(const PipelineConfig& config) {
  config.validate();
  return config;
}

}  // namespace

Engine::Engine(FibTrie fib, PipelineConfig config)
    : fib_(std::move(fib)),
      config_(checked(config)),
      tcam_(TierKind::Tcam, config.tcam_capacity),
      sram_(TierKind::Sram, config.sram_capacity) {}

void Engine::install_in_sram(const CacheRoute& route, std::uint64_t seq,
                             std::vector<Eviction>& evictions) {
  auto result = sram_.install(route, seq);
  if (result.evicted) {
    fib_.set_location(result.evicted->prefix, RouteLocation::Uncached);
    evictions.push_back({TierKind::Sram, result.evicted->prefix});
  }
  fib_.set_location(route.prefix, RouteLocation::InSram);
}

void Engine::warm_start(std::span<const Ipv4Address> destinations) {
  std::vector<Eviction> ignored;
  for (Ipv4Address dst : destinations) {
    auto route = fib_.generate_cacheable(dst);
    if (!route) continue;
    if (fib_.get_location(route->prefix) != RouteLocation::Uncached) continue;
    install_in_sram(*route, packets_, ignored);
  }
}

void Engine::maybe_promote(const Prefix& prefix, std::uint64_t seq, ForwardingOutcome& out) {
  const CacheEntry* entry = sram_.find(prefix);
  bool promote = !tcam_.full();
  if (!promote) {
    auto victims = tcam_.select_victims(config_.victim_set_size);
    promote = entry->hits > victims.front().hits + config_.promotion_margin;
  }
  if (!promote) return;

  CacheRoute route = entry->route;
  sram_.remove(prefix);
  auto result = tcam_.install(route, seq);
  fib_.set_location(prefix, RouteLocation::InTcam);
  out.promoted = prefix;

  if (result.evicted) {
    out.evictions.push_back({TierKind::Tcam, result.evicted->prefix});
    install_in_sram(*result.evicted, seq, out.evictions);
  }
}

ForwardingOutcome Engine::process_packet(const PacketRecord& packet) {
  if (packet.seq != packets_ + 1) {
    throw SequenceGap(fmt::format("expected packet seq {}, got {}", packets_ + 1, packet.seq));
  }
  ForwardingOutcome out;

  if (auto hit = tcam_.lookup(packet.dst)) {
    out.next_hop = hit->next_hop;
    out.served_by = ServedBy::Tcam;
  } else {
    // Header clone: the SRAM copy and the full-table copy both look the
    // packet up; the residency flag decides which one forwards.
    auto sram_hit = sram_.lookup(packet.dst);
    auto record = sram_hit ? fib_.generated(sram_hit->prefix) : std::nullopt;
    if (sram_hit && record && record->location == RouteLocation::InSram) {
      out.next_hop = sram_hit->next_hop;
      out.served_by = ServedBy::Sram;
      maybe_promote(sram_hit->prefix, packet.seq, out);
    } else if (auto match = fib_.lpm(packet.dst)) {
      out.next_hop = match->next_hop;
      out.served_by = ServedBy::Dram;
      auto route = fib_.generate_cacheable(packet.dst);
      if (fib_.get_location(route->prefix) == RouteLocation::Uncached) {
        install_in_sram(*route, packet.seq, out.evictions);
        out.installed = route;
      }
    }
  }

  ++packets_;
  stats_.record(out.served_by);
  if (packets_ % config_.aging_epoch == 0) {
    tcam_.age();
    sram_.age();
  }
  if (packets_ % config_.stats_window == 0) close_window();
  return out;
}

std::vector<Eviction> Engine::apply_fib_update(const FibUpdate& update) {
  std::vector<GeneratedRoute> invalidated;
  if (const auto* insert = std::get_if<InsertRoute>(&update)) {
    invalidated = fib_.insert_route(insert->prefix, insert->next_hop);
  } else {
    invalidated = fib_.withdraw_route(std::get<WithdrawRoute>(update).prefix);
  }

  std::vector<Eviction> purged;
  for (const auto& g : invalidated) {
    if (g.location == RouteLocation::InTcam && tcam_.remove(g.route.prefix)) {
      purged.push_back({TierKind::Tcam, g.route.prefix});
    } else if (g.location == RouteLocation::InSram && sram_.remove(g.route.prefix)) {
      purged.push_back({TierKind::Sram, g.route.prefix});
    }
  }
  return purged;
}

EngineSnapshot Engine::snapshot() const {
  return {tcam_.occupancy(), sram_.occupancy(), packets_, fib_.stats()};
}

void Engine::close_window() {
  stats_.close_window();
  stats_.sample_occupancy(
      {packets_, tcam_.occupancy(), sram_.occupancy(), fib_.stats().generated_total});
}

void Engine::finish() {
  if (stats_.open_window_packets() > 0) close_window();
}

std::optional<std::string> Engine::check_invariants() const {
  if (tcam_.occupancy() > tcam_.capacity()) {
    return fmt::format("TCAM holds {} entries, capacity {}", tcam_.occupancy(), tcam_.capacity());
  }
  if (sram_.occupancy() > sram_.capacity()) {
    return fmt::format("SRAM holds {} entries, capacity {}", sram_.occupancy(), sram_.capacity());
  }

  TrieStats trie = fib_.stats();
  if (trie.in_tcam != tcam_.occupancy()) {
    return fmt::format("{} prefixes flagged InTcam but TCAM holds {}", trie.in_tcam,
                       tcam_.occupancy());
  }
  if (trie.in_sram != sram_.occupancy()) {
    return fmt::format("{} prefixes flagged InSram but SRAM holds {}", trie.in_sram,
                       sram_.occupancy());
  }

  auto check_tier = [this](const CacheTier& tier,
                           RouteLocation expected) -> std::optional<std::string> {
    for (const auto& [first, entry] : tier.entries()) {
      auto record = fib_.generated(entry.route.prefix);
      if (!record) {
        return fmt::format("{} holds {} which is not a generated prefix", to_string(tier.kind()),
                           to_string(entry.route.prefix));
      }
      if (record->location != expected) {
        return fmt::format("{} holds {} but its flag is {}", to_string(tier.kind()),
                           to_string(entry.route.prefix), to_string(record->location));
      }
      if (record->route.next_hop != entry.route.next_hop) {
        return fmt::format("{} entry {} has next hop {} but the table says {}",
                           to_string(tier.kind()), to_string(entry.route.prefix),
                           entry.route.next_hop.id(), record->route.next_hop.id());
      }
    }
    return std::nullopt;
  };
  if (auto v = check_tier(tcam_, RouteLocation::InTcam)) return v;
  if (auto v = check_tier(sram_, RouteLocation::InSram)) return v;

  // Merge both tiers in address order; neighbours must not overlap.
  auto t = tcam_.entries().begin();
  auto s = sram_.entries().begin();
  const CacheEntry* previous = nullptr;
  while (t != tcam_.entries().end() || s != sram_.entries().end()) {
    const CacheEntry* current = nullptr;
    if (s == sram_.entries().end() || (t != tcam_.entries().end() && t->first <= s->first)) {
      current = &(t++)->second;
    } else {
      current = &(s++)->second;
    }
    if (previous != nullptr && previous->route.prefix.last() >= current->route.prefix.first()) {
      return fmt::format("cached prefixes {} and {} overlap", to_string(previous->route.prefix),
                         to_string(current->route.prefix));
    }
    previous = current;
  }
  return std::nullopt;
}

bool Engine::corrupt_cached_next_hop(const Prefix& prefix, NextHop next_hop) {
  return tcam_.corrupt_next_hop(prefix, next_hop) || sram_.corrupt_next_hop(prefix, next_hop);
}

}  // namespace pfcs
