#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pfcs/cache_tier.hpp"
#include "pfcs/fib_trie.hpp"
#include "pfcs/prefix.hpp"
#include "pfcs/stats.hpp"

namespace pfcs {

struct PipelineConfig {
  std::size_t tcam_capacity = 10'000;
  std::size_t sram_capacity = 20'000;
  // Lightest TCAM entries considered when deciding a promotion.
  std::size_t victim_set_size = 8;
  // An SRAM entry must beat the lightest TCAM entry by more than this.
  std::uint64_t promotion_margin = 0;
  // Counters in both tiers are halved every `aging_epoch` packets.
  std::uint64_t aging_epoch = 1'000'000;
  std::uint64_t stats_window = 100'000;

  /// Throws InvalidSpec unless every field except the margin is positive.
  void validate() const;
};

struct PacketRecord {
  std::uint64_t seq = 0;
  Ipv4Address dst;
};

struct Eviction {
  TierKind tier;
  Prefix prefix;

  friend bool operator==(const Eviction&, const Eviction&) = default;
};

struct ForwardingOutcome {
  std::optional<NextHop> next_hop;  // nullopt: dropped
  ServedBy served_by = ServedBy::None;
  std::optional<CacheRoute> installed;
  std::optional<Prefix> promoted;
  // Entries pushed out of a tier while handling this packet, in order.
  // A TCAM eviction is a demotion into SRAM.
  std::vector<Eviction> evictions;
};

struct InsertRoute {
  Prefix prefix;
  NextHop next_hop;
};

struct WithdrawRoute {
  Prefix prefix;
};

using FibUpdate = std::variant<InsertRoute, WithdrawRoute>;

struct EngineSnapshot {
  std::size_t tcam_occupancy = 0;
  std::size_t sram_occupancy = 0;
  std::uint64_t packet_count = 0;
  TrieStats trie;
};

/// The three-tier forwarding pipeline.
///
/// Every packet first tries the TCAM tier. A TCAM miss is handed to both the
/// SRAM tier and the full table at once; the full table's residency flags
/// decide which copy forwards. An SRAM miss is forwarded from the full
/// table, which then generates a non-overlapping prefix for the destination
/// and installs it in SRAM. SRAM entries that out-hit the lightest TCAM
/// entries (or find the TCAM not yet full) move up; displaced TCAM entries
/// move down into SRAM.
///
/// One engine processes packets strictly in sequence. Distinct engines share
/// nothing and may run on different threads.
class Engine {
 public:
  Engine(FibTrie fib, PipelineConfig config);

  /// Installs the generated prefix of each destination into SRAM. TCAM is
  /// left empty.
  void warm_start(std::span<const Ipv4Address> destinations);

  /// `packet.seq` must be exactly one past the last processed packet,
  /// otherwise SequenceGap is thrown and nothing changes.
  ForwardingOutcome process_packet(const PacketRecord& packet);

  /// Applies a route change and purges every invalidated prefix from the
  /// tier holding it. Returns the purged (tier, prefix) pairs.
  std::vector<Eviction> apply_fib_update(const FibUpdate& update);

  EngineSnapshot snapshot() const;

  /// Closes the trailing partial stats window, if any.
  void finish();

  /// Tier exclusivity, flag consistency (including the cached next hop),
  /// capacity, and pairwise disjointness across both tiers. Returns a
  /// description of the first violation found.
  std::optional<std::string> check_invariants() const;

  const FibTrie& fib() const noexcept { return fib_; }
  const CacheTier& tcam() const noexcept { return tcam_; }
  const CacheTier& sram() const noexcept { return sram_; }
  const StatsSink& stats() const noexcept { return stats_; }
  const PipelineConfig& config() const noexcept { return config_; }
  std::uint64_t packet_count() const noexcept { return packets_; }

  /// Fault injection for validation tooling. Rewrites the next hop of a
  /// cached prefix in whichever tier holds it.
  bool corrupt_cached_next_hop(const Prefix& prefix, NextHop next_hop);

 private:
  // Installs into SRAM and updates flags. `seq` stamps the new entry.
  void install_in_sram(const CacheRoute& route, std::uint64_t seq,
                       std::vector<Eviction>& evictions);
  void maybe_promote(const Prefix& prefix, std::uint64_t seq, ForwardingOutcome& out);
  void close_window();

  FibTrie fib_;
  PipelineConfig config_;
  CacheTier tcam_;
  CacheTier sram_;
  StatsSink stats_;
  std::uint64_t packets_ = 0;
};

}  // namespace pfcs
