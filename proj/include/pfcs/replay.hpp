#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfcs/fib_trie.hpp"
#include "pfcs/pipeline.hpp"
#include "pfcs/trace_io.hpp"

namespace pfcs {

/// Reference forwarding table answering LPM by scanning every route.
/// Deliberately shares no lookup code with FibTrie.
class LinearScanFib {
 public:
  explicit LinearScanFib(std::span<const Route> routes);

  /// Throws UnknownRoute when withdrawing a prefix that is not present.
  void apply(const FibUpdate& update);
  std::optional<LpmMatch> lpm(Ipv4Address address) const;
  std::size_t size() const noexcept { return routes_.size(); }

 private:
  void rebuild();

  std::map<Prefix, NextHop> routes_;
  std::vector<std::uint32_t> networks_;
  std::vector<std::uint32_t> masks_;
  std::vector<std::uint32_t> lengths_;
  std::vector<Prefix> prefixes_;
  std::vector<NextHop> hops_;
};

struct Violation {
  std::uint64_t seq = 0;
  std::string what;
};

struct ReplayOptions {
  /// Run Engine::check_invariants after every packet and every update.
  bool check_invariants = false;
  /// Compare every forwarding decision with this table; kept in step with
  /// the updates.
  LinearScanFib* oracle = nullptr;
  /// Called before each packet; used for fault injection.
  std::function<void(Engine&, const PacketRecord&)> before_packet;
  std::function<void(const PacketRecord&, const ForwardingOutcome&)> on_outcome;
};

struct ReplayResult {
  std::uint64_t packets = 0;
  std::optional<Violation> violation;
};

/// Feeds `trace` through `engine`, applying each update right before the
/// packet it is stamped with. Updates stamped past the end of the trace are
/// applied after the last packet. Stops at the first violation. Does not
/// close the trailing stats window.
ReplayResult replay(Engine& engine, TraceSource& trace, std::span<const TimedUpdate> updates,
                    const ReplayOptions& options = {});

}  // namespace pfcs
