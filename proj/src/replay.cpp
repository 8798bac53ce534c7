#include "pfcs/replay.hpp"

#include <fmt/format.h>

#include "pfcs/errors.hpp"

namespace pfcs {

LinearScanFib::LinearScanFib(std::span<const Route> routes) {
  for (const auto& r : routes) routes_[r.prefix] = r.next_hop;
  rebuild();
}

void LinearScanFib::apply(const FibUpdate& update) {
  if (const auto* insert = std::get_if<InsertRoute>(&update)) {
    routes_[insert->prefix] = insert->next_hop;
  } else {
    const Prefix& prefix = std::get<WithdrawRoute>(update).prefix;
    if (routes_.erase(prefix) == 0) {
      throw UnknownRoute(fmt::format("{} is not a route in the table", to_string(prefix)));
    }
  }
  rebuild();
}

void LinearScanFib::rebuild() {
  networks_.clear();
  masks_.clear();
  lengths_.clear();
  prefixes_.clear();
  hops_.clear();
  for (const auto& [prefix, hop] : routes_) {
    networks_.push_back(prefix.address().value());
    masks_.push_back(prefix_mask(prefix.length()));
    lengths_.push_back(prefix.length());
    prefixes_.push_back(prefix);
    hops_.push_back(hop);
  }
}

std::optional<LpmMatch> LinearScanFib::lpm(Ipv4Address address) const {
  const std::uint32_t a = address.value();
  // Score = length + 1 for matching routes, 0 otherwise; keep the best.
  std::uint32_t best_score = 0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < networks_.size(); ++i) {
    std::uint32_t score = ((a & masks_[i]) == networks_[i]) ? lengths_[i] + 1 : 0;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  if (best_score == 0) return std::nullopt;
  return LpmMatch{prefixes_[best], hops_[best]};
}

namespace {

std::optional<std::string> compare(const std::optional<LpmMatch>& expected,
                                   const ForwardingOutcome& outcome, Ipv4Address dst) {
  if (!expected && outcome.next_hop) {
    return fmt::format("{} forwarded to next hop {} by {} but no route matches",
                       to_string(dst), outcome.next_hop->id(), to_string(outcome.served_by));
  }
  if (expected && !outcome.next_hop) {
    return fmt::format("{} dropped but {} matches", to_string(dst), to_string(expected->prefix));
  }
  if (expected && expected->next_hop != *outcome.next_hop) {
    return fmt::format("{} forwarded to next hop {} by {}, longest match {} says {}",
                       to_string(dst), outcome.next_hop->id(), to_string(outcome.served_by),
                       to_string(expected->prefix), expected->next_hop.id());
  }
  return std::nullopt;
}

}  // namespace

ReplayResult replay(Engine& engine, TraceSource& trace, std::span<const TimedUpdate> updates,
                    const ReplayOptions& options) {
  ReplayResult result;
  std::size_t next_update = 0;

  auto apply_until = [&](std::uint64_t seq) -> bool {
    while (next_update < updates.size() && updates[next_update].before_seq <= seq) {
      const TimedUpdate& u = updates[next_update++];
      engine.apply_fib_update(u.update);
      if (options.oracle != nullptr) options.oracle->apply(u.update);
      if (options.check_invariants) {
        if (auto v = engine.check_invariants()) {
          result.violation = Violation{u.before_seq, fmt::format("after update: {}", *v)};
          return false;
        }
      }
    }
    return true;
  };

  while (auto packet = trace.next()) {
    if (!apply_until(packet->seq)) return result;
    if (options.before_packet) options.before_packet(engine, *packet);

    ForwardingOutcome outcome = engine.process_packet(*packet);
    ++result.packets;
    if (options.on_outcome) options.on_outcome(*packet, outcome);

    if (options.oracle != nullptr) {
      if (auto v = compare(options.oracle->lpm(packet->dst), outcome, packet->dst)) {
        result.violation = Violation{packet->seq, *v};
        return result;
      }
    }
    if (options.check_invariants) {
      if (auto v = engine.check_invariants()) {
        result.violation = Violation{packet->seq, *v};
        return result;
      }
    }
  }
  apply_until(UINT64_MAX);
  return result;
}

}  // namespace pfcs
