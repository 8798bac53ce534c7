#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfcs/pipeline.hpp"
#include "pfcs/prefix.hpp"
#include "pfcs/random.hpp"

namespace pfcs {

/// Routes read from a text route file, in file order, with their interned
/// next-hop labels.
struct RibFile {
  std::vector<Route> routes;
  NextHopTable next_hops;
};

/// One route per line, `<prefix> <next_hop_label>`. Blank lines and lines
/// starting with '#' are skipped. Throws ParseError naming the line.
RibFile load_rib(std::istream& in);
/// Throws IoError if the file cannot be opened.
RibFile load_rib_file(const std::filesystem::path& path);
void write_rib(std::ostream& out, const RibFile& rib);

/// Pull-based stream of packets with sequence numbers 1, 2, ...
class TraceSource {
 public:
  virtual ~TraceSource() = default;
  virtual std::optional<PacketRecord> next() = 0;
};

/// Dotted-quad destinations, one per line. Parse errors surface from next()
/// as ParseError once the offending line is reached.
class TextTraceSource final : public TraceSource {
 public:
  TextTraceSource(std::istream& in, std::optional<std::uint64_t> limit = std::nullopt);
  /// Throws IoError if the file cannot be opened.
  explicit TextTraceSource(const std::filesystem::path& path,
                           std::optional<std::uint64_t> limit = std::nullopt);
  ~TextTraceSource() override;

  std::optional<PacketRecord> next() override;

 private:
  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  std::optional<std::uint64_t> limit_;
  std::uint64_t emitted_ = 0;
  std::size_t line_ = 0;
  std::string name_;
};

/// Drains a source into a vector of destinations.
std::vector<Ipv4Address> read_all(TraceSource& source);
void write_trace(std::ostream& out, TraceSource& source);

struct ZipfSpec {
  std::uint64_t packets = 0;
  double skew = 1.0;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec for skew <= 0 or zero packets.
  void validate() const;
};

/// Zipf(s) sampler over ranks 1..n via an inverted CDF.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double skew);

  std::size_t sample(Rng& rng) const;
  /// Analytic probability of `rank`, r^-s / H(n, s).
  double mass(std::size_t rank) const;
  std::size_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
  double normalizer_ = 0.0;
  double skew_ = 0.0;
};

struct ZipfDraw {
  std::size_t rank = 0;  // 1-based
  Ipv4Address address;
};

/// Synthetic skewed trace. The population (the distinct routes of a RIB, or
/// an explicit destination list) is shuffled with the seed, then each packet
/// draws a rank from Zipf(s). For a route population the emitted address is
/// uniform over the part of the route that no longer route covers, or
/// anywhere in the route if that part is empty. Output depends only on the
/// population and the spec.
class ZipfTraceSource final : public TraceSource {
 public:
  /// Throws InvalidSpec for an empty RIB or an invalid spec.
  ZipfTraceSource(const RibFile& rib, const ZipfSpec& spec);
  ZipfTraceSource(std::vector<Ipv4Address> destinations, const ZipfSpec& spec);
  ~ZipfTraceSource() override;

  std::optional<PacketRecord> next() override;
  std::optional<ZipfDraw> next_draw();

  std::size_t population_size() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Picks `count` distinct routes of the RIB (all of them if fewer) and one
/// address per route under which that route is the longest match where
/// possible. Deterministic in `seed`.
std::vector<Ipv4Address> sample_active_destinations(const RibFile& rib, std::size_t count,
                                                    std::uint64_t seed);

/// A route table of `routes` distinct prefixes including the default route,
/// with a /24-heavy length mix and a share of nested more-specifics.
/// Next-hop labels are "1".."next_hops".
RibFile generate_synthetic_rib(std::size_t routes, std::uint64_t seed,
                               std::size_t next_hops = 16);

/// An update applied just before packet `before_seq` is processed.
struct TimedUpdate {
  std::uint64_t before_seq = 0;
  FibUpdate update;
};

/// Sidecar lines `<seq> I <prefix> <next_hop>` or `<seq> W <prefix>`, with
/// non-decreasing seq >= 1. Labels are interned into `next_hops`.
std::vector<TimedUpdate> load_updates(std::istream& in, NextHopTable& next_hops);
std::vector<TimedUpdate> load_updates_file(const std::filesystem::path& path,
                                           NextHopTable& next_hops);
void write_updates(std::ostream& out, const std::vector<TimedUpdate>& updates,
                   const NextHopTable& next_hops);

}  // namespace pfcs
