#include "pfcs/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pfcs/errors.hpp"

namespace pfcs {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool skippable(const std::vector<std::string_view>& fields) {
  return fields.empty() || fields.front().front() == '#';
}

Prefix parse_prefix_at(std::string_view text, std::size_t line) {
  try {
    return parse_prefix(text);
  } catch (const NonCanonicalPrefix& e) {
    throw ParseError(line, fmt::format("NonCanonical: {}", e.what()));
  } catch (const MalformedPrefix& e) {
    throw ParseError(line, fmt::format("MalformedPrefix: {}", e.what()));
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  return in;
}

// Addresses under each route that no longer route in the table covers,
// kept per node so that one uniform draw can be mapped to an address.
class RegionSampler {
 public:
  explicit RegionSampler(const std::vector<Route>& routes) {
    nodes_.emplace_back();
    for (const auto& r : routes) {
      std::int32_t n = 0;
      for (unsigned d = 0; d < r.prefix.length(); ++d) {
        unsigned bit = r.prefix.address().bit(d);
        if (nodes_[n].child[bit] < 0) {
          nodes_[n].child[bit] = static_cast<std::int32_t>(nodes_.size());
          nodes_.emplace_back();
        }
        n = nodes_[n].child[bit];
      }
      nodes_[n].route = true;
      index_[r.prefix] = n;
    }
    compute_open(0, 0);
  }

  Ipv4Address sample(const Prefix& prefix, Rng& rng) const {
    std::int32_t n = index_.at(prefix);
    unsigned depth = prefix.length();
    std::uint64_t total = below(n, depth);
    std::uint32_t addr = prefix.address().value();
    if (total == 0) {
      std::uint32_t host = static_cast<std::uint32_t>(rng()) & ~prefix_mask(depth);
      return Ipv4Address(addr | host);
    }
    std::uint64_t k = uniform_below(rng, total);
    while (depth < 32) {
      const Node& node = nodes_[n];
      const std::uint64_t half = std::uint64_t{1} << (31U - depth);
      bool descended = false;
      for (unsigned bit = 0; bit < 2 && !descended; ++bit) {
        std::int32_t c = node.child[bit];
        std::uint64_t count = c < 0 ? half : nodes_[c].open;
        if (k >= count) {
          k -= count;
          continue;
        }
        if (bit != 0) addr |= static_cast<std::uint32_t>(half);
        if (c < 0) return Ipv4Address(addr | static_cast<std::uint32_t>(k));
        n = c;
        ++depth;
        descended = true;
      }
    }
    return Ipv4Address(addr);
  }

 private:
  struct Node {
    std::int32_t child[2] = {-1, -1};
    bool route = false;
    std::uint64_t open = 0;  // addresses below not covered by any route
  };

  // Uncovered addresses under the children of `n`, ignoring n's own route.
  std::uint64_t below(std::int32_t n, unsigned depth) const {
    if (depth == 32) return 1;
    std::uint64_t total = 0;
    for (std::int32_t c : nodes_[n].child) {
      total += c < 0 ? std::uint64_t{1} << (31U - depth) : nodes_[c].open;
    }
    return total;
  }

  void compute_open(std::int32_t n, unsigned depth) {
    for (std::int32_t c : nodes_[n].child) {
      if (c >= 0) compute_open(c, depth + 1);
    }
    nodes_[n].open = nodes_[n].route ? 0 : below(n, depth);
  }

  std::vector<Node> nodes_;
  std::unordered_map<Prefix, std::int32_t> index_;
};

std::vector<Route> distinct_routes(const RibFile& rib) {
  std::unordered_set<Prefix> seen;
  std::vector<Route> out;
  out.reserve(rib.routes.size());
  for (const auto& r : rib.routes) {
    if (seen.insert(r.prefix).second) out.push_back(r);
  }
  return out;
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_below(rng, i)]);
  }
}

}  // namespace

RibFile load_rib(std::istream& in) {
  RibFile rib;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (skippable(fields)) continue;
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected '<prefix> <next_hop>'");
    }
    Prefix prefix = parse_prefix_at(fields[0], line_no);
    rib.routes.push_back({prefix, rib.next_hops.intern(fields[1])});
  }
  if (in.bad()) throw IoError("read error while loading routes");
  return rib;
}

RibFile load_rib_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return load_rib(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path.string(), e.reason()));
  }
}

void write_rib(std::ostream& out, const RibFile& rib) {
  for (const auto& r : rib.routes) {
    fmt::print(out, "{} {}\n", to_string(r.prefix), rib.next_hops.label(r.next_hop));
  }
}

TextTraceSource::TextTraceSource(std::istream& in, std::optional<std::uint64_t> limit)
    : in_(&in), limit_(limit) {}

TextTraceSource::TextTraceSource(const std::filesystem::path& path,
                                 std::optional<std::uint64_t> limit)
    : owned_(std::make_unique<std::ifstream>(open_input(path))),
      in_(owned_.get()),
      limit_(limit),
      name_(path.string()) {}

TextTraceSource::~TextTraceSource() = default;

std::optional<PacketRecord> TextTraceSource::next() {
  if (limit_ && emitted_ >= *limit_) return std::nullopt;
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_;
    auto fields = split_fields(line);
    if (skippable(fields)) continue;
    auto fail = [this](std::string_view why) {
      return ParseError(line_, name_.empty() ? std::string(why) : fmt::format("{}: {}", name_, why));
    };
    if (fields.size() != 1) throw fail("expected one destination address");
    Ipv4Address dst;
    try {
      dst = parse_address(fields[0]);
    } catch (const MalformedPrefix& e) {
      throw fail(e.what());
    }
    return PacketRecord{++emitted_, dst};
  }
  if (in_->bad()) throw IoError("read error while loading trace");
  return std::nullopt;
}

std::vector<Ipv4Address> read_all(TraceSource& source) {
  std::vector<Ipv4Address> out;
  while (auto p = source.next()) out.push_back(p->dst);
  return out;
}

void write_trace(std::ostream& out, TraceSource& source) {
  while (auto p = source.next()) fmt::print(out, "{}\n", to_string(p->dst));
}

void ZipfSpec::validate() const {
  if (!(skew > 0.0) || !std::isfinite(skew)) {
    throw InvalidSpec(fmt::format("zipf skew must be positive, got {}", skew));
  }
  if (packets == 0) throw InvalidSpec("packet count must be positive");
}

ZipfSampler::ZipfSampler(std::size_t n, double skew) : cdf_(n) {
  if (n == 0) throw InvalidSpec("zipf population is empty");
  double sum = 0.0;
  for (std::size_t r = 1; r <= n; ++r) {
    sum += std::pow(static_cast<double>(r), -skew);
    cdf_[r - 1] = sum;
  }
  normalizer_ = sum;
  for (double& c : cdf_) c /= sum;
  cdf_.back() = 1.0;
  skew_ = skew;
}

std::size_t ZipfSampler::sample(Rng& rng) const {
  double u = uniform_unit(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::size_t>(it - cdf_.begin()) + 1;
}

double ZipfSampler::mass(std::size_t rank) const {
  return std::pow(static_cast<double>(rank), -skew_) / normalizer_;
}

struct ZipfTraceSource::State {
  ZipfSpec spec;
  Rng rng;
  std::vector<Route> routes;               // route population
  std::vector<Ipv4Address> destinations;   // explicit population
  std::vector<std::size_t> order;          // rank - 1 -> population index
  std::optional<RegionSampler> regions;
  std::optional<ZipfSampler> zipf;
  std::uint64_t emitted = 0;

  State(const ZipfSpec& s, std::size_t population) : spec(s), rng(s.seed) {
    order.resize(population);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    zipf.emplace(population, spec.skew);
  }
};

namespace {

const ZipfSpec& checked(const ZipfSpec& spec) {
  spec.validate();
  return spec;
}

}  // namespace

ZipfTraceSource::ZipfTraceSource(const RibFile& rib, const ZipfSpec& spec) {
  auto routes = distinct_routes(rib);
  if (routes.empty()) throw InvalidSpec("cannot generate traffic for an empty route table");
  state_ = std::make_unique<State>(checked(spec), routes.size());
  state_->regions.emplace(routes);
  state_->routes = std::move(routes);
}

ZipfTraceSource::ZipfTraceSource(std::vector<Ipv4Address> destinations, const ZipfSpec& spec) {
  if (destinations.empty()) throw InvalidSpec("destination population is empty");
  state_ = std::make_unique<State>(checked(spec), destinations.size());
  state_->destinations = std::move(destinations);
}

ZipfTraceSource::~ZipfTraceSource() = default;

std::size_t ZipfTraceSource::population_size() const { return state_->order.size(); }

std::optional<ZipfDraw> ZipfTraceSource::next_draw() {
  State& s = *state_;
  if (s.emitted >= s.spec.packets) return std::nullopt;
  ++s.emitted;
  std::size_t rank = s.zipf->sample(s.rng);
  std::size_t index = s.order[rank - 1];
  if (s.regions) return ZipfDraw{rank, s.regions->sample(s.routes[index].prefix, s.rng)};
  return ZipfDraw{rank, s.destinations[index]};
}

std::optional<PacketRecord> ZipfTraceSource::next() {
  auto draw = next_draw();
  if (!draw) return std::nullopt;
  return PacketRecord{state_->emitted, draw->address};
}

std::vector<Ipv4Address> sample_active_destinations(const RibFile& rib, std::size_t count,
                                                    std::uint64_t seed) {
  auto routes = distinct_routes(rib);
  Rng rng(seed);
  count = std::min(count, routes.size());
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(routes[i], routes[i + uniform_below(rng, routes.size() - i)]);
  }
  RegionSampler regions(routes);
  std::vector<Ipv4Address> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(regions.sample(routes[i].prefix, rng));
  return out;
}

RibFile generate_synthetic_rib(std::size_t routes, std::uint64_t seed, std::size_t next_hops) {
  if (routes == 0) throw InvalidSpec("route count must be positive");
  if (next_hops == 0) throw InvalidSpec("next hop count must be positive");

  // Rough shape of a global IPv4 table: mostly /24, then /22-/23, /16-/21.
  struct LengthWeight {
    unsigned length;
    unsigned weight;
  };
  static constexpr LengthWeight kLengths[] = {
      {8, 3},   {10, 2},  {12, 4},  {13, 5},  {14, 8},  {15, 10},  {16, 60}, {17, 25},
      {18, 40}, {19, 60}, {20, 80}, {21, 80}, {22, 150}, {23, 140}, {24, 700}};
  unsigned total_weight = 0;
  for (const auto& lw : kLengths) total_weight += lw.weight;

  Rng rng(seed);
  RibFile rib;
  std::vector<NextHop> hops;
  for (std::size_t i = 1; i <= next_hops; ++i) hops.push_back(rib.next_hops.intern(std::to_string(i)));
  auto random_hop = [&] { return hops[uniform_below(rng, hops.size())]; };

  std::unordered_set<Prefix> seen;
  rib.routes.push_back({Prefix{}, random_hop()});
  seen.insert(Prefix{});

  while (rib.routes.size() < routes) {
    Prefix prefix;
    NextHop hop = random_hop();
    const Route& parent = rib.routes[uniform_below(rng, rib.routes.size())];
    bool nest = parent.prefix.length() >= 8 &&
                parent.prefix.length() < 24 && uniform_unit(rng) < 0.25;
    if (nest) {
      unsigned span = std::min(8U, 24U - parent.prefix.length());
      unsigned length = parent.prefix.length() + 1 + static_cast<unsigned>(uniform_below(rng, span));
      auto host = static_cast<std::uint32_t>(rng()) & ~prefix_mask(parent.prefix.length());
      prefix = prefix_of(Ipv4Address(parent.prefix.first() | host), length);
    } else {
      auto pick = static_cast<unsigned>(uniform_below(rng, total_weight));
      unsigned length = 24;
      for (const auto& lw : kLengths) {
        if (pick < lw.weight) {
          length = lw.length;
          break;
        }
        pick -= lw.weight;
      }
      // Unicast space 1.0.0.0 - 223.255.255.255.
      auto first = static_cast<std::uint32_t>(1 + uniform_below(rng, 223)) << 24;
      auto bits = first | (static_cast<std::uint32_t>(rng()) & 0x00FFFFFFU);
      prefix = prefix_of(Ipv4Address(bits), length);
    }
    if (seen.insert(prefix).second) rib.routes.push_back({prefix, hop});
  }
  return rib;
}

std::vector<TimedUpdate> load_updates(std::istream& in, NextHopTable& next_hops) {
  std::vector<TimedUpdate> updates;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t last_seq = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (skippable(fields)) continue;
    if (fields.size() < 3) throw ParseError(line_no, "expected '<seq> I|W <prefix> [next_hop]'");

    std::uint64_t seq = 0;
    auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), seq);
    if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size() || seq == 0) {
      throw ParseError(line_no, fmt::format("bad sequence number '{}'", fields[0]));
    }
    if (seq < last_seq) throw ParseError(line_no, "sequence numbers must not decrease");
    last_seq = seq;

    Prefix prefix = parse_prefix_at(fields[2], line_no);
    if (fields[1] == "I" && fields.size() == 4) {
      updates.push_back({seq, InsertRoute{prefix, next_hops.intern(fields[3])}});
    } else if (fields[1] == "W" && fields.size() == 3) {
      updates.push_back({seq, WithdrawRoute{prefix}});
    } else {
      throw ParseError(line_no, "expected 'I <prefix> <next_hop>' or 'W <prefix>'");
    }
  }
  if (in.bad()) throw IoError("read error while loading updates");
  return updates;
}

std::vector<TimedUpdate> load_updates_file(const std::filesystem::path& path,
                                           NextHopTable& next_hops) {
  auto in = open_input(path);
  try {
    return load_updates(in, next_hops);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", path.string(), e.reason()));
  }
}

void write_updates(std::ostream& out, const std::vector<TimedUpdate>& updates,
                   const NextHopTable& next_hops) {
  for (const auto& u : updates) {
    if (const auto* insert = std::get_if<InsertRoute>(&u.update)) {
      fmt::print(out, "{} I {} {}\n", u.before_seq, to_string(insert->prefix),
                 next_hops.label(insert->next_hop));
    } else {
      fmt::print(out, "{} W {}\n", u.before_seq, to_string(std::get<WithdrawRoute>(u.update).prefix));
    }
  }
}

}  // namespace pfcs
