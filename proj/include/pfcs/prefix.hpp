#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pfcs {

class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t bits) : bits_(bits) {}

  constexpr std::uint32_t value() const noexcept { return bits_; }

  /// Bit `index` counted from the most significant end (0 = top bit).
  constexpr unsigned bit(unsigned index) const noexcept {
    return (bits_ >> (31U - index)) & 1U;
  }

  friend constexpr auto operator<=>(Ipv4Address, Ipv4Address) = default;

 private:
  std::uint32_t bits_ = 0;
};

/// Network mask with the top `length` bits set.
constexpr std::uint32_t prefix_mask(unsigned length) noexcept {
  return length == 0 ? 0U : ~std::uint32_t{0} << (32U - length);
}

/// Canonical IPv4 prefix: every bit below the prefix length is zero.
/// Instances can only be obtained through the checked constructors below,
/// so a Prefix value is always canonical.
class Prefix {
 public:
  /// The default route, 0.0.0.0/0.
  constexpr Prefix() = default;

  /// Throws NonCanonicalPrefix when host bits are set and MalformedPrefix
  /// when length exceeds 32.
  static Prefix make(Ipv4Address address, unsigned length);

  constexpr Ipv4Address address() const noexcept { return address_; }
  constexpr unsigned length() const noexcept { return length_; }

  /// Lowest and highest address inside the prefix.
  constexpr std::uint32_t first() const noexcept { return address_.value(); }
  constexpr std::uint32_t last() const noexcept {
    return address_.value() | ~prefix_mask(length_);
  }

  /// Number of addresses covered, 2^(32 - length).
  constexpr std::uint64_t size() const noexcept {
    return std::uint64_t{1} << (32U - length_);
  }

  friend constexpr auto operator<=>(const Prefix&, const Prefix&) = default;

 private:
  friend constexpr Prefix prefix_of(Ipv4Address, unsigned) noexcept;
  constexpr Prefix(Ipv4Address address, std::uint8_t length)
      : address_(address), length_(length) {}

  Ipv4Address address_{};
  std::uint8_t length_ = 0;
};

/// Keeps the top `length` bits of `address`. `length` must be <= 32.
constexpr Prefix prefix_of(Ipv4Address address, unsigned length) noexcept {
  return Prefix(Ipv4Address(address.value() & prefix_mask(length)),
                static_cast<std::uint8_t>(length));
}

constexpr bool contains(const Prefix& p, Ipv4Address a) noexcept {
  return ((a.value() ^ p.address().value()) & prefix_mask(p.length())) == 0;
}

/// True iff `outer` contains every address of `inner`.
constexpr bool covers(const Prefix& outer, const Prefix& inner) noexcept {
  return outer.length() <= inner.length() && contains(outer, inner.address());
}

constexpr bool overlaps(const Prefix& p, const Prefix& q) noexcept {
  return covers(p, q) || covers(q, p);
}

Ipv4Address parse_address(std::string_view text);
Prefix parse_prefix(std::string_view text);

std::string to_string(Ipv4Address address);
std::string to_string(const Prefix& prefix);

/// Opaque forwarding target. Ids are handed out by a NextHopTable.
class NextHop {
 public:
  constexpr NextHop() = default;
  constexpr explicit NextHop(std::uint32_t id) : id_(id) {}

  constexpr std::uint32_t id() const noexcept { return id_; }

  friend constexpr auto operator<=>(NextHop, NextHop) = default;

 private:
  std::uint32_t id_ = 0;
};

/// Interns next-hop labels read from route files.
class NextHopTable {
 public:
  NextHop intern(std::string_view label);
  const std::string& label(NextHop hop) const;
  std::size_t size() const noexcept { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// A real route of the forwarding table.
struct Route {
  Prefix prefix;
  NextHop next_hop;

  friend bool operator==(const Route&, const Route&) = default;
};

/// A generated, non-overlapping prefix eligible for caching.
struct CacheRoute {
  Prefix prefix;
  NextHop next_hop;

  friend bool operator==(const CacheRoute&, const CacheRoute&) = default;
};

}  // namespace pfcs

template <>
struct std::hash<pfcs::Prefix> {
  std::size_t operator()(const pfcs::Prefix& p) const noexcept {
    return std::hash<std::uint64_t>{}(
        (std::uint64_t{p.address().value()} << 6) | p.length());
  }
};
