#include "pfcs/prefix.hpp"

#include <charconv>

#include <fmt/format.h>

#include "pfcs/errors.hpp"

namespace pfcs {

namespace {

// One to three decimal digits, nothing else, value <= max_value.
bool parse_decimal(std::string_view text, unsigned max_value,
                   unsigned& out) {
  if (text.empty() || text.size() > 3) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return false;
  if (value > max_value) return false;
  out = value;
  return true;
}

bool try_parse_address(std::string_view text, std::uint32_t& out) {
  std::uint32_t bits = 0;
  for (int octet = 0; octet < 4; ++octet) {
    auto dot = text.find('.');
    std::string_view field = octet < 3 ? text.substr(0, dot) : text;
    if (octet < 3 && dot == std::string_view::npos) return false;
    unsigned value = 0;
    if (!parse_decimal(field, 255, value)) return false;
    bits = (bits << 8) | value;
    if (octet < 3) text.remove_prefix(dot + 1);
  }
  out = bits;
  return true;
}

}  // namespace

Prefix Prefix::make(Ipv4Address address, unsigned length) {
  if (length > 32) {
    throw MalformedPrefix(fmt::format("prefix length {} exceeds 32", length));
  }
  if ((address.value() & ~prefix_mask(length)) != 0) {
    throw NonCanonicalPrefix(fmt::format("non-canonical prefix {}/{}: host bits set",
                                         to_string(address), length));
  }
  return prefix_of(address, length);
}

Ipv4Address parse_address(std::string_view text) {
  std::uint32_t bits = 0;
  if (!try_parse_address(text, bits)) {
    throw MalformedPrefix(fmt::format("malformed IPv4 address '{}'", text));
  }
  return Ipv4Address(bits);
}

Prefix parse_prefix(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw MalformedPrefix(fmt::format("malformed prefix '{}': missing '/'", text));
  }
  std::uint32_t bits = 0;
  unsigned length = 0;
  if (!try_parse_address(text.substr(0, slash), bits) ||
      !parse_decimal(text.substr(slash + 1), 32, length)) {
    throw MalformedPrefix(fmt::format("malformed prefix '{}'", text));
  }
  return Prefix::make(Ipv4Address(bits), length);
}

std::string to_string(Ipv4Address address) {
  std::uint32_t v = address.value();
  return fmt::format("{}.{}.{}.{}", v >> 24, (v >> 16) & 0xFF, (v >> 8) & 0xFF,
                     v & 0xFF);
}

std::string to_string(const Prefix& prefix) {
  return fmt::format("{}/{}", to_string(prefix.address()), prefix.length());
}

NextHop NextHopTable::intern(std::string_view label) {
  std::string key(label);
  if (auto it = ids_.find(key); it != ids_.end()) return NextHop(it->second);
  auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.push_back(key);
  ids_.emplace(std::move(key), id);
  return NextHop(id);
}

const std::string& NextHopTable::label(NextHop hop) const {
  return labels_.at(hop.id());
}

}  // namespace pfcs
