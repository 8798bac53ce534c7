#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pfcs {

/// Which memory forwarded a packet. None means the packet was dropped.
enum class ServedBy : std::uint8_t { Tcam, Sram, Dram, None };

const char* to_string(ServedBy served_by);

/// Miss counts over one window of packets. Ratios are fractions of all
/// packets in the window.
struct WindowStat {
  std::uint64_t window_index = 0;  // 1-based
  std::uint64_t packets = 0;
  std::uint64_t tcam_misses = 0;
  std::uint64_t sram_misses = 0;
  double tcam_miss_ratio = 0.0;
  double sram_miss_ratio = 0.0;

  friend bool operator==(const WindowStat&, const WindowStat&) = default;
};

struct OccupancySample {
  std::uint64_t packet_count = 0;
  std::size_t tcam_entries = 0;
  std::size_t sram_entries = 0;
  std::size_t generated_total = 0;

  friend bool operator==(const OccupancySample&, const OccupancySample&) = default;
};

struct RunSummary {
  std::uint64_t total_packets = 0;
  std::uint64_t tcam_misses = 0;
  std::uint64_t sram_misses = 0;
  // Plain double division; 0 when no packet was recorded.
  double overall_tcam_miss_ratio = 0.0;
  double overall_sram_miss_ratio = 0.0;
  std::optional<OccupancySample> final_occupancy;
};

/// Collects per-packet outcomes into miss-ratio windows and occupancy
/// samples, and renders both as CSV.
class StatsSink {
 public:
  void record(ServedBy served_by);

  /// Throws EmptyWindow if nothing was recorded since the last close.
  WindowStat close_window();
  std::uint64_t open_window_packets() const noexcept { return open_.packets; }

  void sample_occupancy(const OccupancySample& sample);

  const std::vector<WindowStat>& windows() const noexcept { return windows_; }
  const std::vector<OccupancySample>& samples() const noexcept { return samples_; }

  /// Totals over closed windows plus the still-open one.
  RunSummary summary() const;

  void write_miss_ratios(std::ostream& out) const;
  void write_occupancy(std::ostream& out) const;

  /// Writes miss_ratios.csv and occupancy.csv into `directory`, creating it
  /// if needed. Throws IoError.
  void write_csv(const std::filesystem::path& directory) const;

 private:
  struct Counters {
    std::uint64_t packets = 0;
    std::uint64_t tcam_misses = 0;
    std::uint64_t sram_misses = 0;
  };

  Counters open_;
  std::vector<WindowStat> windows_;
  std::vector<OccupancySample> samples_;
};

inline constexpr const char* kMissRatiosHeader =
    "window,packets,tcam_misses,sram_misses,tcam_miss_ratio,sram_miss_ratio";
inline constexpr const char* kOccupancyHeader =
    "packet_count,tcam_entries,sram_entries,generated_total";

}  // namespace pfcs
