#include "pfcs/stats.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pfcs/errors.hpp"

namespace pfcs {

const char* to_string(ServedBy served_by) {
  switch (served_by) {
    case ServedBy::Tcam: return "TCAM";
    case ServedBy::Sram: return "SRAM";
    case ServedBy::Dram: return "DRAM";
    case ServedBy::None: return "None";
  }
  return "?";
}

void StatsSink::record(ServedBy served_by) {
  ++open_.packets;
  if (served_by != ServedBy::Tcam) ++open_.tcam_misses;
  if (served_by == ServedBy::Dram || served_by == ServedBy::None) ++open_.sram_misses;
}

WindowStat StatsSink::close_window() {
  if (open_.packets == 0) throw EmptyWindow("no packets recorded since the last window");
  auto n = static_cast<double>(open_.packets);
  WindowStat stat{windows_.size() + 1,
                  open_.packets,
                  open_.tcam_misses,
                  open_.sram_misses,
                  static_cast<double>(open_.tcam_misses) / n,
                  static_cast<double>(open_.sram_misses) / n};
  windows_.push_back(stat);
  open_ = {};
  return stat;
}

void StatsSink::sample_occupancy(const OccupancySample& sample) { samples_.push_back(sample); }

RunSummary StatsSink::summary() const {
  RunSummary s;
  s.total_packets = open_.packets;
  s.tcam_misses = open_.tcam_misses;
  s.sram_misses = open_.sram_misses;
  for (const auto& w : windows_) {
    s.total_packets += w.packets;
    s.tcam_misses += w.tcam_misses;
    s.sram_misses += w.sram_misses;
  }
  if (s.total_packets != 0) {
    auto n = static_cast<double>(s.total_packets);
    s.overall_tcam_miss_ratio = static_cast<double>(s.tcam_misses) / n;
    s.overall_sram_miss_ratio = static_cast<double>(s.sram_misses) / n;
  }
  if (!samples_.empty()) s.final_occupancy = samples_.back();
  return s;
}

void StatsSink::write_miss_ratios(std::ostream& out) const {
  fmt::print(out, "{}\n", kMissRatiosHeader);
  for (const auto& w : windows_) {
    fmt::print(out, "{},{},{},{},{:.6f},{:.6f}\n", w.window_index, w.packets, w.tcam_misses,
               w.sram_misses, w.tcam_miss_ratio, w.sram_miss_ratio);
  }
}

void StatsSink::write_occupancy(std::ostream& out) const {
  fmt::print(out, "{}\n", kOccupancyHeader);
  for (const auto& s : samples_) {
    fmt::print(out, "{},{},{},{}\n", s.packet_count, s.tcam_entries, s.sram_entries,
               s.generated_total);
  }
}

void StatsSink::write_csv(const std::filesystem::path& directory) const {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create {}: {}", directory.string(), ec.message()));
  }
  auto write = [](const std::filesystem::path& path, auto&& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    body(out);
    out.flush();
    if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
  };
  write(directory / "miss_ratios.csv", [this](std::ostream& o) { write_miss_ratios(o); });
  write(directory / "occupancy.csv", [this](std::ostream& o) { write_occupancy(o); });
}

}  // namespace pfcs
