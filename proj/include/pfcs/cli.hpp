#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "pfcs/pipeline.hpp"
#include "pfcs/trace_io.hpp"

namespace pfcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitViolation = 2;

struct ZipfOptions {
  std::uint64_t packets = 0;
  double skew = 1.0;
  // Draw from this many randomly chosen routes instead of the whole table.
  // 0 means every route.
  std::size_t active_routes = 0;
};

struct RunConfig {
  std::filesystem::path rib;
  // Exactly one of trace / zipf.
  std::optional<std::filesystem::path> trace;
  std::optional<ZipfOptions> zipf;
  std::optional<std::filesystem::path> updates;
  PipelineConfig pipeline;
  std::filesystem::path out_dir = ".";
  bool check_invariants = false;
  std::uint64_t seed = 1;
};

struct GenTraceConfig {
  std::filesystem::path rib;
  ZipfOptions zipf;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

struct ValidateConfig {
  std::filesystem::path rib;
  std::filesystem::path trace;
  std::optional<std::filesystem::path> updates;
  PipelineConfig pipeline;
  // Corrupts a cached next hop right before this packet.
  std::optional<std::uint64_t> inject_fault_at;
};

struct GenRibConfig {
  std::size_t routes = 0;
  std::size_t next_hops = 16;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

/// Replays a trace and writes miss_ratios.csv and occupancy.csv to
/// `out_dir`, with a summary on `out`. Nothing is written unless the whole
/// replay succeeds.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_gen_trace(const GenTraceConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateConfig& config, std::ostream& out, std::ostream& err);
int cmd_gen_rib(const GenRibConfig& config, std::ostream& out, std::ostream& err);

/// Builds the trace source described by `zipf` over `rib`.
std::unique_ptr<TraceSource> make_zipf_source(const RibFile& rib, const ZipfOptions& zipf,
                                              std::uint64_t seed);

/// Parses argv and dispatches to the subcommands above.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pfcs::cli
