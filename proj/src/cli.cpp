#include "pfcs/cli.hpp"

#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pfcs/errors.hpp"
#include "pfcs/fib_trie.hpp"
#include "pfcs/replay.hpp"

namespace pfcs::cli {

namespace {

// Keeps the population draw off the stream the trace itself uses.
constexpr std::uint64_t kPopulationStream = 0x9E3779B97F4A7C15ULL;

std::vector<TimedUpdate> load_optional_updates(const std::optional<std::filesystem::path>& path,
                                               RibFile& rib) {
  if (!path) return {};
  return load_updates_file(*path, rib.next_hops);
}

void print_summary(std::ostream& out, const Engine& engine) {
  RunSummary s = engine.stats().summary();
  EngineSnapshot snap = engine.snapshot();
  fmt::print(out, "packets: {}\n", s.total_packets);
  fmt::print(out, "tcam_misses: {}\n", s.tcam_misses);
  fmt::print(out, "sram_misses: {}\n", s.sram_misses);
  fmt::print(out, "overall_tcam_miss_ratio: {:.6f}\n", s.overall_tcam_miss_ratio);
  fmt::print(out, "overall_sram_miss_ratio: {:.6f}\n", s.overall_sram_miss_ratio);
  fmt::print(out, "tcam_entries: {}\n", snap.tcam_occupancy);
  fmt::print(out, "sram_entries: {}\n", snap.sram_occupancy);
  fmt::print(out, "generated_total: {}\n", snap.trie.generated_total);
  fmt::print(out, "real_routes: {}\n", snap.trie.real_routes);
}

// Rewrites the next hop of the cached prefix that would serve `dst`, or of
// any cached prefix when none would.
bool inject_fault(Engine& engine, Ipv4Address dst) {
  const CacheEntry* target = engine.tcam().peek(dst);
  if (target == nullptr) target = engine.sram().peek(dst);
  if (target == nullptr && !engine.tcam().entries().empty()) {
    target = &engine.tcam().entries().begin()->second;
  }
  if (target == nullptr && !engine.sram().entries().empty()) {
    target = &engine.sram().entries().begin()->second;
  }
  if (target == nullptr) return false;
  CacheRoute victim = target->route;
  return engine.corrupt_cached_next_hop(victim.prefix, NextHop(victim.next_hop.id() + 1));
}

void report_violation(std::ostream& err, const Violation& v) {
  fmt::print(err, "violation at packet {}: {}\n", v.seq, v.what);
}

}  // namespace

std::unique_ptr<TraceSource> make_zipf_source(const RibFile& rib, const ZipfOptions& zipf,
                                              std::uint64_t seed) {
  ZipfSpec spec{zipf.packets, zipf.skew, seed};
  spec.validate();
  if (zipf.active_routes == 0) return std::make_unique<ZipfTraceSource>(rib, spec);
  auto population =
      sample_active_destinations(rib, zipf.active_routes, seed ^ kPopulationStream);
  return std::make_unique<ZipfTraceSource>(std::move(population), spec);
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.trace.has_value() == config.zipf.has_value()) {
      throw InvalidSpec("give exactly one of --trace or --packets");
    }
    config.pipeline.validate();
    RibFile rib = load_rib_file(config.rib);
    auto updates = load_optional_updates(config.updates, rib);

    std::unique_ptr<TraceSource> trace;
    if (config.trace) {
      trace = std::make_unique<TextTraceSource>(*config.trace);
    } else {
      trace = make_zipf_source(rib, *config.zipf, config.seed);
    }

    Engine engine(FibTrie::build(rib.routes), config.pipeline);
    ReplayOptions options;
    options.check_invariants = config.check_invariants;
    ReplayResult result = replay(engine, *trace, updates, options);
    if (result.violation) {
      report_violation(err, *result.violation);
      return kExitViolation;
    }
    engine.finish();
    engine.stats().write_csv(config.out_dir);
    print_summary(out, engine);
    return kExitOk;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInputError;
  }
}

int cmd_gen_trace(const GenTraceConfig& config, std::ostream& out, std::ostream& err) {
  try {
    RibFile rib = load_rib_file(config.rib);
    auto source = make_zipf_source(rib, config.zipf, config.seed);
    std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError(fmt::format("cannot open {} for writing", config.out.string()));
    write_trace(file, *source);
    file.flush();
    if (!file) throw IoError(fmt::format("write to {} failed", config.out.string()));
    fmt::print(out, "wrote {} packets to {}\n", config.zipf.packets, config.out.string());
    return kExitOk;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInputError;
  }
}

int cmd_validate(const ValidateConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.pipeline.validate();
    RibFile rib = load_rib_file(config.rib);
    auto updates = load_optional_updates(config.updates, rib);
    TextTraceSource trace(config.trace);

    Engine engine(FibTrie::build(rib.routes), config.pipeline);
    LinearScanFib oracle(rib.routes);
    ReplayOptions options;
    options.check_invariants = true;
    options.oracle = &oracle;
    if (config.inject_fault_at) {
      options.before_packet = [at = *config.inject_fault_at](Engine& e, const PacketRecord& p) {
        if (p.seq == at) inject_fault(e, p.dst);
      };
    }
    ReplayResult result = replay(engine, trace, updates, options);
    if (result.violation) {
      report_violation(err, *result.violation);
      return kExitViolation;
    }
    fmt::print(out, "validated {} packets, {} updates: no violations\n", result.packets,
               updates.size());
    return kExitOk;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInputError;
  }
}

int cmd_gen_rib(const GenRibConfig& config, std::ostream& out, std::ostream& err) {
  try {
    RibFile rib = generate_synthetic_rib(config.routes, config.seed, config.next_hops);
    std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError(fmt::format("cannot open {} for writing", config.out.string()));
    write_rib(file, rib);
    file.flush();
    if (!file) throw IoError(fmt::format("write to {} failed", config.out.string()));
    fmt::print(out, "wrote {} routes to {}\n", rib.routes.size(), config.out.string());
    return kExitOk;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInputError;
  }
}

namespace {

void add_pipeline_flags(CLI::App* app, PipelineConfig& p) {
  app->add_option("--tcam", p.tcam_capacity, "TCAM capacity in entries")->capture_default_str();
  app->add_option("--sram", p.sram_capacity, "SRAM capacity in entries")->capture_default_str();
  app->add_option("--victims", p.victim_set_size, "light-hitter victim set size")
      ->capture_default_str();
  app->add_option("--theta", p.promotion_margin, "promotion margin over the lightest TCAM entry")
      ->capture_default_str();
  app->add_option("--epoch", p.aging_epoch, "packets between counter halvings")
      ->capture_default_str();
  app->add_option("--window", p.stats_window, "packets per miss-ratio window")
      ->capture_default_str();
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-tier FIB caching simulator"};
  app.require_subcommand(1);

  RunConfig run;
  std::optional<std::uint64_t> run_packets;
  double run_skew = 1.0;
  std::size_t run_active = 0;
  auto* run_cmd = app.add_subcommand("run", "replay a trace and write miss-ratio and occupancy CSVs");
  run_cmd->add_option("--rib", run.rib, "route file")->required();
  run_cmd->add_option("--trace", run.trace, "destination trace file");
  run_cmd->add_option("--updates", run.updates, "route update sidecar file");
  run_cmd->add_option("--packets", run_packets, "generate a Zipf trace of this many packets");
  run_cmd->add_option("--zipf-s", run_skew, "Zipf exponent")->capture_default_str();
  run_cmd->add_option("--active-routes", run_active,
                      "draw Zipf traffic from this many random routes (0: all)")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "seed for all randomness")->capture_default_str();
  run_cmd->add_option("--out", run.out_dir, "output directory")->capture_default_str();
  run_cmd->add_flag("--check-invariants", run.check_invariants,
                    "verify engine invariants after every packet");
  add_pipeline_flags(run_cmd, run.pipeline);

  GenTraceConfig gen;
  auto* gen_cmd = app.add_subcommand("gen-trace", "write a seeded Zipf trace");
  gen_cmd->add_option("--rib", gen.rib, "route file")->required();
  gen_cmd->add_option("--packets", gen.zipf.packets, "number of packets")->required();
  gen_cmd->add_option("--zipf-s", gen.zipf.skew, "Zipf exponent")->capture_default_str();
  gen_cmd->add_option("--active-routes", gen.zipf.active_routes,
                      "draw from this many random routes (0: all)")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "trace file to write")->required();

  ValidateConfig val;
  auto* val_cmd = app.add_subcommand(
      "validate", "replay with per-packet oracle and invariant checks (exit 2 on violation)");
  val_cmd->add_option("--rib", val.rib, "route file")->required();
  val_cmd->add_option("--trace", val.trace, "destination trace file")->required();
  val_cmd->add_option("--updates", val.updates, "route update sidecar file");
  val_cmd->add_option("--inject-fault", val.inject_fault_at)->group("");
  add_pipeline_flags(val_cmd, val.pipeline);

  GenRibConfig rib;
  auto* rib_cmd = app.add_subcommand("gen-rib", "write a synthetic route file");
  rib_cmd->add_option("--routes", rib.routes, "number of distinct routes")->required();
  rib_cmd->add_option("--next-hops", rib.next_hops, "number of next hops")->capture_default_str();
  rib_cmd->add_option("--seed", rib.seed, "seed")->capture_default_str();
  rib_cmd->add_option("--out", rib.out, "route file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  if (run_cmd->parsed()) {
    if (run_packets) run.zipf = ZipfOptions{*run_packets, run_skew, run_active};
    return cmd_run(run, out, err);
  }
  if (gen_cmd->parsed()) return cmd_gen_trace(gen, out, err);
  if (val_cmd->parsed()) return cmd_validate(val, out, err);
  return cmd_gen_rib(rib, out, err);
}

}  // namespace pfcs::cli
