// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "pfcs/cli.hpp"
#include "pfcs/errors.hpp"
#include "pfcs/pipeline.hpp"
#include "pfcs/trace_io.hpp"

namespace fs = std::filesystem;
using namespace pfcs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Flat mask-and-compare scan over the current table. Rebuilt from the
// route map after every update.
class ScanOracle {
 public:
  explicit ScanOracle(const std::vector<Route>& routes) {
    for (const auto& r : routes) table_[{r.prefix.address().value(), r.prefix.length()}] = r.next_hop;
    rebuild();
  }

  void insert(const Prefix& p, NextHop nh) {
    table_[{p.address().value(), p.length()}] = nh;
    rebuild();
  }

  bool withdraw(const Prefix& p) {
    bool found = table_.erase({p.address().value(), p.length()}) > 0;
    rebuild();
    return found;
  }

  bool has(const Prefix& p) const { return table_.count({p.address().value(), p.length()}) > 0; }

  std::vector<Prefix> prefixes() const {
    std::vector<Prefix> out;
    for (const auto& [key, nh] : table_) out.push_back(prefix_of(Ipv4Address(key.first), key.second));
    return out;
  }

  std::optional<NextHop> lookup(std::uint32_t a) const {
    int best = -1;
    std::size_t at = 0;
    for (std::size_t i = 0; i < nets_.size(); ++i) {
      int score = ((a & masks_[i]) == nets_[i]) ? lens_[i] : -1;
      if (score > best) {
        best = score;
        at = i;
      }
    }
    if (best < 0) return std::nullopt;
    return hops_[at];
  }

 private:
  void rebuild() {
    nets_.clear();
    masks_.clear();
    lens_.clear();
    hops_.clear();
    for (const auto& [key, nh] : table_) {
      std::uint32_t mask = key.second == 0 ? 0 : ~std::uint32_t{0} << (32 - key.second);
      nets_.push_back(key.first);
      masks_.push_back(mask);
      lens_.push_back(static_cast<int>(key.second));
      hops_.push_back(nh);
    }
  }

  std::map<std::pair<std::uint32_t, unsigned>, NextHop> table_;
  std::vector<std::uint32_t> nets_;
  std::vector<std::uint32_t> masks_;
  std::vector<int> lens_;
  std::vector<NextHop> hops_;
};

// 100 updates at random packet positions: inserts of more-specifics of
// existing routes or of fresh /16-/24 blocks, and withdrawals of existing
// non-default routes.
std::vector<TimedUpdate> random_updates(const RibFile& rib, std::uint64_t seed, std::size_t count,
                                        std::uint64_t packets) {
  Rng rng(seed);
  ScanOracle table(rib.routes);
  std::vector<std::uint64_t> positions;
  for (std::size_t i = 0; i < count; ++i) positions.push_back(1 + uniform_below(rng, packets));
  std::sort(positions.begin(), positions.end());

  std::vector<TimedUpdate> out;
  for (std::uint64_t seq : positions) {
    auto existing = table.prefixes();
    NextHop hop(static_cast<std::uint32_t>(uniform_below(rng, rib.next_hops.size())));
    auto kind = uniform_below(rng, 3);
    if (kind == 0 && existing.size() > 1) {
      Prefix victim = existing[uniform_below(rng, existing.size())];
      while (victim.length() == 0) victim = existing[uniform_below(rng, existing.size())];
      table.withdraw(victim);
      out.push_back({seq, WithdrawRoute{victim}});
    } else if (kind == 1) {
      Prefix parent = existing[uniform_below(rng, existing.size())];
      unsigned len = std::min(32U, parent.length() + 1 + static_cast<unsigned>(uniform_below(rng, 8)));
      auto host = static_cast<std::uint32_t>(rng()) & ~prefix_mask(parent.length());
      Prefix p = prefix_of(Ipv4Address(parent.first() | host), len);
      table.insert(p, hop);
      out.push_back({seq, InsertRoute{p, hop}});
    } else {
      auto bits = (static_cast<std::uint32_t>(1 + uniform_below(rng, 223)) << 24) |
                  (static_cast<std::uint32_t>(rng()) & 0x00FFFFFFU);
      Prefix p = prefix_of(Ipv4Address(bits), 16 + static_cast<unsigned>(uniform_below(rng, 9)));
      table.insert(p, hop);
      out.push_back({seq, InsertRoute{p, hop}});
    }
  }
  return out;
}

struct OracleRunTotals {
  std::uint64_t packets = 0;
  std::uint64_t updates = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t invariant_violations = 0;
  std::uint64_t tcam_evictions = 0;
  std::uint64_t sram_evictions = 0;
  std::string first_mismatch;
  std::string first_violation;
};

void oracle_run(std::uint64_t seed, OracleRunTotals& totals) {
  constexpr std::uint64_t kPackets = 100'000;
  RibFile rib = generate_synthetic_rib(1000, seed);
  auto updates = random_updates(rib, seed * 7919 + 1, 100, kPackets);
  ZipfTraceSource trace(rib, ZipfSpec{kPackets, 1.0, seed});

  PipelineConfig config;
  config.tcam_capacity = 64;
  config.sram_capacity = 128;
  Engine engine(FibTrie::build(rib.routes), config);
  ScanOracle oracle(rib.routes);

  auto note_violation = [&](std::uint64_t seq) {
    if (auto v = engine.check_invariants()) {
      if (totals.invariant_violations++ == 0) {
        totals.first_violation = fmt::format("seed {} packet {}: {}", seed, seq, *v);
      }
    }
  };

  std::size_t next_update = 0;
  while (auto packet = trace.next()) {
    while (next_update < updates.size() && updates[next_update].before_seq <= packet->seq) {
      const FibUpdate& u = updates[next_update++].update;
      engine.apply_fib_update(u);
      if (const auto* ins = std::get_if<InsertRoute>(&u)) {
        oracle.insert(ins->prefix, ins->next_hop);
      } else {
        oracle.withdraw(std::get<WithdrawRoute>(u).prefix);
      }
      ++totals.updates;
      note_violation(packet->seq);
    }

    ForwardingOutcome out = engine.process_packet(*packet);
    auto expected = oracle.lookup(packet->dst.value());
    if (out.next_hop != expected) {
      if (totals.mismatches++ == 0) {
        totals.first_mismatch = fmt::format("seed {} packet {} dst {}", seed, packet->seq,
                                            to_string(packet->dst));
      }
    }
    for (const auto& e : out.evictions) {
      ++(e.tier == TierKind::Tcam ? totals.tcam_evictions : totals.sram_evictions);
    }
    note_violation(packet->seq);
    ++totals.packets;
  }
}

struct Csv {
  std::vector<std::vector<std::string>> rows;  // header excluded
  std::string header;
};

Csv read_csv(const fs::path& path) {
  Csv csv;
  std::ifstream in(path);
  std::getline(in, csv.header);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::istringstream s(line);
    for (std::string f; std::getline(s, f, ',');) fields.push_back(f);
    csv.rows.push_back(fields);
  }
  return csv;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"pfcs"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "pfcs exited %d: %s", code, err.str().c_str());
  return code;
}

// Shared setup for criteria 3, 4 and 6.
struct ScaledRun {
  static constexpr std::size_t kRoutes = 100'000;
  // About 3.9% of the table carries traffic.
  static constexpr std::size_t kActive = 3'930;
  static constexpr std::uint64_t kPackets = 1'000'000;
  static constexpr std::uint64_t kWarmup = 100'000;
  static constexpr std::uint64_t kSeed = 2024;

  fs::path dir;
  fs::path rib_path;

  ScaledRun() : dir(fs::temp_directory_path() / "pfcs_acceptance") {
    fs::remove_all(dir);
    fs::create_directories(dir);
    rib_path = dir / "rib.txt";
    std::ofstream out(rib_path);
    write_rib(out, generate_synthetic_rib(kRoutes, kSeed));
  }
  ~ScaledRun() { fs::remove_all(dir); }

  std::vector<std::string> args(const fs::path& out_dir) const {
    return {"run",      "--rib",          rib_path.string(),        "--packets",
            std::to_string(kPackets),     "--zipf-s",               "1.0",
            "--active-routes",            std::to_string(kActive),  "--seed",
            std::to_string(kSeed),        "--tcam",                 "10000",
            "--sram",   "20000",          "--window",               "100000",
            "--out",    out_dir.string()};
  }
};

Outcome criteria_1_and_2(Outcome& second) {
  auto start = Clock::now();
  OracleRunTotals totals;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) oracle_run(seed, totals);
  double elapsed = seconds_since(start);

  Outcome first;
  first.pass = totals.mismatches == 0 && totals.packets == 5'000'000 && elapsed < 120.0;
  first.detail = fmt::format(
      "50 runs, {} packets, {} updates, {} mismatches vs scan oracle, {} TCAM / {} SRAM "
      "evictions, {:.1f}s",
      totals.packets, totals.updates, totals.mismatches, totals.tcam_evictions,
      totals.sram_evictions, elapsed);
  if (totals.mismatches) first.detail += "; first: " + totals.first_mismatch;

  second.pass = totals.invariant_violations == 0;
  second.detail = fmt::format("invariants checked after {} packets and {} updates, {} violations",
                              totals.packets, totals.updates, totals.invariant_violations);
  if (totals.invariant_violations) second.detail += "; first: " + totals.first_violation;

  // The CLI flag path over a few of the same workloads.
  int cli_failures = 0;
  fs::path dir = fs::temp_directory_path() / "pfcs_acceptance_c2";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RibFile rib = generate_synthetic_rib(1000, seed);
    auto updates = random_updates(rib, seed * 7919 + 1, 100, 100'000);
    ZipfTraceSource trace(rib, ZipfSpec{100'000, 1.0, seed});
    {
      std::ofstream r(dir / "rib.txt"), t(dir / "trace.txt"), u(dir / "updates.txt");
      write_rib(r, rib);
      write_trace(t, trace);
      write_updates(u, updates, rib.next_hops);
    }
    int code = run_cli({"run", "--rib", (dir / "rib.txt").string(), "--trace",
                        (dir / "trace.txt").string(), "--updates", (dir / "updates.txt").string(),
                        "--tcam", "64", "--sram", "128", "--check-invariants", "--out",
                        (dir / "out").string()});
    cli_failures += code != 0;
  }
  fs::remove_all(dir);
  second.pass = second.pass && cli_failures == 0;
  second.detail += fmt::format("; run --check-invariants exit 0 on {}/3 replays", 3 - cli_failures);
  return first;
}

struct ScaledResults {
  Outcome c3, c4, c6;
};

ScaledResults criteria_3_4_6() {
  ScaledResults r;
  ScaledRun run;

  auto start = Clock::now();
  int code_a = run_cli(run.args(run.dir / "a"));
  double elapsed = seconds_since(start);
  int code_b = run_cli(run.args(run.dir / "b"));
  if (code_a != 0 || code_b != 0) {
    r.c3 = r.c4 = r.c6 = {false, fmt::format("run exited {} / {}", code_a, code_b)};
    return r;
  }

  // Criterion 3: post-warmup windows.
  Csv ratios = read_csv(run.dir / "a" / "miss_ratios.csv");
  double worst_tcam = 0.0, worst_sram = 0.0;
  std::uint64_t post_packets = 0, post_tcam = 0, post_sram = 0, windows = 0;
  bool windows_ok = true;
  std::uint64_t seen = 0;
  for (const auto& row : ratios.rows) {
    std::uint64_t packets = std::stoull(row[1]);
    seen += packets;
    if (seen <= ScaledRun::kWarmup) continue;
    std::uint64_t tcam = std::stoull(row[2]);
    std::uint64_t sram = std::stoull(row[3]);
    double tr = static_cast<double>(tcam) / static_cast<double>(packets);
    double sr = static_cast<double>(sram) / static_cast<double>(packets);
    worst_tcam = std::max(worst_tcam, tr);
    worst_sram = std::max(worst_sram, sr);
    windows_ok = windows_ok && tr < 0.02 && sr < 0.005;
    post_packets += packets;
    post_tcam += tcam;
    post_sram += sram;
    ++windows;
  }
  bool ratio_ok = 5 * post_sram <= post_tcam;
  r.c3.pass = windows_ok && ratio_ok && windows == 9 && elapsed < 60.0;
  r.c3.detail = fmt::format(
      "{} post-warmup windows, worst tcam {:.6f} (<0.02), worst sram {:.6f} (<0.005), "
      "overall post-warmup tcam {:.6f} sram {:.6f} (sram <= tcam/5: {}), {:.1f}s",
      windows, worst_tcam, worst_sram,
      static_cast<double>(post_tcam) / static_cast<double>(std::max<std::uint64_t>(post_packets, 1)),
      static_cast<double>(post_sram) / static_cast<double>(std::max<std::uint64_t>(post_packets, 1)),
      ratio_ok ? "yes" : "no", elapsed);

  // Criterion 4: occupancy samples (one per window).
  Csv occ = read_csv(run.dir / "a" / "occupancy.csv");
  bool warm_monotone = true;
  std::size_t prev_t = 0, prev_s = 0, warm_samples = 0;
  for (const auto& row : occ.rows) {
    if (std::stoull(row[0]) > ScaledRun::kWarmup) break;
    std::size_t t = std::stoull(row[1]), s = std::stoull(row[2]);
    warm_monotone = warm_monotone && t >= prev_t && s >= prev_s;
    prev_t = t;
    prev_s = s;
    ++warm_samples;
  }
  std::size_t final_t = std::stoull(occ.rows.back()[1]);
  std::size_t final_s = std::stoull(occ.rows.back()[2]);

  // Finer view of the warmup for the report: the same trace replayed with a
  // snapshot every 10,000 packets.
  std::string fine;
  bool fine_tcam_monotone = true, fine_sram_monotone = true;
  {
    std::size_t last_t = 0, last_s = 0;
    RibFile rib = load_rib_file(run.rib_path);
    auto source = cli::make_zipf_source(
        rib, cli::ZipfOptions{ScaledRun::kWarmup, 1.0, ScaledRun::kActive}, ScaledRun::kSeed);
    Engine engine(FibTrie::build(rib.routes), PipelineConfig{});
    while (auto p = source->next()) {
      engine.process_packet(*p);
      if (p->seq % 10'000 == 0) {
        auto snap = engine.snapshot();
        fine_tcam_monotone = fine_tcam_monotone && snap.tcam_occupancy >= last_t;
        fine_sram_monotone = fine_sram_monotone && snap.sram_occupancy >= last_s;
        last_t = snap.tcam_occupancy;
        last_s = snap.sram_occupancy;
        fine += fmt::format("{}{}/{}", fine.empty() ? "" : " ", snap.tcam_occupancy,
                            snap.sram_occupancy);
      }
    }
  }

  r.c4.pass = warm_monotone && warm_samples >= 1 && final_t < 10'000 && final_s < 20'000;
  r.c4.detail = fmt::format(
      "final tcam {} (<10000), sram {} (<20000); warmup samples non-decreasing: {} ({} sample); "
      "informational, every 10K warmup packets tcam/sram = {} (tcam non-decreasing: {}, sram "
      "non-decreasing: {})",
      final_t, final_s, warm_monotone ? "yes" : "no", warm_samples, fine,
      fine_tcam_monotone ? "yes" : "no", fine_sram_monotone ? "yes" : "no");

  // Criterion 6: byte-identical outputs.
  bool same_ratios = slurp(run.dir / "a" / "miss_ratios.csv") == slurp(run.dir / "b" / "miss_ratios.csv");
  bool same_occ = slurp(run.dir / "a" / "occupancy.csv") == slurp(run.dir / "b" / "occupancy.csv");
  r.c6.pass = same_ratios && same_occ && !ratios.rows.empty();
  r.c6.detail = fmt::format("miss_ratios.csv identical: {}, occupancy.csv identical: {}",
                            same_ratios ? "yes" : "no", same_occ ? "yes" : "no");
  return r;
}

Outcome criterion_5() {
  const NextHop A{0}, B{1}, C{2};
  std::vector<Route> fib{{parse_prefix("0.0.0.0/0"), A},
                         {parse_prefix("10.0.0.0/8"), B},
                         {parse_prefix("10.1.0.0/16"), C}};
  PipelineConfig config;
  config.tcam_capacity = 1;
  config.sram_capacity = 1;
  config.victim_set_size = 1;
  config.promotion_margin = 0;
  Engine engine(FibTrie::build(fib), config);

  const Prefix p15 = parse_prefix("10.2.0.0/15");
  auto o1 = engine.process_packet({1, parse_address("10.2.3.4")});
  bool ok1 = o1.served_by == ServedBy::Dram && o1.next_hop == B &&
             o1.installed == CacheRoute{p15, B} && !o1.promoted && o1.evictions.empty();
  auto o2 = engine.process_packet({2, parse_address("10.3.0.1")});
  auto snap2 = engine.snapshot();
  bool ok2 = o2.served_by == ServedBy::Sram && o2.next_hop == B && o2.promoted == p15 &&
             !o2.installed && snap2.tcam_occupancy == 1 && snap2.sram_occupancy == 0;
  auto o3 = engine.process_packet({3, parse_address("10.2.9.9")});
  bool ok3 = o3.served_by == ServedBy::Tcam && o3.next_hop == B && !o3.installed && !o3.promoted;
  RunSummary s = engine.stats().summary();
  bool ok_ratios = fmt::format("{:.6f}/{:.6f}", s.overall_tcam_miss_ratio,
                               s.overall_sram_miss_ratio) == "0.666667/0.333333";

  return {ok1 && ok2 && ok3 && ok_ratios,
          fmt::format("served_by [{}, {}, {}], install 10.2.0.0/15 on packet 1: {}, promotion on "
                      "packet 2 with tcam 1 / sram 0: {}, miss ratios {:.6f}/{:.6f}",
                      to_string(o1.served_by), to_string(o2.served_by), to_string(o3.served_by),
                      ok1 ? "yes" : "no", ok2 ? "yes" : "no", s.overall_tcam_miss_ratio,
                      s.overall_sram_miss_ratio)};
}

Outcome criterion_7() {
  constexpr std::uint64_t kPackets = 100'000;
  constexpr std::size_t kRoutes = 1000;
  RibFile rib = generate_synthetic_rib(kRoutes, 7);
  bool pass = true;
  std::string detail;
  for (double s : {0.8, 1.0, 1.2}) {
    ZipfTraceSource source(rib, ZipfSpec{kPackets, s, 99});
    std::vector<std::uint64_t> counts(11, 0);
    while (auto d = source.next_draw()) {
      if (d->rank <= 10) ++counts[d->rank];
    }
    double h = 0.0;
    for (std::size_t r = 1; r <= kRoutes; ++r) h += std::pow(static_cast<double>(r), -s);
    double worst = 0.0;
    for (std::size_t r = 1; r <= 10; ++r) {
      double expected = std::pow(static_cast<double>(r), -s) / h * kPackets;
      worst = std::max(worst, std::abs(static_cast<double>(counts[r]) - expected) / expected);
    }
    pass = pass && worst <= 0.2;
    detail += fmt::format("{}s={}: worst rank 1-10 deviation {:.1f}%", detail.empty() ? "" : ", ",
                          s, worst * 100);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  std::map<int, Outcome> results;

  auto guard = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("threw: ") + e.what()};
    }
  };

  Outcome c2;
  results[1] = guard([&] { return criteria_1_and_2(c2); });
  results[2] = c2;
  ScaledResults scaled;
  try {
    scaled = criteria_3_4_6();
  } catch (const std::exception& e) {
    scaled.c3 = scaled.c4 = scaled.c6 = {false, std::string("threw: ") + e.what()};
  }
  results[3] = scaled.c3;
  results[4] = scaled.c4;
  results[5] = guard(criterion_5);
  results[6] = scaled.c6;
  results[7] = guard(criterion_7);

  static const char* kNames[] = {"",
                                 "forwarding equivalence",
                                 "invariant suite",
                                 "skew benefit",
                                 "occupancy plateau",
                                 "worked example",
                                 "determinism",
                                 "generator fidelity"};
  int failures = 0;
  for (const auto& [id, outcome] : results) {
    std::printf("criterion %d %s: %s - %s\n", id, kNames[id], outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    failures += !outcome.pass;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
