#include "kontext/bench.hpp"

#include "kontext/layerstate.hpp"
#include "kontext/shim.hpp"
#include "kontext/specfile.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace kontext::bench {

namespace {

using Clock = std::chrono::steady_clock;

volatile std::uintptr_t g_sink = 0;

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    const char* tmp = std::getenv("TMPDIR");
    std::string pattern = std::string(tmp && *tmp ? tmp : "/tmp") + "/kontext-bench-XXXXXX";
    if (!::mkdtemp(pattern.data()))
      throw std::runtime_error("cannot create scratch directory");
    path = pattern;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

double median(std::vector<double> values) {
  if (values.empty())
    return 0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

struct Timing {
  std::vector<double> per_call_ns;  // one entry per block
  double total_ns = 0;
};

// Times `call` over `iterations` calls in blocks; `before_block(start, end)`
// runs untimed ahead of each block.
template <typename Call, typename BeforeBlock>
Timing time_blocks(std::size_t iterations, Call&& call, BeforeBlock&& before_block) {
  Timing timing;
  std::uintptr_t sink = 0;
  for (std::size_t start = 0; start < iterations; start += kBlockSize) {
    const auto end = std::min(iterations, start + kBlockSize);
    before_block(start, end);
    const auto t0 = Clock::now();
    for (std::size_t i = start; i < end; ++i)
      sink += reinterpret_cast<std::uintptr_t>(call());
    const auto t1 = Clock::now();
    const double ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
    timing.total_ns += ns;
    timing.per_call_ns.push_back(ns / static_cast<double>(end - start));
  }
  g_sink = g_sink + sink;
  return timing;
}

char* plain_getenv(const char* name) { return std::getenv(name); }

}  // namespace

BenchReport run_bench(const BenchOptions& options) {
  if (options.iterations < kMinIterations)
    throw std::invalid_argument("bench needs at least " + std::to_string(kMinIterations) +
                                " iterations");

  const auto spec = load_spec(options.spec_path).keyset;
  BenchReport report;
  report.iterations = options.iterations;

  const auto root = KeyName::parse(shim::kGetenvRoot);
  if (options.name) {
    report.name = *options.name;
  } else {
    for (const auto& key : spec.below(root)) {
      if (key.name().segments().size() == 2) {
        report.name = key.name().segments()[1];
        break;
      }
    }
    if (report.name.empty())
      report.name = "KONTEXT_BENCH_UNMANAGED";
  }

  report.layer = "bench";
  if (KeyName::valid_segment(report.name)) {
    if (const auto* key = spec.get(root.child(report.name))) {
      report.managed = true;
      if (const auto context = key->meta(kContextProperty)) {
        try {
          const auto layers = Template::parse(*context).layers();
          if (!layers.empty())
            report.layer = layers.front();
        } catch (const TemplateError&) {
        }
      }
    }
  }

  ScratchDir scratch;
  const auto state_path = (scratch.path / "state.ks").string();
  state_write(state_path, state_read(options.state_path));

  shim::ShimConfig config;
  config.spec_path = options.spec_path;
  config.state_path = state_path;
  config.shadow_dir = (scratch.path / "shadow").string();
  shim::Engine engine(config, &plain_getenv);
  engine.ensure_initialized();
  if (engine.mode() != shim::Mode::Active)
    throw std::runtime_error("spec '" + options.spec_path + "' could not be loaded");

  const char* name = report.name.c_str();
  auto no_setup = [](std::size_t, std::size_t) {};

  // Warm-up fills caches on both paths.
  g_sink = g_sink + reinterpret_cast<std::uintptr_t>(std::getenv(name));
  g_sink = g_sink + reinterpret_cast<std::uintptr_t>(engine.getenv(name));

  const auto baseline = time_blocks(options.iterations, [&] { return std::getenv(name); }, no_setup);

  const auto reloads_before = engine.counters().reloads;
  const auto steady = time_blocks(options.iterations, [&] { return engine.getenv(name); }, no_setup);
  report.steady_reloads = engine.counters().reloads - reloads_before;

  const auto changes = std::min(options.changes, options.iterations);
  std::size_t next_change = 0;
  std::size_t injected = 0;
  auto inject = [&](std::size_t, std::size_t end) {
    while (injected < changes && next_change < end) {
      state_set_layer(state_path, report.layer, injected % 2 == 0 ? "bench-a" : "bench-b");
      ++injected;
      next_change = injected * options.iterations / changes;
    }
  };
  const auto reloads_mid = engine.counters().reloads;
  const auto changing = time_blocks(options.iterations, [&] { return engine.getenv(name); }, inject);
  report.reload_count = engine.counters().reloads - reloads_mid;
  report.injected_changes = injected;

  report.baseline_ns_per_call = median(baseline.per_call_ns);
  report.shimmed_ns_per_call = median(steady.per_call_ns);
  report.changing_ns_per_call = median(changing.per_call_ns);
  report.overhead_ratio = report.baseline_ns_per_call > 0
                              ? report.shimmed_ns_per_call / report.baseline_ns_per_call
                              : 0;
  report.shimmed_total_ms = steady.total_ns / 1e6;
  return report;
}

std::string to_json(const BenchReport& r) {
  const nlohmann::json j = {
      {"iterations", r.iterations},
      {"name", r.name},
      {"managed", r.managed},
      {"layer", r.layer},
      {"baseline_ns_per_call", r.baseline_ns_per_call},
      {"shimmed_ns_per_call", r.shimmed_ns_per_call},
      {"changing_ns_per_call", r.changing_ns_per_call},
      {"overhead_ratio", r.overhead_ratio},
      {"steady_reloads", r.steady_reloads},
      {"reload_count", r.reload_count},
      {"injected_changes", r.injected_changes},
      {"shimmed_total_ms", r.shimmed_total_ms},
  };
  return j.dump();
}

}  // namespace kontext::bench
