#include <benchmark/benchmark.h>

#include "mlspec/driver.hpp"
#include "mlspec/surface.hpp"
#include "mlspec/typing.hpp"

using namespace mlspec;

namespace {

const std::string& corpus(const std::string& file) {
  for (const auto& src : driver::bench_corpus())
    if (src.file == file) return src.text;
  throw std::runtime_error("missing bench source " + file);
}

void BM_Compile(benchmark::State& state, driver::Mode mode) {
  const std::string& poly = corpus("poly.mx");
  auto iface = typing::parse_interface(corpus("poly.mxi"));
  const std::string& simple = corpus("simple.mx");
  for (auto _ : state) {
    driver::Session s;
    s.compile_and_add(poly, "Poly", iface, {mode, {}});
    benchmark::DoNotOptimize(s.compile(simple, "Simple", std::nullopt, {mode, {}}));
  }
}

// Evaluation runs on its own thread, so these report wall time.
void BM_Run(benchmark::State& state, const std::string& bench, driver::Mode mode) {
  std::int64_t scale = state.range(0);
  std::uint64_t accesses = 0;
  for (auto _ : state) accesses += driver::run_bench(bench, scale, mode).stats.all();
  state.counters["accesses/s"] = benchmark::Counter(static_cast<double>(accesses), benchmark::Counter::kIsRate);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Compile, none, driver::Mode::None);
BENCHMARK_CAPTURE(BM_Compile, full, driver::Mode::Full);
BENCHMARK_CAPTURE(BM_Run, simple_none, std::string("simple"), driver::Mode::None)->Arg(10000)->UseRealTime();
BENCHMARK_CAPTURE(BM_Run, simple_full, std::string("simple"), driver::Mode::Full)->Arg(10000)->UseRealTime();
BENCHMARK_CAPTURE(BM_Run, random_none, std::string("random"), driver::Mode::None)->Arg(10000)->UseRealTime();
BENCHMARK_CAPTURE(BM_Run, random_full, std::string("random"), driver::Mode::Full)->Arg(10000)->UseRealTime();
BENCHMARK_CAPTURE(BM_Run, rec_residual_full, std::string("rec_residual"), driver::Mode::Full)->Arg(10000)->UseRealTime();

BENCHMARK_MAIN();
