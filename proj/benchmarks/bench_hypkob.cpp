#include <benchmark/benchmark.h>

#include <memory>

#include "hypkob/config.hpp"

using namespace hypkob;

namespace {

std::shared_ptr<const HeightProjection> ball() {
  static auto p = std::make_shared<const HeightProjection>(make_ball(4));
  return p;
}

std::shared_ptr<const Structure> standard() {
  static auto s = std::make_shared<const StandardStructure>(4);
  return s;
}

std::shared_ptr<const HyperbolicModel> model() {
  static auto m = [] {
    GraphParams p;
    p.n_nodes = 1000;
    return std::make_shared<const HyperbolicModel>(BoundaryGraph::build(ball(), standard(), p));
  }();
  return m;
}

const std::vector<Vec>& points() {
  static const auto pts = sample_points(*ball(), 512, {SamplerKind::BoundaryBiased, 7});
  return pts;
}

}  // namespace

static void BM_Projection(benchmark::State& state) {
  const auto& pts = points();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ball()->project(pts[i]));
    i = (i + 1) % pts.size();
  }
}
BENCHMARK(BM_Projection);

static void BM_GraphBuild(benchmark::State& state) {
  GraphParams p;
  p.n_nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(BoundaryGraph::build(ball(), standard(), p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GraphBuild)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_GValue(benchmark::State& state) {
  auto m = model();
  const auto& pts = points();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m->g_value(pts[i], pts[(i + 1) % pts.size()]));
    i = (i + 2) % pts.size();
  }
}
BENCHMARK(BM_GValue);

static void BM_DValue(benchmark::State& state) {
  auto m = model();
  const auto& pts = points();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m->d_value(pts[i], pts[(i + 1) % pts.size()]));
    i = (i + 2) % pts.size();
  }
}
BENCHMARK(BM_DValue)->Unit(benchmark::kMicrosecond);

static void BM_DMany(benchmark::State& state) {
  auto m = model();
  const auto& pts = points();
  const std::vector<Vec> targets(pts.begin() + 1, pts.begin() + 1 + state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(m->d_many(pts[0], targets));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DMany)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_KobayashiDistance(benchmark::State& state) {
  KobayashiFunctional k(model());
  const auto& pts = points();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k.distance(pts[i], pts[(i + 1) % pts.size()]));
    i = (i + 2) % pts.size();
  }
}
BENCHMARK(BM_KobayashiDistance)->Unit(benchmark::kMicrosecond);

static void BM_FourPointG(benchmark::State& state) {
  GFunctional g(model());
  for (auto _ : state)
    benchmark::DoNotOptimize(four_point_delta(g, points(), state.range(0), 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FourPointG)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ContactAt(benchmark::State& state) {
  const auto dom = make_ball(4);
  const StandardStructure J(4);
  const auto feet = sample_boundary(*dom, 64, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(contact_at(*dom, J, feet[i]));
    i = (i + 1) % feet.size();
  }
}
BENCHMARK(BM_ContactAt)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
