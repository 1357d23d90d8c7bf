#include <benchmark/benchmark.h>

#include "fwlab/coefficients.hpp"
#include "fwlab/diophantine.hpp"
#include "fwlab/graph_limit.hpp"
#include "fwlab/sde.hpp"
#include "fwlab/topology.hpp"

using namespace fwlab;

namespace {

const FlowTopology& topo() {
  static const FlowTopology t = build_topology(cfg_a());
  return t;
}

const std::vector<EdgeCoefficients>& coeffs() {
  static const std::vector<EdgeCoefficients> c = [] {
    std::vector<EdgeCoefficients> v;
    for (const auto& comp : topo().components) v.push_back(tabulate_edge(topo(), comp.k));
    return v;
  }();
  return c;
}

}  // namespace

static void BM_FieldHGrad(benchmark::State& st) {
  const StreamFunction sf = cfg_a();
  Vec2 p{0.1, 0.2}, g;
  for (auto _ : st) {
    benchmark::DoNotOptimize(sf.H_grad(p, g));
    p.x += 1e-7;
  }
}
BENCHMARK(BM_FieldHGrad);

static void BM_Locate(benchmark::State& st) {
  const FlowTopology& t = topo();
  double s = 0.0;
  for (auto _ : st) {
    s += 0.618034;
    benchmark::DoNotOptimize(t.locate({s - std::floor(s), 0.37 * s - std::floor(0.37 * s)}));
  }
}
BENCHMARK(BM_Locate);

static void BM_SdeStep(benchmark::State& st) {
  SimConfig c;
  c.epsilon = 0.01;
  c.drift = st.range(0) ? DriftScheme::RK4 : DriftScheme::Euler;
  const Integrator in(*topo().sf, c);
  const PhiloxStream rng(1, 0);
  PathState s = in.make_state({0.2, 0.7});
  for (auto _ : st) in.step(s, rng);
  st.SetLabel(st.range(0) ? "rk4" : "euler");
}
BENCHMARK(BM_SdeStep)->Arg(0)->Arg(1);

static void BM_EdgeCoeffs(benchmark::State& st) {
  const double h = 0.5 * topo().components[0].h_range;
  for (auto _ : st) benchmark::DoNotOptimize(edge_coeffs(topo(), 0, h));
}
BENCHMARK(BM_EdgeCoeffs)->Unit(benchmark::kMillisecond);

static void BM_ExpandGolden(benchmark::State& st) {
  const RationalInterval rho = golden_interval(200);
  for (auto _ : st) benchmark::DoNotOptimize(expand(rho, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_ExpandGolden)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

static void BM_HittingN(benchmark::State& st) {
  const double rho = golden_interval().mid();
  for (auto _ : st) benchmark::DoNotOptimize(max_hitting_N(rho, 1e-6, 1000, 1));
}
BENCHMARK(BM_HittingN)->Unit(benchmark::kMillisecond);

static void BM_ChainSimulate(benchmark::State& st) {
  const ReebGraph g = build_graph(topo(), coeffs());
  const StickyChain ch = build_chain(g, coeffs(), 1e-3);
  ChainSimOptions o;
  o.threads = 1;
  o.pieces = 1;
  std::int64_t jumps = 0;
  for (auto _ : st) jumps += simulate_chain(ch, 1000 * ch.vertex_holding(), 7, o).jumps;
  st.SetItemsProcessed(jumps);
}
BENCHMARK(BM_ChainSimulate)->Unit(benchmark::kMillisecond);

static void BM_ChainMeanHitting(benchmark::State& st) {
  const ReebGraph g = build_graph(topo(), coeffs());
  ChainOptions o;
  o.knot = 0.026;
  const StickyChain ch = build_chain(g, coeffs(), 1.0 / st.range(0), o);
  for (auto _ : st) benchmark::DoNotOptimize(chain_mean_hitting(ch, 0.026));
}
BENCHMARK(BM_ChainMeanHitting)->Arg(1000)->Arg(16000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
