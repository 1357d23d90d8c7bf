#include "fwlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>

#include "fwlab/coefficients.hpp"
#include "fwlab/diophantine.hpp"
#include "fwlab/graph_limit.hpp"
#include "report_io.hpp"

namespace fwlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double clock_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::uint64_t suite_seed(const ExperimentConfig& cfg, const std::string& suite) {
  return fnv1a64(suite + ":" + std::to_string(cfg.seed));
}

std::string scale_tag(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "@s%g", s);
  return buf;
}

struct Context {
  const ExperimentConfig& cfg;
  std::string dir;
  std::string hash;
  RunSummary summary;
  json timings = json::object();
  io::Csv sde{{"statistic", "epsilon", "alpha", "mean", "stderr", "n", "seed", "config_hash"}};
  io::Csv graph{{"statistic", "epsilon", "alpha", "mean", "stderr", "n", "seed", "config_hash"}};
  bool sde_rows = false, graph_rows = false;
  std::vector<json> skipped;

  std::optional<FlowTopology> topo;
  std::vector<EdgeCoefficients> coeffs;
  std::optional<ReebGraph> rg;

  Context(const ExperimentConfig& c, std::string d, std::string h) : cfg(c), dir(std::move(d)), hash(std::move(h)) {}

  void emit(const std::string& name, const std::string& text) {
    io::write((fs::path(dir) / name).string(), text);
    summary.files.push_back(name);
  }
  void stat(io::Csv& csv, const std::string& name, double eps, double alpha, double mean, double se, std::int64_t n,
            std::uint64_t seed) {
    csv.row({name, io::num(eps), io::num(alpha), io::num(mean), io::num(se), std::to_string(n), std::to_string(seed),
             hash});
  }
  void skip(const std::string& suite, double eps, double scale, const std::string& reason) {
    skipped.push_back({{"suite", suite}, {"epsilon", eps}, {"level_scale", scale}, {"reason", reason}});
    char e[32];
    std::snprintf(e, sizeof e, "%g", eps);
    summary.skipped.push_back(suite + "@" + e + ": " + reason);
  }
  json stamp() const { return {{"config_hash", hash}, {"seed", cfg.seed}}; }

  SimConfig sim(double eps, std::int64_t n_paths, const std::string& suite) const {
    SimConfig s;
    s.epsilon = eps;
    s.alpha = cfg.alpha;
    s.dt = cfg.sde.dt;
    s.n_paths = n_paths;
    s.seed = suite_seed(cfg, suite);
    s.burn_in = cfg.sde.burn_in;
    s.level_scale = cfg.sde.level_scale;
    s.max_leg_time = cfg.sde.max_leg_time;
    s.drift = cfg.sde.drift;
    s.threads = cfg.threads;
    // dt = 0 means dt_max; an explicit dt above dt_max(eps) is clamped per eps
    if (s.dt > 0 && eps > 0) s.dt = std::min(s.dt, s.dt_max());
    return s;
  }
};

template <class F>
void timed(Context& cx, const std::string& suite, F&& f) {
  const double t0 = clock_s();
  try {
    f();
  } catch (const Error& e) {
    throw Error(e.kind(), suite + ": " + e.what());
  }
  cx.timings[suite] = clock_s() - t0;
}

json topology_json(const FlowTopology& t) {
  json j;
  j["ergodic_area"] = t.ergodic_area;
  j["grid_n"] = t.grid_n;
  j["kappa"] = 2.0 * t.ergodic_area;
  for (const auto& c : t.critical)
    j["critical_points"].push_back({{"x1", c.location.x1},
                                    {"x2", c.location.x2},
                                    {"kind", to_string(c.kind)},
                                    {"H", c.h_value},
                                    {"hessian_det", c.hessian_det}});
  for (const auto& c : t.components)
    j["components"].push_back({{"k", c.k},
                               {"r", c.r},
                               {"extremum", {c.extremum_lift.x, c.extremum_lift.y}},
                               {"saddle", {c.saddle_lift.x, c.saddle_lift.y}},
                               {"h_saddle", c.h_saddle},
                               {"h_range", c.h_range},
                               {"area_grid", c.area_grid},
                               {"area_polygon", c.area_polygon},
                               {"boundary_length", perimeter(c.boundary)},
                               {"closure_error", c.closure_error}});
  return j;
}

void suite_coefficients(Context& cx) {
  const FlowTopology& topo = *cx.topo;
  json cj = cx.stamp();
  for (const EdgeCoefficients& ec : cx.coeffs) {
    io::Csv csv{{"h", "A", "piPrime", "B", "a", "b", "u", "uPrime", "rel_err", "config_hash"}};
    for (const CoeffNode& n : ec.nodes)
      csv.row({io::num(n.h), io::num(n.A), io::num(n.piPrime), io::num(n.B), io::num(n.a), io::num(n.b), io::num(n.u),
               io::num(n.uPrime), io::num(n.rel_err), cx.hash});
    cx.emit("coeffs_edge_" + std::to_string(ec.k) + ".csv", csv.str());
    cj["edges"].push_back({{"k", ec.k},
                           {"r", ec.r},
                           {"h_range", ec.h_range},
                           {"A0", ec.A0},
                           {"A0_slope", ec.A0_slope},
                           {"area_coarea", ec.area_coarea},
                           {"uPrime0", ec.uPrime0},
                           {"boundary_flux", boundary_flux(topo, ec.k)},
                           {"n_log", ec.n_log}});
  }
  cx.emit("coefficients.json", cj.dump(2) + "\n");

  // rotation averages against the table at mid-edge levels
  io::Csv rot{{"k", "h", "a_rotation", "b_rotation", "a_quadrature", "b_quadrature", "period", "config_hash"}};
  const int np = cx.cfg.coefficients.rotation_points;
  const int ne = static_cast<int>(cx.coeffs.size());
  for (int i = 0; i < np; ++i) {
    const int k = i % ne;
    const int per = (np + ne - 1 - k) / ne, j = i / ne;
    const double frac = 0.3 + 0.4 * (per > 1 ? double(j) / (per - 1) : 0.5);
    const double h = frac * topo.components[k].h_range;
    const Vec2 x = level_seed(topo, k, h);
    const RotationAverage ra = rotation_average_check(topo, x);
    const EdgeSample es = edge_coeffs(topo, k, ra.h);
    rot.row({std::to_string(k), io::num(ra.h), io::num(ra.a), io::num(ra.b), io::num(es.a), io::num(es.b),
             io::num(ra.T), cx.hash});
  }
  cx.emit("rotation.csv", rot.str());
}

void suite_dioph(Context& cx) {
  const auto& d = cx.cfg.dioph;
  json j = cx.stamp();
  for (const auto& name : d.rhos) {
    const RationalInterval rho = rho_from_name(name);
    const ContinuedFraction cf = expand(rho, d.terms);
    json r;
    r["name"] = name;
    r["rho"] = cf.rho;
    r["certified_terms"] = cf.size();
    r["precision_exhausted"] = cf.precision_exhausted;
    for (int i = 0; i < std::min(cf.size(), 30); ++i) r["terms"].push_back(cf.terms[i].str());
    if (cf.size() >= 20) {
      const GrowthCondition c2 = check_growth_condition(cf);
      r["growth_condition"] = {{"holds", c2.holds}, {"n0", c2.n0}, {"violations", c2.violations}};
    }
    const IdentityReport id = check_identities(cf, rho);
    r["identities"] = {{"recurrence", id.recurrence}, {"fibonacci", id.fibonacci}, {"gap_upper", id.gap_upper},
                       {"gap_lower", id.gap_lower},       {"alternation", id.alternation}, {"checked", id.checked}};
    if (!cf.rational_input) {
      const BestApproxScan ba = best_approx_scan(cf, rho, d.q_max);
      r["best_approx"] = {
          {"q_max", d.q_max}, {"minimizers", ba.minimizers}, {"convergents", ba.convergents}, {"matches", ba.matches}};
      const IrrationalityScan l = irrationality_scan(rho, d.q_max);
      r["irrationality"] = {{"delta", l.delta}, {"q_max", l.q_max}, {"q0", l.q0}, {"failures", l.failures}};
      for (int m = d.m_lo; m <= d.m_hi && m + 1 < cf.size(); ++m) {
        const ReturnProfile rp = first_return_profile(cf, rho, m);
        r["return_profiles"].push_back({{"m", m},
                                        {"q_m", rp.q_m},
                                        {"q_m1", rp.q_m1},
                                        {"values", rp.values},
                                        {"expected", {rp.q_m1, rp.q_m + rp.q_m1}},
                                        {"breakpoint", rp.breakpoint},
                                        {"observed_break", rp.observed_break},
                                        {"grid_step", rp.grid_step},
                                        {"two_valued", rp.two_valued},
                                        {"breakpoint_ok", rp.breakpoint_ok}});
      }
    }
    j["rhos"].push_back(r);
  }
  const double golden = golden_interval().mid();
  for (double e : d.hitting_eps) {
    const std::int64_t mx = max_hitting_N(golden, e, d.hitting_points, cx.cfg.threads);
    j["hitting_scan"].push_back(
        {{"epsilon", e}, {"max_N", mx}, {"bound", std::pow(e, -1.0 / 3.0 - 0.1)}, {"points", d.hitting_points}});
  }
  cx.emit("dioph.json", j.dump(2) + "\n");
}

void suite_exit_time(Context& cx) {
  const auto& c = cx.cfg.exit_time;
  if (c.edge < 0 || c.edge >= static_cast<int>(cx.coeffs.size()))
    fail(ErrorKind::ConfigInvalid, "exit_time.edge out of range");
  const EdgeCoefficients& ec = cx.coeffs[c.edge];
  const double h0 = c.h0_frac * ec.h_range;
  const double u = mean_exit_time(ec, h0).u;
  cx.stat(cx.sde, "exit_time.u_h0", 0.0, cx.cfg.alpha, u, 0.0, 0, 0);
  cx.stat(cx.sde, "exit_time.h0", 0.0, cx.cfg.alpha, h0, 0.0, 0, 0);
  for (double eps : cx.cfg.epsilons) {
    const SimConfig s = cx.sim(eps, c.n_paths, "exit_time");
    const ExitTimeResult r = exit_time_mc(*cx.topo, s, c.edge, h0);
    cx.stat(cx.sde, "exit_time.mean", eps, cx.cfg.alpha, r.exit_time.mean, r.exit_time.stderr_, r.exit_time.n, s.seed);
  }
}

void suite_excursion(Context& cx) {
  const auto& c = cx.cfg.excursion;
  std::vector<double> scales{cx.cfg.sde.level_scale};
  for (double s : c.info_level_scales)
    if (s != cx.cfg.sde.level_scale) scales.push_back(s);
  for (double scale : scales) {
    const std::string tag = scale == cx.cfg.sde.level_scale ? "" : scale_tag(scale);
    for (double eps : cx.cfg.epsilons) {
      SimConfig s = cx.sim(eps, c.chains, "excursion");
      s.level_scale = scale;
      try {
        const ExcursionResult r = excursion_chain(*cx.topo, s, cx.rg->p, c.cycles);
        cx.stat(cx.sde, "excursion.level" + tag, eps, s.alpha, r.level, 0.0, 0, s.seed);
        cx.stat(cx.sde, "excursion.E_mu_sigma" + tag, eps, s.alpha, r.sigma.mean, r.sigma.stderr_, r.cycles, s.seed);
        cx.stat(cx.sde, "excursion.E_nu_tau" + tag, eps, s.alpha, r.tau.mean, r.tau.stderr_, r.cycles, s.seed);
        cx.stat(cx.sde, "excursion.ratio" + tag, eps, s.alpha, r.ratio.mean, r.ratio.stderr_, r.cycles, s.seed);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PreconditionViolated) throw;
        cx.skip("excursion" + tag, eps, scale, e.what());
      }
    }
  }
}

void suite_occupation(Context& cx) {
  const auto& c = cx.cfg.occupation;
  const SimConfig s = cx.sim(c.epsilon, c.n_paths, "occupation");
  const OccupationResult r = occupation_fraction(*cx.topo, s, c.T_slow);
  cx.stat(cx.sde, "occupation.E", c.epsilon, s.alpha, r.ergodic.mean, r.ergodic.stderr_, r.ergodic.n, s.seed);
  for (std::size_t k = 0; k < r.component.size(); ++k)
    cx.stat(cx.sde, "occupation.U" + std::to_string(k), c.epsilon, s.alpha, r.component[k].mean,
            r.component[k].stderr_, r.component[k].n, s.seed);
  cx.stat(cx.sde, "occupation.V", c.epsilon, s.alpha, r.collar.mean, r.collar.stderr_, r.collar.n, s.seed);
  cx.stat(cx.sde, "occupation.collar_level", c.epsilon, s.alpha, r.collar_level, 0.0, 0, s.seed);
  cx.stat(cx.sde, "occupation.T_slow", c.epsilon, s.alpha, c.T_slow, 0.0, 0, s.seed);
}

void suite_ergodic_exit(Context& cx) {
  const auto& c = cx.cfg.ergodic_exit;
  std::vector<double> scales{cx.cfg.sde.level_scale};
  for (double s : c.info_level_scales)
    if (s != cx.cfg.sde.level_scale) scales.push_back(s);
  for (double scale : scales) {
    const std::string tag = scale == cx.cfg.sde.level_scale ? "" : scale_tag(scale);
    for (double eps : cx.cfg.epsilons) {
      SimConfig s = cx.sim(eps, c.n_paths, "ergodic_exit");
      s.level_scale = scale;
      try {
        const ErgodicExitResult r = ergodic_exit_scan(*cx.topo, s);
        cx.stat(cx.sde, "ergodic_exit.level" + tag, eps, s.alpha, r.level, 0.0, 0, s.seed);
        cx.stat(cx.sde, "ergodic_exit.tau_bar" + tag, eps, s.alpha, r.tau_bar.mean, r.tau_bar.stderr_, r.tau_bar.n,
                s.seed);
        cx.stat(cx.sde, "ergodic_exit.scaled" + tag, eps, s.alpha, r.scaled.mean, r.scaled.stderr_, r.scaled.n,
                s.seed);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::PreconditionViolated) throw;
        cx.skip("ergodic_exit" + tag, eps, scale, e.what());
      }
    }
  }
}

double h_star_of(const Context& cx) {
  double hr = cx.topo->components[0].h_range;
  for (const auto& c : cx.topo->components) hr = std::min(hr, c.h_range);
  return cx.cfg.vertex_hitting.h_star_frac * hr;
}

void suite_vertex_hitting(Context& cx) {
  const auto& c = cx.cfg.vertex_hitting;
  const double hs = h_star_of(cx);
  io::Csv samples{{"epsilon", "path", "hit", "vertex_frac"}};
  for (double eps : cx.cfg.epsilons) {
    const SimConfig s = cx.sim(eps, c.n_paths, "vertex_hitting");
    const VertexHittingResult r = vertex_hitting(*cx.topo, s, hs, c.horizon);
    cx.stat(cx.sde, "vertex_hitting.h_star", eps, s.alpha, hs, 0.0, 0, s.seed);
    cx.stat(cx.sde, "vertex_hitting.horizon", eps, s.alpha, c.horizon, 0.0, 0, s.seed);
    cx.stat(cx.sde, "vertex_hitting.hit_mean", eps, s.alpha, r.hit.mean, r.hit.stderr_, r.hit.n, s.seed);
    cx.stat(cx.sde, "vertex_hitting.occupation", eps, s.alpha, r.occupation.mean, r.occupation.stderr_,
            r.occupation.n, s.seed);
    for (std::size_t i = 0; i < r.hitting.size(); ++i)
      samples.row({io::num(eps), std::to_string(i), io::num(r.hitting[i]), io::num(r.vertex_frac[i])});
  }
  cx.emit("sde_hitting.csv", samples.str());
}

void suite_graph(Context& cx) {
  const auto& g = cx.cfg.graph;
  const double hs = h_star_of(cx);
  ChainOptions opt;
  opt.knot = hs;
  opt.far_end = g.far_end == "absorbing" ? FarEnd::Absorbing : FarEnd::Reflecting;
  const StickyChain ch = build_chain(*cx.rg, cx.coeffs, g.delta, opt);
  const std::uint64_t seed = suite_seed(cx.cfg, "graph");
  const double T = g.holding_times * ch.vertex_holding();
  ChainSimOptions so;
  so.h_star = hs;
  so.pieces = g.pieces;
  so.threads = cx.cfg.threads;
  const GraphTrajectoryStats st = simulate_chain(ch, T, seed, so);
  const double a = cx.cfg.alpha;
  cx.stat(cx.graph, "graph.delta", 0, a, g.delta, 0, 0, seed);
  cx.stat(cx.graph, "graph.T", 0, a, T, 0, 0, seed);
  cx.stat(cx.graph, "graph.jumps", 0, a, double(st.jumps), 0, 0, seed);
  cx.stat(cx.graph, "graph.vertex_holding", 0, a, ch.vertex_holding(), 0, 0, seed);
  cx.stat(cx.graph, "graph.vertex_occupation", 0, a, st.vertex_frac, st.vertex_se, g.pieces, seed);
  for (std::size_t k = 0; k < st.edge_frac.size(); ++k)
    cx.stat(cx.graph, "graph.edge_occupation." + std::to_string(k), 0, a, st.edge_frac[k], st.edge_se[k], g.pieces,
            seed);
  const MeanSE hm = mean_se(st.hitting);
  cx.stat(cx.graph, "graph.h_star", 0, a, hs, 0, 0, seed);
  cx.stat(cx.graph, "graph.hit_mean_mc", 0, a, hm.mean, hm.stderr_, hm.n, seed);
  if (opt.far_end == FarEnd::Reflecting) {
    const double exact = chain_mean_hitting(ch, hs);
    cx.stat(cx.graph, "graph.hit_mean_chain", 0, a, exact, 0, 0, seed);
    cx.stat(cx.graph, "graph.hit_mean_limit", 0, a, graph_vertex_hitting_mean(*cx.rg, cx.coeffs, hs), 0, 0, seed);
    // exact CDF for the comparison, and a refinement check at delta / 2
    const double t_end = 40.0 * exact;
    const HittingCdf cdf = chain_hitting_cdf(ch, hs, t_end);
    ChainOptions half = opt;
    const StickyChain ch2 = build_chain(*cx.rg, cx.coeffs, 0.5 * g.delta, half);
    const HittingCdf cdf2 = chain_hitting_cdf(ch2, hs, t_end);
    double dks = 0.0;
    for (std::size_t i = 0; i < cdf.t.size(); ++i) dks = std::max(dks, std::abs(cdf.F[i] - cdf2(cdf.t[i])));
    cx.stat(cx.graph, "graph.ks_refinement", 0, a, dks, 0, 0, seed);
    const double horizon = cx.cfg.vertex_hitting.horizon;
    cx.stat(cx.graph, "graph.horizon", 0, a, horizon, 0, 0, seed);
    cx.stat(cx.graph, "graph.vertex_occupation_horizon", 0, a, chain_vertex_occupation(ch, horizon), 0, 0, seed);
    io::Csv cc{{"t", "F"}};
    for (std::size_t i = 0; i < cdf.t.size(); ++i) cc.row({io::num(cdf.t[i]), io::num(cdf.F[i])});
    cx.emit("chain_cdf.csv", cc.str());
  }
}

void coefficient_figure(Context& cx) {
  std::vector<Series> s;
  for (const auto& ec : cx.coeffs) {
    // figures come from the written CSV, never from memory
    const io::Table t = io::read_csv((fs::path(cx.dir) / ("coeffs_edge_" + std::to_string(ec.k) + ".csv")).string());
    Series a{"a(h) edge " + std::to_string(ec.k), {}, {}}, b{"b(h) edge " + std::to_string(ec.k), {}, {}};
    const int ch = t.col("h"), ca = t.col("a"), cb = t.col("b");
    for (const auto& r : t.rows) {
      const double h = io::to_d(r[ch]);
      if (h <= 0) continue;
      a.x.push_back(h), a.y.push_back(io::to_d(r[ca]));
      b.x.push_back(h), b.y.push_back(io::to_d(r[cb]));
    }
    s.push_back(a);
    s.push_back(b);
  }
  cx.emit("coefficients.svg", svg_plot("edge coefficients", "h", "value", s, true));
}

}  // namespace

RunSummary run(const ExperimentConfig& cfg) {
  Context cx{cfg, cfg.out, hex64(cfg.hash())};
  fs::create_directories(cx.dir);
  auto want = [&](const std::string& s) { return std::find(cfg.suites.begin(), cfg.suites.end(), s) != cfg.suites.end(); };
  const bool need_coeffs = want("coefficients") || want("exit_time") || want("excursion") || want("graph");

  timed(cx, "analyze", [&] {
    TopologyOptions to;
    to.threads = cfg.threads;
    cx.topo = build_topology(parse_stream_function(cfg.field), to);
    json j = topology_json(*cx.topo);
    j["config_hash"] = cx.hash;
    j["seed"] = cfg.seed;
    j["config"] = json::parse(cfg.canonical_json());
    cx.emit("topology.json", j.dump(2) + "\n");
  });
  if (need_coeffs)
    timed(cx, "tabulate", [&] {
      CoefficientOptions co;
      co.threads = cfg.threads;
      for (const auto& c : cx.topo->components) cx.coeffs.push_back(tabulate_edge(*cx.topo, c.k, co));
      cx.rg = build_graph(*cx.topo, cx.coeffs);
    });
  if (want("coefficients")) timed(cx, "coefficients", [&] {
      suite_coefficients(cx);
      coefficient_figure(cx);
    });
  if (want("dioph")) timed(cx, "dioph", [&] { suite_dioph(cx); });
  for (const auto& [name, fn] : {std::pair<const char*, void (*)(Context&)>{"exit_time", suite_exit_time},
                                  {"excursion", suite_excursion},
                                  {"occupation", suite_occupation},
                                  {"ergodic_exit", suite_ergodic_exit},
                                  {"vertex_hitting", suite_vertex_hitting}})
    if (want(name)) {
      timed(cx, name, [&, fn = fn] { fn(cx); });
      cx.sde_rows = true;
    }
  if (cx.sde_rows) cx.emit("sde.csv", cx.sde.str());
  if (want("graph")) {
    timed(cx, "graph", [&] { suite_graph(cx); });
    cx.emit("graph.csv", cx.graph.str());
  }
  if (want("compare")) timed(cx, "compare", [&] {
      compare_reports(cx.dir);
      cx.summary.files.push_back("compare.json");
      cx.summary.files.push_back("hitting_cdf.svg");
    });

  // an empty suite list is a topology-only run
  if (cfg.suites.empty()) return cx.summary;
  json s = cx.stamp();
  s["config"] = json::parse(cfg.canonical_json());
  s["skipped"] = cx.skipped.empty() ? json::array() : json(cx.skipped);
  std::vector<std::string> files = cx.summary.files;
  files.push_back("run_summary.json");
  s["files"] = files;
  cx.emit("run_summary.json", s.dump(2) + "\n");
  // wall-clock numbers live apart so the reports stay byte-identical
  io::write((fs::path(cx.dir) / "timings.json").string(), cx.timings.dump(2) + "\n");
  return cx.summary;
}

void compare_reports(const std::string& dir) {
  const fs::path d(dir);
  const io::Table sde = io::read_csv((d / "sde.csv").string());
  const io::Table gr = io::read_csv((d / "graph.csv").string());
  const io::Table hs = io::read_csv((d / "sde_hitting.csv").string());
  const io::Table cc = io::read_csv((d / "chain_cdf.csv").string());

  auto value = [](const io::Table& t, const std::string& name, double eps, bool any_eps) -> std::optional<double> {
    const int cs = t.col("statistic"), ce = t.col("epsilon"), cm = t.col("mean");
    for (const auto& r : t.rows)
      if (r[cs] == name && (any_eps || io::to_d(r[ce]) == eps)) return io::to_d(r[cm]);
    return std::nullopt;
  };
  const auto g_hs = value(gr, "graph.h_star", 0, true), g_hz = value(gr, "graph.horizon", 0, true);
  const auto g_occ = value(gr, "graph.vertex_occupation_horizon", 0, true);
  const auto g_mean = value(gr, "graph.hit_mean_chain", 0, true);
  if (!g_hs || !g_hz || !g_occ || !g_mean) fail(ErrorKind::MissingReport, "graph.csv lacks the comparison rows");

  HittingCdf cdf;
  for (const auto& r : cc.rows) cdf.t.push_back(io::to_d(r[0])), cdf.F.push_back(io::to_d(r[1]));

  std::map<double, std::vector<double>, std::greater<>> hits, occ;
  for (const auto& r : hs.rows) {
    const double e = io::to_d(r[0]);
    hits[e].push_back(io::to_d(r[2]));
    occ[e].push_back(io::to_d(r[3]));
  }
  if (hits.empty()) fail(ErrorKind::MismatchedObservables, "no SDE hitting samples");

  json out;
  const int cseed = sde.col("seed"), chash = sde.col("config_hash");
  out["config_hash"] = sde.rows.empty() ? "" : sde.rows[0][chash];
  out["seed"] = sde.rows.empty() ? "" : sde.rows[0][cseed];
  out["h_star"] = *g_hs;
  out["horizon"] = *g_hz;
  out["occupation_chain"] = *g_occ;
  out["hit_mean_chain"] = *g_mean;
  std::vector<Series> series;
  for (const auto& [eps, h] : hits) {
    const auto s_hs = value(sde, "vertex_hitting.h_star", eps, false);
    const auto s_hz = value(sde, "vertex_hitting.horizon", eps, false);
    if (!s_hs || !s_hz) fail(ErrorKind::MissingReport, "sde.csv lacks vertex_hitting rows");
    if (std::abs(*s_hs - *g_hs) > 1e-12 * std::abs(*g_hs) || std::abs(*s_hz - *g_hz) > 1e-12 * std::abs(*g_hz))
      fail(ErrorKind::MismatchedObservables, "h* or horizon differ between the SDE and chain reports");
    VertexHittingResult v;
    v.h_star = *s_hs;
    v.horizon = *s_hz;
    v.hitting = h;
    v.vertex_frac = occ[eps];
    v.hit = mean_se(v.hitting);
    v.occupation = mean_se(v.vertex_frac);
    const double ks = ks_one_sample(v.hitting, [&](double x) { return cdf(x); });
    out["rows"].push_back({{"epsilon", eps},
                           {"occupation_sde", v.occupation.mean},
                           {"occupation_se", v.occupation.stderr_},
                           {"occupation_gap", std::abs(v.occupation.mean - *g_occ)},
                           {"hit_mean_sde", v.hit.mean},
                           {"hit_se", v.hit.stderr_},
                           {"ks", ks},
                           {"n", v.hit.n}});
    char lab[48];
    std::snprintf(lab, sizeof lab, "SDE eps=%g", eps);
    Series s{lab, {}, {}};
    std::vector<double> sorted = h;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      s.x.push_back(sorted[i]);
      s.y.push_back(double(i + 1) / sorted.size());
    }
    series.push_back(s);
  }
  Series chain{"chain (exact)", cdf.t, cdf.F};
  series.push_back(chain);
  io::write((d / "compare.json").string(), out.dump(2) + "\n");
  io::write((d / "hitting_cdf.svg").string(),
            svg_plot("vertex-to-level hitting time", "fast time", "CDF", series, false));
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx) {
  const double W = 720, Hh = 440, L = 70, R = 200, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto tx = [&](double x) { return logx ? std::log10(x) : x; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (logx && s.x[i] <= 0) continue;
      x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x0 = 0, x1 = 1;
  if (!(y1 > y0)) y0 = y0 - 1, y1 = y0 + 2;
  const double pw = W - L - R, ph = Hh - T - B;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return T + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" font-family=\"sans-serif\" "
                "font-size=\"12\">\n",
                W, Hh);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"20\" font-size=\"14\">%s</text>\n", L, title.c_str());
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T, pw, ph);
  s += buf;
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s%.3g</text>\n",
                  L + pw * i / 4, T + ph + 16, logx ? "1e" : "", fx);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", L - 4,
                  T + ph * (1 - i / 4.0) + 4, fy);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n", L + pw / 2, Hh - 10,
                xlabel.c_str());
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"14\" y=\"%g\" transform=\"rotate(-90 14 %g)\">%s</text>\n", T + ph / 2,
                T + ph / 2, ylabel.c_str());
  s += buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* col = colors[k % 7];
    std::string pts;
    // thin long series so files stay small
    const std::size_t n = series[k].x.size(), stride = std::max<std::size_t>(1, n / 800);
    for (std::size_t i = 0; i < n; i += stride) {
      if (logx && series[k].x[i] <= 0) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(series[k].x[i]), py(series[k].y[i]));
      pts += buf;
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", L + pw + 10,
                  T + 16 + 16.0 * k, col, series[k].label.c_str());
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace fwlab
