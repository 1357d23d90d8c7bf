#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fwlab/errors.hpp"
#include "fwlab/field.hpp"
#include "fwlab/harness.hpp"
#include "json.hpp"

namespace fwlab {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorKind::ConfigInvalid, where + ": " + what);
}

// walks one object, rejecting keys nobody asked for
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_, "expected an object");
  }
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad(where_, "unknown key '" + it.key() + "'");
  }

  const json* find(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  void num(const std::string& k, double& v) {
    if (auto p = find(k)) {
      if (!p->is_number()) bad(where_ + "." + k, "expected a number");
      v = p->get<double>();
    }
  }
  template <class I>
  void integer(const std::string& k, I& v) {
    if (auto p = find(k)) {
      if (!p->is_number_integer()) bad(where_ + "." + k, "expected an integer");
      if (p->is_number_unsigned())
        v = static_cast<I>(p->get<std::uint64_t>());
      else
        v = static_cast<I>(p->get<std::int64_t>());
    }
  }
  void str(const std::string& k, std::string& v) {
    if (auto p = find(k)) {
      if (!p->is_string()) bad(where_ + "." + k, "expected a string");
      v = p->get<std::string>();
    }
  }
  void nums(const std::string& k, std::vector<double>& v) {
    if (auto p = find(k)) {
      if (!p->is_array()) bad(where_ + "." + k, "expected an array of numbers");
      v.clear();
      for (const auto& e : *p) {
        if (!e.is_number()) bad(where_ + "." + k, "expected an array of numbers");
        v.push_back(e.get<double>());
      }
    }
  }
  void strs(const std::string& k, std::vector<std::string>& v) {
    if (auto p = find(k)) {
      if (!p->is_array()) bad(where_ + "." + k, "expected an array of strings");
      v.clear();
      for (const auto& e : *p) {
        if (!e.is_string()) bad(where_ + "." + k, "expected an array of strings");
        v.push_back(e.get<std::string>());
      }
    }
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void positive(const std::string& where, double v) {
  if (!(v > 0)) bad(where, "must be > 0");
}

}  // namespace

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"analyze",      "coefficients",   "dioph", "exit_time", "excursion",
                                          "occupation",   "ergodic_exit",   "vertex_hitting", "graph", "compare"};
  return s;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    bad("config", e.what());
  }
  ExperimentConfig c;
  {
    Reader r(j, "config");
    if (auto f = r.find("field")) {
      if (!f->is_object()) bad("config.field", "expected an object");
      c.field = f->dump();
    }
    try {
      parse_stream_function(c.field);
    } catch (const Error& e) {
      bad("config.field", e.what());
    }
    r.nums("epsilons", c.epsilons);
    r.num("alpha", c.alpha);
    r.integer("seed", c.seed);
    r.integer("threads", c.threads);
    r.str("out", c.out);
    r.strs("suites", c.suites);
    if (auto s = r.find("sde")) {
      Reader q(*s, "config.sde");
      q.num("dt", c.sde.dt);
      std::string drift = c.sde.drift == DriftScheme::RK4 ? "rk4" : "euler";
      q.str("drift", drift);
      if (drift == "rk4")
        c.sde.drift = DriftScheme::RK4;
      else if (drift == "euler")
        c.sde.drift = DriftScheme::Euler;
      else
        bad("config.sde.drift", "expected 'rk4' or 'euler'");
      q.num("max_leg_time", c.sde.max_leg_time);
      q.integer("burn_in", c.sde.burn_in);
      q.num("level_scale", c.sde.level_scale);
      q.done();
    }
    if (auto s = r.find("exit_time")) {
      Reader q(*s, "config.exit_time");
      q.integer("n_paths", c.exit_time.n_paths);
      q.num("h0_frac", c.exit_time.h0_frac);
      q.integer("edge", c.exit_time.edge);
      q.done();
    }
    if (auto s = r.find("excursion")) {
      Reader q(*s, "config.excursion");
      q.integer("chains", c.excursion.chains);
      q.integer("cycles", c.excursion.cycles);
      q.nums("info_level_scales", c.excursion.info_level_scales);
      q.done();
    }
    if (auto s = r.find("occupation")) {
      Reader q(*s, "config.occupation");
      q.num("epsilon", c.occupation.epsilon);
      q.num("T_slow", c.occupation.T_slow);
      q.integer("n_paths", c.occupation.n_paths);
      q.done();
    }
    if (auto s = r.find("ergodic_exit")) {
      Reader q(*s, "config.ergodic_exit");
      q.integer("n_paths", c.ergodic_exit.n_paths);
      q.nums("info_level_scales", c.ergodic_exit.info_level_scales);
      q.done();
    }
    if (auto s = r.find("vertex_hitting")) {
      Reader q(*s, "config.vertex_hitting");
      q.integer("n_paths", c.vertex_hitting.n_paths);
      q.num("h_star_frac", c.vertex_hitting.h_star_frac);
      q.num("horizon", c.vertex_hitting.horizon);
      q.done();
    }
    if (auto s = r.find("graph")) {
      Reader q(*s, "config.graph");
      q.num("delta", c.graph.delta);
      q.num("holding_times", c.graph.holding_times);
      q.integer("pieces", c.graph.pieces);
      q.str("far_end", c.graph.far_end);
      q.done();
    }
    if (auto s = r.find("coefficients")) {
      Reader q(*s, "config.coefficients");
      q.integer("rotation_points", c.coefficients.rotation_points);
      q.done();
    }
    if (auto s = r.find("dioph")) {
      Reader q(*s, "config.dioph");
      q.strs("rhos", c.dioph.rhos);
      q.integer("terms", c.dioph.terms);
      q.integer("q_max", c.dioph.q_max);
      q.nums("hitting_eps", c.dioph.hitting_eps);
      q.integer("hitting_points", c.dioph.hitting_points);
      q.integer("m_lo", c.dioph.m_lo);
      q.integer("m_hi", c.dioph.m_hi);
      q.done();
    }
    r.done();
  }

  for (double e : c.epsilons) positive("config.epsilons", e);
  if (!(c.alpha > 0.25 && c.alpha < 0.5)) bad("config.alpha", "must lie in (1/4, 1/2)");
  std::set<std::string> known(known_suites().begin(), known_suites().end());
  for (const auto& s : c.suites)
    if (!known.count(s)) bad("config.suites", "unknown suite '" + s + "'");
  if (c.sde.dt < 0) bad("config.sde.dt", "must be >= 0");
  positive("config.sde.max_leg_time", c.sde.max_leg_time);
  if (c.sde.burn_in < 0) bad("config.sde.burn_in", "must be >= 0");
  positive("config.sde.level_scale", c.sde.level_scale);
  if (c.exit_time.n_paths < 0) bad("config.exit_time.n_paths", "must be >= 0");
  if (!(c.exit_time.h0_frac > 0 && c.exit_time.h0_frac < 1)) bad("config.exit_time.h0_frac", "must lie in (0, 1)");
  if (c.excursion.chains < 0 || c.excursion.cycles < 0) bad("config.excursion", "counts must be >= 0");
  for (double s : c.excursion.info_level_scales) positive("config.excursion.info_level_scales", s);
  positive("config.occupation.epsilon", c.occupation.epsilon);
  positive("config.occupation.T_slow", c.occupation.T_slow);
  if (c.occupation.n_paths <= 0) bad("config.occupation.n_paths", "must be > 0");
  if (c.ergodic_exit.n_paths < 0) bad("config.ergodic_exit.n_paths", "must be >= 0");
  for (double s : c.ergodic_exit.info_level_scales) positive("config.ergodic_exit.info_level_scales", s);
  if (c.vertex_hitting.n_paths <= 0) bad("config.vertex_hitting.n_paths", "must be > 0");
  if (!(c.vertex_hitting.h_star_frac > 0 && c.vertex_hitting.h_star_frac < 1))
    bad("config.vertex_hitting.h_star_frac", "must lie in (0, 1)");
  positive("config.vertex_hitting.horizon", c.vertex_hitting.horizon);
  positive("config.graph.delta", c.graph.delta);
  positive("config.graph.holding_times", c.graph.holding_times);
  if (c.graph.pieces <= 0) bad("config.graph.pieces", "must be > 0");
  if (c.graph.far_end != "reflecting" && c.graph.far_end != "absorbing")
    bad("config.graph.far_end", "expected 'reflecting' or 'absorbing'");
  if (c.coefficients.rotation_points < 0) bad("config.coefficients.rotation_points", "must be >= 0");
  if (c.dioph.terms < 20) bad("config.dioph.terms", "need at least 20 terms");
  if (c.dioph.q_max < 1) bad("config.dioph.q_max", "must be >= 1");
  for (double e : c.dioph.hitting_eps) positive("config.dioph.hitting_eps", e);
  if (c.dioph.hitting_points <= 0) bad("config.dioph.hitting_points", "must be > 0");
  if (c.dioph.m_lo < 1 || c.dioph.m_hi < c.dioph.m_lo) bad("config.dioph", "need 1 <= m_lo <= m_hi");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigInvalid, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["field"] = json::parse(field);
  j["epsilons"] = epsilons;
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["suites"] = suites;
  j["sde"] = {{"dt", sde.dt},
              {"drift", sde.drift == DriftScheme::RK4 ? "rk4" : "euler"},
              {"max_leg_time", sde.max_leg_time},
              {"burn_in", sde.burn_in},
              {"level_scale", sde.level_scale}};
  j["exit_time"] = {{"n_paths", exit_time.n_paths}, {"h0_frac", exit_time.h0_frac}, {"edge", exit_time.edge}};
  j["excursion"] = {{"chains", excursion.chains},
                    {"cycles", excursion.cycles},
                    {"info_level_scales", excursion.info_level_scales}};
  j["occupation"] = {
      {"epsilon", occupation.epsilon}, {"T_slow", occupation.T_slow}, {"n_paths", occupation.n_paths}};
  j["ergodic_exit"] = {{"n_paths", ergodic_exit.n_paths}, {"info_level_scales", ergodic_exit.info_level_scales}};
  j["vertex_hitting"] = {{"n_paths", vertex_hitting.n_paths},
                         {"h_star_frac", vertex_hitting.h_star_frac},
                         {"horizon", vertex_hitting.horizon}};
  j["graph"] = {{"delta", graph.delta},
                {"holding_times", graph.holding_times},
                {"pieces", graph.pieces},
                {"far_end", graph.far_end}};
  j["coefficients"] = {{"rotation_points", coefficients.rotation_points}};
  j["dioph"] = {{"rhos", dioph.rhos},
                {"terms", dioph.terms},
                {"q_max", dioph.q_max},
                {"hitting_eps", dioph.hitting_eps},
                {"hitting_points", dioph.hitting_points},
                {"m_lo", dioph.m_lo},
                {"m_hi", dioph.m_hi}};
  return j.dump();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical_json()); }

}  // namespace fwlab
