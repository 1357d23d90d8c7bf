#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fwlab/errors.hpp"
#include "fwlab/harness.hpp"

using namespace fwlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fwlab_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const char* kSmall = R"({
  // tiny run
  "epsilons": [0.02, 0.01],
  "suites": ["coefficients", "dioph", "exit_time", "vertex_hitting", "graph", "compare"],
  "exit_time": {"n_paths": 64},
  "vertex_hitting": {"n_paths": 32},
  "graph": {"holding_times": 2000, "delta": 4e-3},
  "dioph": {"q_max": 2000, "hitting_points": 200, "hitting_eps": [1e-4]}
})";

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig d = parse_config("{}");
  CHECK(d.epsilons.size() == 3);
  CHECK(d.alpha == 0.3);
  CHECK(d.suites.empty());
  const ExperimentConfig c = parse_config(kSmall);
  CHECK(c.exit_time.n_paths == 64);
  CHECK(c.graph.delta == 4e-3);

  CHECK_THROWS_AS(parse_config(R"({"epsilon": [0.1]})"), Error);           // unknown key
  CHECK_THROWS_AS(parse_config(R"({"epsilons": [-0.1]})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"alpha": 0.6})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"suites": ["nope"]})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"field": {"builtin": "CFG-Q"}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"graph": {"far_end": "sticky"}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"exit_time": {"n_paths": "many"}})"), Error);
  CHECK_THROWS_AS(parse_config("{"), Error);
  try {
    parse_config(R"({"sde": {"bogus": 1}})");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    CHECK(exit_code_for(e.kind()) == 2);
  }
}

TEST_CASE("config hash ignores where and how fast") {
  ExperimentConfig a = parse_config(kSmall), b = a;
  b.out = "/somewhere/else";
  b.threads = 7;
  CHECK(a.hash() == b.hash());
  b.seed += 1;
  CHECK(a.hash() != b.hash());
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("shipped configs parse") {
  for (const char* f : {"cfg_a.jsonc", "acceptance.jsonc", "smoke.jsonc"})
    CHECK_NOTHROW(load_config(std::string(FWLAB_SOURCE_DIR) + "/configs/" + f));
  CHECK_THROWS_AS(load_config("/no/such/config.json"), Error);
}

TEST_CASE("empty suite list writes only the topology") {
  ExperimentConfig c = parse_config("{}");
  c.out = scratch("empty").string();
  run(c);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(c.out)) files.push_back(e.path().filename().string());
  REQUIRE(files.size() == 1);
  CHECK(files[0] == "topology.json");
}

TEST_CASE("reruns are byte-identical, rows are stamped, verify reads them back") {
  ExperimentConfig c = parse_config(kSmall);
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  c.out = a.string();
  const RunSummary ra = run(c);
  c.out = b.string();
  c.threads = 3;
  run(c);
  REQUIRE(ra.files.size() >= 10);
  for (const auto& f : ra.files) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // figures are drawn from the CSV
  CHECK(fs::exists(a / "coefficients.svg"));
  CHECK(fs::exists(a / "hitting_cdf.svg"));

  const std::string hash = hex64(c.hash());
  std::istringstream sde(slurp(a / "sde.csv"));
  std::string line;
  std::getline(sde, line);
  CHECK(line == "statistic,epsilon,alpha,mean,stderr,n,seed,config_hash");
  int rows = 0;
  while (std::getline(sde, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == hash);
    ++rows;
  }
  CHECK(rows > 4);
  CHECK(slurp(a / "dioph.json").find(hash) != std::string::npos);

  const auto res = verify(a.string());
  REQUIRE(res.size() == 15);
  for (int id : {1, 2, 3, 4, 5, 15}) CHECK(res[id - 1].pass);
  // criteria whose suites did not run fail with a reason
  CHECK_FALSE(res[8].pass);
  CHECK(format_table(res).find("FAIL  9") != std::string::npos);

  SUBCASE("tampered rotation table fails criterion 5") {
    std::string rot = slurp(a / "rotation.csv");
    // scale the first a_rotation entry by 1.01
    const auto l1 = rot.find('\n') + 1;
    const auto c1 = rot.find(',', l1), c2 = rot.find(',', c1 + 1), c3 = rot.find(',', c2 + 1);
    const double v = std::stod(rot.substr(c2 + 1, c3 - c2 - 1));
    rot.replace(c2 + 1, c3 - c2 - 1, std::to_string(v * 1.01));
    std::ofstream(a / "rotation.csv", std::ios::binary) << rot;
    CHECK_FALSE(verify(a.string())[4].pass);

    Tolerances tol;
    tol.set("c5_rotation=0.02");
    CHECK(tol["c5_rotation"] == 0.02);
    CHECK(verify(a.string(), tol)[4].pass);
  }
  SUBCASE("tampered exit-time mean fails criterion 6") {
    const auto before = verify(a.string())[5];
    std::string s = slurp(a / "sde.csv");
    const std::string key = "exit_time.mean,0.01,";
    const auto at = s.find(key);
    REQUIRE(at != std::string::npos);
    const auto m0 = s.find(',', at + key.size()) + 1, m1 = s.find(',', m0);
    s.replace(m0, m1 - m0, "1.5");
    std::ofstream(a / "sde.csv", std::ios::binary) << s;
    const auto after = verify(a.string())[5];
    CHECK_FALSE(after.pass);
    CHECK(after.detail != before.detail);
  }
}

TEST_CASE("tolerances") {
  Tolerances t;
  CHECK(t["c6_sigmas"] == 3.0);
  CHECK(t["c11_hitting"] == 0.03);
  CHECK_THROWS_AS(t.set("c99=1"), Error);
  CHECK_THROWS_AS(t.set("c6_sigmas"), Error);
  CHECK_THROWS_AS(t.set("c6_sigmas=wide"), Error);
  CHECK_THROWS_AS(t["nope"], Error);
}

TEST_CASE("verify needs reports") {
  CHECK_THROWS_AS(verify("/no/such/reports"), Error);
  const fs::path d = scratch("bare");
  fs::create_directories(d);
  try {
    verify(d.string());
    FAIL("expected MissingReport");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingReport);
  }
  CHECK_THROWS_AS(compare_reports(d.string()), Error);
}

TEST_CASE("svg plot") {
  const std::string s = svg_plot("t", "x", "y", {{"one", {1, 2, 3}, {0.1, 0.5, 0.9}}}, true);
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("polyline") != std::string::npos);
  CHECK(s.find("one") != std::string::npos);
}
