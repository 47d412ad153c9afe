#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ergo/cli.hpp"

using namespace ergo;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = ERGO_CONFIG_DIR;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ergo");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const auto p = fs::temp_directory_path() / "ergo_cli_tests";
  fs::create_directories(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const auto p = scratch_dir() / name;
  std::ofstream(p) << content;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing", "[cli][config]") {
  using config::json;
  const fs::path base = "/base";
  const auto ok = config::parse(json::parse(R"({"operator": {"kind": "transpose", "dim": 2},
      "weights": {"kind": "file", "path": "w.txt"}, "run": {"checkpoints": [1, 5, 9], "n_max": 10},
      "input_x": {"kind": "matrix_unit", "i": 1, "j": 2}})"), base);
  CHECK(ok.op.dim == 2);
  CHECK(ok.weights.path == "/base/w.txt");
  CHECK(config::checkpoints(ok.run) == std::vector<std::size_t>{1, 5, 9});
  CHECK(ok.run.tolerance == 1e-9);
  CHECK(ok.run.samples == 200);

  config::RunConfig rc;
  rc.n_max = 100;
  CHECK(config::checkpoints(rc) == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64});

  auto bad = [&](const char* text) { return config::parse(json::parse(text), base); };
  CHECK_THROWS_AS(bad(R"({"operatr": {}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"operator": {"kind": "transpose", "dim": 2, "extra": 1}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"operator": {"kind": "transpose"}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"operator": {"kind": "rotation", "dim": 2}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"operator": {"kind": "entangled_psi"}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"operator": {"kind": "entangled_psi", "stochastic": [[1, 0]]}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"run": {"n_max": 0}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"run": {"tolerance": 0}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"run": {"checkpoints": "linear"}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"run": {"n_max": 4, "checkpoints": [8]}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"run": {"seed": "zero"}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"weights": {"kind": "abel"}})"), ParseError);
  CHECK_THROWS_AS(bad(R"({"input_x": {"kind": "file"}})"), ParseError);
  CHECK_THROWS_AS(bad(R"([1, 2])"), ParseError);
}

TEST_CASE("validate-weights", "[cli]") {
  const auto c = run_cli({"validate-weights", "--config", (kConfigs / "weights_constant.json").string()});
  CHECK(c.code == 0);
  CHECK(contains(c.out, "regularity (p_n/S_n -> 0): pass"));
  CHECK(contains(c.out, "cesaro domination (p_{n+1} <= p_n, n p_n/S_n <= C): pass  C=1"));
  CHECK(contains(c.out, "P-condition (P(n) -> 0): pass"));

  // The P-condition holds while Cesaro domination fails: the implication
  // between the two conditions only runs one way.
  const auto p = run_cli({"validate-weights", "--config", (kConfigs / "weights_power05.json").string()});
  CHECK(p.code == 3);
  CHECK(contains(p.out, "regularity (p_n/S_n -> 0): pass"));
  CHECK(contains(p.out, "n p_n/S_n <= C): fail"));
  CHECK(contains(p.out, "P-condition (P(n) -> 0): pass"));

  const auto g = run_cli({"validate-weights", "--config", (kConfigs / "weights_geometric.json").string()});
  CHECK(g.code == 3);
  CHECK(contains(g.out, "regularity (p_n/S_n -> 0): fail"));

  const auto short_list = write_file("short.txt", "1\n0.5\n");
  const auto cfg = write_file("short.json", R"({"weights": {"kind": "file", "path": ")" +
                                                short_list.string() + R"("}, "run": {"n_max": 20}})");
  const auto s = run_cli({"validate-weights", "--config", cfg.string()});
  CHECK(contains(s.out, "warning: explicit weights shorter than the horizon"));

  const auto neg = write_file("neg.txt", "1\n-2\n");
  const auto cfg2 = write_file("neg.json", R"({"weights": {"kind": "file", "path": ")" +
                                               neg.string() + R"("}})");
  CHECK(run_cli({"validate-weights", "--config", cfg2.string()}).code == 1);
}

TEST_CASE("analyze", "[cli]") {
  const auto t = run_cli({"analyze", "--config", (kConfigs / "transpose3_analyze.json").string()});
  CHECK(t.code == 0);
  CHECK(contains(t.out, "dim A^T: 6\n"));
  CHECK(contains(t.out, "fixed space is a subalgebra: no\n"));
  CHECK(contains(t.out, "uniquely ergodic relative to A^T: yes\n"));
  CHECK(contains(t.out, "ergodic: no\n"));
  CHECK(contains(t.out, "T completely positive: no\n"));
  CHECK(contains(t.out, "E_T completely positive: no\n"));
  CHECK(contains(t.out, "E_T conditional expectation: no"));

  const auto p = run_cli({"analyze", "--config", (kConfigs / "two_class_analyze.json").string()});
  CHECK(p.code == 0);
  CHECK(contains(p.out, "dim A^T: 2\n"));
  CHECK(contains(p.out, "fixed space is a subalgebra: yes\n"));
  CHECK(contains(p.out, "uniquely ergodic relative to A^T: yes\n"));
  CHECK(contains(p.out, "ergodic: no\n"));
  CHECK(contains(p.out, "dim Fix(Pi): 2\n"));
  CHECK(contains(p.out, "(match)"));

  const auto u = run_cli({"analyze", "--config", (kConfigs / "uniform2_analyze.json").string()});
  CHECK(u.code == 0);
  CHECK(contains(u.out, "dim A^T: 1\n"));
  CHECK(contains(u.out, "ergodic: yes\n"));

  const auto j = run_cli({"analyze", "--config", (kConfigs / "jordan_block_converge.json").string()});
  CHECK(j.code == 2);
  CHECK(contains(j.out, "warning: not a Markov operator"));
  CHECK(contains(j.out, "uniquely ergodic relative to A^T: no\n"));

  const auto rm = write_file("require_markov.json",
                             R"({"operator": {"kind": "entangled_p", "stochastic": [[1, 0, 0], [0, 0, 1], [0, 0.5, 0.5]]},
                                 "run": {"require_markov": true}})");
  const auto r = run_cli({"analyze", "--config", rm.string()});
  CHECK(r.code == 2);
  CHECK(contains(r.out, "entangled: yes"));
}

TEST_CASE("converge", "[cli]") {
  const auto t = run_cli({"converge", "--config", (kConfigs / "transpose3_converge.json").string()});
  REQUIRE(t.code == 0);
  const auto rows = parse_csv(t.out.substr(t.out.find("n,p_n")));
  REQUIRE(rows.front() == std::vector<std::string>{"n", "p_n", "S_n", "P_n", "err", "bound", "ok"});
  REQUIRE(rows.size() == 12);  // header + n = 1, 2, ..., 1024
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k][6] == "true");
  CHECK(rows.back()[0] == "1024");
  CHECK(std::stod(rows.back()[4]) <= 2.0 / 1024);
  CHECK(contains(t.out, "all rows within the estimate: yes"));

  const auto fixed_cfg = write_file("fixed.json", R"({"operator": {"kind": "transpose", "dim": 3},
      "run": {"n_max": 256}, "input_x": {"kind": "matrix_unit", "i": 2, "j": 2}})");
  const auto f = run_cli({"converge", "--config", fixed_cfg.string(), "--quiet"});
  REQUIRE(f.code == 0);
  const auto frows = parse_csv(f.out);
  for (std::size_t k = 1; k < frows.size(); ++k) CHECK(std::stod(frows[k][4]) == 0.0);
  CHECK_FALSE(contains(f.out, "max err/bound"));

  const auto p = run_cli({"converge", "--config", (kConfigs / "two_class_converge_power.json").string()});
  CHECK(p.code == 0);
  const fs::path csv = kConfigs / "out" / "two_class_power.csv";
  REQUIRE(fs::exists(csv));
  const auto prows = parse_csv(read_file(csv));
  CHECK(prows.size() == 14);
  for (std::size_t k = 1; k < prows.size(); ++k) CHECK(prows[k][6] == "true");
  CHECK(contains(read_file(kConfigs / "out" / "two_class_power.txt"), "max err/bound"));

  const auto j = run_cli({"converge", "--config", (kConfigs / "jordan_block_converge.json").string()});
  CHECK(j.code == 2);
  CHECK(contains(j.out, "not a direct sum"));
}

TEST_CASE("converge output is reproducible", "[cli]") {
  const auto out_csv = scratch_dir() / "repro.csv";
  const auto cfg = write_file("repro.json", R"({"operator": {"kind": "entangled_psi",
      "stochastic": [[1, 0, 0], [0, 0, 1], [0, 0.25, 0.75]]}, "weights": {"kind": "power", "alpha": 0.5},
      "run": {"n_max": 2048, "seed": 5}, "output": {"csv_path": ")" + out_csv.string() + R"("}})");
  REQUIRE(run_cli({"converge", "--config", cfg.string()}).code == 0);
  const std::string first = read_file(out_csv);
  REQUIRE(run_cli({"converge", "--config", cfg.string()}).code == 0);
  CHECK(read_file(out_csv) == first);
  CHECK_FALSE(fs::exists(out_csv.string() + ".tmp"));

  REQUIRE(run_cli({"converge", "--config", cfg.string(), "--seed", "6"}).code == 0);
  CHECK(read_file(out_csv) != first);
}

TEST_CASE("exit codes on bad input", "[cli]") {
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  CHECK(run_cli({"analyze"}).code == 1);
  CHECK(run_cli({"analyze", "--config", "/nonexistent.json"}).code == 1);
  CHECK(run_cli({"analyze", "--config", write_file("broken.json", "{ not json").string()}).code == 1);
  CHECK(run_cli({"analyze", "--config", (kConfigs / "transpose3_analyze.json").string(),
                 "--tolerance", "-1"}).code == 1);

  const auto bad_rep = write_file("bad_rep.txt", "3\n1 0 0 0 0 0\n0 0 1 0 0 0\n0 0 0 0 1 0\n");
  const auto cfg = write_file("bad_rep.json",
                              R"({"operator": {"kind": "file", "path": ")" + bad_rep.string() + R"("}})");
  const auto r = run_cli({"analyze", "--config", cfg.string()});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "perfect square"));

  const auto garbage = write_file("garbage.txt", "2\n1 0 zero 0\n0 0 1 0\n");
  const auto cfg2 = write_file("garbage.json", R"({"operator": {"kind": "entangled_psi", "stochastic": ")" +
                                                   garbage.string() + R"("}})");
  CHECK(run_cli({"analyze", "--config", cfg2.string()}).code == 1);

  const auto nonstoch = write_file("nonstoch.json",
                                   R"({"operator": {"kind": "entangled_psi", "stochastic": [[0.5, 0.2], [0, 1]]}})");
  CHECK(run_cli({"analyze", "--config", nonstoch.string()}).code == 1);
}
