#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "p2d2/cli.hpp"
#include "p2d2/error.hpp"
#include "p2d2/trace.hpp"

using namespace p2d2;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("p2d2_cli_" + std::to_string(std::hash<std::string>{}(
                                                          doctest::getContextOptions()->binary_name.c_str())));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) const {
    const auto path = dir / name;
    std::ofstream(path) << text;
    return path.string();
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

std::string config(const std::string& regularizer, const std::string& steps, const std::string& extra = "",
                   double lambda = 0.05) {
  return R"({
  "seed": 3,
  "graph": {"type": "random", "K": 6, "p": 0.5},
  "data": {"type": "synthetic", "samples_per_agent": 20, "dim": 5},
  "cost": {"kind": "logistic", "lambda": )" +
         std::to_string(lambda) + R"(},
  "regularizer": )" + regularizer +
         R"(,
  "solver": {"form": "agent", "max_iters": 300)" +
         extra + R"(},
  "steps": )" + steps +
         R"(,
  "output": {"trace": "trace.csv", "checkpoint": "w.csv"}
})";
}

const std::string kL1 = R"({"kind": "l1", "rho": 0.001})";
const std::string kZero = R"({"kind": "zero"})";
const std::string kManual = R"({"mode": "manual", "mu": 0.5, "alpha": 1.0})";
const std::string kCertified = R"({"mode": "certified", "safety": 0.5})";

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

}  // namespace

TEST_CASE("run with certified steps writes a trace") {
  Workspace ws;
  const auto path = ws.write("run.json", config(kL1, kCertified));
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(path, out, err) == cli::kExitOk);
  const auto kv = key_values(out.str());
  CHECK(kv.at("iterations") == "300");
  CHECK(!kv.at("certified_gamma").empty());
  const auto trace = read_trace_csv((ws.dir / "trace.csv").string());
  CHECK(trace.records.size() == 301);
  bool has_gamma = false;
  for (const auto& [k, v] : trace.metadata) has_gamma |= k == "gamma";
  CHECK(has_gamma);
  CHECK(fs::exists(ws.dir / "w.csv"));
}

TEST_CASE("rerun with the same seed gives a byte-identical trace") {
  Workspace ws;
  const auto path = ws.write("run.json", config(kL1, kManual, R"(, "workers": 3)"));
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(path, out, err) == cli::kExitOk);
  const std::string first = ws.read("trace.csv");
  REQUIRE(cli::cmd_run(path, out, err) == cli::kExitOk);
  CHECK(ws.read("trace.csv") == first);
  CHECK(first.find("# mu=0.5") != std::string::npos);
  const auto kv = key_values(out.str());
  CHECK(std::stod(kv.at("final_rel_sq_error")) < 1e-8);
}

TEST_CASE("reference form records the Lyapunov value") {
  Workspace ws;
  auto text = config(kL1, kManual);
  text.replace(text.find("\"agent\""), 7, "\"reference\"");
  const auto path = ws.write("run.json", text);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(path, out, err) == cli::kExitOk);
  const auto trace = read_trace_csv((ws.dir / "trace.csv").string());
  CHECK(trace.records.back().lyapunov.has_value());
}

TEST_CASE("configuration errors exit with code 2 naming the field") {
  Workspace ws;
  std::ostringstream out, err;
  const auto bad_alpha = ws.write("a.json", config(kL1, R"({"mode": "manual", "mu": 0.5, "alpha": 1.5})"));
  CHECK(cli::cmd_run(bad_alpha, out, err) == cli::kExitConfig);
  CHECK(err.str().find("alpha") != std::string::npos);

  err.str("");
  const auto missing_mu = ws.write("b.json", config(kL1, R"({"mode": "manual", "alpha": 0.5})"));
  CHECK(cli::cmd_run(missing_mu, out, err) == cli::kExitConfig);
  CHECK(err.str().find("steps.mu") != std::string::npos);

  err.str("");
  const auto unknown = ws.write("c.json", config(R"({"kind": "l2"})", kManual));
  CHECK(cli::cmd_run(unknown, out, err) == cli::kExitConfig);
  CHECK(err.str().find("regularizer.kind") != std::string::npos);

  CHECK(cli::cmd_run(ws.write("d.json", "{ not json"), out, err) == cli::kExitConfig);
  CHECK(cli::cmd_run((ws.dir / "missing.json").string(), out, err) == cli::kExitConfig);

  err.str("");
  auto typo = config(kL1, kManual);
  typo.replace(typo.find("\"max_iters\""), 11, "\"max_iter\"");
  CHECK(cli::cmd_run(ws.write("e.json", typo), out, err) == cli::kExitConfig);
  CHECK(err.str().find("solver.max_iter") != std::string::npos);
}

TEST_CASE("certify prints a contracting certificate") {
  Workspace ws;
  std::ostringstream out, err;
  REQUIRE(cli::cmd_certify(ws.write("c.json", config(kL1, kCertified)), out, err) == cli::kExitOk);
  const auto kv = key_values(out.str());
  for (const char* key : {"sigma_max", "sigma_under", "delta", "nu", "mu", "alpha", "rho", "c", "nu_rho", "gamma1",
                          "gamma2", "beta", "gamma"})
    CHECK_MESSAGE(kv.count(key) == 1, key);
  CHECK(std::stod(kv.at("gamma")) < 1.0);
}

TEST_CASE("certify without strong convexity exits 3") {
  Workspace ws;
  std::ostringstream out, err;
  CHECK(cli::cmd_certify(ws.write("c.json", config(kL1, kCertified, "", 0.0)), out, err) == cli::kExitNumerical);
  CHECK(err.str().find("NotStronglyConvex") != std::string::npos);
}

TEST_CASE("compare reports equivalent forms") {
  Workspace ws;
  std::ostringstream out, err;
  const auto path = ws.write("c.json", config(kL1, kManual));
  REQUIRE(cli::cmd_compare(path, {"agent", "stacked", "reference"}, out, err) == cli::kExitOk);
  CHECK(std::stod(key_values(out.str()).at("max_divergence")) < 1e-10);

  CHECK(cli::cmd_compare(path, {"agent", "extra"}, out, err) == cli::kExitConfig);
  CHECK(cli::cmd_compare(path, {"agent"}, out, err) == cli::kExitConfig);
  CHECK(cli::cmd_compare(path, {"agent", "nope"}, out, err) == cli::kExitConfig);

  const auto smooth = ws.write("s.json", config(kZero, kManual));
  out.str("");
  CHECK(cli::cmd_compare(smooth, {"stacked", "extra", "reference"}, out, err) == cli::kExitOk);
}

TEST_CASE("libsvm data and a combination matrix from disk") {
  Workspace ws;
  std::string data;
  for (int i = 0; i < 30; ++i)
    data += std::string(i % 2 ? "1" : "-1") + " 1:" + std::to_string(0.1 * (i % 7) + (i % 2)) + " 2:" +
            std::to_string(1.0 - 0.05 * i) + "\n";
  ws.write("train.svm", data);
  ws.write("a.csv", "0.5,0.5,0\n0.5,0.25,0.25\n0,0.25,0.75\n");
  const auto path = ws.write("run.json", R"({
    "graph": {"type": "path", "K": 3},
    "combination_csv": "a.csv",
    "data": {"type": "libsvm", "path": "train.svm"},
    "cost": {"kind": "logistic", "lambda": 0.1},
    "regularizer": {"kind": "elastic_net", "rho1": 0.01, "rho2": 0.01},
    "solver": {"form": "stacked", "max_iters": 100},
    "steps": {"mode": "certified"},
    "output": {"trace": "t.csv"}
  })");
  std::ostringstream out, err;
  CHECK(cli::cmd_run(path, out, err) == cli::kExitOk);
  CHECK(fs::exists(ws.dir / "t.csv"));

  const auto config = cli::load_config(path);
  const auto problem = cli::build_problem(config);
  CHECK(problem.num_agents() == 3);
  CHECK(problem.topology.combination.weights()(2, 2) == 0.75);
}

TEST_CASE("quadratic costs with extra") {
  Workspace ws;
  const auto path = ws.write("q.json", R"({
    "seed": 5,
    "graph": {"type": "ring", "K": 5},
    "data": {"type": "synthetic", "dim": 4},
    "cost": {"kind": "quadratic", "lambda": 0.1},
    "solver": {"form": "extra", "max_iters": 200},
    "steps": {"mode": "certified"}
  })");
  std::ostringstream out, err;
  REQUIRE(cli::cmd_run(path, out, err) == cli::kExitOk);
  CHECK(key_values(out.str()).at("form") == "extra");
}

TEST_CASE("command line entry point") {
  Workspace ws;
  const auto path = ws.write("c.json", config(kL1, kCertified));
  std::string prog = "p2d2", sub = "certify";
  char* argv[] = {prog.data(), sub.data(), const_cast<char*>(path.c_str())};
  CHECK(cli::main(3, argv) == cli::kExitOk);
  std::string bogus = "bogus";
  char* bad[] = {prog.data(), bogus.data()};
  CHECK(cli::main(2, bad) == cli::kExitConfig);
}

TEST_CASE("shipped configs parse") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(P2D2_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CHECK_NOTHROW(cli::load_config(entry.path().string()));
    ++seen;
  }
  CHECK(seen >= 4);
}
