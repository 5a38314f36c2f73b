// Drives the installed command-line tool as a subprocess.
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  std::string cmd = std::string("\"") + SYBILLAB_CLI + "\" " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("sybillab-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("help exits 0 everywhere") {
  CHECK(run("--help").code == 0);
  for (const char* sub : {"synth", "sample", "detect", "train", "predict", "eval", "experiment", "plot-data"}) {
    CAPTURE(sub);
    CHECK(run(std::string(sub) + " --help").code == 0);
  }
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("--no-such-flag").code == 1);
  CHECK(run("eval --scores").code == 1);
  CHECK(run("detect --algo sybilmagic --graph x --split y --out z").code == 1);
}

TEST_CASE("eval on perfect scores") {
  auto dir = scratch("eval");
  write(dir / "s.csv", "node,score\n0,0.1\n1,0.2\n2,0.8\n3,0.9\n");
  write(dir / "l.txt", "0 honest\n1 honest\n2 sybil\n3 sybil\n");
  auto r = run("eval --scores " + q(dir / "s.csv") + " --labels " + q(dir / "l.txt"));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("auc=1.000000\n", 0) == 0);
}

TEST_CASE("missing input is an I/O failure") {
  auto dir = scratch("io");
  write(dir / "s.csv", "node,score\n0,oops\n");
  write(dir / "l.txt", "0 honest\n");
  CHECK(run("eval --scores " + q(dir / "s.csv") + " --labels " + q(dir / "l.txt")).code == 2);
}

TEST_CASE("synth, detect, train, predict, eval pipeline") {
  auto dir = scratch("pipeline");
  write(dir / "spec.json", R"({
    "honest": {"model": "pl", "n": 1000, "m": 6, "p": 0.8},
    "sybil": {"model": "pl", "n": 1000, "m": 6, "p": 0.8},
    "attack": {"edges_per_sybil": 8},
    "seed": 42
  })");
  auto net = dir / "net";
  REQUIRE(run("synth --spec " + q(dir / "spec.json") + " --out " + q(net)).code == 0);
  CHECK(line_count(net / "attack_edges.txt") == 8000);
  CHECK(line_count(net / "split.txt") == 100);

  auto graph = q(net / "graph.txt");
  auto split = q(net / "split.txt");
  auto labels = q(net / "labels.txt");
  REQUIRE(run("detect --algo sybilscar-d --graph " + graph + " --split " + split + " --out " +
              q(dir / "scar.csv")).code == 0);
  auto ev = run("eval --scores " + q(dir / "scar.csv") + " --labels " + labels + " --split " + split);
  CHECK(ev.code == 0);
  CHECK(ev.out.rfind("auc=", 0) == 0);

  write(dir / "hyper.json", R"({"max_epochs": 10})");
  REQUIRE(run("train --graph " + graph + " --split " + split + " --hyper " + q(dir / "hyper.json") + " --out " +
              q(dir / "m.json")).code == 0);
  CHECK(fs::exists(dir / "m.json.report.json"));
  REQUIRE(run("predict --model " + q(dir / "m.json") + " --graph " + graph + " --known " + split + " --out " +
              q(dir / "p.csv")).code == 0);
  std::ifstream in(dir / "p.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "node,score,label");

  auto ss = run("sample --graph " + graph + " --fraction 0.1 --labels " + labels + " --out " + q(dir / "sample"));
  CHECK(ss.code == 0);
  CHECK(line_count(dir / "sample" / "node_map.txt") == 200);
}

TEST_CASE("training with bad hyperparameters exits 1") {
  auto dir = scratch("badhyper");
  write(dir / "g.txt", "0 1\n1 2\n2 3\n");
  write(dir / "s.txt", "0 honest\n1 honest\n2 sybil\n3 sybil\n");
  write(dir / "h.json", R"({"layers": 0})");
  CHECK(run("train --graph " + q(dir / "g.txt") + " --split " + q(dir / "s.txt") + " --hyper " + q(dir / "h.json") +
            " --out " + q(dir / "m.json")).code == 1);
}

TEST_CASE("experiment and plot-data") {
  auto dir = scratch("experiment");
  write(dir / "c.json", R"({
    "experiment": 4, "name": "cli", "seeds": [1, 2],
    "algorithms": ["sybilrank", "sybilscar-d"],
    "cases": [{"dataset": "d", "model": "BA-BA",
               "network": {"honest": {"model": "ba", "n": 100, "m": 3},
                           "sybil": {"model": "ba", "n": 100, "m": 3},
                           "attack": {"edges_per_sybil": 1}},
               "attack_counts": [1, 2]}]
  })");
  auto r = run("experiment --config " + q(dir / "c.json") + " --out " + q(dir / "r.csv"));
  CHECK(r.code == 0);
  CHECK(line_count(dir / "r.csv") == 1 + 8);
  auto one = run("experiment --quiet --config " + q(dir / "c.json") + " --seed 2 --out " + q(dir / "one.csv"));
  CHECK(one.code == 0);
  CHECK(line_count(dir / "one.csv") == 1 + 4);
  CHECK(run("plot-data --results " + q(dir / "r.csv") + " --out " + q(dir / "plot.csv")).code == 0);
  CHECK(line_count(dir / "plot.csv") == 1 + 4);
}
