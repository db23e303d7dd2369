#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(GOEMAX_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("goemax_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("negative usefulness floor is a config error naming the field") {
    const fs::path d = scratch("bad");
    std::ofstream(d / "bad.json") << R"({"euu_min": -0.5})";
    const Run r = run("solve --config " + (d / "bad.json").string() + " --out " + d.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("euu_min") != std::string::npos);
  }

  TEST_CASE("solve writes tied solutions on the constraint") {
    const fs::path d = scratch("solve");
    const Run r = run("solve --tied-alpha --scheme change --out " + d.string());
    REQUIRE(r.code == 0);
    const std::string text = slurp(d / "solution_change.json");
    const auto j = nlohmann::json::parse(text);
    CHECK(text.find("\"provenance\"") < text.find("\"alpha\""));
    CHECK(j["provenance"].get<std::string>().find("seed=1") != std::string::npos);
    CHECK(j["residuals"]["constraint_gap"].get<double>() <= 1e-3);
    const double first = j["alpha"][0][0];
    bool rank_one = true;
    for (const auto& row : j["alpha"])
      for (double v : row) rank_one = rank_one && (v == first || v == 0.0);
    CHECK(rank_one);
    CHECK(j["convexity"].contains("h4"));
  }

  TEST_CASE("fig3 sweep: eight rows, identical on rerun") {
    const fs::path a = scratch("fig3a"), b = scratch("fig3b");
    REQUIRE(run("sweep fig3 --out " + a.string()).code == 0);
    REQUIRE(run("sweep fig3 --out " + b.string()).code == 0);
    const std::string ta = slurp(a / "fig3.csv"), tb = slurp(b / "fig3.csv");
    CHECK(ta == tb);
    CHECK(ta.rfind("# config=", 0) == 0);
    CHECK(ta.find(" seed=1") != std::string::npos);
    int lines = 0;
    for (char c : ta) lines += c == '\n';
    CHECK(lines == 10);
  }

  TEST_CASE("fig2 quick sweep covers every scheme and grid point") {
    const fs::path d = scratch("fig2");
    REQUIRE(run("sweep fig2 --quick --seed 3 --out " + d.string()).code == 0);
    const std::string t = slurp(d / "fig2.csv");
    CHECK(t.rfind("# config=", 0) == 0);
    CHECK(t.find(" seed=3 ") != std::string::npos);
    int lines = 0;
    for (char c : t) lines += c == '\n';
    CHECK(lines == 2 + 3 * 21);
  }

  TEST_CASE("bad usage") {
    CHECK(run("").code != 0);
    CHECK(run("sweep fig9").code != 0);
    CHECK(run("solve --mode sideways").code != 0);
    CHECK(run("--help").code == 0);
  }
}
