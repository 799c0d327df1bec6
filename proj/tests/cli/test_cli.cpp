#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "../unit/helpers.hpp"

using namespace semiconj;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, merged

  bool contains(const std::string& needle) const {
    return output.find(needle) != std::string::npos;
  }
};

const char* cli_path() {
  const char* p = std::getenv("SEMICONJ_CLI");
  REQUIRE(p != nullptr);
  return p;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string capture = (std::filesystem::temp_directory_path() /
                               ("semiconj_cli_out_" + std::to_string(::getpid()) + "_" +
                                std::to_string(counter++)))
                                  .string();
  const std::string cmd = std::string("'") + cli_path() + "' " + args + " > '" + capture +
                          "' 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  std::ifstream in(capture);
  std::ostringstream text;
  text << in.rdbuf();
  r.output = text.str();
  std::error_code ec;
  std::filesystem::remove(capture, ec);
  INFO("command: " << cmd << "\noutput:\n" << r.output);
  return r;
}

}  // namespace

TEST_CASE("usage errors and help", "[cli]") {
  const RunResult none = run_cli("");
  CHECK(none.exit_code == 64);

  const RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.contains("spectral"));
  CHECK(help.contains("solve"));

  const RunResult unknown = run_cli("frobnicate");
  CHECK(unknown.exit_code == 64);
}

TEST_CASE("spectral subcommand", "[cli]") {
  const RunResult cat = run_cli("spectral -m '2,1;1,1'");
  REQUIRE(cat.exit_code == 0);
  CHECK(cat.contains("2.618"));
  CHECK(cat.contains("dim E = 1"));
  CHECK(cat.contains("hyperbolic: yes"));

  const RunResult unipotent = run_cli("spectral -m '1,1;0,1'");
  REQUIRE(unipotent.exit_code == 0);
  CHECK(unipotent.contains("dim E = 0"));

  const RunResult bad = run_cli("spectral -m '1,0;0,2'");
  CHECK(bad.exit_code == 64);

  const RunResult word = run_cli("spectral --preset sanov -w 'a b'");
  REQUIRE(word.exit_code == 0);
  CHECK(word.contains("5.828"));
}

TEST_CASE("certify subcommand", "[cli]") {
  const RunResult good = run_cli("certify --preset sanov -L 2");
  REQUIRE(good.exit_code == 0);
  CHECK(good.contains("VERIFIED"));
  CHECK(good.contains("a b"));

  const RunResult bad = run_cli("certify --preset rotation -L 3");
  CHECK(bad.exit_code == 2);
  CHECK(bad.contains("NOT VERIFIED"));

  const RunResult usage = run_cli("certify --preset sanov -L 0");
  CHECK(usage.exit_code == 64);
}

TEST_CASE("demo linear writes a solvable spec with zero displacement", "[cli]") {
  testutil::TempDir tmp("cli_linear");
  const std::string demo_dir = tmp.file("demo");
  const std::string out_dir = tmp.file("out");

  const RunResult demo = run_cli("demo linear -o '" + demo_dir + "'");
  REQUIRE(demo.exit_code == 0);
  REQUIRE(std::filesystem::exists(demo_dir + "/action.txt"));

  const RunResult solve =
      run_cli("solve --spec '" + demo_dir + "/action.txt' --res 32 -o '" + out_dir + "'");
  REQUIRE(solve.exit_code == 0);
  CHECK(solve.contains("CERTIFIED"));

  const GridFunction phi2 = GridFunction::load(out_dir + "/phi2.scgf");
  CHECK(phi2.sup_norm() <= 1e-12);

  std::ifstream csv(out_dir + "/residuals.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "generator,sup_residual,budget,pass");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.substr(line.size() - 2) == ",1");
  }
  CHECK(rows == 2);
  CHECK(std::filesystem::exists(out_dir + "/report.txt"));
}

TEST_CASE("demo conjugation round-trips and solves to the planted truth", "[cli]") {
  testutil::TempDir tmp("cli_conj");
  const std::string demo_dir = tmp.file("demo");
  const std::string out_dir = tmp.file("out");

  const RunResult demo =
      run_cli("demo conjugation --eps 0.03 --res 64 -o '" + demo_dir + "'");
  REQUIRE(demo.exit_code == 0);

  // the written spec reproduces the preset exactly
  const ActionSpec loaded = load_action(demo_dir + "/action.txt");
  const OracleAction oracle = make_conjugated_sanov(0.03, 64);
  REQUIRE(loaded.generators.size() == oracle.action.generators.size());
  for (std::size_t g = 0; g < loaded.generators.size(); ++g) {
    CHECK(loaded.generators[g].name == oracle.action.generators[g].name);
    CHECK(loaded.generators[g].map.matrix() == oracle.action.generators[g].map.matrix());
    CHECK(sup_distance(loaded.generators[g].map.delta(),
                       oracle.action.generators[g].map.delta()) == 0.0);
  }
  const GridFunction truth = GridFunction::load(demo_dir + "/phi2_true.scgf");
  CHECK(sup_distance(truth, oracle.phi_true) == 0.0);

  const RunResult solve =
      run_cli("solve --spec '" + demo_dir + "/action.txt' --res 64 -o '" + out_dir + "'");
  REQUIRE(solve.exit_code == 0);
  CHECK(solve.contains("CERTIFIED"));

  const GridFunction phi2 = GridFunction::load(out_dir + "/phi2.scgf");
  CHECK(sup_distance(phi2, truth) <= 2e-3);

  // the verifier accepts the certified candidate
  const RunResult verify = run_cli("verify --spec '" + demo_dir + "/action.txt' --psi '" +
                                   out_dir + "/phi2.scgf' --tol 1e-2");
  CHECK(verify.exit_code == 0);
  CHECK(verify.contains("identity"));
}

TEST_CASE("explicit word lists reach the solver", "[cli]") {
  testutil::TempDir tmp("cli_words");
  const std::string out_dir = tmp.file("out");

  const RunResult solve = run_cli(
      "solve --preset conjugated --eps 0.03 --res 32 --words 'a b' --words 'b^-1 a^-1' -o '" +
      out_dir + "'");
  REQUIRE(solve.exit_code == 0);
  CHECK(solve.contains("CERTIFIED"));
  CHECK(solve.contains("a b"));
  CHECK(solve.contains("b^-1 a^-1"));
}

TEST_CASE("demo twist is rejected by solver and verifier", "[cli]") {
  testutil::TempDir tmp("cli_twist");
  const std::string demo_dir = tmp.file("demo");
  const std::string out_dir = tmp.file("out");

  const RunResult demo = run_cli("demo twist --eps 0.05 --res 256 -o '" + demo_dir + "'");
  REQUIRE(demo.exit_code == 0);

  const RunResult solve =
      run_cli("solve --spec '" + demo_dir + "/action.txt' --res 256 -o '" + out_dir + "'");
  REQUIRE(solve.exit_code == 3);
  CHECK(solve.contains("NO_SEMICONJUGACY"));

  std::ifstream csv(out_dir + "/residuals.csv");
  REQUIRE(csv.good());
  bool any_fail = false;
  for (std::string line; std::getline(csv, line);) {
    if (!line.empty() && line.substr(line.size() - 2) == ",0") any_fail = true;
  }
  CHECK(any_fail);

  const RunResult verify = run_cli("verify --spec '" + demo_dir + "/action.txt' --psi '" +
                                   out_dir + "/phi2.scgf'");
  CHECK(verify.exit_code == 3);
}
