#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli() {
  const char* env = std::getenv("HSDM_CLI");
  REQUIRE_MESSAGE(env != nullptr, "HSDM_CLI must point at the built binary");
  return env;
}

std::string spec_dir() {
  const char* env = std::getenv("HSDM_SPEC_DIR");
  return env ? env : "specs";
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run(const std::string& args) {
  const std::string tmp = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                          "/hsdm_cli_out_" + std::to_string(::getpid()) + ".txt";
  const std::string cmd = cli() + " " + args + " > " + tmp + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(tmp);
  std::ostringstream buf;
  buf << f.rdbuf();
  r.output = buf.str();
  std::remove(tmp.c_str());
  return r;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("solve writes a CSV trajectory") {
  auto r = run("solve --spec " + spec_dir() + "/quadratic_ball.json --steps 1000");
  CHECK(r.exit_code == 0);
  CHECK(r.output.rfind("n,lambda,x0,x1,residual\n", 0) == 0);
  CHECK(count_lines(r.output) >= 1001 + 1);  // header + 1001 rows

  auto r0 = run("solve --spec " + spec_dir() + "/quadratic_ball.json --steps 0");
  CHECK(r0.exit_code == 0);
  CHECK(count_lines(r0.output) >= 2);  // header + the initial point
  CHECK(count_lines(r0.output) <= 3);
}

TEST_CASE("solve supports the other schemes") {
  for (const char* scheme : {"projgrad", "viscosity", "viscosity-post"}) {
    auto r = run("solve --spec " + spec_dir() + "/quadratic_ball.json --steps 50 --scheme " +
                 scheme);
    CHECK(r.exit_code == 0);
  }
  auto c = run("solve --spec " + spec_dir() + "/two_halfspaces.json --steps 50 --scheme cyclic");
  CHECK(c.exit_code == 0);
}

TEST_CASE("certify toy single mode reports the exact tower value") {
  // d = 1 instance: identity f and chi with n = 2, i0 = 0 gives
  // 4096^5 = 2^60 exactly
  auto r = run("certify --spec " + spec_dir() +
               "/two_halfspaces.json --mode single --toy --epsilon 1.0");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"1152921504606846976\"") != std::string::npos);
  CHECK(r.output.find("bound_evaluated") != std::string::npos);
}

TEST_CASE("certify single without toy on a 1/n schedule exits 4") {
  // the shifted bound needs a phi2 modulus, which this schedule lacks
  auto r = run("certify --spec " + spec_dir() +
               "/two_halfspaces.json --mode single --epsilon 0.5");
  CHECK(r.exit_code == 4);
}

TEST_CASE("certify asy mode evaluates finitely") {
  auto r = run("certify --spec " + spec_dir() +
               "/two_halfspaces.json --mode asy --epsilon 0.2");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("bound_evaluated") != std::string::npos);
}

TEST_CASE("certify full mode produces a symbolic or finite certificate") {
  auto r = run("certify --spec " + spec_dir() +
               "/quadratic_ball.json --mode full --epsilon 1.0 --g n+1");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"status\"") != std::string::npos);
  CHECK(r.output.find("delta=") != std::string::npos);
}

TEST_CASE("verify suites pass on the shipped instances") {
  auto r = run("verify --spec " + spec_dir() + "/quadratic_ball.json --suite all");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("corrupted spec exits 2") {
  const std::string tmp = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                          "/hsdm_bad_spec.json";
  {
    std::ofstream f(tmp);
    f << "{ \"dimension\": 0 }";
  }
  auto r = run("solve --spec " + tmp);
  CHECK(r.exit_code == 2);
  std::remove(tmp.c_str());

  auto missing = run("solve --spec /nonexistent/path.json");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("determinism: identical flags give identical reports") {
  const std::string args = "verify --spec " + spec_dir() +
                           "/quadratic_ball.json --suite lemmas --seed 11";
  auto a = run(args);
  auto b = run(args);
  CHECK(a.exit_code == b.exit_code);
  CHECK(a.output == b.output);
}
