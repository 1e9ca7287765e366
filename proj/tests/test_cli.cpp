#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

TEST_CASE("exit codes are the documented contract", "[cli]") {
  auto run = [](const std::string& args) {
    const std::string cmd = std::string(CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  // geodesic -> 0
  CHECK(run("connect " SCENARIO_DIR "/flat-lightlike.scn --out /tmp/cli-out") == 0);
  // obstructed -> 2 (small schedule, the certificate decides)
  CHECK(run("connect " SCENARIO_DIR "/slit-plane.scn --k-max 2 --out /tmp/cli-out") == 2);
  // errors -> 1
  CHECK(run("connect /nonexistent.scn --out /tmp/cli-out") == 1);
  CHECK(run("verify " SCENARIO_DIR "/flat-lightlike.scn --out /tmp/cli-out") == 1);  // no --path
  // obstruct-only entry point
  CHECK(run("obstruct " SCENARIO_DIR "/slit-plane.scn --out /tmp/cli-out") == 2);
  CHECK(run("obstruct " SCENARIO_DIR "/flat-lightlike.scn --out /tmp/cli-out") == 0);
  // gnuplot layout lands in .dat files
  CHECK(run("connect " SCENARIO_DIR
            "/stationary-flat.scn --emit gnuplot-data --out /tmp/cli-out") == 0);
  std::ifstream dat("/tmp/cli-out/stationary-flat.path.dat");
  std::string first;
  REQUIRE(std::getline(dat, first));
  CHECK(first.rfind("# s", 0) == 0);
}
