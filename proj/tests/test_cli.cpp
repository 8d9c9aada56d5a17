// End-to-end checks of the installed binary: exit codes and artifact layout.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "ecomplex/io.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "ok: " << what << "\n";
  } else {
    std::cout << "FAILED: " << what << "\n";
    ++failures;
  }
}

int run(const std::string& args) {
  const std::string cmd = std::string(ECOMPLEX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  const fs::path base = fs::temp_directory_path() / "ecomplex_cli_test";
  fs::remove_all(base);
  fs::create_directories(base);

  check(run("pipeline --fixture triangular --metric eci -o " + (base / "tri").string()) == 0,
        "fixture pipeline exits 0");
  check(fs::exists(base / "tri" / "eci_2000.csv"), "eci_2000.csv exists");
  check(fs::exists(base / "tri" / "manifest.json"), "manifest exists");

  check(run("pipeline --trade /missing.csv -o " + (base / "x").string()) == 1,
        "missing trade CSV exits 1");

  // Degenerate spectrum: single-product trade data.
  ecomplex::write_file((base / "one.csv").string(),
                       "year,country,product,value\n2000,A,p,1\n2000,B,p,2\n2000,C,p,3\n");
  check(run("pipeline --trade " + (base / "one.csv").string() + " --metric eci -o " +
            (base / "deg").string()) == 2,
        "degenerate spectrum exits 2");

  check(run("eci --fixture triangular -o " + (base / "eci").string()) == 0, "eci subcommand");
  check(run("fitness --fixture nested --method fcm --zero-floor 1e-3 --max-iter 10000 -o " +
            (base / "fit").string()) == 0,
        "fitness subcommand");
  check(run("compare --left-dir " + (base / "tri").string() + " --left-metric eci --right-dir " +
            (base / "eci").string() + " --right-metric eci -o " +
            (base / "cmp" / "rho.csv").string()) == 0,
        "compare subcommand");
  check(run("badcommand") != 0, "unknown subcommand fails");

  ecomplex::write_file((base / "run.ini").string(),
                       "[pipeline]\nfixture=triangular\nmetric=eci\noutput=" +
                           (base / "cfg").string() + "\n");
  check(run("--config " + (base / "run.ini").string() + " pipeline") == 0,
        "config file drives the pipeline");
  check(fs::exists(base / "cfg" / "eci_2000.csv"), "config-file run wrote outputs");

  fs::remove_all(base);
  if (failures) std::cout << failures << " failures\n";
  return failures == 0 ? 0 : 1;
}
