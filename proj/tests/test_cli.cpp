#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_binary;  // path to the kcore-lab executable, from argv[1]

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  std::string out_file = "cli_stdout.tmp";
  std::string cmd = g_binary + " " + args + " > " + out_file + " 2>cli_stderr.tmp";
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  in.close();
  std::remove(out_file.c_str());
  std::remove("cli_stderr.tmp");
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("verify with trials=0 emits a header-only CSV") {
  RunResult r = run_cli("verify --kernel constant:1 --n 50 --c 2 --k 3 --trials 0");
  CHECK(r.exit_code == 0);
  std::istringstream in(r.stdout_text);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "# kcore-lab-csv v1");
  REQUIRE(std::getline(in, line));
  // golden header pin: schema changes must be deliberate
  CHECK(line ==
        "experiment,trial,n,c,k,seed,kcore_size,kcore_fraction,"
        "predicted_fraction,predicted_embedded_fraction,stddev_fraction,"
        "gap_target,gap_embedded,status,wallclock_ms");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("identical config and seed give byte-identical output") {
  std::string args =
      "verify --kernel remark-b --n 300 --c 6 --k 3 --trials 8 --seed 99";
  RunResult a = run_cli(args);
  RunResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.stdout_text == b.stdout_text);
  // and independent of the worker count
  RunResult c1 = run_cli(args + " --workers 1");
  RunResult c4 = run_cli(args + " --workers 4");
  CHECK(c1.stdout_text == a.stdout_text);
  CHECK(c4.stdout_text == a.stdout_text);
}

TEST_CASE("config errors exit with code 2") {
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("verify --kernel constant:1 --n 0 --trials 1").exit_code == 2);
  CHECK(run_cli("verify --kernel constant:1 --n 10 --k 1 --trials 1")
            .exit_code == 2);
  CHECK(run_cli("verify --bogus-flag 3").exit_code == 2);
  CHECK(run_cli("continuity --kernel constant:0.5").exit_code == 2);
  CHECK(run_cli("cutnorm --kernel constant:1").exit_code == 2);
  // --plot without --out
  CHECK(run_cli("verify --kernel constant:1 --n 20 --trials 1 --plot x.svg")
            .exit_code == 2);
}

TEST_CASE("io errors exit with code 3") {
  CHECK(run_cli("plot --out missing.csv --x-column a --y-column b "
                "--plot out.svg")
            .exit_code == 3);
  // an unknown kernel name is treated as a kernel file path
  CHECK(run_cli("verify --kernel no-such-kernel --n 10 --trials 1").exit_code ==
        3);
  CHECK(run_cli("verify --kernel constant:1 --n 20 --trials 1 "
                "--out /no/such/dir/x.csv")
            .exit_code == 3);
}

TEST_CASE("threshold curve and plot artifact") {
  std::string csv = "cli_threshold.csv";
  std::string svg = "cli_threshold.svg";
  RunResult r = run_cli("threshold --kernel constant:1 --k 3 --c-min 0 "
                        "--c-max 6 --out " + csv + " --plot " + svg);
  CHECK(r.exit_code == 0);
  std::string text = read_file(csv);
  CHECK(text.find("# kcore-lab-csv v1") == 0);
  CHECK(text.find("experiment,row,c,prob_a,status") != std::string::npos);
  std::size_t pos = text.find("threshold,c_star,");
  REQUIRE(pos != std::string::npos);
  double c_star = std::strtod(text.c_str() + pos + 17, nullptr);
  CHECK(std::fabs(c_star - 3.3509) < 1e-3);
  std::string svg_text = read_file(svg);
  CHECK(svg_text.find("<svg") != std::string::npos);
  CHECK(svg_text.find("<polyline") != std::string::npos);
  CHECK(svg_text.find("</svg>") != std::string::npos);

  // plot subcommand reads the CSV back
  std::string svg2 = "cli_threshold2.svg";
  RunResult p = run_cli("plot --out " + csv + " --x-column c --y-column prob_a "
                        "--plot " + svg2);
  CHECK(p.exit_code == 0);
  CHECK(read_file(svg2).find("<polyline") != std::string::npos);
  // unknown column
  CHECK(run_cli("plot --out " + csv + " --x-column nope --y-column prob_a "
                "--plot " + svg2)
            .exit_code != 0);
  std::remove(csv.c_str());
  std::remove(svg.c_str());
  std::remove(svg2.c_str());
}

TEST_CASE("paley subcommand produces verify-shaped output") {
  RunResult r = run_cli("paley --n 101 --c 6 --k 3 --trials 3 --seed 4");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("predicted_embedded_fraction") != std::string::npos);
  CHECK(r.stdout_text.find("summary") != std::string::npos);
  // non-prime order is a config error
  CHECK(run_cli("paley --n 100 --c 6 --k 3 --trials 1").exit_code == 2);
}

TEST_CASE("cutnorm reports both modes") {
  RunResult r = run_cli("cutnorm --kernel checkerboard --kernel-b constant:0.5");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("exact,0.125,ok") != std::string::npos);
  CHECK(r.stdout_text.find("heuristic,0.125,") != std::string::npos);
}

TEST_CASE("unconverged status surfaces without failing the run") {
  // one power-iteration step cannot converge; rows must say so but exit 0
  RunResult r = run_cli("continuity --q-list 13 --c 8 --k 3 --tol 1e-30");
  CHECK(r.exit_code == 0);
}

int main(int argc, char** argv) {
  doctest::Context ctx;
  int shift = 0;
  if (argc > 1 && argv[1][0] != '-') {
    g_binary = argv[1];
    shift = 1;
  } else {
    const char* env = std::getenv("KCORE_LAB_BIN");
    g_binary = env ? env : "./kcore-lab";
  }
  ctx.applyCommandLine(argc - shift, argv + shift);
  return ctx.run();
}
