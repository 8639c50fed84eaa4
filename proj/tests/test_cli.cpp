#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cct/data_pipeline.hpp"
#include "cct/special_functions.hpp"
#include "doctest.h"
#include "helpers.hpp"

#ifdef _WIN32
#error "the CLI tests drive the binary through POSIX shell redirection"
#endif
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

const fs::path kDir = fs::path("/tmp") / "cct_cli_tests";

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// run the installed binary with shell redirection, capturing both streams
RunResult run_cli(const std::string& args) {
  fs::create_directories(kDir);
  const std::string out_path = (kDir / "stdout.txt").string();
  const std::string err_path = (kDir / "stderr.txt").string();
  const std::string cmd = std::string(CCT_BIN_PATH) + " " + args + " > " +
                          out_path + " 2> " + err_path;
  const int rc = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  res.out = test_helpers::read_file(out_path);
  res.err = test_helpers::read_file(err_path);
  return res;
}

std::string file_in_dir(const std::string& name, const std::string& body) {
  fs::create_directories(kDir);
  const std::string path = (kDir / name).string();
  std::ofstream f(path, std::ios::binary);
  f << body;
  return path;
}

std::string path_of(const std::string& name) { return (kDir / name).string(); }

}  // namespace

TEST_CASE("cli combine prints a full precision report") {
  const std::string input = file_in_dir("p3.txt", "0.01\n0.5\n0.5\n");
  const RunResult r = run_cli("combine --input " + input + " --method cct");
  REQUIRE(r.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("method").get<std::string>() == "CCT");
  CHECK(j.at("statistic").get<double>() ==
        doctest::Approx(10.606838651257986).epsilon(1e-12));
  CHECK(j.at("p_value").get<double>() ==
        doctest::Approx(cct::cauchy_tail(10.606838651257986)).epsilon(1e-12));
  CHECK(j.at("calibration").get<std::string>() == "ANALYTIC");
  CHECK_FALSE(j.at("boundary_warning").get<bool>());

  // every other method runs off the same file
  for (const std::string m : {"fisher", "pearson", "stouffer", "edgington"}) {
    const RunResult rm = run_cli("combine --input " + input + " --method " + m);
    CHECK(rm.exit_code == 0);
  }
  const RunResult bad = run_cli("combine --input " + input + " --method tippett");
  CHECK(bad.exit_code == 1);
}

TEST_CASE("cli combine reads csv with a p column") {
  const std::string plain = file_in_dir("pp.txt", "0.01\n0.5\n0.5\n");
  const std::string csv =
      file_in_dir("pp.csv", "gene,p\ng1,0.01\ng2,0.5\ng3,0.5\n");
  const RunResult a = run_cli("combine --input " + plain);
  const RunResult b = run_cli("combine --input " + csv);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out == b.out);
  const std::string nop = file_in_dir("noq.csv", "gene,q\ng1,0.5\n");
  CHECK(run_cli("combine --input " + nop).exit_code == 1);
  const std::string junk = file_in_dir("junk.txt", "0.1\nbanana\n");
  CHECK(run_cli("combine --input " + junk).exit_code == 1);
}

TEST_CASE("cli combine warns about boundary p-values") {
  const std::string input = file_in_dir("pz.txt", "0\n0.5\n");
  const RunResult r = run_cli("combine --input " + input);
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("clamped") != std::string::npos);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("boundary_warning").get<bool>());
}

TEST_CASE("cli combine artifact and manifest") {
  const std::string input = file_in_dir("pa.txt", "0.2\n0.4\n");
  const std::string out = path_of("combine_out.json");
  const RunResult r = run_cli("combine --input " + input + " --method fisher" +
                              " --output " + out);
  REQUIRE(r.exit_code == 0);
  const std::string body1 = test_helpers::read_file(out);
  const nlohmann::json man =
      nlohmann::json::parse(test_helpers::read_file(out + ".manifest.json"));
  CHECK(man.at("command").get<std::string>() == "combine");
  CHECK(man.at("config").at("method").get<std::string>() == "fisher");
  CHECK(man.at("library_version").get<std::string>() == "1.0.0");
  CHECK(man.at("wall_time_seconds").get<double>() >= 0.0);
  CHECK_FALSE(man.contains("seed"));
  // rerun: the artifact itself is byte stable
  REQUIRE(run_cli("combine --input " + input + " --method fisher --output " +
                  out)
              .exit_code == 0);
  CHECK(test_helpers::read_file(out) == body1);
}

TEST_CASE("cli exit codes") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("combine").exit_code == 1);               // missing --input
  CHECK(run_cli("frobnicate").exit_code == 1);            // unknown subcommand
  CHECK(run_cli("combine --input /tmp/cct_cli_absent.txt").exit_code == 2);
  const std::string out = path_of("never.json");
  CHECK(run_cli("size --model pentagon --m 4 --seed 1 --output " + out)
            .exit_code == 1);
}

TEST_CASE("cli config file supplies defaults") {
  const std::string input = file_in_dir("pc.txt", "0.2\n0.4\n");
  const std::string cfg = file_in_dir("cfg.ini", "[combine]\nmethod=fisher\n");
  const RunResult r =
      run_cli("--config " + cfg + " combine --input " + input);
  REQUIRE(r.exit_code == 0);
  CHECK(nlohmann::json::parse(r.out).at("method").get<std::string>() ==
        "FISHER");
}

TEST_CASE("cli calibrate-tail artifacts are worker independent") {
  const std::string out = path_of("tail.csv");
  const std::string base = "calibrate-tail --model ar1 --m 3 --rho 0.5 "
                           "--replicates 4000 --seed 9 --output " + out;
  REQUIRE(run_cli(base + " --workers 1").exit_code == 0);
  const std::string w1 = test_helpers::read_file(out);
  REQUIRE(run_cli(base + " --workers 5").exit_code == 0);
  CHECK(test_helpers::read_file(out) == w1);
  const std::vector<std::string> lines = test_helpers::split_lines(w1);
  CHECK(lines[0] == "t,empirical,reference,stderr");
  CHECK(lines.size() == 41);

  // the .json spelling swaps the body format and the manifest records the seed
  const std::string jout = path_of("tail.json");
  REQUIRE(run_cli("calibrate-tail --model mixed --family fgm --theta 0.5 "
                  "--m 6 --replicates 2000 --seed 12 --output " + jout)
              .exit_code == 0);
  const nlohmann::json body =
      nlohmann::json::parse(test_helpers::read_file(jout));
  CHECK(body.at("replicates").get<std::int64_t>() == 2000);
  CHECK(body.at("t_grid").size() == 40);
  const nlohmann::json man =
      nlohmann::json::parse(test_helpers::read_file(jout + ".manifest.json"));
  CHECK(man.at("seed").get<std::uint64_t>() == 12);
  CHECK(man.at("config").at("family").get<std::string>() == "fgm");
}

TEST_CASE("cli size and power smoke") {
  const std::string sout = path_of("size.json");
  const RunResult s =
      run_cli("size --model equal-corr --m 5 --rho 0.2 --alpha 0.05 "
              "--replicates 5000 --seed 3 --output " + sout);
  REQUIRE(s.exit_code == 0);
  const nlohmann::json sj = nlohmann::json::parse(test_helpers::read_file(sout));
  CHECK(sj.at("size").get<double>() > 0.0);
  CHECK(sj.at("size").get<double>() < 0.2);
  CHECK(sj.at("mc_stderr").get<double>() > 0.0);

  const std::string pout = path_of("power.csv");
  const RunResult p =
      run_cli("power --model ar1 --rho 0.2 --m-grid 50,100 --replicates 400 "
              "--support 0.2 --magnitude 1.5 --seed 11 --output " + pout);
  REQUIRE(p.exit_code == 0);
  CHECK(p.out.find("m=50") != std::string::npos);
  CHECK(p.out.find("m=100") != std::string::npos);
  const std::vector<std::string> lines =
      test_helpers::split_lines(test_helpers::read_file(pout));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "m,power_cct,power_max,stderr");
}

TEST_CASE("cli check-copula reports decay verdicts") {
  const std::string out = path_of("cert.csv");
  const RunResult ok = run_cli(
      "check-copula --family fgm --theta 0.5 --regime fixed --m 10 --output " +
      out);
  REQUIRE(ok.exit_code == 0);
  CHECK(ok.out.find("joint scaled sequence strictly decreasing") !=
        std::string::npos);
  CHECK(ok.out.find("cross scaled sequence strictly decreasing") !=
        std::string::npos);
  const std::vector<std::string> lines =
      test_helpers::split_lines(test_helpers::read_file(out));
  CHECK(lines[0] == "t,m,delta_t,p_joint,p_cross,scaled_joint,scaled_cross");
  CHECK(lines.size() == 6);  // default five grid points

  // the known counterexample is reported, not hidden
  const RunResult amh = run_cli(
      "check-copula --family amh --theta 1 --regime fixed --m 10 --output " +
      path_of("cert_amh.csv"));
  REQUIRE(amh.exit_code == 0);
  CHECK(amh.out.find("joint scaled sequence NOT decreasing") !=
        std::string::npos);

  // divergent regime writes the growth exponent into the manifest
  const std::string dout = path_of("cert_div.csv");
  REQUIRE(run_cli("check-copula --family product --regime divergent "
                  "--gamma 0.5 --output " + dout)
              .exit_code == 0);
  const nlohmann::json man =
      nlohmann::json::parse(test_helpers::read_file(dout + ".manifest.json"));
  CHECK(man.at("config").at("gamma").get<double>() == 0.5);
}

TEST_CASE("cli analyze pipeline") {
  const cct::ExpressionDataset ds =
      cct::synth_expression_fixture(25, 10, 10, 4, 2.0, 3.0, 31);
  const std::string data = path_of("expr.csv");
  const std::string labels = path_of("labels.csv");
  fs::create_directories(kDir);
  cct::write_expression_csv(ds, data, labels);
  std::string sets_body = "sig";
  for (int g = 1; g <= 8; ++g) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "\tG%04d", g);
    sets_body += buf;
  }
  sets_body += "\nrest\tG0010\tG0011\tG0012\n";
  const std::string sets = file_in_dir("sets.tsv", sets_body);

  const std::string out = path_of("report.json");
  const std::string pg = path_of("per_gene.csv");
  const std::string base = "analyze --data " + data + " --labels " + labels +
                           " --sets " + sets + " --minp-replicates 300 " +
                           "--seed 5 --output " + out;
  const RunResult both = run_cli(base);
  REQUIRE(both.exit_code == 0);
  const nlohmann::json arr =
      nlohmann::json::parse(test_helpers::read_file(out));
  REQUIRE(arr.size() == 2);
  CHECK(arr[0].at("gene_set").get<std::string>() == "sig");
  CHECK(arr[0].at("m_used").get<std::int64_t>() == 8);
  CHECK(arr[1].at("gene_set").get<std::string>() == "rest");
  CHECK(both.out.find("sig:") != std::string::npos);

  // worker count must not change the artifact
  const std::string body1 = test_helpers::read_file(out);
  REQUIRE(run_cli(base + " --workers 7").exit_code == 0);
  CHECK(test_helpers::read_file(out) == body1);

  // single-set filter plus the per-gene table
  const RunResult one = run_cli(base + " --set sig --per-gene " + pg);
  REQUIRE(one.exit_code == 0);
  const std::vector<std::string> pgl =
      test_helpers::split_lines(test_helpers::read_file(pg));
  CHECK(pgl[0] == "gene_id,p_value");
  CHECK(pgl.size() == 9);
  // but it is refused when several sets are in play
  CHECK(run_cli(base + " --per-gene " + pg).exit_code == 1);
  // and a missing set name is an input error
  CHECK(run_cli(base + " --set nope").exit_code == 1);
}
