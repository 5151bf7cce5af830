#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "helpers.hpp"
#include "msfct/io.hpp"

using namespace msfct;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MSFCT_CLI_PATH;

std::string base_config(const std::string& out_dir) {
  return "[run]\n"
         "seed = 7\n"
         "methods = [\"fbp\", \"mbir\"]\n"
         "write_png = false\n"
         "output_dir = \"" + out_dir + "\"\n"
         "\n"
         "[phantom]\n"
         "kind = \"ellipsoids\"\n"
         "nx = 16\n"
         "ny = 16\n"
         "nz = 2\n"
         "\n"
         "[geometry]\n"
         "n_views = 24\n"
         "\n"
         "[synthesize]\n"
         "view_subsample = 2\n"
         "noise_percent = 1.0\n";
}

std::string msf_config(const std::string& out_dir) {
  return "[run]\n"
         "seed = 7\n"
         "methods = [\"msf\"]\n"
         "write_png = false\n"
         "output_dir = \"" + out_dir + "\"\n"
         "\n"
         "[phantom]\n"
         "kind = \"ellipsoids\"\n"
         "nx = 16\n"
         "ny = 16\n"
         "nz = 4\n"
         "\n"
         "[geometry]\n"
         "n_views = 16\n"
         "\n"
         "[synthesize]\n"
         "view_subsample = 2\n"
         "noise_percent = 1.0\n"
         "\n"
         "[pnp]\n"
         "max_iter = 2\n"
         "init = \"zero\"\n"
         "cg_max_iter = 10\n"
         "\n"
         "[msf]\n"
         "patch_size = 3\n"
         "search_radius = 3\n"
         "step = 2\n";
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty()) lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

TEST_CASE("compare writes the documented artifact set") {
  const std::string dir = testutil::scratch_dir("cli_compare");
  const std::string cfg = dir + "/exp.toml";
  const std::string out = dir + "/out";
  testutil::spit(cfg, base_config(out));

  auto r = testutil::run_cli(kCli, "compare --config " + cfg, "cli_compare_run");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("wrote") != std::string::npos);
  CHECK(r.out.find("fbp") != std::string::npos);
  CHECK(r.out.find("mbir") != std::string::npos);

  auto lines = csv_lines(testutil::slurp(out + "/metrics.csv"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "method,status,nrmse,psnr_db,ssim");
  auto row = split_csv(lines[1]);
  REQUIRE(row.size() == 5);
  CHECK(row[0] == "fbp");
  CHECK(row[1] == "ok");
  CHECK(std::stod(row[2]) > 0.0);
  CHECK(std::stod(row[3]) > 0.0);
  CHECK(split_csv(lines[2])[0] == "mbir");

  auto mj = nlohmann::json::parse(testutil::slurp(out + "/metrics.json"));
  REQUIRE(mj.contains("methods"));
  CHECK(mj["methods"].size() == 2);
  CHECK(mj["methods"][0]["method"] == "fbp");
  CHECK(mj["methods"][0]["status"] == "ok");

  auto man = nlohmann::json::parse(testutil::slurp(out + "/run_manifest.json"));
  CHECK(man["tool_version"] == "0.1.0");
  CHECK(man["subcommand"] == "compare");
  CHECK(std::string(man["config_hash"]).rfind("fnv1a64:", 0) == 0);
  CHECK(man["seed"] == 7);
  CHECK(man["effective"].contains("msf.sigma_xy"));
  CHECK(man["outputs"].size() >= 10);

  for (const char* f : {"truth.raw", "truth.raw.json", "sino.raw", "sino.raw.json",
                        "weights.raw", "weights.raw.json", "vol_fbp.raw",
                        "vol_mbir.raw"})
    CHECK(fs::exists(out + "/" + f));
  CHECK(!fs::exists(out + "/trace_fbp.csv"));   // direct methods have no trace
  CHECK(!fs::exists(out + "/png"));             // write_png = false

  // the written truth round-trips with the declared shape
  VolumeD truth = read_volume(out + "/truth.raw");
  CHECK(truth.nx == 16);
  CHECK(truth.ny == 16);
  CHECK(truth.nz == 2);
}

TEST_CASE("compare metrics are byte-identical across thread counts") {
  const std::string dir = testutil::scratch_dir("cli_threads");
  const std::string cfg = dir + "/exp.toml";
  testutil::spit(cfg, base_config(dir + "/unused"));

  auto r1 = testutil::run_cli(
      kCli, "compare --config " + cfg + " --output-dir " + dir + "/t1 --threads 1",
      "cli_threads_1");
  auto r2 = testutil::run_cli(
      kCli, "compare --config " + cfg + " --output-dir " + dir + "/t2 --threads 2",
      "cli_threads_2");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  const std::string a = testutil::slurp(dir + "/t1/metrics.csv");
  const std::string b = testutil::slurp(dir + "/t2/metrics.csv");
  CHECK(!a.empty());
  CHECK(a == b);
}

TEST_CASE("the seed flag overrides the config seed end to end") {
  const std::string dir = testutil::scratch_dir("cli_seed");
  const std::string cfg = dir + "/exp.toml";
  testutil::spit(cfg, base_config(dir + "/unused"));

  auto r1 = testutil::run_cli(
      kCli, "compare --config " + cfg + " --output-dir " + dir + "/a", "cli_seed_a");
  auto r2 = testutil::run_cli(
      kCli, "compare --config " + cfg + " --output-dir " + dir + "/b --seed 8",
      "cli_seed_b");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);

  auto ma = nlohmann::json::parse(testutil::slurp(dir + "/a/run_manifest.json"));
  auto mb = nlohmann::json::parse(testutil::slurp(dir + "/b/run_manifest.json"));
  CHECK(ma["seed"] == 7);
  CHECK(mb["seed"] == 8);
  CHECK(testutil::slurp(dir + "/a/metrics.csv") !=
        testutil::slurp(dir + "/b/metrics.csv"));
}

TEST_CASE("msf run records sigma overrides and writes a residual trace") {
  const std::string dir = testutil::scratch_dir("cli_msf");
  const std::string cfg = dir + "/exp.toml";
  const std::string out = dir + "/out";
  testutil::spit(cfg, msf_config(out));

  auto r = testutil::run_cli(kCli, "msf --config " + cfg + " --sigma-xy 0.123",
                             "cli_msf_run");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out + "/vol_msf.raw"));

  auto man = nlohmann::json::parse(testutil::slurp(out + "/run_manifest.json"));
  CHECK(std::stod(man["effective"]["msf.sigma_xy"].get<std::string>()) == 0.123);
  CHECK(std::stod(man["effective"]["msf.sigma_yz"].get<std::string>()) == 0.05);

  auto lines = csv_lines(testutil::slurp(out + "/trace_msf.csv"));
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "iteration,primal,dual");
  // max_iter = 2 cannot satisfy the residual stop rule: trace has both rows
  // and the CLI warns
  CHECK(lines.size() == 3);
  CHECK(r.err.find("max_iter") != std::string::npos);
}

TEST_CASE("pnp-bm4d accepts a sigma override") {
  const std::string dir = testutil::scratch_dir("cli_bm4d");
  const std::string cfg = dir + "/exp.toml";
  const std::string out = dir + "/out";
  std::string text = msf_config(out);
  text.replace(text.find("\"msf\""), 5, "\"pnp-bm4d\"");
  testutil::spit(cfg, text);

  auto r = testutil::run_cli(kCli, "pnp-bm4d --config " + cfg + " --sigma 0.2",
                             "cli_bm4d_run");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out + "/vol_pnp_bm4d.raw"));
  CHECK(fs::exists(out + "/trace_pnp_bm4d.csv"));
  auto man = nlohmann::json::parse(testutil::slurp(out + "/run_manifest.json"));
  CHECK(std::stod(man["effective"]["bm4d.sigma"].get<std::string>()) == 0.2);
}

TEST_CASE("dry run validates without writing anything") {
  const std::string dir = testutil::scratch_dir("cli_dry");
  const std::string cfg = dir + "/exp.toml";
  const std::string out = dir + "/out";
  testutil::spit(cfg, base_config(out));

  auto r = testutil::run_cli(kCli, "compare --config " + cfg + " --dry-run",
                             "cli_dry_ok");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("config ok") != std::string::npos);
  CHECK(!fs::exists(out));

  // a bad config still fails under --dry-run
  testutil::spit(cfg, base_config(out) + "bogus_key = 1\n");
  r = testutil::run_cli(kCli, "compare --config " + cfg + " --dry-run",
                        "cli_dry_bad");
  CHECK(r.exit_code == 2);
}

TEST_CASE("error reporting and exit codes") {
  const std::string dir = testutil::scratch_dir("cli_errors");
  const std::string out = dir + "/out";

  // missing config file -> io error
  auto r = testutil::run_cli(kCli, "compare --config " + dir + "/absent.toml",
                             "cli_err_missing");
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("kind=io") != std::string::npos);

  // unknown key -> config error naming the key
  testutil::spit(dir + "/unknown.toml", base_config(out) + "\n[run2]\nx = 1\n");
  r = testutil::run_cli(kCli, "compare --config " + dir + "/unknown.toml",
                        "cli_err_unknown");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("kind=config") != std::string::npos);
  CHECK(r.err.find("run2.x") != std::string::npos);

  // invalid value -> config error naming the field
  std::string bad = base_config(out);
  const std::string needle = "view_subsample = 2";
  bad.replace(bad.find(needle), needle.size(), "view_subsample = 0");
  testutil::spit(dir + "/badval.toml", bad);
  r = testutil::run_cli(kCli, "compare --config " + dir + "/badval.toml",
                        "cli_err_badval");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("synthesize.view_subsample") != std::string::npos);

  // malformed syntax -> config error with the line number
  testutil::spit(dir + "/syntax.toml", "not a config\n");
  r = testutil::run_cli(kCli, "compare --config " + dir + "/syntax.toml",
                        "cli_err_syntax");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("config line 1") != std::string::npos);

  // duplicate key -> config error
  testutil::spit(dir + "/dup.toml", "[run]\nseed = 1\nseed = 2\n");
  r = testutil::run_cli(kCli, "compare --config " + dir + "/dup.toml",
                        "cli_err_dup");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("duplicate key") != std::string::npos);

  // unknown subcommand / flag -> usage error
  r = testutil::run_cli(kCli, "frobnicate", "cli_err_sub");
  CHECK(r.exit_code == 2);
  r = testutil::run_cli(kCli, "compare --no-such-flag", "cli_err_flag");
  CHECK(r.exit_code == 2);

  // metrics without its required inputs
  r = testutil::run_cli(kCli, "metrics", "cli_err_metrics");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("estimate") != std::string::npos);

  // a numerical failure inside a solver agent -> exit 3
  std::string huge_patch = msf_config(out);
  const std::string pn = "patch_size = 3";
  huge_patch.replace(huge_patch.find(pn), pn.size(), "patch_size = 9");
  testutil::spit(dir + "/hugepatch.toml", huge_patch);
  r = testutil::run_cli(kCli, "msf --config " + dir + "/hugepatch.toml",
                        "cli_err_patch");
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("kind=numerical") != std::string::npos);
  CHECK(r.err.find("bm3d") != std::string::npos);
}

TEST_CASE("file-driven pipeline: phantom, project, reconstruct, score") {
  const std::string dir = testutil::scratch_dir("cli_pipe");
  const std::string cfg = dir + "/exp.toml";
  testutil::spit(cfg, base_config(dir + "/unused"));

  auto r = testutil::run_cli(
      kCli, "phantom --config " + cfg + " --output-dir " + dir + "/ph", "cli_pipe_ph");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir + "/ph/phantom.raw"));
  CHECK(!fs::exists(dir + "/ph/png"));  // write_png = false

  r = testutil::run_cli(
      kCli, "project --config " + cfg + " --output-dir " + dir + "/pr", "cli_pipe_pr");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir + "/pr/sino.raw"));
  CHECK(fs::exists(dir + "/pr/weights.raw"));
  auto man = nlohmann::json::parse(testutil::slurp(dir + "/pr/run_manifest.json"));
  CHECK(man["effective"].contains("noise_sigma"));

  r = testutil::run_cli(kCli,
                        "fbp --config " + cfg + " --sinogram " + dir +
                            "/pr/sino.raw --weights " + dir +
                            "/pr/weights.raw --output-dir " + dir + "/re",
                        "cli_pipe_fbp");
  CHECK(r.exit_code == 0);
  VolumeD rec = read_volume(dir + "/re/vol_fbp.raw");
  CHECK(rec.nx == 16);
  CHECK(rec.ny == 16);
  CHECK(rec.nz == 2);
  CHECK(rec.data.isFinite().all());

  r = testutil::run_cli(kCli,
                        "metrics --estimate " + dir + "/re/vol_fbp.raw --truth " +
                            dir + "/ph/phantom.raw --output-dir " + dir + "/me",
                        "cli_pipe_metrics");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("nrmse=") != std::string::npos);
  auto lines = csv_lines(testutil::slurp(dir + "/me/metrics.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(split_csv(lines[1])[0] == "vol_fbp");
}

TEST_CASE("png rendering is opt-in and names slices by index") {
  const std::string dir = testutil::scratch_dir("cli_png");
  const std::string cfg = dir + "/exp.toml";
  std::string text = base_config(dir + "/out");
  const std::string off = "write_png = false";
  text.replace(text.find(off), off.size(), "write_png = true");
  testutil::spit(cfg, text);

  auto r = testutil::run_cli(kCli, "phantom --config " + cfg, "cli_png_run");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir + "/out/png/phantom_z000.png"));
  CHECK(fs::exists(dir + "/out/png/phantom_z001.png"));
  CHECK(!fs::exists(dir + "/out/png/phantom_z002.png"));
}

TEST_CASE("output directory precedence: flag beats environment") {
  const std::string dir = testutil::scratch_dir("cli_outdir");
  const std::string cfg = dir + "/exp.toml";
  testutil::spit(cfg, base_config(dir + "/from_config"));

  auto r = testutil::run_cli("MSFCT_OUTPUT_DIR=" + dir + "/from_env " + kCli,
                             "phantom --config " + cfg, "cli_outdir_env");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir + "/from_env/phantom.raw"));
  CHECK(!fs::exists(dir + "/from_config/phantom.raw"));

  r = testutil::run_cli("MSFCT_OUTPUT_DIR=" + dir + "/from_env2 " + kCli,
                        "phantom --config " + cfg + " --output-dir " + dir + "/flag",
                        "cli_outdir_flag");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir + "/flag/phantom.raw"));
  CHECK(!fs::exists(dir + "/from_env2"));
}

TEST_CASE("tune reports the winning sigmas") {
  const std::string dir = testutil::scratch_dir("cli_tune");
  const std::string cfg = dir + "/exp.toml";
  const std::string out = dir + "/out";
  testutil::spit(cfg, msf_config(out) + "\n[tune]\nxy = [0.05, 0.2]\n");

  auto r = testutil::run_cli(kCli, "tune --config " + cfg, "cli_tune_run");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("best sigma_xy=") != std::string::npos);
  auto lines = csv_lines(testutil::slurp(out + "/tune_msf.csv"));
  REQUIRE(lines.size() == 3);  // header + two grid entries
  CHECK(lines[0].rfind("index,sigma_xy", 0) == 0);
  auto man = nlohmann::json::parse(testutil::slurp(out + "/run_manifest.json"));
  CHECK(man["effective"].contains("tune.best_xy"));
}
