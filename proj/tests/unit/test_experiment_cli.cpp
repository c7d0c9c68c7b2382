#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "rwre/config.hpp"
#include "rwre/report.hpp"
#include "rwre/runner.hpp"

using namespace rwre;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rwre_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RWRE_LAB_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallMoments = "[run]\nexperiment = moments\nreplicas = 2000\n";

}  // namespace

TEST(Config, DefaultsPerExperiment) {
  const ExperimentConfig c = parse_config("[run]\nexperiment = variance-scan\n");
  EXPECT_EQ(c.experiment, Experiment::variance_scan);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.workers, 1);
  EXPECT_EQ(c.replicas, 1000u);
  ASSERT_EQ(c.n.size(), 9u);
  EXPECT_EQ(c.n.front(), 16);
  EXPECT_EQ(c.n.back(), 4096);
  EXPECT_TRUE(std::holds_alternative<LatticeProduct>(c.model.spec));
  const ExperimentConfig ce = parse_config("[run]\nexperiment = counterexample\n");
  EXPECT_TRUE(std::holds_alternative<FullyCorrelated>(ce.model.spec));
  EXPECT_DOUBLE_EQ(ce.epsilon, 1.0 / 1024.0);
  EXPECT_EQ(ce.environments, 10u);
}

TEST(Config, ValuesListsAndPowers) {
  const ExperimentConfig c = parse_config(
      "[run]\nexperiment = fclt\nseed = 18446744073709551615\nworkers = 3\n"
      "[model]\nkind = finite-range\nfamily = gaussian\nrange = 2\nmean = 0.5\nvariance = 2\n"
      "[grid]\nepsilon = 2^-8\nt = 0.5, 1\n");
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(c.workers, 3);
  EXPECT_DOUBLE_EQ(c.epsilon, 1.0 / 256.0);
  EXPECT_EQ(c.t, (std::vector<double>{0.5, 1.0}));
  const auto& f = std::get<FiniteRange>(c.model.spec);
  EXPECT_DOUBLE_EQ(f.range, 2.0);
  EXPECT_DOUBLE_EQ(std::get<GaussianFamily>(f.family).cov(0, 0), 2.0);
}

TEST(Config, UnknownKeyIsNamed) {
  const std::string e = error_of("[run]\nexperiment = moments\nreplicaz = 10\n");
  EXPECT_NE(e.find("replicaz"), std::string::npos) << e;
  EXPECT_NE(e.find("line 3"), std::string::npos) << e;
}

TEST(Config, KeyNotUsedByTheExperimentIsRejected) {
  EXPECT_NE(error_of("[run]\nexperiment = moments\n[grid]\nn = 4\n").find("n"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = moments\n[model]\nkind = dirac\np_lo = 0.1\n").find("p_lo"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = moments\n[plots]\nx = 1\n").find("plots"), std::string::npos);
}

TEST(Config, BadValuesCarryDiagnostics) {
  EXPECT_NE(error_of("[run]\nexperiment = warp\n").find("unknown experiment"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = moments\nreplicas = lots\n").find("replicas"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = moments\n[model]\nkind = torus\n").find("torus"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = moments\n[model]\np_lo = 0.8\np_hi = 0.2\n").find("[model]"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = moments\nseed = -1\n").find("seed"), std::string::npos);
  EXPECT_FALSE(error_of("[run\nexperiment = moments\n").empty());
  EXPECT_NE(error_of("").find("experiment"), std::string::npos);
}

TEST(Config, InfeasibleGridsAreRejected) {
  EXPECT_NE(error_of("[run]\nexperiment = fclt\n[grid]\nepsilon = 0.1\n").find("epsilon"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = variance-scan\n[grid]\nn = 8, 4\n").find("increasing"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = ychain-excursion\n[grid]\nn = 64, 128\n").find("single"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = max-drift\n[grid]\nn = 64\n").find("two"), std::string::npos);
  EXPECT_NE(error_of("[run]\nexperiment = ychain-exit\n[grid]\nescape_r = 2\nescape_r0 = 2\n").find("escape_r"),
            std::string::npos);
}

TEST(Report, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345678.9, -0.0}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
}

TEST(Report, CsvAndJsonLayout) {
  ExperimentReport r;
  r.experiment = "moments";
  r.config = "[run]\nexperiment = moments\n";
  r.seed = 7;
  r.metadata.emplace_back("model", "m");
  r.rows.push_back({"velocity", "m", 7, -1, 0, "", std::nan(""), "v_hat", 0.25, 0.01});
  r.verdicts.push_back({"velocity-matches-analytic", true, 1.5, "<= 4 SE", ""});
  const std::string csv = rows_csv(r);
  EXPECT_NE(csv.find("# version: " + std::string(kArtifactVersion)), std::string::npos);
  EXPECT_NE(csv.find("#   experiment = moments"), std::string::npos);
  EXPECT_NE(csv.find(std::string(kRowHeader) + "\nvelocity,m,7,-1,0,,,v_hat,0.25,0.01\n"), std::string::npos);
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["seed"], 7);
  EXPECT_TRUE(j["rows"][0]["grid_value"].is_null());
  EXPECT_EQ(j["verdicts"][0]["passed"], true);
  EXPECT_EQ(j["config"], r.config);
  EXPECT_TRUE(j["all_passed"]);
}

TEST(Runner, ReportEchoesTheConfig) {
  const ExperimentConfig c = parse_config(kSmallMoments);
  const ExperimentReport r = run(c);
  EXPECT_EQ(r.config, kSmallMoments);
  EXPECT_EQ(r.experiment, "moments");
  EXPECT_EQ(r.verdicts.size(), 2u);
  for (const ReportRow& row : r.rows) EXPECT_EQ(row.seed, c.seed);
}

TEST(Runner, WorkerCountDoesNotChangeTheReport) {
  const char* texts[] = {
      "[run]\nexperiment = phi-decay\nreplicas = 500\n",
      "[run]\nexperiment = variance-scan\nreplicas = 40\n[grid]\nn = 2^2..2^7\n",
      "[run]\nexperiment = variance-scan\nreplicas = 40\nwalks = 50\nmean_method = mc\n[grid]\nn = 4, 8\n",
      "[run]\nexperiment = identity-check\nreplicas = 100\ny_replicas = 500\n",
      "[run]\nexperiment = fclt\nenvironments = 2\nwalks = 200\n[grid]\nepsilon = 2^-6\n",
      "[run]\nexperiment = max-drift\nreplicas = 3\n[grid]\nn = 8, 64\n",
      "[run]\nexperiment = ychain-exit\nreplicas = 200\n[grid]\nescape_r = 6\n",
      "[run]\nexperiment = ychain-excursion\nreplicas = 40\n[grid]\nn = 2048\n",
      "[run]\nexperiment = occupation\nreplicas = 30\n[grid]\nn = 2^6..2^10\n",
      "[run]\nexperiment = counterexample\nenvironments = 2\nwalks = 200\n[grid]\nepsilon = 2^-6\n",
  };
  for (const char* t : texts) {
    ExperimentConfig one = parse_config(t);
    ExperimentConfig eight = one;
    eight.workers = 8;
    EXPECT_EQ(report_json(run(one)), report_json(run(eight))) << t;
  }
}

TEST(Runner, EmitWritesBothFormats) {
  const fs::path dir = scratch("emit");
  const ExperimentReport r = run(parse_config(kSmallMoments));
  const auto json = emit(r, "json", dir);
  ASSERT_EQ(json.size(), 1u);
  EXPECT_EQ(json[0].filename(), "moments.json");
  const auto csv = emit(r, "csv", dir);
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "moments.verdicts.csv"));
  EXPECT_THROW(emit(r, "xml", dir), std::invalid_argument);
}

TEST(Runner, DegenerateExitDataIsAVerdictNotACrash) {
  const ExperimentReport r = run(parse_config(
      "[run]\nexperiment = ychain-exit\nreplicas = 20\nstep_cap = 500\n[model]\nkind = dirac\nscale = 0\n"));
  bool found = false;
  for (const Verdict& v : r.verdicts) found = found || v.name == "exit-data";
  EXPECT_TRUE(found);
  EXPECT_FALSE(r.all_passed());
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "ok.ini") << kSmallMoments;
  std::ofstream(dir / "fails.ini") << "[run]\nexperiment = max-drift\nreplicas = 2\n[grid]\nn = 8, 16\n[criteria]\nratio = 0\n";
  std::ofstream(dir / "bad.ini") << "[run]\nexperiment = moments\nbogus = 1\n";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("--config " + (dir / "ok.ini").string() + out), 0);
  EXPECT_EQ(run_cli("--config " + (dir / "fails.ini").string() + out), 2);
  EXPECT_EQ(run_cli("--config " + (dir / "bad.ini").string() + out), 1);
  EXPECT_EQ(run_cli("--config " + (dir / "missing.ini").string() + out), 1);
  EXPECT_EQ(run_cli("--config " + (dir / "ok.ini").string() + out + " --format yaml"), 1);
}

TEST(Cli, OverridesAndDoubleRunAreByteIdentical) {
  const fs::path dir = scratch("double");
  std::ofstream(dir / "c.ini") << kSmallMoments;
  const std::string base = "--config " + (dir / "c.ini").string() + " --seed 99 --format csv";
  ASSERT_EQ(run_cli(base + " --workers 1 --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli(base + " --workers 8 --out " + (dir / "b").string()), 0);
  const std::string a = slurp(dir / "a" / "moments.csv");
  EXPECT_EQ(a, slurp(dir / "b" / "moments.csv"));
  EXPECT_EQ(slurp(dir / "a" / "moments.verdicts.csv"), slurp(dir / "b" / "moments.verdicts.csv"));
  EXPECT_NE(a.find("# seed: 99"), std::string::npos);
}
