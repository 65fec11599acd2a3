#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "fracslow/cli/config.hpp"
#include "fracslow/cli/plot_data.hpp"
#include "fracslow/cli/runner.hpp"

using namespace fracslow;
using namespace fracslow::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("fracslow-cli-" + std::to_string(::getpid()) + "-" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = root_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  fs::path dir(const std::string& name) const { return root_ / name; }

  fs::path root_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json result_of(const fs::path& d) { return json::parse(slurp(d / "result.json")); }

// Every regular file of a directory, by name.
std::set<std::string> files_in(const fs::path& d) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(d)) out.insert(e.path().filename().string());
  return out;
}

const char* kMinimalNoise = R"(kind: noise-validate
seed: 3
params:
  hurst: [0.7]
  n_paths: 40
  n_steps: 256
  lags: [1, 2, 4, 8]
)";

}  // namespace

// ---------------------------------------------------------------------------
// catalog

TEST(Catalog, ListsEightKinds) {
  const std::vector<std::string> expected{"noise-validate", "certify-drift", "wasserstein-decay", "tv-decay",
                                          "quenched-decay", "control",       "averaging",         "invariant-measure"};
  EXPECT_EQ(kind_names(), expected);
  const auto j = catalog_json();
  EXPECT_EQ(j["catalog_version"], kCatalogVersion);
  EXPECT_EQ(j["kinds"].size(), 8u);
  for (const auto& k : j["kinds"]) {
    EXPECT_FALSE(k["summary"].get<std::string>().empty());
    for (const auto& p : k["params"]) EXPECT_FALSE(p["doc"].get<std::string>().empty()) << k["kind"] << "." << p["name"];
  }
}

TEST(Catalog, PrintedListingIsStable) {
  std::ostringstream a, b;
  print_catalog(a);
  print_catalog(b);
  EXPECT_EQ(a.str(), b.str());
  for (const auto& k : kind_names()) EXPECT_NE(a.str().find("\n" + k + "\n"), std::string::npos) << k;
}

TEST(Catalog, IncludesAveragingAndErgodicityPresets) {
  std::set<std::string> names;
  for (const auto& p : presets()) names.insert(p.name);
  EXPECT_TRUE(names.count("averaging-principle"));
  EXPECT_TRUE(names.count("geometric-ergodicity-wasserstein"));
  EXPECT_TRUE(names.count("geometric-ergodicity-tv"));
  // every preset resolves against its own kind's schema
  for (const auto& p : presets()) {
    const auto c = resolve_config({{"preset", p.name}});
    EXPECT_EQ(c.kind, p.kind);
    EXPECT_EQ(c.name, p.name);
  }
  const auto c = resolve_config({{"preset", "averaging-principle"}, {"params", {{"n_paths", 7}}}});
  EXPECT_EQ(c.params["n_paths"], 7);
  EXPECT_EQ(c.params["min_ratio"], 2.0);
}

TEST(Catalog, UnknownKindNamesNearestMatch) {
  try {
    resolve_config({{"kind", "wasserstein-decy"}});
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("'wasserstein-decay'"), std::string::npos) << e.what();
  }
  try {
    resolve_config({{"preset", "averaging-principal"}});
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("'averaging-principle'"), std::string::npos) << e.what();
  }
}

TEST(Catalog, EditDistance) {
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("control", "control"), 0u);
  EXPECT_EQ(nearest("tv-decya", kind_names()), "tv-decay");
}

// ---------------------------------------------------------------------------
// schema

TEST(Schema, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"n_path", 3}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"n_paths", -3}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"n_paths", 2.5}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"epsilons", "0.1"}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"sigma", {{1, 0}}}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"f", {{"wz", 1}}}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "certify-drift"}, {"params", {{"drift", {{"kind", "linear"}, {"rat", 1}}}}}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"sed", 1}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"seed", -1}}), SchemaError);
  EXPECT_THROW(resolve_config({{"kind", "averaging"}, {"name", "../escape"}}), SchemaError);
  EXPECT_THROW(resolve_config({{"preset", "universal-control"}, {"kind", "averaging"}}), SchemaError);
  EXPECT_THROW(resolve_config(json::array()), SchemaError);
  // an optional value may be set or explicitly left unset
  EXPECT_NO_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"alpha", nullptr}}}}));
  EXPECT_NO_THROW(resolve_config({{"kind", "averaging"}, {"params", {{"alpha", 0.5}, {"sigma", {{2}}}}}}));
}

TEST(Schema, FillsDefaults) {
  const auto c = resolve_config({{"kind", "control"}});
  const auto& spec = find_kind("control");
  EXPECT_EQ(c.params.size(), spec.params.size());
  EXPECT_EQ(c.params["eta"], 0.25);
  EXPECT_TRUE(c.params["N"].is_null());
  EXPECT_EQ(c.name, "control");
  EXPECT_EQ(c.seed, 0u);
}

TEST_F(CliTest, YamlAndJsonGiveTheSameConfig) {
  const auto y = write("a.yaml", "kind: tv-decay\nseed: 5\nparams:\n  t_grid: [0, 1.5]\n  drift: {kind: linear, rate: 2}\n  force: true\n");
  const auto j = write("a.json", R"({"kind": "tv-decay", "seed": 5,
    "params": {"t_grid": [0, 1.5], "drift": {"kind": "linear", "rate": 2}, "force": true}})");
  const auto a = load_config(y.string()), b = load_config(j.string());
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.params["drift"]["rate"], 2);
}

TEST_F(CliTest, YamlScalarsKeepTheirTypes) {
  const auto p = write("s.yaml", "kind: invariant-measure\nname: \"123\"\nparams:\n  method: 'cholesky'\n  certified_kappa: ~\n");
  const auto c = load_config(p.string());
  EXPECT_EQ(c.name, "123");
  EXPECT_EQ(c.params["method"], "cholesky");
  EXPECT_TRUE(c.params["certified_kappa"].is_null());
  EXPECT_THROW(parse_config_text("kind: [unclosed"), SchemaError);
  EXPECT_THROW(parse_config_text("{\"kind\": }"), SchemaError);
  EXPECT_THROW(parse_config_text("kind: a\nkind: b\n"), SchemaError);
}

TEST(Schema, HashCoversResultsOnly) {
  auto a = resolve_config({{"kind", "noise-validate"}, {"seed", 1}});
  auto b = resolve_config({{"kind", "noise-validate"}, {"seed", 1}, {"workers", 3}, {"output", "/elsewhere"}});
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  auto c = resolve_config({{"kind", "noise-validate"}, {"seed", 2}});
  EXPECT_NE(a.hash(), c.hash());
  auto d = resolve_config({{"kind", "noise-validate"}, {"seed", 1}, {"params", {{"n_paths", 201}}}});
  EXPECT_NE(a.hash(), d.hash());
}

// ---------------------------------------------------------------------------
// run

TEST_F(CliTest, MinimalNoiseValidateWritesResidualCsv) {
  const auto cfg = write("nv.yaml", kMinimalNoise);
  const auto out = run_config_file(cfg.string(), {dir("nv").string()});
  EXPECT_EQ(out.exit_code, kOk) << out.message;
  EXPECT_EQ(files_in(dir("nv")), (std::set<std::string>{"residuals.csv", "result.json", "replay.json"}));
  std::istringstream csv(slurp(dir("nv") / "residuals.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "# fracslow " + library_version() + " config=" + out.config_hash);
  std::getline(csv, line);
  EXPECT_EQ(line, "hurst,statistic,lag,empirical,expected,se,z");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 5u);  // four lags + lag-1 covariance
  const auto r = result_of(dir("nv"));
  EXPECT_EQ(r["kind"], "noise-validate");
  EXPECT_EQ(r["config_hash"], out.config_hash);
  EXPECT_EQ(r["version"], library_version());
  EXPECT_TRUE(r["acceptance"]["passed"].get<bool>());
}

TEST_F(CliTest, ExpansiveDriftCertificateExitsFour) {
  const auto cfg = write("c.yaml", "kind: certify-drift\nparams:\n  drift: {kind: linear, rate: -1}\n  kappa: 1\n");
  const auto out = run_config_file(cfg.string(), {dir("c").string()});
  EXPECT_EQ(out.exit_code, kAcceptance);
  const auto cert = json::parse(slurp(dir("c") / "certificate.json"));
  EXPECT_FALSE(cert["passed"].get<bool>());
  EXPECT_GT(cert["n_violations"].get<std::size_t>(), 0u);
  EXPECT_FALSE(result_of(dir("c"))["acceptance"]["passed"].get<bool>());
  // the result is complete, so no failure marker
  EXPECT_FALSE(fs::exists(dir("c") / kFailedMarker));

  const auto ok = write("ok.yaml", "kind: certify-drift\nparams:\n  drift: {kind: linear, rate: 2}\n  kappa: 1\n");
  EXPECT_EQ(run_config_file(ok.string(), {dir("ok").string()}).exit_code, kOk);
}

TEST_F(CliTest, SchemaViolationExitsTwoWithoutOutput) {
  const auto cfg = write("bad.yaml", "kind: averaging\nparams:\n  n_path: 3\n");
  RunOptions opt;
  opt.out = dir("never").string();
  const auto out = run_config_file(cfg.string(), opt);
  EXPECT_EQ(out.exit_code, kSchema);
  EXPECT_NE(out.message.find("'n_paths'"), std::string::npos) << out.message;
  EXPECT_FALSE(fs::exists(dir("never")));
  EXPECT_EQ(run_config_file((root_ / "missing.yaml").string(), opt).exit_code, kSchema);
}

TEST_F(CliTest, ReplayReproducesFilesByteForByte) {
  const auto cfg = write("w.yaml", R"(kind: wasserstein-decay
seed: 9
params:
  n_paths: 40
  t_grid: [0.5, 1, 1.5]
  n_boot: 20
)");
  const auto first = run_config_file(cfg.string(), {dir("first").string()});
  ASSERT_EQ(first.exit_code, kOk) << first.message;
  RunOptions opt;
  opt.out = dir("second").string();
  opt.workers = 3;  // worker count never changes results
  const auto second = run_config_file((dir("first") / "replay.json").string(), opt);
  ASSERT_EQ(second.exit_code, kOk) << second.message;
  EXPECT_EQ(second.config_hash, first.config_hash);
  const auto names = files_in(dir("first"));
  EXPECT_EQ(names, files_in(dir("second")));
  for (const auto& n : names) EXPECT_EQ(slurp(dir("first") / n), slurp(dir("second") / n)) << n;

  // the replay record lists the hash of every result file
  const auto rec = json::parse(slurp(dir("first") / "replay.json"));
  EXPECT_EQ(rec["format"], "fracslow-replay");
  EXPECT_EQ(rec["files"]["curve.csv"], content_hash(slurp(dir("first") / "curve.csv")));
  EXPECT_EQ(rec["files"]["result.json"], content_hash(slurp(dir("first") / "result.json")));
}

TEST_F(CliTest, SeedOverrideChangesHashAndResults) {
  const auto cfg = write("nv.yaml", kMinimalNoise);
  RunOptions a{dir("a").string(), std::nullopt, std::nullopt}, b{dir("b").string(), 4, std::nullopt};
  const auto ra = run_config_file(cfg.string(), a), rb = run_config_file(cfg.string(), b);
  EXPECT_NE(ra.config_hash, rb.config_hash);
  EXPECT_NE(slurp(dir("a") / "residuals.csv"), slurp(dir("b") / "residuals.csv"));
  EXPECT_EQ(json::parse(slurp(dir("b") / "replay.json"))["config"]["seed"], 4);
}

TEST_F(CliTest, RuntimeFailureLeavesMarkerUntilASuccessfulRun) {
  // y0_a has the wrong dimension: schema-valid, rejected when the run starts
  const auto bad = write("bad.yaml", "kind: wasserstein-decay\nparams:\n  y0_a: [1, 2]\n  n_paths: 10\n");
  const auto out = run_config_file(bad.string(), {dir("run").string()});
  EXPECT_EQ(out.exit_code, kSchema);
  ASSERT_TRUE(fs::exists(dir("run") / kFailedMarker));
  EXPECT_NE(slurp(dir("run") / kFailedMarker).find("y0_a"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir("run") / "result.json"));

  const auto good = write("good.yaml", "kind: wasserstein-decay\nparams:\n  n_paths: 10\n  n_boot: 5\n  t_grid: [1, 2]\n");
  EXPECT_EQ(run_config_file(good.string(), {dir("run").string()}).exit_code, kOk);
  EXPECT_FALSE(fs::exists(dir("run") / kFailedMarker));
  for (const auto& n : files_in(dir("run"))) EXPECT_NE(n.front(), '.') << "temporary file left: " << n;
}

TEST_F(CliTest, BlowUpExitsThree) {
  const auto cfg = write("b.yaml", "kind: wasserstein-decay\nparams:\n  drift: {kind: linear, rate: -200}\n  n_paths: 4\n  n_boot: 2\n");
  const auto out = run_config_file(cfg.string(), {dir("b").string()});
  EXPECT_EQ(out.exit_code, kBlowUp) << out.message;
  EXPECT_TRUE(fs::exists(dir("b") / kFailedMarker));
}

TEST_F(CliTest, RefusedCertificationExitsFourWithMarker) {
  const auto cfg = write("r.yaml", "kind: wasserstein-decay\nparams:\n  drift: {kind: linear, rate: -1}\n  certify: true\n");
  const auto out = run_config_file(cfg.string(), {dir("r").string()});
  EXPECT_EQ(out.exit_code, kAcceptance);
  EXPECT_NE(slurp(dir("r") / kFailedMarker).find("fails S("), std::string::npos);
}

TEST_F(CliTest, DefaultOutputRootFromEnvironment) {
  const auto cfg = write("nv.yaml", std::string(kMinimalNoise) + "name: law\n");
  ::setenv("FRACSLOW_OUT", dir("env-root").c_str(), 1);
  const auto out = run_config_file(cfg.string());
  ::unsetenv("FRACSLOW_OUT");
  ASSERT_EQ(out.exit_code, kOk) << out.message;
  EXPECT_EQ(out.dir, dir("env-root") / ("law-" + out.config_hash.substr(0, 8)));
  EXPECT_TRUE(fs::exists(out.dir / "result.json"));
}

// Every kind at toy size: runs, and its replay matches byte for byte.
TEST_F(CliTest, EveryKindRunsAndReplays) {
  const std::vector<std::pair<std::string, std::string>> configs{
      {"noise-validate", kMinimalNoise},
      {"certify-drift", "kind: certify-drift\nparams:\n  n_samples: 256\n"},
      {"wasserstein-decay", "kind: wasserstein-decay\nparams:\n  n_paths: 20\n  n_boot: 10\n  t_grid: [1, 2]\n"},
      {"tv-decay", "kind: tv-decay\nparams:\n  n_paths: 20\n  n_boot: 10\n  t_grid: [0, 1]\n  dt: 0.015625\n  burn_in: 2\n"},
      {"quenched-decay", "kind: quenched-decay\nparams:\n  n_paths: 20\n  n_boot: 10\n  t_grid: [1, 2, 4]\n  initial: invariant\n"},
      {"control", "kind: control\nparams:\n  n_runs: 6\n  N: 4\n  R_bar: 3\n"},
      {"averaging",
       "kind: averaging\nparams:\n  n_paths: 4\n  epsilons: [0.2, 0.1]\n  dt_slow: 0.015625\n  n_boot: 20\n  fast_resolution: 8\n"},
      {"invariant-measure", "kind: invariant-measure\nparams:\n  n_samples: 50\n  burn_in: 2\n  dt: 0.03125\n"},
  };
  for (const auto& [kind, text] : configs) {
    SCOPED_TRACE(kind);
    const auto cfg = write(kind + ".yaml", text);
    const auto a = run_config_file(cfg.string(), {dir(kind + "-a").string()});
    ASSERT_EQ(a.exit_code, kOk) << a.message;
    const auto b = run_config_file((dir(kind + "-a") / "replay.json").string(), {dir(kind + "-b").string()});
    ASSERT_EQ(b.exit_code, kOk) << b.message;
    for (const auto& n : files_in(dir(kind + "-a"))) EXPECT_EQ(slurp(dir(kind + "-a") / n), slurp(dir(kind + "-b") / n)) << n;
    EXPECT_EQ(result_of(dir(kind + "-a"))["kind"], kind);
    // every output lands in plot-data
    EXPECT_FALSE(collect_plot_rows({dir(kind + "-a").string()}).empty());
  }
}

TEST_F(CliTest, ControlAcceptanceReportsMagnitudeFormula) {
  const auto cfg = write("c.yaml", "kind: control\nparams:\n  n_runs: 5\n  N: 8\n  R_bar: 2\n  eta: 0.25\n");
  const auto out = run_config_file(cfg.string(), {dir("c").string()});
  ASSERT_EQ(out.exit_code, kOk) << out.message;
  const auto r = result_of(dir("c"))["result"];
  EXPECT_EQ(r["magnitude"].get<double>(), (2.0 * 2.0 + 1.0) / ((1.0 - 0.5) / 16.0));
  EXPECT_EQ(r["magnitude"], r["magnitude_formula"]);
  EXPECT_EQ(r["n_runs"], 5);
}

TEST_F(CliTest, InvariantMeasureOracleCheck) {
  const auto cfg = write("i.yaml", "kind: invariant-measure\nseed: 2\nparams:\n  hurst: 0.5\n  n_samples: 400\n  burn_in: 8\n"
                                   "  dt: 0.015625\n  oracle_z_max: 4\n");
  const auto out = run_config_file(cfg.string(), {dir("i").string()});
  EXPECT_EQ(out.exit_code, kOk) << out.message;
  EXPECT_DOUBLE_EQ(result_of(dir("i"))["result"]["oracle_variance"].get<double>(), 0.5);
  // the sample file keeps the measure format readable
  std::ifstream in(dir("i") / "samples.csv");
  EXPECT_EQ(measures::read_measure_csv(in).size(), 400u);
}

// ---------------------------------------------------------------------------
// plot-data

TEST_F(CliTest, DecayCurveCsvBecomesDistanceSeries) {
  const auto p = write("curve.csv", "# fracslow x config=0\nt,distance,se\n0.5,1.2,0.1\n1,0.6,0.05\n");
  const auto rows = collect_plot_rows({p.string()});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].series, "distance");
  EXPECT_EQ(rows[1].x, 1.0);
  EXPECT_EQ(rows[1].y, 0.6);
  EXPECT_EQ(*rows[1].se, 0.05);
}

TEST_F(CliTest, AveragingReportCsvBecomesStatisticSeries) {
  const auto p = write("report.csv", "epsilon,median_sup,q25,q75,median_holder,n_effective\n0.1,0.3,0.2,0.4,0.5,50\n0.01,0.1,0.05,0.2,0.3,50\n");
  const auto rows = collect_plot_rows({p.string()});
  ASSERT_EQ(rows.size(), 10u);
  std::set<std::string> series;
  for (const auto& r : rows) series.insert(r.series);
  EXPECT_EQ(series, (std::set<std::string>{"median_sup", "q25", "q75", "median_holder", "n_effective"}));
  EXPECT_EQ(rows[5].x, 0.01);
  EXPECT_EQ(rows[5].y, 0.1);
}

TEST_F(CliTest, MixedInputsMakeOneTidyFile) {
  const auto nv = write("nv.yaml", kMinimalNoise);
  ASSERT_EQ(run_config_file(nv.string(), {dir("nv").string()}).exit_code, kOk);
  const auto curve = write("curve.csv", "t,distance,se\n1,0.5,0.1\n");
  const auto report = write("report.csv", "epsilon,median_sup\n0.1,0.3\n");
  const std::string csv = emit_plot_data({dir("nv").string(), curve.string(), report.string()});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "experiment,series,x,y,se");
  std::set<std::string> experiments;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4) << line;
    experiments.insert(line.substr(0, line.find(',')));
  }
  EXPECT_EQ(n, 10u + 1u + 1u);  // 5 residuals x (empirical, expected) + curve + report
  EXPECT_EQ(experiments.size(), 3u);
}

TEST_F(CliTest, CorruptInputIsRejected) {
  EXPECT_THROW(collect_plot_rows({write("a.csv", "t,distance,se\n1,abc,0.1\n").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({write("b.csv", "t,distance,se\n1,2\n").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({write("c.csv", "x,y\n1,2\n").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({write("d.csv", "").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({write("e.json", "{\"kind\": \"tv-decay\"").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({write("f.json", "{\"kind\": \"tv-decay\", \"name\": \"x\", \"result\": {}}").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({write("g.json", "{\"kind\": \"nope\", \"name\": \"x\", \"result\": {}}").string()}), SchemaError);
  EXPECT_THROW(collect_plot_rows({(root_ / "missing").string()}), SchemaError);
}
