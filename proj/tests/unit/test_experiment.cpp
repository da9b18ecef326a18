#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "pcsft/errors.hpp"
#include "pcsft/experiment.hpp"

using namespace pcsft;
namespace fs = std::filesystem;

namespace {

const ExperimentKind kAll[] = {ExperimentKind::born, ExperimentKind::purestate, ExperimentKind::superposition,
                               ExperimentKind::decoherence, ExperimentKind::detection_sweep};

ExperimentConfig small(ExperimentKind kind) {
  auto cfg = default_config(kind);
  cfg.n_samples = 4000;
  cfg.n_trials = 300;
  cfg.seeds = {1, 2};
  return cfg;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pcsft_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("experiment names") {
  for (auto k : kAll) CHECK(experiment_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(experiment_kind_from_string("bell"), ConfigError);
}

TEST_CASE("configs round-trip through JSON") {
  for (auto k : kAll) {
    const auto cfg = default_config(k);
    const auto back = parse_config(Json::parse(config_to_json(cfg).dump()));
    CHECK(back == cfg);
    CHECK(config_to_json(back).dump() == config_to_json(cfg).dump());
  }
}

TEST_CASE("config text may carry comments") {
  const std::string text = R"({
    // which pipeline
    "experiment": "purestate",
    "dim": 2,
    "field": {"kind": "pure", "psi": {"dim": 2, "re": [1, 0]}, "sigma2": 2},
    "n_samples": 1000, /* short run */
    "seeds": [3]
  })";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.experiment == ExperimentKind::purestate);
  CHECK(cfg.n_samples == 1000);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3});
  CHECK(cfg.field->kind_name() == "pure");
}

TEST_CASE("config errors name every offending key") {
  try {
    parse_config_text(R"({"experiment":"born","dim":2,"colour":"red","n_sample":5})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& keys = e.keys();
    CHECK(std::find(keys.begin(), keys.end(), "colour") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "n_sample") != keys.end());
  }
  CHECK_THROWS_AS(parse_config_text(R"({"experiment":"born","dim":0})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"dim":2})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"experiment":"born","n_samples":-4})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/config.json"), IoError);
}

TEST_CASE("every pipeline is reproducible bit for bit") {
  for (auto k : kAll) {
    const auto cfg = small(k);
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK_MESSAGE(a.results_json().dump() == b.results_json().dump(), to_string(k));
    CHECK(render_report_json(a).size() > 0);
    CHECK_FALSE(a.error.has_value());
    CHECK_FALSE(a.verdicts.empty());
    CHECK(a.results_json().dump().find("timings") == std::string::npos);
    CHECK(a.to_json().contains("timings"));
  }
}

TEST_CASE("a failing pipeline yields a partial report") {
  auto cfg = small(ExperimentKind::born);
  cfg.field = FieldSpec::gaussian(HermitianOperator::zero(2));
  const auto r = run_experiment(cfg);
  REQUIRE(r.error.has_value());
  CHECK_FALSE(r.all_pass());
  bool runtime = false;
  for (const auto& v : r.verdicts) runtime |= (v.name == "runtime" && !v.pass);
  CHECK(runtime);
}

TEST_CASE("emitted files are byte-deterministic") {
  const auto r = run_experiment(small(ExperimentKind::superposition));
  const auto d1 = scratch("emit1");
  const auto d2 = scratch("emit2");
  for (const auto& dir : {d1, d2}) {
    emit_report(r, ReportFormat::json, dir);
    emit_report(r, ReportFormat::csv, dir);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(d1)) {
    std::ifstream a(entry.path()), b(d2 / entry.path().filename());
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    if (entry.path().filename() != "report.json") CHECK(sa == sb);
    ++files;
  }
  CHECK(files >= 2);
  CHECK(fs::exists(d1 / "report.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("emit_report reports unwritable targets") {
  const auto r = run_experiment(small(ExperimentKind::born));
  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  CHECK_THROWS_AS(emit_report(r, ReportFormat::json, blocker / "sub"), IoError);
  fs::remove_all(blocker);
}

TEST_CASE("CSV rendering leaves NaN cells empty") {
  PlotTable t{"t", {"a", "b"}, {{1.5, std::numeric_limits<double>::quiet_NaN()}}};
  CHECK(render_csv(t) == "a,b\n1.5,\n");
}
