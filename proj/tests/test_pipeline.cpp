#include "synth/pipeline.hpp"

#include "synth/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace synth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Workdir {
  fs::path dir;
  explicit Workdir(const std::string& name) : dir(fs::temp_directory_path() / ("synth_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

int cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream log, err;
  const int rc = run_cli(args, log, err);
  if (err_text) *err_text = err.str();
  return rc;
}

void write_planted(const std::string& path, double minority) {
  const Dataset ds = testing::planted_two_class(120, minority, 31);
  write_csv(fs::path(path), ds.feature_names, ds.values, ds.label, {});
}

}  // namespace

TEST_CASE("fit, sample, balance and eval reproduce byte for byte") {
  const auto start = std::chrono::steady_clock::now();
  Workdir w("repro");
  write_planted(w / "real.csv", 0.25);
  const std::vector<std::string> fit{"fit", "--data", w / "real.csv", "--label-column", "label", "--out", w / "model.json", "--seed", "5"};
  const std::vector<std::string> sample{"sample", "--model", w / "model.json", "--count", "400", "--out", w / "syn.csv", "--seed", "6"};
  const std::vector<std::string> balance{"balance", "--in", w / "syn.csv", "--per-class", "60", "--out", w / "bal.csv", "--seed", "1"};
  const std::vector<std::string> eval{"eval", "--data", w / "real.csv", "--label-column", "label", "--target", "f5",
                                      "--repeats", "3", "--out", w / "eval.json", "--seed", "2"};
  std::string outputs[2][4];
  for (auto& run : outputs) {
    REQUIRE(cli(fit) == 0);
    REQUIRE(cli(sample) == 0);
    REQUIRE(cli(balance) == 0);
    REQUIRE(cli(eval) == 0);
    run[0] = slurp(w / "model.json");
    run[1] = slurp(w / "syn.csv");
    run[2] = slurp(w / "bal.csv");
    run[3] = slurp(w / "eval.json");
  }
  for (int i = 0; i < 4; ++i) CHECK(outputs[0][i] == outputs[1][i]);

  const std::string& syn = outputs[0][1];
  CHECK(syn.rfind("# provenance: gmm,6,", 0) == 0);
  CHECK(syn.find("label=") == std::string::npos);
  const Dataset balanced = load_csv(w / "bal.csv", std::string("label"));
  CHECK(balanced.rows() == 120);
  CHECK(std::count(balanced.label->codes.begin(), balanced.label->codes.end(), 0) == 60);
  CHECK(slurp(w / "bal.csv").find("# balance: per_class=60") != std::string::npos);

  const auto report = nlohmann::json::parse(outputs[0][3]);
  CHECK(report["metrics"]["mad"]["real_scores"].size() == 3);
  CHECK(report["metrics"]["pearson"].contains("log10_p"));

  const auto model = load_model(w / "model.json");
  CHECK(model.run_config["seed"] == 5);
  CHECK(model.sampler.has_value());

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 60.0);
}

TEST_CASE("different seeds give different synthetic rows") {
  Workdir w("seeds");
  write_planted(w / "real.csv", 0.5);
  REQUIRE(cli({"fit", "--data", w / "real.csv", "--label-column", "label", "--out", w / "m.json", "--sampler", "geometry"}) == 0);
  REQUIRE(cli({"sample", "--model", w / "m.json", "--count", "20", "--out", w / "a.csv", "--seed", "1"}) == 0);
  REQUIRE(cli({"sample", "--model", w / "m.json", "--count", "20", "--out", w / "b.csv", "--seed", "2"}) == 0);
  CHECK(slurp(w / "a.csv") != slurp(w / "b.csv"));
  CHECK(slurp(w / "a.csv").rfind("# provenance: geometry,1,", 0) == 0);
}

TEST_CASE("balance deficit fails with a JSON error naming the class") {
  Workdir w("deficit");
  write_planted(w / "real.csv", 0.1);
  std::string err;
  CHECK(cli({"balance", "--in", w / "real.csv", "--per-class", "50", "--out", w / "bal.csv"}, &err) == 1);
  const auto j = nlohmann::json::parse(err);
  CHECK(j["error"]["command"] == "balance");
  const std::string msg = j["error"]["message"];
  CHECK(msg.find("'b'") != std::string::npos);
  CHECK(msg.find("12") != std::string::npos);
  CHECK(!fs::exists(w / "bal.csv"));
}

TEST_CASE("command line validation") {
  std::string err;
  CHECK(cli({"fit", "--data", "x.csv", "--out", "m.json", "--bogus", "1"}, &err) == 2);
  CHECK(nlohmann::json::parse(err)["error"]["operation"] == "command_line");
  CHECK(cli({"fit", "--data", "x.csv", "--out", "m.json", "--sampler", "nope"}) == 2);
  CHECK(cli({"sample", "--model", "m.json", "--out", "o.csv", "--count", "0"}) == 2);
  CHECK(cli({}) == 2);
  CHECK(cli({"fit", "--data", "/nonexistent/x.csv", "--out", "m.json"}, &err) == 1);
  CHECK(nlohmann::json::parse(err)["error"]["command"] == "fit");
  std::ostringstream log, e;
  CHECK(run_cli({"--help"}, log, e) == 0);
  CHECK(log.str().find("difftest") != std::string::npos);
}

TEST_CASE("SYNTH_SEED sets the default seed") {
  ::setenv("SYNTH_SEED", "77", 1);
  const RunConfig a = parse_command_line({"balance", "--in", "x.csv", "--per-class", "2", "--out", "y.csv"});
  const RunConfig b = parse_command_line({"balance", "--in", "x.csv", "--per-class", "2", "--out", "y.csv", "--seed", "3"});
  ::unsetenv("SYNTH_SEED");
  CHECK(a.seed == 77);
  CHECK(b.seed == 3);
  CHECK(parse_command_line({"balance", "--in", "x.csv", "--per-class", "2", "--out", "y.csv"}).seed == 0);
}

TEST_CASE("difftest writes the similarity") {
  Workdir w("difftest");
  const Matrix a = testing::random_matrix(40, 5, 1);
  Matrix b = testing::random_matrix(40, 5, 2);
  b.col(0).array() += 2.0;
  b.col(3).array() -= 1.0;
  const auto names = testing::names(5);
  write_csv(fs::path(w / "ra.csv"), names, a, std::nullopt, {});
  write_csv(fs::path(w / "rb.csv"), names, b, std::nullopt, {});
  REQUIRE(cli({"difftest", "--real", (w / "ra.csv") + "," + (w / "rb.csv"), "--synthetic",
               (w / "ra.csv") + "," + (w / "rb.csv"), "--out", w / "d.json"}) == 0);
  const auto j = nlohmann::json::parse(slurp(w / "d.json"));
  CHECK(j["similarity"].get<double>() == doctest::Approx(1.0));
  CHECK(j["features"].size() == 5);
}
