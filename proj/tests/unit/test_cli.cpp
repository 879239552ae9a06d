#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tollcast/cli/app.hpp"
#include "tollcast/core/config.hpp"
#include "tollcast/core/digest.hpp"

using namespace tollcast;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tollcast_cmd(std::vector<std::string> args) {
  args.insert(args.begin(), "tollcast");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A small workspace: 59 days (January and February), a light forest.
struct Fixture {
  std::filesystem::path root = std::filesystem::temp_directory_path() / "tollcast_cli_test";
  std::filesystem::path ws = root / "ws";
  std::filesystem::path config = root / "study.cfg";

  Fixture() {
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
    std::ofstream(config) << "days = 59\nrf.n_trees = 15\nmlp.epochs = 3\nlstm.epochs = 2\n";
  }
  ~Fixture() { std::filesystem::remove_all(root); }

  Result cmd(std::vector<std::string> args, const std::filesystem::path& out) const {
    args.insert(args.end(), {"--config", config.string(), "--out", out.string()});
    return tollcast_cmd(std::move(args));
  }
};

}  // namespace

TEST_CASE("usage errors exit 1 with help") {
  auto r = tollcast_cmd({"train", "--bogus"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("--algo") != std::string::npos);
  CHECK(tollcast_cmd({}).code == cli::kExitUsage);
  CHECK(tollcast_cmd({"train", "--algo", "xgboost"}).code == cli::kExitUsage);
  CHECK(tollcast_cmd({"train", "--algo", "rf", "--horizon", "7"}).code == cli::kExitUsage);
  CHECK(tollcast_cmd({"predict"}).code == cli::kExitUsage);
  CHECK(tollcast_cmd({"--help"}).code == cli::kExitOk);
}

TEST_CASE("pipeline end to end") {
  const Fixture f;
  REQUIRE(f.cmd({"synth"}, f.ws).code == 0);
  const auto v = f.cmd({"validate"}, f.ws);
  REQUIRE(v.code == 0);
  CHECK(v.out.find("min coverage 1.0000") != std::string::npos);
  REQUIRE(f.cmd({"fuse"}, f.ws).code == 0);

  SUBCASE("train, evaluate, report") {
    const auto t = f.cmd({"train", "--algo", "rf", "--horizon", "all"}, f.ws);
    REQUIRE(t.code == 0);
    for (int h = 1; h <= 5; ++h) {
      CHECK(std::filesystem::exists(f.ws / "models/toll" / ("rf_h" + std::to_string(h) + ".model")));
    }
    const auto e = f.cmd({"evaluate", "--svg"}, f.ws);
    REQUIRE(e.code == 0);
    const std::string metrics = read_file(f.ws / "eval/toll/metrics.csv");
    CHECK(metrics.rfind("algorithm,horizon_min,split,mae,mape,r2\n", 0) == 0);
    CHECK(metrics.find("persistence,30,test,") != std::string::npos);
    CHECK(metrics.find("rf,30,test,") != std::string::npos);
    CHECK(std::filesystem::exists(f.ws / "eval/toll/metrics_mae.svg"));
    const auto rep = f.cmd({"report"}, f.ws);
    CHECK(rep.code == 0);
    CHECK(rep.out.find("| rf | 30 |") != std::string::npos);

    const auto manifest = nlohmann::json::parse(read_file(f.ws / "manifests/train.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["exit_code"] == 0);
    CHECK(manifest["outputs"].size() == 6);
    CHECK(manifest["seed"] == kDefaultSeed);

    SUBCASE("predict in window") {
      const auto p = f.cmd({"predict", "--at", "2019-01-15T07:30"}, f.ws);
      REQUIRE(p.code == 0);
      CHECK(p.out.find("2019-01-15T07:36") != std::string::npos);
      CHECK(p.out.find("2019-01-16T08:00") == std::string::npos);
      CHECK(p.out.find("2019-01-15T08:00") != std::string::npos);
      CHECK(p.out.find("persistence") != std::string::npos);
      CHECK(p.out.find("NA") == std::string::npos);
    }
    SUBCASE("predict off window refuses") {
      const auto p = f.cmd({"predict", "--at", "2019-01-15T12:00"}, f.ws);
      CHECK(p.code == cli::kExitData);
      CHECK(p.err.find("no toll is defined") != std::string::npos);
      CHECK(f.cmd({"predict", "--at", "2019-01-19T07:30"}, f.ws).code == cli::kExitData);
    }
    SUBCASE("schema mismatch") {
      std::ofstream(f.config, std::ios::app) << "calendar_features = false\n";
      const auto bad = f.cmd({"train", "--algo", "rf"}, f.ws);
      CHECK(bad.code == cli::kExitData);
      CHECK(bad.err.find("schema hash mismatch") != std::string::npos);
    }
  }
  SUBCASE("reruns are byte-identical") {
    const auto other = f.root / "ws2";
    std::filesystem::create_directories(other);
    std::filesystem::copy(f.ws / "raw", other / "raw");
    REQUIRE(f.cmd({"fuse"}, other).code == 0);
    for (const auto* ws : {&f.ws, &other}) {
      for (const char* algo : {"rf", "mlp", "lstm"}) {
        REQUIRE(f.cmd({"train", "--algo", algo, "--horizon", "2"}, *ws).code == 0);
      }
      REQUIRE(f.cmd({"evaluate"}, *ws).code == 0);
    }
    for (const char* file : {"models/toll/rf_h2.model", "models/toll/mlp_h2.model",
                             "models/toll/lstm_h2.model", "eval/toll/metrics.csv",
                             "eval/toll/predictions.csv", "features/features_toll.csv"}) {
      CHECK(file_digest(f.ws / file) == file_digest(other / file));
    }
    const auto m1 = nlohmann::json::parse(read_file(f.ws / "manifests/evaluate.json"));
    const auto m2 = nlohmann::json::parse(read_file(other / "manifests/evaluate.json"));
    CHECK(m1["config_digest"] == m2["config_digest"]);
  }
  SUBCASE("ttdiff target") {
    REQUIRE(f.cmd({"train", "--algo", "rf", "--target", "ttdiff", "--horizon", "1"}, f.ws).code == 0);
    const auto e = f.cmd({"evaluate", "--target", "ttdiff"}, f.ws);
    CHECK(e.code == 0);
    CHECK(std::filesystem::exists(f.ws / "eval/ttdiff/metrics.csv"));
  }
}

TEST_CASE("data errors exit 2") {
  const Fixture f;
  CHECK(f.cmd({"fuse"}, f.ws).code == cli::kExitData);
  CHECK(f.cmd({"evaluate"}, f.ws).code == cli::kExitData);
  REQUIRE(f.cmd({"synth"}, f.ws).code == 0);
  std::ofstream(f.ws / "raw/toll.csv") << "when,who,toll\n";
  const auto r = f.cmd({"fuse"}, f.ws);
  CHECK(r.code == cli::kExitData);
  CHECK(std::filesystem::exists(f.ws / "manifests/fuse.json"));
}

TEST_CASE("numerical failure exits 3") {
  const Fixture f;
  REQUIRE(f.cmd({"synth"}, f.ws).code == 0);
  REQUIRE(f.cmd({"fuse"}, f.ws).code == 0);
  std::ofstream(f.config, std::ios::app) << "mlp.lr = 1e300\n";
  const auto r = f.cmd({"train", "--algo", "mlp", "--horizon", "1"}, f.ws);
  CHECK(r.code == cli::kExitNumerical);
  CHECK(r.err.find("non-finite") != std::string::npos);
}
