#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "chtwin/cli.hpp"
#include "chtwin/env.hpp"
#include "chtwin/io.hpp"
#include "chtwin/mlp.hpp"
#include "chtwin/sampling.hpp"
#include "support/temp_dir.hpp"

using namespace chtwin;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// gen-env, gen-data and a short strict training run into `dir`.
void pipeline(const TempDir& dir) {
  const auto d = dir.path().string();
  REQUIRE(run({"gen-env", "--seed", "7", "--out", d + "/env.json", "--strict"}).code == 0);
  REQUIRE(run({"gen-data", "--env", d + "/env.json", "--n", "300", "--seed", "7", "--out", d + "/data.csv",
               "--strict"})
              .code == 0);
  REQUIRE(run({"train", "--data", d + "/data.csv", "--env", d + "/env.json", "--out", d + "/m.ckpt", "--metrics",
               d + "/m.csv", "--epochs", "2", "--width", "8", "--batch", "32", "--seed", "7", "--test-out",
               d + "/test.csv", "--strict"})
              .code == 0);
}

}  // namespace

TEST_CASE("gen-env writes a loadable environment and a manifest", "[cli]") {
  TempDir dir("cli");
  const auto r = run({"gen-env", "--seed", "3", "--obstacles", "5", "--aps", "4", "--roi", "120x80", "--out",
                      (dir / "env.json").string()});
  REQUIRE(r.code == 0);
  const auto env = load_environment(dir / "env.json");
  CHECK(env == generate_environment(3, 5, 4, 120, 80));
  CHECK(fs::exists(dir / "env.json.manifest.json"));
  const auto manifest = read_text_file(dir / "env.json.manifest.json");
  CHECK(manifest.find("\"command\": \"gen-env\"") != std::string::npos);
}

TEST_CASE("relative outputs land in --out-dir", "[cli]") {
  TempDir dir("cli");
  REQUIRE(run({"gen-env", "--out-dir", dir.path().string(), "--out", "e.json"}).code == 0);
  CHECK(fs::exists(dir / "e.json"));
}

TEST_CASE("usage errors exit with 2", "[cli]") {
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"gen-env"}).code == 2);  // missing --out
  CHECK(run({"gen-env", "--out", "x.json", "--obstacles", "many"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing model file is reported without writing output", "[cli]") {
  TempDir dir("cli");
  REQUIRE(run({"gen-env", "--out", (dir / "env.json").string()}).code == 0);
  const auto r = run({"map", "--env", (dir / "env.json").string(), "--model", (dir / "nope.ckpt").string(),
                      "--tx", "10,10", "--out", (dir / "map.csv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("not found") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "map.csv"));
}

TEST_CASE("end-to-end pipeline", "[cli]") {
  TempDir dir("cli");
  pipeline(dir);
  const auto d = dir.path().string();
  CHECK(read_text_file(dir / "m.csv").rfind("epoch,train_mse_db2,val_mse_db2\n", 0) == 0);
  CHECK(load_checkpoint(dir / "m.ckpt").hidden_layer_count() == 7);
  CHECK(read_dataset_csv(dir / "test.csv").size() == 30);

  REQUIRE(run({"fit-pl", "--data", d + "/data.csv", "--out", d + "/pl.txt"}).code == 0);
  const auto ev = run({"eval", "--model", d + "/pl.txt", "--data", d + "/test.csv", "--out", d + "/err.csv",
                       "--box-out", d + "/box.csv"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.rfind("n=30 mae_db=", 0) == 0);
  CHECK(read_text_file(dir / "box.csv").rfind("median,q1,q3,iqr,lower_fence,upper_fence,n_outliers\n", 0) == 0);
  CHECK(read_text_file(dir / "err.csv").rfind("tx_x,tx_y,rx_x,rx_y,abs_err_db\n", 0) == 0);

  const auto as = run({"associate", "--env", d + "/env.json", "--model", d + "/m.ckpt", "--ue", "100,100"});
  REQUIRE(as.code == 0);
  CHECK(as.out.rfind("rank,ap_index,score_db\n1,", 0) == 0);

  REQUIRE(run({"map", "--env", d + "/env.json", "--model", "kriging", "--si-seeds", "30", "--tx", "50,50", "--res",
               "10", "--out", d + "/map.csv", "--pgm", d + "/map.pgm"})
              .code == 0);
  CHECK(read_text_file(dir / "map.csv").rfind("x,y,gain_db\n", 0) == 0);

  REQUIRE(run({"train-fl", "--data", d + "/data.csv", "--env", d + "/env.json", "--out", d + "/fl.ckpt",
               "--metrics", d + "/fl.csv", "--rounds", "2", "--clients", "3", "--width", "8"})
              .code == 0);
  CHECK(read_text_file(dir / "fl.csv").rfind("round,val_mse_db2\n1,", 0) == 0);
}

TEST_CASE("strict runs are byte-identical", "[cli]") {
  TempDir a("cli"), b("cli");
  pipeline(a);
  pipeline(b);
  for (const char* f : {"env.json", "data.csv", "m.ckpt", "m.csv", "test.csv"}) {
    CHECK(read_text_file(a / f) == read_text_file(b / f));
  }
}
