#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "o2orl/config.hpp"

using namespace o2orl;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& text) {
  static int counter = 0;
  const fs::path path = fs::temp_directory_path() / ("o2orl_cfg_" + std::to_string(counter++) + ".cfg");
  std::ofstream out(path);
  out << text;
  return path.string();
}

}  // namespace

TEST_CASE("defaults carry the documented values") {
  const ConfigMap map = ConfigMap::defaults();
  CHECK(map.get_string("env_id") == "pendulum");
  CHECK(map.get_int("offline_steps") == 50000);
  CHECK(map.get_int("online_steps") == 20000);
  CHECK(map.get_int("updates_per_step") == 5);
  CHECK(map.get_int("agent.n_critics") == 10);
  CHECK(map.get_int("agent.m_targets") == 2);
  CHECK(map.get_int("agent.batch_size") == 256);
  CHECK(map.get_double("alpha.offline") == 0.4);
  CHECK(map.get_double("alpha.r_target") == 1.05);
  CHECK(map.get_double("replay.downsample_keep") == 0.05);
  CHECK(map.get_int("agent.hidden_dim") == 256);
}

TEST_CASE("config files parse comments, blanks, and spacing") {
  const std::string path = write_temp(
      "# a comment\n"
      "\n"
      "seed = 7\n"
      "agent.gamma=0.95   # trailing comment\n"
      "  alpha.kp =  0.01\n");
  ConfigMap map = ConfigMap::defaults();
  map.load_file(path);
  CHECK(map.get_u64("seed") == 7);
  CHECK(map.get_double("agent.gamma") == 0.95);
  CHECK(map.get_double("alpha.kp") == 0.01);
  CHECK(map.is_default("agent.tau"));
  CHECK_FALSE(map.is_default("seed"));
}

TEST_CASE("unknown keys are rejected by name") {
  ConfigMap map = ConfigMap::defaults();
  try {
    map.set("agent.gama", "0.9");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("agent.gama") != std::string::npos);
  }
  const std::string path = write_temp("mystery.key = 3\n");
  CHECK_THROWS_AS(map.load_file(path), UsageError);
}

TEST_CASE("malformed values are rejected by key") {
  ConfigMap map = ConfigMap::defaults();
  try {
    map.set("agent.gamma", "banana");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    const std::string what = e.what();
    CHECK(what.find("agent.gamma") != std::string::npos);
    CHECK(what.find("banana") != std::string::npos);
  }
  CHECK_THROWS_AS(map.set("agent.n_critics", "2.5"), UsageError);
  CHECK_THROWS_AS(map.set("agent.ensemble_mode", "sextuple"), UsageError);
  CHECK_THROWS_AS(map.set("agent.per_sample_subsets", "maybe"), UsageError);
  CHECK_THROWS_AS(map.set("sweep.alpha_values", "0.1,x"), UsageError);
}

TEST_CASE("missing config files are reported") {
  ConfigMap map = ConfigMap::defaults();
  try {
    map.load_file("/nope/missing.cfg");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("/nope/missing.cfg") != std::string::npos);
  }
}

TEST_CASE("later overrides win") {
  ConfigMap map = ConfigMap::defaults();
  const std::string path = write_temp("seed = 3\n");
  map.load_file(path);
  map.set("seed", "7");
  CHECK(map.get_u64("seed") == 7);
}

TEST_CASE("resolved text lists every key sorted with final values") {
  ConfigMap map = ConfigMap::defaults();
  map.set("seed", "9");
  const std::string text = map.resolved_text();
  CHECK(text.find("seed = 9\n") != std::string::npos);
  CHECK(text.find("agent.gamma = 0.99\n") != std::string::npos);
  CHECK(text.find("sweep.kd_values = ") != std::string::npos);
  // sorted: agent.* precedes alpha.*, which precedes seed
  CHECK(text.find("agent.gamma") < text.find("alpha.kp"));
  CHECK(text.find("alpha.kp") < text.find("seed ="));
}

TEST_CASE("run config materializes from the map") {
  ConfigMap map = ConfigMap::defaults();
  map.set("agent.hidden_dim", "32");
  map.set("alpha.mode", "fixed");
  map.set("alpha.fixed_value", "0.1");
  map.set("replay.downsample_mode", "prioritized");
  const RunConfig cfg = RunConfig::from(map);
  CHECK(cfg.agent.hidden_dim == 32);
  CHECK_FALSE(cfg.alpha_adaptive);
  CHECK(cfg.alpha_fixed == 0.1);
  CHECK(cfg.downsample_mode == DownsampleMode::prioritized);
  CHECK(cfg.agent.n_critics == 10);
}

TEST_CASE("double lists parse") {
  ConfigMap map = ConfigMap::defaults();
  map.set("sweep.alpha_values", "0, 0.1 ,0.3");
  const auto values = map.get_double_list("sweep.alpha_values");
  REQUIRE(values.size() == 3);
  CHECK(values[0] == 0.0);
  CHECK(values[1] == 0.1);
  CHECK(values[2] == 0.3);
}
