#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "crane/config.hpp"

using crane::Config;
using crane::ConfigError;

TEST_CASE("defaults carry the full key set") {
  Config cfg = Config::defaults();
  CHECK(cfg.get_int("seed") == 7);
  CHECK(cfg.get_double("plant.l2") == 0.8);
  CHECK(cfg.get_double("ddpg.gamma") == 0.99);
  CHECK(cfg.get_double("reward.r_step") == 0.001);
  CHECK(cfg.get_bool("env.rate_clamp"));
  CHECK(cfg.get_string("eval.kind") == "helix");
}

TEST_CASE("parse handles comments, blanks and whitespace") {
  Config cfg = Config::defaults();
  cfg.parse(
      "# a comment line\n"
      "\n"
      "  ddpg.gamma =   0.95  # trailing comment\n"
      "eval.kind=circle\n");
  CHECK(cfg.get_double("ddpg.gamma") == 0.95);
  CHECK(cfg.get_string("eval.kind") == "circle");
}

TEST_CASE("unknown keys are rejected by name") {
  Config cfg = Config::defaults();
  CHECK_THROWS_WITH_AS(cfg.set("ddpg.gama", "0.9"),
                       doctest::Contains("ddpg.gama"), ConfigError);
  CHECK_THROWS_AS(cfg.parse("nonsense.key = 1\n"), ConfigError);
}

TEST_CASE("malformed values are rejected with the key name") {
  Config cfg = Config::defaults();
  CHECK_THROWS_WITH_AS(cfg.set("ddpg.gamma", "fast"),
                       doctest::Contains("ddpg.gamma"), ConfigError);
  CHECK_THROWS_AS(cfg.set("ddpg.episodes", "12.5"), ConfigError);
  CHECK_THROWS_AS(cfg.set("env.rate_clamp", "maybe"), ConfigError);
  CHECK_THROWS_AS(cfg.parse("just a line without equals\n"), ConfigError);
}

TEST_CASE("serialize round-trips and hash tracks content") {
  Config a = Config::defaults();
  a.set("ddpg.tau", "0.005");
  Config b = Config::defaults();
  b.parse(a.serialize());
  CHECK(a.serialize() == b.serialize());
  CHECK(a.hash() == b.hash());
  b.set("ddpg.tau", "0.001");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("load reads a file on top of the defaults") {
  const char* path = "test_config_tmp.cfg";
  {
    std::ofstream out(path);
    out << "# scaled run\n"
        << "ddpg.episodes = 13\n"
        << "noise.sigma_pos = 0.01\n";
  }
  Config cfg = Config::load(path);
  CHECK(cfg.get_int("ddpg.episodes") == 13);
  CHECK(cfg.get_double("noise.sigma_pos") == 0.01);
  CHECK(cfg.get_int("ddpg.steps") == 200);  // untouched default
  std::remove(path);

  CHECK_THROWS_AS(Config::load("does_not_exist.cfg"), ConfigError);
}
