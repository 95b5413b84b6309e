#include <cstdlib>

#include "doctest.h"
#include "rnntlid/config/kv_format.hpp"
#include "rnntlid/config/run_config.hpp"

using namespace rnntlid;

TEST_CASE("key value parsing") {
  const auto doc = KvDocument::parse("# comment\n[train]\nsteps = 10\n\n[decode]\nalpha=2.5\n");
  CHECK(doc.get_int("train.steps") == 10);
  CHECK(doc.get_double("decode.alpha") == 2.5);
  CHECK_THROWS(KvDocument::parse("[train]\nno equals sign\n"));
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3), "x") == 1.0 / 3);
}

TEST_CASE("run config round trip") {
  RunConfig c;
  CHECK(RunConfig::parse(c.render()) == c);
  c.seed = 99;
  c.model.injection = Injection::kBoth;
  c.model.signal = SignalKind::kLidPosterior;
  c.decode.gate = {2, 0.1};
  c.train.schedule.peak_lr = 1.0 / 3;
  c.lexicon.languages = {"en", "hi", "es"};
  c.matrix.joint_gates = {{1, 0}, {3, 0.25}};
  const RunConfig back = RunConfig::parse(c.render());
  CHECK(back == c);
  CHECK(back.train.schedule.peak_lr == c.train.schedule.peak_lr);
  CHECK(back.hash() == c.hash());
  CHECK(back.hash() != RunConfig{}.hash());
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    RunConfig::parse("[train]\nstepz = 3\n");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("train.stepz") != std::string::npos);
  }
}

TEST_CASE("every field has a default") {
  const auto defaults = config_defaults();
  CHECK(defaults.size() > 50);
  for (const auto& [key, value] : defaults) {
    CAPTURE(key);
    CHECK_FALSE(value.empty());
  }
}

TEST_CASE("environment overrides") {
  setenv("RNNTLID_TRAIN_STEPS", "17", 1);
  setenv("RNNTLID_DECODE_BETA", "0.5", 1);
  RunConfig c;
  c.apply_environment();
  unsetenv("RNNTLID_TRAIN_STEPS");
  unsetenv("RNNTLID_DECODE_BETA");
  CHECK(c.train.steps == 17);
  CHECK(c.decode.gate.beta == 0.5);
}

TEST_CASE("bad values fail with the key name") {
  try {
    RunConfig::parse("[model]\ninjection = Q\n");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).size() > 0);
  }
  CHECK_THROWS(RunConfig::parse("[train]\nsteps = many\n"));
}
