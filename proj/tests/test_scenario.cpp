#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "autonom/scenario.hpp"

using namespace autonom;

namespace {

// Small and fast: difficulty 1, a handful of flows.
ScenarioConfig small_config() {
  ScenarioConfig cfg;
  cfg.nodes = 3;
  cfg.seed = 7;
  cfg.difficulty = 1;
  cfg.benign_count = 10;
  cfg.malicious_count = 1;
  cfg.retrain_every = 6;
  cfg.bootstrap_count = 60;
  cfg.train.epochs = 10;
  return cfg;
}

}  // namespace

TEST_CASE("a small run converges, alerts, and completes the transfer demo") {
  auto report = run_scenario(small_config());
  const auto& doc = report.document;
  CHECK(report.ok);
  CHECK(doc.at("converged").get<bool>());
  CHECK(doc.at("invariantFailures").empty());
  CHECK(doc.at("metrics").at("alertCount").get<int>() >= 1);
  CHECK(doc.at("metrics").at("mintCount").get<int>() >= 1);
  CHECK(doc.at("transfer").at("completed").get<bool>());
  CHECK_FALSE(doc.at("nftRegistry").empty());

  // every node reports the same head
  const auto& heads = doc.at("finalHeads");
  REQUIRE(heads.size() == 3);
  std::string first = heads.begin().value().get<std::string>();
  for (const auto& item : heads.items()) CHECK(item.value().get<std::string>() == first);

  // analytic block alongside the measured reaction latency
  const auto& metrics = doc.at("metrics");
  CHECK(metrics.at("reactionLatencyTicks").get<double>() > 0);
  CHECK(metrics.at("analytic").at("mttrSeconds").get<double>() > 0);
}

TEST_CASE("identical configs produce byte-identical reports") {
  auto a = run_scenario(small_config());
  auto b = run_scenario(small_config());
  CHECK(a.document.dump() == b.document.dump());

  auto cfg = small_config();
  cfg.seed = 8;
  auto c = run_scenario(cfg);
  CHECK(a.document.dump() != c.document.dump());
}

TEST_CASE("benign-only traffic raises no alerts and mints nothing") {
  auto cfg = small_config();
  cfg.malicious_count = 0;
  cfg.transfer_demo = false;
  cfg.retrain_every = 0;
  auto report = run_scenario(cfg);
  CHECK(report.ok);
  CHECK(report.document.at("metrics").at("alertCount").get<int>() == 0);
  CHECK(report.document.at("metrics").at("mintCount").get<int>() == 0);
  CHECK(report.document.at("alerts").empty());
  CHECK(report.document.at("transfer").at("completed").get<bool>() == false);
}

TEST_CASE("config json round trips through the resolved form") {
  auto cfg = small_config();
  auto j = cfg.to_json();
  auto back = ScenarioConfig::from_json(j);
  CHECK(back.to_json() == j);
  // detection rates resolve to one entry per node
  REQUIRE(j.at("detectionRates").size() == 3);
  CHECK(j.at("detectionRates")[0].get<double>() == 10.0);
}

TEST_CASE("config parsing rejects unknown keys and malformed shapes") {
  auto j = small_config().to_json();
  auto broken = j;
  broken["surprise"] = true;
  CHECK_THROWS_AS((void)ScenarioConfig::from_json(broken), ScenarioError);

  broken = j;
  broken["latency"] = nlohmann::json::array({1});
  CHECK_THROWS_AS((void)ScenarioConfig::from_json(broken), ScenarioError);

  broken = j;
  broken["trafficMix"]["bogus"] = 1;
  CHECK_THROWS_AS((void)ScenarioConfig::from_json(broken), ScenarioError);

  CHECK_THROWS_AS((void)ScenarioConfig::from_json(nlohmann::json::array()), ScenarioError);
}

TEST_CASE("config validation rejects out-of-range values") {
  auto cfg = small_config();
  cfg.nodes = 0;
  CHECK_THROWS_AS((void)run_scenario(cfg), ScenarioError);

  cfg = small_config();
  cfg.queue = {10.0, 10.0};  // rho = 1, unstable
  CHECK_THROWS_AS((void)run_scenario(cfg), ScenarioError);

  cfg = small_config();
  cfg.latency_min = 3;
  cfg.latency_max = 1;
  CHECK_THROWS_AS((void)run_scenario(cfg), ScenarioError);

  cfg = small_config();
  cfg.difficulty = 9;
  CHECK_THROWS_AS((void)run_scenario(cfg), ScenarioError);
}

TEST_CASE("the text rendering summarizes convergence") {
  auto report = run_scenario(small_config());
  std::string text = report.to_text();
  CHECK(text.find("converged") != std::string::npos);
  CHECK(text.find("alerts") != std::string::npos);
}
