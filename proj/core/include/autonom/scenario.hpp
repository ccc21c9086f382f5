#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "autonom/classifier.hpp"
#include "autonom/perfmodel.hpp"

namespace autonom {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a run needs, all defaulted to the demo shape. Ticks are the
// only clock; tick_seconds maps them onto the rate units of the analytic
// model.
struct ScenarioConfig {
  int nodes = 3;
  std::uint64_t seed = 42;
  int difficulty = 2;

  std::size_t benign_count = 30;
  std::size_t malicious_count = 2;
  std::int64_t injection_start_tick = 2;
  std::int64_t injection_interval_ticks = 1;

  std::int64_t latency_min = 1;
  std::int64_t latency_max = 3;
  std::int64_t retrain_every = 15;  // 0 disables retraining
  bool transfer_demo = true;

  double tick_seconds = 0.05;
  QueueParams queue{4.0, 10.0};
  double hash_rate = 50000.0;
  std::vector<double> detection_rates;  // empty -> nodes copies of queue.mu

  TrainConfig train;
  double traffic_separation = 6.0;
  std::size_t bootstrap_count = 200;

  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct ScenarioReport {
  nlohmann::ordered_json document;
  bool ok = false;

  std::string to_text() const;
};

// Deterministic tick loop over (broker.step, traffic injection, scripted
// transfer, periodic retraining, fork keep-alive mining). Same config and
// seed produce a byte-identical document.
ScenarioReport run_scenario(const ScenarioConfig& config);

}  // namespace autonom
