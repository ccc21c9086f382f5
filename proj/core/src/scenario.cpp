#include "autonom/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "autonom/node.hpp"

namespace autonom {

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* what) {
  if (!j.is_object()) throw ScenarioError(std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return item.key() == k; })) {
      throw ScenarioError("unknown key \"" + item.key() + "\" in " + what);
    }
  }
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  check_keys(j,
             {"nodes", "seed", "difficulty", "trafficMix", "latency", "retrainEvery",
              "transferDemo", "tickSeconds", "queue", "hashRate", "detectionRates", "train",
              "trafficSeparation", "bootstrapCount"},
             "scenario config");
  ScenarioConfig cfg;
  if (j.contains("nodes")) cfg.nodes = j.at("nodes").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("difficulty")) cfg.difficulty = j.at("difficulty").get<int>();
  if (j.contains("trafficMix")) {
    const auto& mix = j.at("trafficMix");
    check_keys(mix, {"benignCount", "maliciousCount", "injectionSchedule"}, "trafficMix");
    if (mix.contains("benignCount")) cfg.benign_count = mix.at("benignCount").get<std::size_t>();
    if (mix.contains("maliciousCount")) {
      cfg.malicious_count = mix.at("maliciousCount").get<std::size_t>();
    }
    if (mix.contains("injectionSchedule")) {
      const auto& sched = mix.at("injectionSchedule");
      check_keys(sched, {"startTick", "intervalTicks"}, "injectionSchedule");
      if (sched.contains("startTick")) {
        cfg.injection_start_tick = sched.at("startTick").get<std::int64_t>();
      }
      if (sched.contains("intervalTicks")) {
        cfg.injection_interval_ticks = sched.at("intervalTicks").get<std::int64_t>();
      }
    }
  }
  if (j.contains("latency")) {
    const auto& lat = j.at("latency");
    if (!lat.is_array() || lat.size() != 2) throw ScenarioError("latency must be [min, max]");
    cfg.latency_min = lat[0].get<std::int64_t>();
    cfg.latency_max = lat[1].get<std::int64_t>();
  }
  if (j.contains("retrainEvery")) cfg.retrain_every = j.at("retrainEvery").get<std::int64_t>();
  if (j.contains("transferDemo")) cfg.transfer_demo = j.at("transferDemo").get<bool>();
  if (j.contains("tickSeconds")) cfg.tick_seconds = j.at("tickSeconds").get<double>();
  if (j.contains("queue")) {
    const auto& q = j.at("queue");
    check_keys(q, {"lambda", "mu"}, "queue");
    if (q.contains("lambda")) cfg.queue.lambda = q.at("lambda").get<double>();
    if (q.contains("mu")) cfg.queue.mu = q.at("mu").get<double>();
  }
  if (j.contains("hashRate")) cfg.hash_rate = j.at("hashRate").get<double>();
  if (j.contains("detectionRates")) {
    cfg.detection_rates = j.at("detectionRates").get<std::vector<double>>();
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"lambda", "epochs", "seed"}, "train");
    if (t.contains("lambda")) cfg.train.lambda = t.at("lambda").get<double>();
    if (t.contains("epochs")) cfg.train.epochs = t.at("epochs").get<std::size_t>();
    if (t.contains("seed")) cfg.train.seed = t.at("seed").get<std::uint64_t>();
  }
  if (j.contains("trafficSeparation")) {
    cfg.traffic_separation = j.at("trafficSeparation").get<double>();
  }
  if (j.contains("bootstrapCount")) {
    cfg.bootstrap_count = j.at("bootstrapCount").get<std::size_t>();
  }
  return cfg;
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
  nlohmann::ordered_json j;
  j["nodes"] = nodes;
  j["seed"] = seed;
  j["difficulty"] = difficulty;
  j["trafficMix"] = {{"benignCount", benign_count},
                     {"maliciousCount", malicious_count},
                     {"injectionSchedule",
                      {{"startTick", injection_start_tick},
                       {"intervalTicks", injection_interval_ticks}}}};
  j["latency"] = {latency_min, latency_max};
  j["retrainEvery"] = retrain_every;
  j["transferDemo"] = transfer_demo;
  j["tickSeconds"] = tick_seconds;
  j["queue"] = {{"lambda", queue.lambda}, {"mu", queue.mu}};
  j["hashRate"] = hash_rate;
  std::vector<double> rates = detection_rates;
  if (rates.empty()) rates.assign(static_cast<std::size_t>(nodes), queue.mu);
  j["detectionRates"] = rates;
  j["train"] = {{"lambda", train.lambda}, {"epochs", train.epochs}, {"seed", train.seed}};
  j["trafficSeparation"] = traffic_separation;
  j["bootstrapCount"] = bootstrap_count;
  return j;
}

namespace {

struct Injection {
  std::int64_t tick = 0;
  int label = kBenign;
  std::size_t target = 0;
  std::string source;
};

struct ReactionRecord {
  std::string token;
  std::string block_hash;
  std::int64_t alert_tick = 0;
  std::int64_t confirmed_tick = -1;
};

void validate(const ScenarioConfig& cfg) {
  if (cfg.nodes < 1 || cfg.nodes > 99) throw ScenarioError("nodes must be in [1, 99]");
  if (cfg.difficulty < 1 || cfg.difficulty > 4) {
    throw ScenarioError("difficulty must be in [1, 4] for simulation runs");
  }
  if (cfg.latency_min < 1 || cfg.latency_max < cfg.latency_min) {
    throw ScenarioError("latency must satisfy 1 <= min <= max");
  }
  if (cfg.injection_interval_ticks < 1) throw ScenarioError("intervalTicks must be >= 1");
  if (cfg.injection_start_tick < 0) throw ScenarioError("startTick must be >= 0");
  if (cfg.retrain_every < 0) throw ScenarioError("retrainEvery must be >= 0");
  if (!(cfg.tick_seconds > 0)) throw ScenarioError("tickSeconds must be positive");
  if (!(cfg.queue.lambda > 0) || !(cfg.queue.mu > 0) || cfg.queue.rho() >= 1.0) {
    throw ScenarioError("queue must have positive rates and rho < 1");
  }
  if (!(cfg.hash_rate > 0)) throw ScenarioError("hashRate must be positive");
  if (cfg.bootstrap_count < 2) throw ScenarioError("bootstrapCount must be >= 2");
  if (!(cfg.traffic_separation > 0)) throw ScenarioError("trafficSeparation must be positive");
  for (double r : cfg.detection_rates) {
    if (!(r > 0)) throw ScenarioError("detectionRates must be positive");
  }
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);

  Model bootstrap =
      train(synth_dataset(cfg.train.seed, cfg.bootstrap_count, cfg.traffic_separation),
            cfg.train);

  Broker broker(cfg.seed, cfg.latency_min, cfg.latency_max);
  std::vector<std::unique_ptr<Node>> nodes;
  std::uint64_t seed_state = cfg.seed;
  for (int i = 0; i < cfg.nodes; ++i) {
    NodeConfig nc;
    char id[16];
    std::snprintf(id, sizeof id, "node-%02d", i + 1);
    nc.node_id = id;
    nc.seed_hex = hex64(splitmix(seed_state));
    nc.classifier_capable = !(cfg.nodes >= 4 && i == cfg.nodes - 1);
    nc.anomaly_margin_threshold = 0.0;
    nc.retrain_batch_size = 4;
    nc.vote_weight = 1.0;
    nodes.push_back(std::make_unique<Node>(nc, Chain(cfg.difficulty), bootstrap));
  }
  auto fetch = [&nodes](const std::string& peer) -> std::optional<Chain> {
    for (const auto& n : nodes) {
      if (n->node_id() == peer) return n->chain();
    }
    return std::nullopt;
  };
  for (auto& n : nodes) {
    n->attach(broker, fetch);
    for (const auto& m : nodes) {
      if (m.get() != n.get()) n->add_peer(m->node_id());
    }
  }

  // injection plan: malicious flows evenly interleaved into the benign stream
  const std::size_t total = cfg.benign_count + cfg.malicious_count;
  std::set<std::size_t> malicious_at;
  for (std::size_t k = 0; k < cfg.malicious_count; ++k) {
    malicious_at.insert((k + 1) * total / (cfg.malicious_count + 1));
  }
  std::vector<Injection> plan;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Injection inj;
    inj.tick = cfg.injection_start_tick +
               static_cast<std::int64_t>(idx) * cfg.injection_interval_ticks;
    inj.label = malicious_at.contains(idx) ? kMalicious : kBenign;
    inj.target = idx % static_cast<std::size_t>(cfg.nodes);
    inj.source = inj.label == kMalicious ? "203.0.113.7"
                                         : "10.0.0." + std::to_string(1 + idx % 5);
    plan.push_back(std::move(inj));
  }
  std::mt19937_64 traffic_rng(cfg.seed ^ 0xa5a5a5a55a5a5a5aULL);

  const std::int64_t last_injection =
      plan.empty() ? 0 : plan.back().tick;

  struct Action {
    std::int64_t tick;
    enum Kind { Transfer, ConfirmMine } kind;
    std::size_t node;
    std::string token;
  };
  std::vector<Action> actions;
  bool transfer_scheduled = false;
  std::uint64_t transfer_seed_state = cfg.seed ^ 0x7ea07ea07ea07ea0ULL;
  KeyPair transfer_target = generate_keypair(hex64(splitmix(transfer_seed_state)));
  std::string transfer_token;

  auto trace = nlohmann::ordered_json::array();
  std::vector<std::string> failures;
  std::vector<ReactionRecord> reactions;
  std::vector<nlohmann::ordered_json> alert_rows;

  std::map<std::string, std::string> last_head;
  std::map<std::string, std::uint64_t> last_version;
  std::map<std::string, std::map<std::string, std::int64_t>> first_quarantine;
  for (const auto& n : nodes) {
    last_head[n->node_id()] = n->chain().head().hash;
    last_version[n->node_id()] = n->model().version;
  }
  std::int64_t last_heads_change = 0;

  const std::int64_t convergence_bound = 2 * cfg.latency_max * cfg.nodes;
  const std::int64_t hard_cap = last_injection + 5 * convergence_bound + 120;
  std::int64_t end_tick = hard_cap;

  auto heads_equal = [&nodes]() {
    for (const auto& n : nodes) {
      if (n->chain().head().hash != nodes.front()->chain().head().hash) return false;
    }
    return true;
  };

  std::size_t next_injection = 0;
  for (std::int64_t t = 0; t <= hard_cap; ++t) {
    broker.step(t);

    while (next_injection < plan.size() && plan[next_injection].tick == t) {
      const Injection& inj = plan[next_injection];
      ++next_injection;
      FlowRecord flow = synth_flow(traffic_rng, inj.label, cfg.traffic_separation);
      flow.label.reset();
      flow.source_addr = inj.source;
      Node& target = *nodes[inj.target];
      FlowResult result = target.on_flow(flow, t);

      const char* outcome = "benign";
      switch (result.outcome) {
        case FlowOutcome::DroppedQuarantined: outcome = "dropped(quarantined)"; break;
        case FlowOutcome::Benign: outcome = "no-alert"; break;
        case FlowOutcome::AlertRaised: outcome = "alert"; break;
        case FlowOutcome::DuplicateSuppressed: outcome = "duplicate-suppressed"; break;
      }
      trace.push_back({{"tick", t},
                       {"event", "inject"},
                       {"node", target.node_id()},
                       {"kind", inj.label == kMalicious ? "malicious" : "benign"},
                       {"source", inj.source},
                       {"outcome", outcome}});

      if (result.outcome == FlowOutcome::AlertRaised) {
        const Alert& alert = *result.alert;
        trace.push_back({{"tick", t},
                         {"event", "alert"},
                         {"node", target.node_id()},
                         {"tokenId", alert.token_id},
                         {"source", alert.source_addr},
                         {"margin", alert.margin}});
        trace.push_back({{"tick", t},
                         {"event", "mint"},
                         {"node", target.node_id()},
                         {"tokenId", alert.token_id},
                         {"blockHash", target.chain().head().hash},
                         {"height", target.chain().blocks().size() - 1}});
        alert_rows.push_back({{"node", target.node_id()},
                              {"tick", t},
                              {"tokenId", alert.token_id},
                              {"source", alert.source_addr},
                              {"margin", alert.margin}});
        reactions.push_back(
            ReactionRecord{alert.token_id, target.chain().head().hash, t, -1});

        // every node votes on the same flow; weights from config
        std::vector<std::pair<int, double>> votes;
        for (const auto& n : nodes) {
          votes.push_back({predict(n->model(), flow).label, n->config().vote_weight});
        }
        trace.push_back({{"tick", t},
                         {"event", "consensus"},
                         {"verdict", consensus_classify(votes) == kMalicious ? "malicious"
                                                                             : "benign"},
                         {"votes", votes.size()}});

        if (cfg.transfer_demo && !transfer_scheduled) {
          transfer_scheduled = true;
          transfer_token = alert.token_id;
          actions.push_back({t + 2, Action::Transfer, inj.target, alert.token_id});
          actions.push_back({t + 4, Action::ConfirmMine, inj.target, alert.token_id});
        }
      }
    }

    for (const auto& action : actions) {
      if (action.tick != t) continue;
      Node& node = *nodes[action.node];
      if (action.kind == Action::Transfer) {
        auto result = transfer_nft(node.chain(), action.token, node.keys(),
                                   transfer_target.address(), tick_to_ms(t));
        if (std::holds_alternative<Transaction>(result)) {
          trace.push_back({{"tick", t},
                           {"event", "transfer-queued"},
                           {"node", node.node_id()},
                           {"tokenId", action.token},
                           {"to", transfer_target.address()}});
        } else {
          failures.push_back("transfer rejected: " +
                             std::string(to_string(std::get<TransferReject>(result))));
        }
      } else {
        node.mine_and_announce(t);
        trace.push_back({{"tick", t},
                         {"event", "block"},
                         {"node", node.node_id()},
                         {"kind", "confirm"},
                         {"height", node.chain().blocks().size() - 1},
                         {"hash", node.chain().head().hash}});
      }
    }

    if (cfg.retrain_every > 0 && t > 0 && t % cfg.retrain_every == 0) {
      std::vector<Node*> capable;
      for (const auto& n : nodes) {
        if (n->config().classifier_capable) capable.push_back(n.get());
      }
      if (!capable.empty()) {
        auto selected = select_retrain_nodes(capable, std::max<std::size_t>(
                                                          1, (capable.size() + 1) / 2));
        RetrainResult res = aggregate_retrain(selected, cfg.train);
        nlohmann::ordered_json row = {{"tick", t},
                                      {"event", "retrain"},
                                      {"status", to_string(res.status)}};
        if (res.status == RetrainStatus::Updated) {
          row["version"] = res.version;
          row["pooled"] = res.pooled;
          row["trainer"] = res.trainer_id;
        }
        trace.push_back(std::move(row));
      }
    }

    if (!heads_equal() && t - last_heads_change > cfg.latency_max) {
      std::size_t longest = 0;
      for (const auto& n : nodes) {
        longest = std::max(longest, n->chain().blocks().size());
      }
      Node* miner = nullptr;
      for (const auto& n : nodes) {
        if (n->chain().blocks().size() == longest &&
            (miner == nullptr || n->node_id() < miner->node_id())) {
          miner = n.get();
        }
      }
      miner->mine_and_announce(t);
      trace.push_back({{"tick", t},
                       {"event", "block"},
                       {"node", miner->node_id()},
                       {"kind", "keepalive"},
                       {"height", miner->chain().blocks().size() - 1},
                       {"hash", miner->chain().head().hash}});
      last_heads_change = t;
    }

    for (const auto& n : nodes) {
      const std::string& id = n->node_id();
      if (n->chain().head().hash != last_head[id]) {
        last_head[id] = n->chain().head().hash;
        last_heads_change = t;
        trace.push_back({{"tick", t},
                         {"event", "head"},
                         {"node", id},
                         {"height", n->chain().blocks().size() - 1},
                         {"hash", n->chain().head().hash}});
      }
      std::uint64_t v = n->model().version;
      if (v < last_version[id]) {
        failures.push_back("model version decreased on " + id);
      } else if (v > last_version[id]) {
        last_version[id] = v;
        trace.push_back({{"tick", t}, {"event", "model"}, {"node", id}, {"version", v}});
      }
      for (const auto& source : n->quarantined()) {
        first_quarantine[id].try_emplace(source, t);
      }
    }

    for (auto& record : reactions) {
      if (record.confirmed_tick >= 0) continue;
      bool everywhere = true;
      for (const auto& n : nodes) {
        const auto& blocks = n->chain().blocks();
        if (std::none_of(blocks.begin(), blocks.end(), [&](const Block& b) {
              return b.hash == record.block_hash;
            })) {
          everywhere = false;
          break;
        }
      }
      if (everywhere) record.confirmed_tick = t;
    }

    const bool work_left =
        next_injection < plan.size() ||
        std::any_of(actions.begin(), actions.end(),
                    [&](const Action& a) { return a.tick > t; }) ||
        broker.in_flight() > 0;
    if (!work_left && heads_equal() && t >= last_injection) {
      end_tick = t;
      break;
    }
  }

  if (!heads_equal()) failures.push_back("node heads never converged");
  for (const auto& n : nodes) {
    auto report = n->chain().validate();
    if (!report.valid) {
      failures.push_back("invalid chain on " + n->node_id() + ": " +
                         to_string(report.fault) + " at block " +
                         std::to_string(report.block_index));
    }
  }

  // reward conservation on the adopted chain: issuance only through coinbases
  const Chain& reference = nodes.front()->chain();
  std::set<std::string> addresses;
  for (const auto& b : reference.blocks()) {
    for (const auto& tx : b.transactions) {
      if (tx.from_address) addresses.insert(*tx.from_address);
      addresses.insert(tx.to_address);
    }
  }
  std::int64_t supply = 0;
  for (const auto& addr : addresses) supply += reference.balance_of(addr);
  const auto expected_supply = static_cast<std::int64_t>(
      reference.mining_reward() * (reference.blocks().size() - 1));
  if (supply != expected_supply) {
    failures.push_back("reward conservation broken: supply " + std::to_string(supply) +
                       " expected " + std::to_string(expected_supply));
  }

  for (const auto& n : nodes) {
    for (const Alert& alert : n->alerts()) {
      auto it = first_quarantine[n->node_id()].find(alert.source_addr);
      if (it != first_quarantine[n->node_id()].end() && it->second < alert.tick) {
        failures.push_back("alert after quarantine on " + n->node_id() + " for " +
                           alert.source_addr);
      }
    }
  }

  double reaction_ticks_sum = 0;
  std::size_t reaction_confirmed = 0;
  for (const auto& record : reactions) {
    if (record.confirmed_tick < 0) {
      failures.push_back("mint " + record.token + " never confirmed on all nodes");
    } else {
      reaction_ticks_sum += static_cast<double>(record.confirmed_tick - record.alert_tick);
      ++reaction_confirmed;
    }
  }
  const double mean_reaction_ticks =
      reaction_confirmed ? reaction_ticks_sum / static_cast<double>(reaction_confirmed) : 0.0;

  std::vector<double> rates = cfg.detection_rates;
  if (rates.empty()) rates.assign(static_cast<std::size_t>(cfg.nodes), cfg.queue.mu);
  const double analytic_mttd = mttd(rates);
  const double analytic_wq = wq(cfg.queue);
  const double analytic_block =
      block_time_model(expected_pow_work(cfg.difficulty), cfg.hash_rate);
  const double analytic_mttr = analytic_wq + analytic_block;

  nlohmann::ordered_json doc;
  doc["config"] = cfg.to_json();
  doc["endTick"] = end_tick;
  doc["trace"] = std::move(trace);

  nlohmann::ordered_json heads;
  nlohmann::ordered_json lengths;
  for (const auto& n : nodes) {
    heads[n->node_id()] = n->chain().head().hash;
    lengths[n->node_id()] = n->chain().blocks().size();
  }
  doc["finalHeads"] = std::move(heads);
  doc["chainLengths"] = std::move(lengths);

  auto registry = nlohmann::ordered_json::array();
  for (const auto& nft : list_nfts(reference)) {
    registry.push_back({{"tokenId", nft.token_id},
                        {"minter", nft.minter},
                        {"currentOwner", nft.current_owner},
                        {"mintBlockIndex", nft.mint_block_index}});
  }
  doc["nftRegistry"] = std::move(registry);

  nlohmann::ordered_json balances;
  for (const auto& addr : addresses) balances[addr] = reference.balance_of(addr);
  doc["balances"] = std::move(balances);
  doc["alerts"] = alert_rows;

  nlohmann::ordered_json metrics;
  metrics["alertCount"] = alert_rows.size();
  metrics["mintCount"] = reactions.size();
  metrics["detectionLatencyTicks"] = 0.0;  // classification is synchronous with injection
  metrics["reactionLatencyTicks"] = mean_reaction_ticks;
  metrics["reactionLatencySeconds"] = mean_reaction_ticks * cfg.tick_seconds;
  metrics["analytic"] = {{"mttdSeconds", analytic_mttd},
                         {"wqSeconds", analytic_wq},
                         {"blockTimeSeconds", analytic_block},
                         {"mttrSeconds", analytic_mttr}};
  doc["metrics"] = std::move(metrics);

  doc["invariantFailures"] = failures;
  doc["converged"] = heads_equal();
  if (cfg.transfer_demo && transfer_scheduled) {
    auto owner = owner_of(reference, transfer_token);
    doc["transfer"] = {{"tokenId", transfer_token},
                       {"to", transfer_target.address()},
                       {"completed", owner.has_value() &&
                                         *owner == transfer_target.address()}};
  }

  ScenarioReport report;
  report.document = std::move(doc);
  report.ok = failures.empty();
  return report;
}

std::string ScenarioReport::to_text() const {
  std::ostringstream out;
  const auto& d = document;
  out << "scenario run: " << d.at("config").at("nodes").get<int>() << " nodes, seed "
      << d.at("config").at("seed").get<std::uint64_t>() << ", difficulty "
      << d.at("config").at("difficulty").get<int>() << "\n";
  out << "end tick: " << d.at("endTick").get<std::int64_t>()
      << (d.at("converged").get<bool>() ? " (converged)\n" : " (NOT converged)\n");

  out << "\nheads\n";
  for (const auto& [node, hash] : d.at("finalHeads").items()) {
    out << "  " << node << "  len " << d.at("chainLengths").at(node).get<std::size_t>()
        << "  " << hash.get<std::string>().substr(0, 16) << "...\n";
  }

  const auto& metrics = d.at("metrics");
  out << "\nalerts: " << metrics.at("alertCount").get<std::size_t>()
      << "  mints: " << metrics.at("mintCount").get<std::size_t>() << "\n";
  out << "reaction latency: " << metrics.at("reactionLatencyTicks").get<double>()
      << " ticks = " << metrics.at("reactionLatencySeconds").get<double>() << " s\n";
  const auto& analytic = metrics.at("analytic");
  out << "analytic: MTTD " << analytic.at("mttdSeconds").get<double>() << " s, Wq "
      << analytic.at("wqSeconds").get<double>() << " s, T "
      << analytic.at("blockTimeSeconds").get<double>() << " s, MTTR "
      << analytic.at("mttrSeconds").get<double>() << " s\n";

  out << "\nnft registry\n";
  for (const auto& nft : d.at("nftRegistry")) {
    out << "  " << nft.at("tokenId").get<std::string>().substr(0, 16) << "...  minter "
        << nft.at("minter").get<std::string>().substr(0, 12) << "...  owner "
        << nft.at("currentOwner").get<std::string>().substr(0, 12) << "...\n";
  }
  if (d.contains("transfer")) {
    out << "transfer to " << d.at("transfer").at("to").get<std::string>().substr(0, 12)
        << "...: " << (d.at("transfer").at("completed").get<bool>() ? "completed" : "pending")
        << "\n";
  }

  out << "\nbalances\n";
  for (const auto& [addr, bal] : d.at("balances").items()) {
    out << "  " << addr.substr(0, 12) << "...  " << bal.get<std::int64_t>() << "\n";
  }

  const auto& failures = d.at("invariantFailures");
  if (failures.empty()) {
    out << "\nall invariants hold\n";
  } else {
    out << "\ninvariant failures\n";
    for (const auto& f : failures) out << "  " << f.get<std::string>() << "\n";
  }
  return out.str();
}

}  // namespace autonom
