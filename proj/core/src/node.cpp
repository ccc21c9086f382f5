#include "autonom/node.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace autonom {

NodeConfig NodeConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("node config must be a JSON object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "nodeId" && k != "seed" && k != "classifierCapable" &&
        k != "anomalyMarginThreshold" && k != "retrainBatchSize" && k != "voteWeight") {
      throw std::invalid_argument("unknown key \"" + k + "\" in node config");
    }
  }
  for (const char* k : {"nodeId", "seed", "classifierCapable", "anomalyMarginThreshold",
                        "retrainBatchSize", "voteWeight"}) {
    if (!j.contains(k)) {
      throw std::invalid_argument("missing key \"" + std::string(k) + "\" in node config");
    }
  }
  NodeConfig cfg;
  cfg.node_id = j.at("nodeId").get<std::string>();
  cfg.seed_hex = j.at("seed").get<std::string>();
  cfg.classifier_capable = j.at("classifierCapable").get<bool>();
  cfg.anomaly_margin_threshold = j.at("anomalyMarginThreshold").get<double>();
  if (!j.at("retrainBatchSize").is_number_integer() ||
      j.at("retrainBatchSize").get<std::int64_t>() < 1) {
    throw std::invalid_argument("retrainBatchSize must be an integer >= 1");
  }
  cfg.retrain_batch_size = j.at("retrainBatchSize").get<std::size_t>();
  cfg.vote_weight = j.at("voteWeight").get<double>();
  if (!(cfg.vote_weight > 0)) throw std::invalid_argument("voteWeight must be positive");
  if (cfg.node_id.empty()) throw std::invalid_argument("nodeId must be non-empty");
  return cfg;
}

nlohmann::ordered_json NodeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["nodeId"] = node_id;
  j["seed"] = seed_hex;
  j["classifierCapable"] = classifier_capable;
  j["anomalyMarginThreshold"] = anomaly_margin_threshold;
  j["retrainBatchSize"] = retrain_batch_size;
  j["voteWeight"] = vote_weight;
  return j;
}

std::string ChainUpdatedEvent::payload() const {
  nlohmann::ordered_json j;
  j["nodeId"] = node_id;
  j["chainLength"] = chain_length;
  j["headHash"] = head_hash;
  return j.dump();
}

ChainUpdatedEvent ChainUpdatedEvent::parse(const std::string& payload) {
  auto j = nlohmann::json::parse(payload);
  return ChainUpdatedEvent{j.at("nodeId").get<std::string>(),
                           j.at("chainLength").get<std::uint64_t>(),
                           j.at("headHash").get<std::string>()};
}

std::string AlertEvent::payload() const {
  nlohmann::ordered_json j;
  j["nodeId"] = node_id;
  j["tokenId"] = token_id;
  j["label"] = label;
  j["sourceAddr"] = source_addr;
  return j.dump();
}

AlertEvent AlertEvent::parse(const std::string& payload) {
  auto j = nlohmann::json::parse(payload);
  return AlertEvent{j.at("nodeId").get<std::string>(), j.at("tokenId").get<std::string>(),
                    j.at("label").get<std::string>(), j.at("sourceAddr").get<std::string>()};
}

std::string ModelUpdateEvent::payload() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["model"] = model.to_json();
  return j.dump();
}

ModelUpdateEvent ModelUpdateEvent::parse(const std::string& payload) {
  auto j = nlohmann::json::parse(payload);
  return ModelUpdateEvent{j.at("version").get<std::uint64_t>(),
                          Model::from_json(j.at("model"))};
}

Node::Node(NodeConfig config, Chain chain, Model model)
    : config_(std::move(config)),
      keys_(generate_keypair(config_.seed_hex)),
      chain_(std::move(chain)),
      model_(std::move(model)) {
  if (config_.node_id.empty()) throw std::invalid_argument("nodeId must be non-empty");
  if (config_.retrain_batch_size < 1) {
    throw std::invalid_argument("retrainBatchSize must be at least 1");
  }
  if (!(config_.vote_weight > 0)) throw std::invalid_argument("voteWeight must be positive");
}

void Node::attach(Broker& broker, ChainFetcher fetcher) {
  broker_ = &broker;
  fetcher_ = std::move(fetcher);
  broker.subscribe(node_id(), topic::kChainUpdated,
                   [this](const Message& m, std::int64_t tick) {
                     on_chain_updated(ChainUpdatedEvent::parse(m.payload), tick);
                   });
  broker.subscribe(node_id(), topic::kAlertIntrusion,
                   [this](const Message& m, std::int64_t) {
                     on_alert(AlertEvent::parse(m.payload));
                   });
  broker.subscribe(node_id(), topic::kModelUpdate,
                   [this](const Message& m, std::int64_t) {
                     on_model_update(ModelUpdateEvent::parse(m.payload));
                   });
}

bool Node::is_quarantined(const std::string& source_addr) const {
  return quarantined_.contains(source_addr);
}

void Node::add_peer(const std::string& peer) {
  if (std::find(peers_.begin(), peers_.end(), peer) == peers_.end()) peers_.push_back(peer);
}

FlowResult Node::on_flow(FlowRecord flow, std::int64_t tick) {
  if (!flow.source_addr.empty() && quarantined_.contains(flow.source_addr)) {
    return {FlowOutcome::DroppedQuarantined, std::nullopt};
  }
  Prediction pred = predict(model_, flow);
  flow.label = pred.label;
  collected_flows_.push_back(flow);

  if (pred.label != kMalicious || std::abs(pred.margin) < config_.anomaly_margin_threshold) {
    return {FlowOutcome::Benign, std::nullopt};
  }
  if (!flow.source_addr.empty()) quarantine(flow.source_addr);

  IntrusionSignature sig;
  sig.detector_id = std::string(kDetectorId);
  sig.feature_vector = feature_vector(flow, model_.weights.size() == 13);
  sig.label = "malicious";
  sig.first_seen = tick_to_ms(tick);

  auto block = mint_discovery(chain_, keys_.address(), sig, tick_to_ms(tick));
  if (!block) return {FlowOutcome::DuplicateSuppressed, std::nullopt};

  Alert alert{token_id(sig), sig.label, flow.source_addr, pred.margin, tick};
  alerts_.push_back(alert);
  announce_chain();
  publish(topic::kAlertIntrusion,
          AlertEvent{node_id(), alert.token_id, alert.label, alert.source_addr}.payload());
  return {FlowOutcome::AlertRaised, alert};
}

std::optional<ReplaceResult> Node::on_chain_updated(const ChainUpdatedEvent& event,
                                                    std::int64_t) {
  if (event.node_id == node_id()) return std::nullopt;
  if (event.chain_length <= chain_.blocks().size()) return std::nullopt;
  if (!fetcher_) return std::nullopt;
  auto snapshot = fetcher_(event.node_id);
  if (!snapshot) return std::nullopt;
  ReplaceResult result = chain_.replace_with(*snapshot);
  if (result == ReplaceResult::Replaced) announce_chain();
  return result;
}

void Node::on_alert(const AlertEvent& event) {
  if (event.node_id == node_id()) return;
  if (!event.source_addr.empty()) quarantine(event.source_addr);
}

ModelOutcome Node::on_model_update(const ModelUpdateEvent& event) {
  if (event.version <= model_.version) return ModelOutcome::IgnoredStale;
  model_ = event.model;
  model_.version = event.version;
  return ModelOutcome::Adopted;
}

void Node::quarantine(const std::string& source_addr) { quarantined_.insert(source_addr); }

void Node::set_model(Model model) { model_ = std::move(model); }

void Node::adopt_and_publish_model(Model model) {
  model_ = std::move(model);
  publish(topic::kModelUpdate, ModelUpdateEvent{model_.version, model_}.payload());
}

const Block& Node::mine_and_announce(std::int64_t tick,
                                     std::map<std::string, std::string> coinbase_metadata) {
  const Block& block =
      chain_.mine_pending(keys_.address(), tick_to_ms(tick), std::move(coinbase_metadata));
  announce_chain();
  return block;
}

void Node::announce_chain() {
  publish(topic::kChainUpdated,
          ChainUpdatedEvent{node_id(), chain_.blocks().size(), chain_.head().hash}.payload());
}

void Node::publish(std::string_view topic, std::string payload) {
  if (broker_) broker_->publish(topic, node_id(), std::move(payload));
}

std::vector<Node*> select_retrain_nodes(std::span<Node* const> nodes, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  std::vector<Node*> ranked(nodes.begin(), nodes.end());
  std::sort(ranked.begin(), ranked.end(), [](Node* a, Node* b) {
    const std::size_t ca = a->alerts().size();
    const std::size_t cb = b->alerts().size();
    if (ca != cb) return ca > cb;
    const std::int64_t ra = ca ? a->alerts().back().tick : -1;
    const std::int64_t rb = cb ? b->alerts().back().tick : -1;
    if (ra != rb) return ra > rb;
    return a->node_id() < b->node_id();
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

const char* to_string(RetrainStatus s) {
  switch (s) {
    case RetrainStatus::Updated: return "updated";
    case RetrainStatus::SkippedSingleClass: return "skipped(single-class)";
    case RetrainStatus::SkippedInsufficientData: return "skipped(insufficient-data)";
  }
  return "unknown";
}

RetrainResult aggregate_retrain(std::span<Node* const> selected, const TrainConfig& cfg) {
  std::vector<FlowRecord> pool;
  std::vector<Node*> contributors;
  std::uint64_t max_version = 0;
  Node* trainer = nullptr;

  for (Node* node : selected) {
    max_version = std::max(max_version, node->model().version);
    if (!node->config().classifier_capable) continue;
    if (!trainer) trainer = node;
    if (node->collected_flows().size() < node->config().retrain_batch_size) continue;
    bool contributed = false;
    for (const auto& record : node->collected_flows()) {
      if (record.label) {
        pool.push_back(record);
        contributed = true;
      }
    }
    if (contributed) contributors.push_back(node);
  }

  RetrainResult result;
  if (!trainer || pool.size() < 2) return result;

  const bool has_benign = std::any_of(pool.begin(), pool.end(),
                                      [](const FlowRecord& r) { return *r.label == kBenign; });
  const bool has_malicious = std::any_of(
      pool.begin(), pool.end(), [](const FlowRecord& r) { return *r.label == kMalicious; });
  if (!has_benign || !has_malicious) {
    result.status = RetrainStatus::SkippedSingleClass;
    return result;
  }

  Model model = train(pool, cfg);
  model.version = max_version + 1;
  result.status = RetrainStatus::Updated;
  result.version = model.version;
  result.pooled = pool.size();
  result.trainer_id = trainer->node_id();
  trainer->adopt_and_publish_model(std::move(model));
  for (Node* node : contributors) node->clear_collected_flows();
  return result;
}

}  // namespace autonom
