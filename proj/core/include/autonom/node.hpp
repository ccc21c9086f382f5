#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autonom/chain.hpp"
#include "autonom/classifier.hpp"
#include "autonom/cybernft.hpp"
#include "autonom/pubsub.hpp"
#include "autonom/wallet.hpp"

namespace autonom {

// logical tick 0 in wall-clock milliseconds; block timestamps derive from it
inline constexpr std::int64_t kTickEpochMs = 1700000000000;
inline std::int64_t tick_to_ms(std::int64_t tick) { return kTickEpochMs + tick * 1000; }

// identifies the detector family, not the node: the same signature seen
// anywhere maps to the same token
inline constexpr std::string_view kDetectorId = "linear-svm";

struct NodeConfig {
  std::string node_id;
  std::string seed_hex;  // wallet seed, hex
  bool classifier_capable = true;
  double anomaly_margin_threshold = 0.0;
  std::size_t retrain_batch_size = 8;
  double vote_weight = 1.0;

  static NodeConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct Alert {
  std::string token_id;
  std::string label;
  std::string source_addr;
  double margin = 0;
  std::int64_t tick = 0;
};

struct ChainUpdatedEvent {
  std::string node_id;
  std::uint64_t chain_length = 0;
  std::string head_hash;

  std::string payload() const;
  static ChainUpdatedEvent parse(const std::string& payload);
};

struct AlertEvent {
  std::string node_id;
  std::string token_id;
  std::string label;
  std::string source_addr;

  std::string payload() const;
  static AlertEvent parse(const std::string& payload);
};

struct ModelUpdateEvent {
  std::uint64_t version = 0;
  Model model;

  std::string payload() const;
  static ModelUpdateEvent parse(const std::string& payload);
};

enum class FlowOutcome { DroppedQuarantined, Benign, AlertRaised, DuplicateSuppressed };

struct FlowResult {
  FlowOutcome outcome = FlowOutcome::Benign;
  std::optional<Alert> alert;  // set on AlertRaised
};

enum class ModelOutcome { Adopted, IgnoredStale };

// Single-threaded IDS node state machine. All cross-node interaction goes
// through the broker and the chain-snapshot fetcher; handlers take the
// current logical tick from the caller.
class Node {
 public:
  using ChainFetcher = std::function<std::optional<Chain>(const std::string& peer_id)>;

  Node(NodeConfig config, Chain chain, Model model);

  // subscribes to the three topics; fetcher answers chain-snapshot requests
  void attach(Broker& broker, ChainFetcher fetcher);

  const NodeConfig& config() const { return config_; }
  const std::string& node_id() const { return config_.node_id; }
  const KeyPair& keys() const { return keys_; }
  const std::string& address() const { return keys_.address(); }
  const Chain& chain() const { return chain_; }
  Chain& chain() { return chain_; }
  const Model& model() const { return model_; }
  const std::vector<Alert>& alerts() const { return alerts_; }
  const std::vector<FlowRecord>& collected_flows() const { return collected_flows_; }
  const std::set<std::string>& quarantined() const { return quarantined_; }
  bool is_quarantined(const std::string& source_addr) const;
  const std::vector<std::string>& peers() const { return peers_; }
  void add_peer(const std::string& peer);

  // Classifies the flow, buffers it with the predicted label, and on a
  // confident malicious verdict quarantines the source and mints the
  // discovery token (duplicate tokens suppress the alert and the mint).
  FlowResult on_flow(FlowRecord flow, std::int64_t tick);

  // Fetches the sender's chain when it claims more blocks; adopts via the
  // longest-valid-chain rule and republishes only on adoption.
  std::optional<ReplaceResult> on_chain_updated(const ChainUpdatedEvent& event,
                                                std::int64_t tick);

  // A peer's alert quarantines the source here too.
  void on_alert(const AlertEvent& event);

  ModelOutcome on_model_update(const ModelUpdateEvent& event);

  void quarantine(const std::string& source_addr);
  void set_model(Model model);
  void adopt_and_publish_model(Model model);
  void clear_collected_flows() { collected_flows_.clear(); }

  // Mines whatever is pending (always at least the coinbase) and announces
  // the new head. Used for transfer confirmation and fork tie-breaking.
  const Block& mine_and_announce(std::int64_t tick,
                                 std::map<std::string, std::string> coinbase_metadata = {});

  void announce_chain();

 private:
  void publish(std::string_view topic, std::string payload);

  NodeConfig config_;
  KeyPair keys_;
  Chain chain_;
  Model model_;
  Broker* broker_ = nullptr;
  ChainFetcher fetcher_;
  std::vector<FlowRecord> collected_flows_;
  std::set<std::string> quarantined_;
  std::vector<Alert> alerts_;
  std::vector<std::string> peers_;
};

// Ranks by (alert count desc, most recent alert tick desc, node id asc).
std::vector<Node*> select_retrain_nodes(std::span<Node* const> nodes, std::size_t k);

enum class RetrainStatus { Updated, SkippedSingleClass, SkippedInsufficientData };
const char* to_string(RetrainStatus s);

struct RetrainResult {
  RetrainStatus status = RetrainStatus::SkippedInsufficientData;
  std::uint64_t version = 0;   // new model version when Updated
  std::size_t pooled = 0;      // records trained on
  std::string trainer_id;      // node that trained and published
};

// Pools the labeled buffers of classifier-capable selected nodes whose
// buffer reached their own retrain batch size, trains the next model
// version, publishes it from the first capable node, and clears the
// contributing buffers.
RetrainResult aggregate_retrain(std::span<Node* const> selected, const TrainConfig& cfg);

}  // namespace autonom
