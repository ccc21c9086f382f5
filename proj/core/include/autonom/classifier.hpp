#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace autonom {

struct ClassifierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CsvError : ClassifierError {
  using ClassifierError::ClassifierError;
};

inline constexpr int kBenign = -1;
inline constexpr int kMalicious = +1;

struct FlowRecord {
  double duration = 0;
  double total_bytes = 0;
  double total_packets = 0;
  double mean_iat = 0;
  double src_port = 0;
  double dst_port = 0;
  double syn = 0;
  double ack = 0;
  double fin = 0;
  double rst = 0;
  double psh = 0;
  double urg = 0;
  double failed_conn = 0;
  std::optional<int> label;  // kBenign / kMalicious; nullopt when unlabeled
  std::string source_addr;   // set on live flows, not a feature, absent in CSV

  bool operator==(const FlowRecord&) const = default;
};

inline constexpr std::array<std::string_view, 13> kCsvFeatureColumns = {
    "duration", "total_bytes", "total_packets", "mean_iat", "src_port", "dst_port",
    "syn",      "ack",         "fin",           "rst",      "psh",      "urg",
    "failed_conn"};

std::size_t feature_dimension(bool include_failed_conn);
std::vector<double> feature_vector(const FlowRecord& r, bool include_failed_conn);

// Header must match the schema exactly; the label column is optional but
// all-or-nothing per file. Throws CsvError naming the offending row.
std::vector<FlowRecord> load_csv(std::istream& in);
std::vector<FlowRecord> load_csv(const std::filesystem::path& path);
void save_csv(std::ostream& out, std::span<const FlowRecord> records);
void save_csv(const std::filesystem::path& path, std::span<const FlowRecord> records);

// One draw from a Gaussian cluster centered separation/2 away from the
// midpoint along the all-ones direction (sign per label), mapped onto
// plausible flow statistics.
FlowRecord synth_flow(std::mt19937_64& rng, int label, double separation);

// Two Gaussian clusters a fixed distance apart along the all-ones direction
// in standardized space, mapped onto plausible flow statistics. Labels
// alternate benign/malicious. Deterministic given the seed.
std::vector<FlowRecord> synth_dataset(std::uint64_t seed, std::size_t n, double separation);

struct Model {
  std::uint64_t version = 1;
  std::vector<double> weights;  // size decides whether failed_conn is used
  double bias = 0;
  std::vector<double> scaler_means;
  std::vector<double> scaler_stds;

  nlohmann::ordered_json to_json() const;
  static Model from_json(const nlohmann::json& j);

  bool operator==(const Model&) const = default;
};

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

std::pair<std::vector<double>, std::vector<double>> fit_scaler(
    std::span<const FlowRecord> records, bool include_failed_conn);
std::vector<double> apply_scaler(const Model& model, const FlowRecord& r);

struct TrainConfig {
  double lambda = 1e-3;
  std::size_t epochs = 40;
  std::uint64_t seed = 1;
  bool include_failed_conn = false;
};

// Linear SVM trained with the Pegasos stochastic subgradient schedule
// (step 1/(lambda t), per-epoch reshuffle, averaged iterates).
Model train(std::span<const FlowRecord> records, const TrainConfig& cfg);

struct Prediction {
  int label = kBenign;
  double margin = 0;  // signed distance proxy, >= 0 classified malicious
};
Prediction predict(const Model& model, const FlowRecord& r);

struct Metrics {
  double accuracy = 0;
  double precision = 0;  // 0 when undefined, see precision_defined
  double recall = 0;
  double f1 = 0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool precision_defined = false;
};
Metrics evaluate(const Model& model, std::span<const FlowRecord> records);

// Weighted vote over per-node verdicts; ties resolve malicious. Throws
// std::invalid_argument on empty votes, non-positive weights, or labels
// outside {-1, +1}. Invariant under uniform scaling of all weights.
int consensus_classify(std::span<const std::pair<int, double>> votes);

// Batch hinge-loss objective and subgradient on standardized features, the
// reference the stochastic trainer is checked against.
double hinge_objective(std::span<const std::vector<double>> xs, std::span<const int> ys,
                       std::span<const double> w, double b, double lambda);
std::pair<std::vector<double>, double> hinge_gradient(std::span<const std::vector<double>> xs,
                                                      std::span<const int> ys,
                                                      std::span<const double> w, double b,
                                                      double lambda);

}  // namespace autonom
