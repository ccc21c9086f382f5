#include "autonom/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace autonom {

std::size_t feature_dimension(bool include_failed_conn) { return include_failed_conn ? 13 : 12; }

std::vector<double> feature_vector(const FlowRecord& r, bool include_failed_conn) {
  std::vector<double> x = {r.duration, r.total_bytes, r.total_packets, r.mean_iat,
                           r.src_port, r.dst_port,    r.syn,           r.ack,
                           r.fin,      r.rst,         r.psh,           r.urg};
  if (include_failed_conn) x.push_back(r.failed_conn);
  return x;
}

namespace {

double parse_double(std::string_view field, std::size_t row) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw CsvError("row " + std::to_string(row) + ": bad numeric field \"" +
                   std::string(field) + "\"");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

std::vector<FlowRecord> load_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file, header required");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::string expected;
  for (auto col : kCsvFeatureColumns) {
    if (!expected.empty()) expected += ',';
    expected += col;
  }
  bool labeled = false;
  if (line == expected + ",label") {
    labeled = true;
  } else if (line != expected) {
    throw CsvError("header does not match the flow schema");
  }

  const std::size_t want = kCsvFeatureColumns.size() + (labeled ? 1 : 0);
  std::vector<FlowRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != want) {
      throw CsvError("row " + std::to_string(row) + ": expected " + std::to_string(want) +
                     " fields, got " + std::to_string(fields.size()));
    }
    FlowRecord r;
    double* slots[] = {&r.duration, &r.total_bytes, &r.total_packets, &r.mean_iat,
                       &r.src_port, &r.dst_port,    &r.syn,           &r.ack,
                       &r.fin,      &r.rst,         &r.psh,           &r.urg,
                       &r.failed_conn};
    for (std::size_t i = 0; i < kCsvFeatureColumns.size(); ++i) {
      *slots[i] = parse_double(fields[i], row);
    }
    if (labeled) {
      auto field = fields.back();
      if (field == "0") {
        r.label = kBenign;
      } else if (field == "1") {
        r.label = kMalicious;
      } else {
        throw CsvError("row " + std::to_string(row) + ": label must be 0 or 1");
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<FlowRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  return load_csv(in);
}

void save_csv(std::ostream& out, std::span<const FlowRecord> records) {
  bool labeled = !records.empty() && records.front().label.has_value();
  for (const auto& r : records) {
    if (r.label.has_value() != labeled) {
      throw CsvError("cannot mix labeled and unlabeled records in one file");
    }
  }
  for (std::size_t i = 0; i < kCsvFeatureColumns.size(); ++i) {
    if (i) out << ',';
    out << kCsvFeatureColumns[i];
  }
  if (labeled) out << ",label";
  out << '\n';
  for (const auto& r : records) {
    auto x = feature_vector(r, true);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) out << ',';
      out << format_double(x[i]);
    }
    if (labeled) out << ',' << (*r.label == kMalicious ? '1' : '0');
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, std::span<const FlowRecord> records) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot open " + path.string() + " for writing");
  save_csv(out, records);
  if (!out) throw CsvError("failed writing " + path.string());
}

namespace {

// std distributions are implementation-defined; results must not move
// between standard libraries, so the transforms are spelled out here.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = 0;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

struct FeatureShape {
  double base;
  double scale;
  double lo;
  double hi;
  bool round;
};

constexpr FeatureShape kShapes[13] = {
    {30.0, 2.0, 0.0, 1e9, false},      // duration
    {100000.0, 8000.0, 0.0, 1e12, true},  // total_bytes
    {500.0, 40.0, 0.0, 1e9, true},     // total_packets
    {0.5, 0.03, 0.0, 1e6, false},      // mean_iat
    {32768.0, 2000.0, 1.0, 65535.0, true},  // src_port
    {8000.0, 500.0, 1.0, 65535.0, true},    // dst_port
    {50.0, 4.0, 0.0, 1e9, true},       // syn
    {200.0, 15.0, 0.0, 1e9, true},     // ack
    {50.0, 4.0, 0.0, 1e9, true},       // fin
    {10.0, 1.0, 0.0, 1e9, true},       // rst
    {80.0, 6.0, 0.0, 1e9, true},       // psh
    {5.0, 1.0, 0.0, 1e9, true},        // urg
    {3.0, 1.5, 0.0, 1e9, true},        // failed_conn
};

}  // namespace

FlowRecord synth_flow(std::mt19937_64& rng, int label, double separation) {
  if (label != kBenign && label != kMalicious) {
    throw ClassifierError("label must be -1 or +1");
  }
  const double dir = 1.0 / std::sqrt(12.0);
  const double shift = label * (separation / 2.0) * dir;
  FlowRecord r;
  double* slots[] = {&r.duration, &r.total_bytes, &r.total_packets, &r.mean_iat,
                     &r.src_port, &r.dst_port,    &r.syn,           &r.ack,
                     &r.fin,      &r.rst,         &r.psh,           &r.urg,
                     &r.failed_conn};
  for (std::size_t j = 0; j < 13; ++j) {
    double raw = shift + standard_normal(rng);
    const FeatureShape& s = kShapes[j];
    double v = s.base + s.scale * raw;
    v = std::clamp(v, s.lo, s.hi);
    if (s.round) v = std::round(v);
    *slots[j] = v;
  }
  r.label = label;
  return r;
}

std::vector<FlowRecord> synth_dataset(std::uint64_t seed, std::size_t n, double separation) {
  std::mt19937_64 rng(seed);
  std::vector<FlowRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(synth_flow(rng, (i % 2 == 0) ? kBenign : kMalicious, separation));
  }
  return out;
}

nlohmann::ordered_json Model::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["weights"] = weights;
  j["bias"] = bias;
  j["means"] = scaler_means;
  j["stds"] = scaler_stds;
  return j;
}

Model Model::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ClassifierError("model must be a JSON object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "version" && k != "weights" && k != "bias" && k != "means" && k != "stds") {
      throw ClassifierError("unknown key \"" + k + "\" in model");
    }
  }
  for (const char* k : {"version", "weights", "bias", "means", "stds"}) {
    if (!j.contains(k)) throw ClassifierError("missing key \"" + std::string(k) + "\" in model");
  }
  Model m;
  if (!j.at("version").is_number_integer() && !j.at("version").is_number_unsigned()) {
    throw ClassifierError("version must be an integer");
  }
  m.version = j.at("version").get<std::uint64_t>();
  auto read_vec = [&j](const char* key) {
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw ClassifierError(std::string(key) + " must be an array");
    std::vector<double> v;
    for (const auto& e : arr) {
      if (!e.is_number()) throw ClassifierError(std::string(key) + " must hold numbers");
      v.push_back(e.get<double>());
    }
    return v;
  };
  m.weights = read_vec("weights");
  if (!j.at("bias").is_number()) throw ClassifierError("bias must be a number");
  m.bias = j.at("bias").get<double>();
  m.scaler_means = read_vec("means");
  m.scaler_stds = read_vec("stds");
  if (m.weights.size() != 12 && m.weights.size() != 13) {
    throw ClassifierError("weights must have 12 or 13 entries");
  }
  if (m.scaler_means.size() != m.weights.size() || m.scaler_stds.size() != m.weights.size()) {
    throw ClassifierError("weights, means and stds must have matching lengths");
  }
  for (double s : m.scaler_stds) {
    if (s <= 0) throw ClassifierError("stds must be positive");
  }
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw ClassifierError("cannot open " + path.string() + " for writing");
  out << model.to_json().dump(2) << '\n';
  if (!out) throw ClassifierError("failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ClassifierError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ClassifierError(e.what());
  }
  return Model::from_json(j);
}

std::pair<std::vector<double>, std::vector<double>> fit_scaler(
    std::span<const FlowRecord> records, bool include_failed_conn) {
  if (records.empty()) throw ClassifierError("cannot fit a scaler on no records");
  const std::size_t dim = feature_dimension(include_failed_conn);
  std::vector<double> means(dim, 0.0), stds(dim, 0.0);
  for (const auto& r : records) {
    auto x = feature_vector(r, include_failed_conn);
    for (std::size_t j = 0; j < dim; ++j) means[j] += x[j];
  }
  for (auto& m : means) m /= static_cast<double>(records.size());
  for (const auto& r : records) {
    auto x = feature_vector(r, include_failed_conn);
    for (std::size_t j = 0; j < dim; ++j) {
      double d = x[j] - means[j];
      stds[j] += d * d;
    }
  }
  for (auto& s : stds) {
    s = std::sqrt(s / static_cast<double>(records.size()));
    if (s == 0) s = 1.0;  // constant feature, pass through centered
  }
  return {std::move(means), std::move(stds)};
}

std::vector<double> apply_scaler(const Model& model, const FlowRecord& r) {
  auto x = feature_vector(r, model.weights.size() == 13);
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = (x[j] - model.scaler_means[j]) / model.scaler_stds[j];
  }
  return x;
}

Model train(std::span<const FlowRecord> records, const TrainConfig& cfg) {
  if (records.size() < 2) throw ClassifierError("training needs at least two records");
  if (cfg.lambda <= 0) throw ClassifierError("lambda must be positive");
  for (const auto& r : records) {
    if (!r.label) throw ClassifierError("training requires labeled records");
  }

  const std::size_t dim = feature_dimension(cfg.include_failed_conn);
  Model model;
  model.weights.assign(dim, 0.0);
  std::tie(model.scaler_means, model.scaler_stds) = fit_scaler(records, cfg.include_failed_conn);

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  xs.reserve(records.size());
  for (const auto& r : records) {
    xs.push_back(apply_scaler(model, r));
    ys.push_back(*r.label);
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> w(dim, 0.0), w_sum(dim, 0.0);
  double b = 0, b_sum = 0;
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[bounded(rng, i)]);
    }
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      const auto& x = xs[idx];
      const int y = ys[idx];
      double margin = b;
      for (std::size_t j = 0; j < dim; ++j) margin += w[j] * x[j];
      margin *= y;
      const double keep = 1.0 - eta * cfg.lambda;
      for (std::size_t j = 0; j < dim; ++j) w[j] *= keep;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < dim; ++j) w[j] += eta * y * x[j];
        b += eta * y;
      }
      for (std::size_t j = 0; j < dim; ++j) w_sum[j] += w[j];
      b_sum += b;
    }
  }
  const double inv_t = 1.0 / static_cast<double>(t);
  for (std::size_t j = 0; j < dim; ++j) model.weights[j] = w_sum[j] * inv_t;
  model.bias = b_sum * inv_t;
  model.version = 1;
  return model;
}

Prediction predict(const Model& model, const FlowRecord& r) {
  auto x = apply_scaler(model, r);
  double margin = model.bias;
  for (std::size_t j = 0; j < x.size(); ++j) margin += model.weights[j] * x[j];
  return Prediction{margin >= 0 ? kMalicious : kBenign, margin};
}

Metrics evaluate(const Model& model, std::span<const FlowRecord> records) {
  if (records.empty()) throw ClassifierError("cannot evaluate on no records");
  Metrics m;
  for (const auto& r : records) {
    if (!r.label) throw ClassifierError("evaluation requires labeled records");
    int predicted = predict(model, r).label;
    if (*r.label == kMalicious) {
      (predicted == kMalicious ? m.tp : m.fn)++;
    } else {
      (predicted == kMalicious ? m.fp : m.tn)++;
    }
  }
  const double n = static_cast<double>(records.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;
  m.precision_defined = (m.tp + m.fp) > 0;
  m.precision = m.precision_defined ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  return m;
}

int consensus_classify(std::span<const std::pair<int, double>> votes) {
  if (votes.empty()) throw std::invalid_argument("consensus requires at least one vote");
  double sum = 0;
  for (const auto& [label, weight] : votes) {
    if (label != kBenign && label != kMalicious) {
      throw std::invalid_argument("vote labels must be -1 or +1");
    }
    if (!(weight > 0)) throw std::invalid_argument("vote weights must be positive");
    sum += label * weight;
  }
  return sum >= 0 ? kMalicious : kBenign;  // ties resolve to the safe side
}

double hinge_objective(std::span<const std::vector<double>> xs, std::span<const int> ys,
                       std::span<const double> w, double b, double lambda) {
  if (xs.size() != ys.size() || xs.empty()) throw ClassifierError("bad objective inputs");
  double loss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double margin = b;
    for (std::size_t j = 0; j < w.size(); ++j) margin += w[j] * xs[i][j];
    loss += std::max(0.0, 1.0 - ys[i] * margin);
  }
  loss /= static_cast<double>(xs.size());
  double reg = 0;
  for (double wj : w) reg += wj * wj;
  return loss + 0.5 * lambda * reg;
}

std::pair<std::vector<double>, double> hinge_gradient(std::span<const std::vector<double>> xs,
                                                      std::span<const int> ys,
                                                      std::span<const double> w, double b,
                                                      double lambda) {
  if (xs.size() != ys.size() || xs.empty()) throw ClassifierError("bad gradient inputs");
  std::vector<double> gw(w.size(), 0.0);
  double gb = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double margin = b;
    for (std::size_t j = 0; j < w.size(); ++j) margin += w[j] * xs[i][j];
    if (ys[i] * margin < 1.0) {
      for (std::size_t j = 0; j < w.size(); ++j) gw[j] -= ys[i] * xs[i][j];
      gb -= ys[i];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t j = 0; j < w.size(); ++j) gw[j] = gw[j] * inv_n + lambda * w[j];
  gb *= inv_n;
  return {std::move(gw), gb};
}

}  // namespace autonom
