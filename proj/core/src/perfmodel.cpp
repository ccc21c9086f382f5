#include "autonom/perfmodel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include "autonom/chain.hpp"
#include "autonom/hash.hpp"

namespace autonom {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(std::mt19937_64& rng, double rate) {
  double u = 0;
  do {
    u = uniform01(rng);
  } while (u <= 0);
  return -std::log(u) / rate;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

double mttd(std::span<const double> service_rates) {
  if (service_rates.empty()) throw std::invalid_argument("need at least one service rate");
  double sum = 0;
  for (double r : service_rates) {
    if (!(r > 0)) throw std::invalid_argument("service rates must be positive");
    sum += r;
  }
  return 1.0 / sum;
}

double mttd(const NetworkPerf& perf) { return mttd(perf.service_rates); }

double mttd_sampled(const RateSampler& sampler, std::size_t samples, std::uint64_t seed) {
  if (!sampler) throw std::invalid_argument("sampler required");
  if (samples == 0) throw std::invalid_argument("need at least one sample");
  std::mt19937_64 rng(seed);
  double total = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    total += mttd(sampler(rng));
  }
  return total / static_cast<double>(samples);
}

double block_time_model(double difficulty_work, double hash_rate) {
  if (!(difficulty_work > 0)) throw std::invalid_argument("work must be positive");
  if (!(hash_rate > 0)) throw std::invalid_argument("hash rate must be positive");
  return difficulty_work / hash_rate;
}

double expected_pow_work(int difficulty_d) {
  if (difficulty_d < 0) throw std::invalid_argument("difficulty must be non-negative");
  return std::pow(16.0, difficulty_d);
}

double wq(QueueParams q) {
  if (!(q.lambda >= 0) || !(q.mu > 0)) throw std::invalid_argument("bad queue rates");
  if (q.rho() >= 1.0) {
    throw UnstableQueueError("arrival rate must stay below service rate");
  }
  return q.lambda / (q.mu * (q.mu - q.lambda));
}

MttrBreakdown mttr(QueueParams q, double difficulty_work, double hash_rate) {
  MttrBreakdown b;
  b.waiting = wq(q);
  b.block = block_time_model(difficulty_work, hash_rate);
  b.total = b.waiting + b.block;
  return b;
}

double mm1_simulate(QueueParams q, std::size_t arrivals, std::uint64_t seed) {
  if (!(q.lambda > 0) || !(q.mu > 0)) throw std::invalid_argument("bad queue rates");
  if (q.rho() >= 1.0) throw UnstableQueueError("arrival rate must stay below service rate");
  if (arrivals == 0) throw std::invalid_argument("need at least one arrival");
  std::mt19937_64 rng(seed);
  double total_wait = 0;
  double prev_wait = 0;
  double prev_service = exponential(rng, q.mu);
  for (std::size_t i = 1; i < arrivals; ++i) {
    double gap = exponential(rng, q.lambda);
    double wait = std::max(0.0, prev_wait + prev_service - gap);
    total_wait += wait;
    prev_wait = wait;
    prev_service = exponential(rng, q.mu);
  }
  return total_wait / static_cast<double>(arrivals);
}

std::vector<SweepRow> difficulty_sweep(int d_min, int d_max, int trials, std::uint64_t seed,
                                       std::size_t hash_probe) {
  if (d_min < 0 || d_max < d_min) throw std::invalid_argument("need 0 <= d_min <= d_max");
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (hash_probe < 1000) throw std::invalid_argument("hash probe too small to time");

  // one wall-clock probe; everything else is attempt counting
  const std::string probe_preimage(100, 'x');
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < hash_probe; ++i) {
    sha256_hex(probe_preimage + std::to_string(i));
  }
  auto t1 = std::chrono::steady_clock::now();
  double elapsed = std::chrono::duration<double>(t1 - t0).count();
  if (elapsed <= 0) elapsed = 1e-9;
  const double hash_rate = static_cast<double>(hash_probe) / elapsed;

  std::mt19937_64 rng(seed);
  std::vector<SweepRow> rows;
  for (int d = d_min; d <= d_max; ++d) {
    double attempts = 0;
    for (int t = 0; t < trials; ++t) {
      // fresh random parent hash per trial decorrelates the nonce scans
      std::array<std::uint8_t, 32> parent{};
      for (std::size_t i = 0; i < 4; ++i) {
        std::uint64_t word = rng();
        for (std::size_t b = 0; b < 8; ++b) {
          parent[i * 8 + b] = static_cast<std::uint8_t>(word >> (8 * b));
        }
      }
      MinedBlock mined = mine_block(to_hex(parent), 1600000000000 + t, {}, d);
      attempts += static_cast<double>(mined.attempts);
    }
    SweepRow row;
    row.d = d;
    row.mean_attempts = attempts / trials;
    row.mean_seconds = row.mean_attempts / hash_rate;
    row.log10_mean_seconds = std::log10(row.mean_seconds);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "d,mean_attempts,mean_seconds,log_mean_seconds\n";
  for (const auto& r : rows) {
    out << r.d << ',' << format_double(r.mean_attempts) << ',' << format_double(r.mean_seconds)
        << ',' << format_double(r.log10_mean_seconds) << '\n';
  }
}

}  // namespace autonom
