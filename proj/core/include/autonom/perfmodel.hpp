#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace autonom {

struct UnstableQueueError : std::domain_error {
  using std::domain_error::domain_error;
};

struct QueueParams {
  double lambda = 0;  // arrivals per second
  double mu = 0;      // services per second

  double rho() const { return lambda / mu; }
};

struct NetworkPerf {
  std::vector<double> service_rates;  // per-node handling rates, all > 0
  double difficulty_work = 0;         // expected hashes per block (work form D)
  double hash_rate = 0;               // hashes per second (H)
};

// Mean time to detect 1/sum(mu_i), exact.
double mttd(std::span<const double> service_rates);
double mttd(const NetworkPerf& perf);

// Monte-Carlo mean of 1/sum(mu_i) over sampled rate lists, seeded.
using RateSampler = std::function<std::vector<double>(std::mt19937_64&)>;
double mttd_sampled(const RateSampler& sampler, std::size_t samples, std::uint64_t seed);

// Block production time: work units over hash rate.
double block_time_model(double difficulty_work, double hash_rate);

// Expected attempts for a digest with d leading zero hex digits: 16^d.
double expected_pow_work(int difficulty_d);

// M/M/1 mean waiting time lambda / (mu (mu - lambda)); requires rho < 1.
double wq(QueueParams q);

struct MttrBreakdown {
  double waiting = 0;
  double block = 0;
  double total = 0;
};

// Mean time to respond: queueing delay of the response plus the time to
// mine it into a block.
MttrBreakdown mttr(QueueParams q, double difficulty_work, double hash_rate);

// Discrete-event M/M/1 with hand-rolled exponential sampling; returns the
// mean wait in queue over `arrivals` customers. Lindley recurrence, seeded.
double mm1_simulate(QueueParams q, std::size_t arrivals, std::uint64_t seed);

struct SweepRow {
  int d = 0;
  double mean_attempts = 0;
  double mean_seconds = 0;
  double log10_mean_seconds = 0;
};

// Mines throwaway blocks at each difficulty in [d_min, d_max] and averages
// nonce attempts. Attempts are deterministic given the seed; seconds use a
// hash rate measured once with hash_probe digests.
std::vector<SweepRow> difficulty_sweep(int d_min, int d_max, int trials,
                                       std::uint64_t seed, std::size_t hash_probe = 200000);

// header: d,mean_attempts,mean_seconds,log_mean_seconds
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace autonom
