#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace autonom {

namespace topic {
inline constexpr std::string_view kChainUpdated = "chain.updated";
inline constexpr std::string_view kAlertIntrusion = "alert.intrusion";
inline constexpr std::string_view kModelUpdate = "model.update";
}  // namespace topic

struct Message {
  std::string topic;
  std::string publisher_id;
  std::string payload;  // JSON text
  std::int64_t enqueue_tick = 0;
  std::int64_t delivery_tick = 0;
  std::uint64_t seq = 0;  // global publish order, breaks delivery ties
};

// Tick-driven in-process broker. Delivery latency is sampled per message
// and subscriber from [latency_min, latency_max] ticks, seeded, and clamped
// so deliveries from one publisher to one subscriber keep publish order.
// Delivery order within a tick: (delivery_tick, publisher_id, seq,
// subscriber order of registration). Same seed, same trace.
class Broker {
 public:
  explicit Broker(std::uint64_t seed, std::int64_t latency_min = 1,
                  std::int64_t latency_max = 3);

  using Handler = std::function<void(const Message&, std::int64_t delivery_tick)>;

  // subscriber_id scopes FIFO clamping and self-delivery suppression
  void subscribe(const std::string& subscriber_id, std::string_view topic, Handler handler);

  // fans out to every subscriber of the topic except the publisher itself
  void publish(std::string_view topic, const std::string& publisher_id,
               std::string payload);

  // delivers everything due up to and including until_tick, advancing time
  void step(std::int64_t until_tick);

  std::int64_t now() const { return now_; }
  std::int64_t latency_min() const { return latency_min_; }
  std::int64_t latency_max() const { return latency_max_; }
  std::size_t in_flight() const { return queue_.size(); }

 private:
  struct Subscription {
    std::string subscriber_id;
    std::string topic;
    Handler handler;
  };
  struct Pending {
    Message message;
    std::size_t subscription_index;
  };

  std::int64_t sample_latency();

  std::uint64_t rng_state_;
  std::int64_t latency_min_;
  std::int64_t latency_max_;
  std::int64_t now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::vector<Subscription> subscriptions_;
  std::vector<Pending> queue_;
  // last scheduled delivery per (publisher, subscriber), preserves FIFO
  std::map<std::pair<std::string, std::string>, std::int64_t> last_scheduled_;
};

}  // namespace autonom
