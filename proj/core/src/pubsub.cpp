#include "autonom/pubsub.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace autonom {

namespace {

// splitmix64, pinned so traces never depend on library internals
std::uint64_t next_u64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Broker::Broker(std::uint64_t seed, std::int64_t latency_min, std::int64_t latency_max)
    : rng_state_(seed), latency_min_(latency_min), latency_max_(latency_max) {
  if (latency_min < 1 || latency_max < latency_min) {
    throw std::invalid_argument("latency window must satisfy 1 <= min <= max");
  }
}

void Broker::subscribe(const std::string& subscriber_id, std::string_view topic,
                       Handler handler) {
  subscriptions_.push_back(Subscription{subscriber_id, std::string(topic), std::move(handler)});
}

std::int64_t Broker::sample_latency() {
  const auto span = static_cast<std::uint64_t>(latency_max_ - latency_min_ + 1);
  return latency_min_ + static_cast<std::int64_t>(next_u64(rng_state_) % span);
}

void Broker::publish(std::string_view topic, const std::string& publisher_id,
                     std::string payload) {
  const std::uint64_t seq = next_seq_++;
  for (std::size_t i = 0; i < subscriptions_.size(); ++i) {
    const auto& sub = subscriptions_[i];
    if (sub.topic != topic || sub.subscriber_id == publisher_id) continue;
    std::int64_t delivery = now_ + sample_latency();
    auto& last = last_scheduled_[{publisher_id, sub.subscriber_id}];
    delivery = std::max(delivery, last);
    last = delivery;

    Message m;
    m.topic = std::string(topic);
    m.publisher_id = publisher_id;
    m.payload = payload;
    m.enqueue_tick = now_;
    m.delivery_tick = delivery;
    m.seq = seq;
    queue_.push_back(Pending{std::move(m), i});
  }
}

void Broker::step(std::int64_t until_tick) {
  if (until_tick < now_) throw std::invalid_argument("cannot step backwards");
  while (true) {
    std::size_t best = queue_.size();
    for (std::size_t i = 0; i < queue_.size(); ++i) {
      if (queue_[i].message.delivery_tick > until_tick) continue;
      if (best == queue_.size()) {
        best = i;
        continue;
      }
      const Message& a = queue_[i].message;
      const Message& b = queue_[best].message;
      if (std::tie(a.delivery_tick, a.publisher_id, a.seq, queue_[i].subscription_index) <
          std::tie(b.delivery_tick, b.publisher_id, b.seq, queue_[best].subscription_index)) {
        best = i;
      }
    }
    if (best == queue_.size()) break;

    Pending p = std::move(queue_[best]);
    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(best));
    // handler runs at its delivery tick; anything it publishes is stamped then
    now_ = p.message.delivery_tick;
    subscriptions_[p.subscription_index].handler(p.message, p.message.delivery_tick);
  }
  now_ = until_tick;
}

}  // namespace autonom
