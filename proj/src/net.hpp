#pragma once

#include <cstdint>
#include <optional>
#include <queue>

#include "messages.hpp"
#include "rng.hpp"

namespace qsafev {

struct ChannelModel {
  double base_delay_ms = 10.0;
  double jitter_sigma_ms = 2.0;  // Gaussian, truncated so delays stay >= 0
  double loss_prob = 0.0;
  bool secure = false;  // secure channels deliver unobserved by the adversary
};

// Interposition point on every insecure channel: the Dolev-Yao public
// channel. The hook may record the message, mutate it in place, or drop it.
class AdversaryHook {
 public:
  enum class Action { Deliver, Drop };
  virtual ~AdversaryHook() = default;
  virtual Action on_message(ProtocolMessage& msg, Timestamp now) = 0;
};

enum class SendStatus { Scheduled, Dropped, Intercepted };

struct Delivery {
  Timestamp at;
  ProtocolMessage msg;
};

// Time-ordered delivery queue with FIFO tie-break on insertion order.
class EventQueue {
 public:
  Timestamp now() const { return now_; }

  SendStatus schedule(const ChannelModel& ch, ProtocolMessage msg, Rng& rng,
                      AdversaryHook* hook);

  // Pops the earliest event and moves the clock to its delivery time.
  std::optional<Delivery> advance();

  bool idle() const { return heap_.empty(); }

  // Lets scenario scripts age captured messages past the freshness window.
  // Only meaningful between message flights.
  void wait(std::int64_t ms);

 private:
  struct Ev {
    std::int64_t at;
    std::uint64_t seq;
    ProtocolMessage msg;
  };
  struct Later {
    bool operator()(const Ev& a, const Ev& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<Ev, std::vector<Ev>, Later> heap_;
  Timestamp now_{};
  std::uint64_t seq_ = 0;
};

// Strict freshness window: ok iff |received - stamped| < delta_t.
bool freshness_ok(Timestamp received_at, Timestamp stamped, std::int64_t delta_t_ms);

}  // namespace qsafev
