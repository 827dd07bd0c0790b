#include "net.hpp"

#include <cmath>

#include "errors.hpp"

namespace qsafev {

SendStatus EventQueue::schedule(const ChannelModel& ch, ProtocolMessage msg, Rng& rng,
                                AdversaryHook* hook) {
  if (!ch.secure && hook != nullptr) {
    if (hook->on_message(msg, now_) == AdversaryHook::Action::Drop) return SendStatus::Intercepted;
  }
  if (ch.loss_prob > 0.0 && rng.chance(ch.loss_prob)) return SendStatus::Dropped;
  double delay = ch.base_delay_ms;
  if (ch.jitter_sigma_ms > 0.0) delay += rng.normal(0.0, ch.jitter_sigma_ms);
  if (delay < 0.0) delay = 0.0;
  heap_.push(Ev{now_.millis + std::llround(delay), seq_++, std::move(msg)});
  return SendStatus::Scheduled;
}

std::optional<Delivery> EventQueue::advance() {
  if (heap_.empty()) return std::nullopt;
  Ev ev = heap_.top();
  heap_.pop();
  if (ev.at > now_.millis) now_.millis = ev.at;
  return Delivery{Timestamp{ev.at < now_.millis ? now_.millis : ev.at}, std::move(ev.msg)};
}

void EventQueue::wait(std::int64_t ms) {
  if (!heap_.empty()) throw StateError("wait requires an idle queue");
  if (ms < 0) throw ParamError("wait duration must be non-negative");
  now_.millis += ms;
}

bool freshness_ok(Timestamp received_at, Timestamp stamped, std::int64_t delta_t_ms) {
  std::int64_t gap = received_at.millis - stamped.millis;
  if (gap < 0) gap = -gap;
  return gap < delta_t_ms;
}

}  // namespace qsafev
