#include "nnpipe/sync.hpp"

#include <algorithm>

namespace nnpipe {

SyncPolicy SyncPolicy::parse(std::string_view mode, std::size_t base_pad) {
  SyncPolicy p;
  p.base_pad = base_pad;
  if (mode == "slowest") {
    p.mode = SyncMode::kSlowest;
  } else if (mode == "fastest") {
    p.mode = SyncMode::kFastest;
  } else if (mode == "base") {
    p.mode = SyncMode::kBase;
  } else if (mode == "lockstep") {
    p.mode = SyncMode::kLockstep;
  } else {
    throw Error("unknown sync policy '" + std::string(mode) +
                "' (expected slowest, fastest, base or lockstep)");
  }
  return p;
}

std::string SyncPolicy::to_string() const {
  switch (mode) {
    case SyncMode::kSlowest: return "slowest";
    case SyncMode::kFastest: return "fastest";
    case SyncMode::kBase: return "base:" + std::to_string(base_pad);
    case SyncMode::kLockstep: return "lockstep";
  }
  return "?";
}

std::size_t select_pacing_pad(const SyncPolicy& policy, const std::vector<Framerate>& rates) {
  if (rates.empty()) throw Error("sync needs at least one pad");
  switch (policy.mode) {
    case SyncMode::kLockstep:
      return 0;
    case SyncMode::kBase:
      if (policy.base_pad >= rates.size()) {
        throw Error("base pad " + std::to_string(policy.base_pad) + " out of range (" +
                    std::to_string(rates.size()) + " pads)");
      }
      return policy.base_pad;
    case SyncMode::kSlowest:
    case SyncMode::kFastest: {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < rates.size(); ++i) {
        if (rates[i].unconstrained()) continue;
        if (!best) {
          best = i;
        } else if (policy.mode == SyncMode::kSlowest ? rates[i] < rates[*best]
                                                     : rates[*best] < rates[i]) {
          best = i;
        }
      }
      if (!best) throw Error("ambiguous pacing pad: every pad has an unconstrained rate");
      return *best;
    }
  }
  return 0;
}

SyncCollector::SyncCollector(SyncPolicy policy, std::vector<Framerate> pad_rates)
    : policy_(policy), pads_(pad_rates.size()) {
  pacing_ = select_pacing_pad(policy_, pad_rates);
}

std::vector<SyncCollector::Group> SyncCollector::push(std::size_t pad, Frame frame) {
  auto& p = pads_.at(pad);
  if (p.eos) return {};
  p.newest_ts = frame.timestamp_ns;
  p.pending.push_back(std::move(frame));
  return drain();
}

std::vector<SyncCollector::Group> SyncCollector::end_of_stream(std::size_t pad) {
  pads_.at(pad).eos = true;
  return drain();
}

bool SyncCollector::finished() const {
  if (policy_.mode == SyncMode::kLockstep) {
    return std::any_of(pads_.begin(), pads_.end(),
                       [](const PadState& p) { return p.eos && p.pending.empty(); });
  }
  const auto& p = pads_[pacing_];
  return p.eos && p.pending.empty();
}

std::vector<SyncCollector::Group> SyncCollector::drain_lockstep() {
  std::vector<Group> out;
  while (std::all_of(pads_.begin(), pads_.end(),
                     [](const PadState& p) { return !p.pending.empty(); })) {
    Group g;
    for (auto& p : pads_) {
      g.push_back(std::move(p.pending.front()));
      p.pending.pop_front();
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<SyncCollector::Group> SyncCollector::drain() {
  if (policy_.mode == SyncMode::kLockstep) return drain_lockstep();

  std::vector<Group> out;
  auto& pacing = pads_[pacing_];
  while (!pacing.pending.empty()) {
    const std::uint64_t t = pacing.pending.front().timestamp_ns;
    bool resolved = true;
    for (std::size_t i = 0; i < pads_.size() && resolved; ++i) {
      if (i == pacing_) continue;
      const auto& p = pads_[i];
      resolved = p.eos || (p.newest_ts && *p.newest_ts > t);
    }
    if (!resolved) break;

    Group group(pads_.size());
    bool complete = true;
    for (std::size_t i = 0; i < pads_.size(); ++i) {
      if (i == pacing_) continue;
      auto& p = pads_[i];
      std::optional<Frame> fresh;
      while (!p.pending.empty() && p.pending.front().timestamp_ns <= t) {
        fresh = std::move(p.pending.front());
        p.pending.pop_front();
      }
      if (fresh) {
        p.last_used = fresh;
        group[i] = std::move(*fresh);
      } else if (policy_.mode != SyncMode::kSlowest && p.last_used) {
        group[i] = *p.last_used;
      } else {
        complete = false;
      }
    }
    group[pacing_] = std::move(pacing.pending.front());
    pacing.pending.pop_front();
    if (complete) out.push_back(std::move(group));
  }
  return out;
}

// ---------------------------------------------------------------- window

SlidingWindow::SlidingWindow(std::size_t frames_in, std::size_t frames_flush)
    : in_(frames_in), flush_(frames_flush) {
  if (in_ < 1) throw Error("frames_in must be at least 1");
  if (flush_ < 1 || flush_ > in_) throw Error("frames_flush must be in [1, frames_in]");
}

std::optional<std::vector<Frame>> SlidingWindow::push(Frame frame) {
  window_.push_back(std::move(frame));
  if (window_.size() < in_) return std::nullopt;
  std::vector<Frame> out(window_.begin(), window_.end());
  for (std::size_t i = 0; i < flush_; ++i) window_.pop_front();
  return out;
}

// ---------------------------------------------------------------- rate

RateGate::RateGate(Framerate target, RateMode mode) : target_(target), mode_(mode) {
  if (target.unconstrained()) throw Error("tensor_rate needs a positive target framerate");
}

std::uint64_t RateGate::slot_time(std::uint64_t k) const {
  return *origin_ + target_.frame_time_ns(k);
}

std::vector<Frame> RateGate::admit(const Frame& frame) {
  std::vector<Frame> out;
  if (!origin_) origin_ = frame.timestamp_ns;
  const std::uint64_t ts = frame.timestamp_ns;
  if (mode_ == RateMode::kDuplicate && previous_) {
    while (ts >= slot_time(next_slot_ + 1)) {
      Frame dup = *previous_;
      dup.timestamp_ns = slot_time(next_slot_);
      ++next_slot_;
      out.push_back(std::move(dup));
    }
  }
  if (ts >= slot_time(next_slot_)) {
    // Skip slots the input jumped over.
    while (ts >= slot_time(next_slot_ + 1)) ++next_slot_;
    ++next_slot_;
    if (pending_drops_ > 0) {
      --pending_drops_;
    } else {
      out.push_back(frame);
      previous_ = frame;
    }
  }
  return out;
}

std::vector<Frame> RateGate::finish(Framerate input_rate) {
  std::vector<Frame> out;
  if (mode_ != RateMode::kDuplicate || !previous_ || input_rate.unconstrained()) return out;
  const std::uint64_t end = previous_->timestamp_ns + input_rate.period_ns();
  while (slot_time(next_slot_) < end) {
    Frame dup = *previous_;
    dup.timestamp_ns = slot_time(next_slot_);
    ++next_slot_;
    out.push_back(std::move(dup));
  }
  return out;
}

void RateGate::report_lateness(std::int64_t lateness_ns) {
  if (lateness_ns <= 0) return;
  const auto period = static_cast<std::int64_t>(target_.period_ns());
  pending_drops_ += static_cast<std::uint64_t>((lateness_ns + period - 1) / period);
}

}  // namespace nnpipe
