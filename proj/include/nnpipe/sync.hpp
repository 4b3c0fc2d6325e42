#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nnpipe/tensor.hpp"

namespace nnpipe {

enum class SyncMode : std::uint8_t {
  kSlowest,   // pace on the lowest rate, drop stale frames of faster pads
  kFastest,   // pace on the highest rate, reuse the last frame of slower pads
  kBase,      // pace on a designated pad
  kLockstep,  // one fresh frame from every pad per output, no timestamps
};

struct SyncPolicy {
  SyncMode mode = SyncMode::kSlowest;
  std::size_t base_pad = 0;

  static SyncPolicy parse(std::string_view mode, std::size_t base_pad = 0);
  std::string to_string() const;
};

// Pairs frames arriving on several pads according to a SyncPolicy.
//
// For the timestamp-driven modes, a frame at time t on the pacing pad is
// resolved once every other pad has delivered a frame newer than t or has
// reached end of stream. Resolution then picks, per pad, the latest frame
// with timestamp <= t. The outcome therefore depends only on timestamps,
// never on the order in which threads deliver frames.
class SyncCollector {
 public:
  // One frame per pad, in pad order.
  using Group = std::vector<Frame>;

  // Throws Error("ambiguous pacing pad") when no pad has a constrained rate
  // under slowest/fastest, and for an out-of-range base pad.
  SyncCollector(SyncPolicy policy, std::vector<Framerate> pad_rates);

  std::size_t pacing_pad() const { return pacing_; }
  const SyncPolicy& policy() const { return policy_; }

  std::vector<Group> push(std::size_t pad, Frame frame);
  std::vector<Group> end_of_stream(std::size_t pad);

  // No further group can be produced.
  bool finished() const;
  std::size_t pending(std::size_t pad) const { return pads_[pad].pending.size(); }

 private:
  struct PadState {
    std::deque<Frame> pending;
    std::optional<Frame> last_used;
    std::optional<std::uint64_t> newest_ts;
    bool eos = false;
  };

  std::vector<Group> drain();
  std::vector<Group> drain_lockstep();

  SyncPolicy policy_;
  std::size_t pacing_ = 0;
  std::vector<PadState> pads_;
};

// Picks the pacing pad for a policy; exposed for negotiation checks.
std::size_t select_pacing_pad(const SyncPolicy& policy, const std::vector<Framerate>& rates);

// Sliding window of `frames_in` frames advancing by `frames_flush`.
class SlidingWindow {
 public:
  SlidingWindow(std::size_t frames_in, std::size_t frames_flush);

  // Returns the full window when `frames_in` frames are buffered.
  std::optional<std::vector<Frame>> push(Frame frame);

  std::size_t frames_in() const { return in_; }
  std::size_t frames_flush() const { return flush_; }

 private:
  std::size_t in_;
  std::size_t flush_;
  std::deque<Frame> window_;
};

// Outputs of a window of N advancing by S over M inputs.
inline std::size_t expected_window_outputs(std::size_t inputs, std::size_t n, std::size_t s) {
  return inputs < n ? 0 : (inputs - n) / s + 1;
}

enum class RateMode : std::uint8_t { kDropOnly, kDuplicate };

// Admission control toward a target framerate.
class RateGate {
 public:
  RateGate(Framerate target, RateMode mode);

  // Frames to emit for this input, in order. Duplicates re-use the previous
  // frame's chunks with the gap slot as timestamp.
  std::vector<Frame> admit(const Frame& frame);
  // Trailing duplicates after the last input, up to one input period.
  std::vector<Frame> finish(Framerate input_rate);
  // Upstream lateness report; positive lateness drops upcoming frames.
  void report_lateness(std::int64_t lateness_ns);
  std::uint64_t pending_drops() const { return pending_drops_; }

 private:
  std::uint64_t slot_time(std::uint64_t k) const;

  Framerate target_;
  RateMode mode_;
  std::optional<std::uint64_t> origin_;
  std::uint64_t next_slot_ = 0;  // index of next_due relative to origin
  std::optional<Frame> previous_;
  std::uint64_t pending_drops_ = 0;
};

}  // namespace nnpipe
