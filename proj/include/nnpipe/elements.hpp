#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include "nnpipe/element.hpp"

namespace nnpipe {

// Arrival bookkeeping shared by every sink kind.
struct SinkStats {
  std::uint64_t frames = 0;
  std::int64_t first_arrival_ns = 0;
  std::int64_t last_arrival_ns = 0;
  std::vector<double> latencies_ms;  // arrival - source emission
  bool eos = false;

  double fps() const;
  double mean_latency_ms() const;
  double p95_latency_ms() const;
};

class SinkElement : public Element {
 public:
  SinkElement(std::string kind, std::string name, bool qos);

  ElementRole role() const override { return ElementRole::kSink; }
  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& sink_caps) override;
  SinkStats stats() const;

 protected:
  virtual void consume(const Frame& frame) = 0;
  virtual void finish() {}
  const StreamCaps& input_caps() const { return caps_; }

  void chain(std::size_t sink_index, Frame frame) final;
  void handle_eos(std::size_t sink_index) final;

 private:
  bool qos_;
  StreamCaps caps_;
  mutable std::mutex stats_mutex_;
  SinkStats stats_;
};

// Hands frames to the host program, in arrival order.
class AppSink : public SinkElement {
 public:
  AppSink(std::string name, bool qos) : SinkElement("appsink", std::move(name), qos) {}

  // Every frame received so far.
  std::vector<Frame> frames() const;
  // Blocks until a frame is available or end of stream; nullopt at the end.
  std::optional<Frame> pop(std::chrono::milliseconds timeout = std::chrono::seconds(10));
  void set_callback(std::function<void(const Frame&)> callback);
  // Negotiated caps of the sink pad.
  StreamCaps caps() const { return input_caps(); }

 protected:
  void consume(const Frame& frame) override;
  void finish() override;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Frame> frames_;
  std::size_t popped_ = 0;
  bool ended_ = false;
  std::function<void(const Frame&)> callback_;
};

// Sink that additionally buckets arrivals into fixed wall-clock intervals.
class StatsSink : public SinkElement {
 public:
  StatsSink(std::string name, bool qos, std::chrono::milliseconds interval)
      : SinkElement("statssink", std::move(name), qos), interval_(interval) {}

  // Frames per second of every completed interval.
  std::vector<double> interval_fps() const;

 protected:
  void consume(const Frame& frame) override;

 private:
  std::chrono::milliseconds interval_;
  mutable std::mutex mutex_;
  std::int64_t interval_start_ns_ = 0;
  std::uint64_t interval_frames_ = 0;
  std::vector<double> fps_;
};

enum class QueuePolicy : std::uint8_t { kBlock, kLeakyOld, kLeakyNew };

// Thread boundary: a bounded FIFO drained by its own thread.
class QueueElement : public Element {
 public:
  QueueElement(std::string name, std::size_t capacity, QueuePolicy policy);
  ~QueueElement() override;

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& sink_caps) override;
  void activate() override;
  void deactivate() override;
  bool idle() const override;
  void wake() override;

  std::size_t capacity() const { return capacity_; }
  std::size_t max_occupancy() const;
  std::uint64_t dropped() const;

 protected:
  void chain(std::size_t sink_index, Frame frame) override;
  void handle_eos(std::size_t sink_index) override;
  void handle_upstream(std::size_t src_index, const Event& event) override;

 private:
  struct Item {
    std::optional<Frame> frame;  // nullopt marks end of stream
  };
  void run();
  bool context_flushing() const;

  std::size_t capacity_;
  QueuePolicy policy_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Item> items_;
  std::size_t max_occupancy_ = 0;
  std::uint64_t dropped_ = 0;
  bool busy_ = false;
  bool stop_ = false;
  std::thread thread_;
};

// Registers the built-in element kinds into `registry`.
void register_builtin_elements(ElementRegistry& registry);

}  // namespace nnpipe
