#include <algorithm>
#include <cmath>
#include <numeric>

#include "elements_internal.hpp"
#include "nnpipe/container.hpp"

namespace nnpipe {

double SinkStats::fps() const {
  if (frames < 2 || last_arrival_ns <= first_arrival_ns) return 0.0;
  return static_cast<double>(frames - 1) * 1e9 /
         static_cast<double>(last_arrival_ns - first_arrival_ns);
}

double SinkStats::mean_latency_ms() const {
  if (latencies_ms.empty()) return 0.0;
  return std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) /
         static_cast<double>(latencies_ms.size());
}

double SinkStats::p95_latency_ms() const {
  if (latencies_ms.empty()) return 0.0;
  auto sorted = latencies_ms;
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

SinkElement::SinkElement(std::string kind, std::string name, bool qos)
    : Element(std::move(kind), std::move(name)), qos_(qos) {
  add_pad(PadDirection::kSink, "sink", StreamCaps::any());
}

std::vector<StreamCaps> SinkElement::configure(const std::vector<StreamCaps>& sink_caps) {
  caps_ = sink_caps.at(0);
  return {};
}

SinkStats SinkElement::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

void SinkElement::chain(std::size_t, Frame frame) {
  const std::int64_t now = steady_now_ns();
  {
    std::lock_guard lock(stats_mutex_);
    if (stats_.frames == 0) stats_.first_arrival_ns = now;
    stats_.last_arrival_ns = now;
    ++stats_.frames;
    if (frame.origin_wall_ns != 0) {
      stats_.latencies_ms.push_back(static_cast<double>(now - frame.origin_wall_ns) / 1e6);
    }
  }
  if (qos_ && context().paced) {
    auto due = std::chrono::duration_cast<std::chrono::nanoseconds>(
                   context().base_time.time_since_epoch())
                   .count() +
               static_cast<std::int64_t>(frame.timestamp_ns);
    if (now > due) send_upstream(Event::qos(now - due));
  }
  consume(frame);
}

void SinkElement::handle_eos(std::size_t) {
  finish();
  {
    std::lock_guard lock(stats_mutex_);
    stats_.eos = true;
  }
  auto& ctx = context();
  if (ctx.on_sink_eos) ctx.on_sink_eos(*this);
}

// ---------------------------------------------------------------- appsink

std::vector<Frame> AppSink::frames() const {
  std::lock_guard lock(mutex_);
  return frames_;
}

std::optional<Frame> AppSink::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return popped_ < frames_.size() || ended_; });
  if (popped_ < frames_.size()) return frames_[popped_++];
  return std::nullopt;
}

void AppSink::set_callback(std::function<void(const Frame&)> callback) {
  std::lock_guard lock(mutex_);
  callback_ = std::move(callback);
}

void AppSink::consume(const Frame& frame) {
  std::function<void(const Frame&)> cb;
  {
    std::lock_guard lock(mutex_);
    frames_.push_back(frame);
    cb = callback_;
  }
  cv_.notify_all();
  if (cb) cb(frame);
}

void AppSink::finish() {
  {
    std::lock_guard lock(mutex_);
    ended_ = true;
  }
  cv_.notify_all();
}

// ---------------------------------------------------------------- statssink

std::vector<double> StatsSink::interval_fps() const {
  std::lock_guard lock(mutex_);
  return fps_;
}

void StatsSink::consume(const Frame&) {
  std::lock_guard lock(mutex_);
  const std::int64_t now = steady_now_ns();
  const std::int64_t width = std::chrono::nanoseconds(interval_).count();
  if (interval_start_ns_ == 0) interval_start_ns_ = now;
  while (now - interval_start_ns_ >= width) {
    fps_.push_back(static_cast<double>(interval_frames_) * 1e9 / static_cast<double>(width));
    interval_frames_ = 0;
    interval_start_ns_ += width;
  }
  ++interval_frames_;
}

namespace elements {

// ---------------------------------------------------------------- nullsink

class NullSink : public SinkElement {
 public:
  NullSink(std::string name, bool qos) : SinkElement("nullsink", std::move(name), qos) {}

 protected:
  void consume(const Frame&) override {}
};

// ---------------------------------------------------------------- filesink

class FileSink : public SinkElement {
 public:
  FileSink(std::string name, bool qos, std::string location)
      : SinkElement("filesink", std::move(name), qos), location_(std::move(location)) {}

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& sink_caps) override {
    if (!sink_caps.at(0).is_tensor()) {
      throw ValidationError("filesink '" + name() + "' stores tensor streams only, got " +
                            sink_caps[0].to_string());
    }
    if (!caps_equal(file_.caps, sink_caps[0])) file_.frames.clear();
    file_.caps = sink_caps[0];
    return SinkElement::configure(sink_caps);
  }

 protected:
  void consume(const Frame& frame) override { file_.frames.push_back(frame); }
  void finish() override {
    file_.paced = context().paced;
    try {
      write_stream_file(location_, file_);
    } catch (const std::exception& e) {
      throw StreamError(name(), e.what());
    }
  }

 private:
  std::string location_;
  StreamFile file_;
};

// ---------------------------------------------------------------- reposink

class RepoSink : public SinkElement {
 public:
  RepoSink(std::string name, std::string slot)
      : SinkElement("tensor_reposink", std::move(name), false), slot_name_(std::move(slot)) {}

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& sink_caps) override {
    if (!sink_caps.at(0).is_tensor()) {
      throw ValidationError("tensor_reposink '" + name() + "' needs a tensor stream");
    }
    slot_ = context().repos.bind_sink(slot_name_, name());
    return SinkElement::configure(sink_caps);
  }

 protected:
  void consume(const Frame& frame) override { slot_->deposit(frame); }
  void finish() override { slot_->close(); }

 private:
  std::string slot_name_;
  std::shared_ptr<RepoSlot> slot_;
};

std::unique_ptr<Element> make_nullsink(const std::string& name, const PropertyReader& p) {
  return std::make_unique<NullSink>(name, p.boolean("qos"));
}

std::unique_ptr<Element> make_appsink(const std::string& name, const PropertyReader& p) {
  return std::make_unique<AppSink>(name, p.boolean("qos"));
}

std::unique_ptr<Element> make_statssink(const std::string& name, const PropertyReader& p) {
  auto ms = p.uint("interval_ms");
  if (ms == 0) p.fail("interval_ms", "must be positive");
  return std::make_unique<StatsSink>(name, p.boolean("qos"), std::chrono::milliseconds(ms));
}

std::unique_ptr<Element> make_filesink(const std::string& name, const PropertyReader& p) {
  return std::make_unique<FileSink>(name, p.boolean("qos"), p.required("location"));
}

std::unique_ptr<Element> make_reposink(const std::string& name, const PropertyReader& p) {
  return std::make_unique<RepoSink>(name, p.required("slot"));
}

}  // namespace elements
}  // namespace nnpipe
