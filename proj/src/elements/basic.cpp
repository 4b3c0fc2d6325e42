#include <algorithm>

#include "elements_internal.hpp"
#include "util.hpp"

namespace nnpipe {

// ---------------------------------------------------------------- queue

QueueElement::QueueElement(std::string name, std::size_t capacity, QueuePolicy policy)
    : Element("queue", std::move(name)), capacity_(capacity), policy_(policy) {
  add_pad(PadDirection::kSink, "sink", StreamCaps::any());
  add_pad(PadDirection::kSrc, "src", StreamCaps::any());
}

QueueElement::~QueueElement() { deactivate(); }

std::vector<StreamCaps> QueueElement::configure(const std::vector<StreamCaps>& sink_caps) {
  return {sink_caps.at(0)};
}

void QueueElement::activate() {
  std::lock_guard lock(mutex_);
  if (thread_.joinable()) return;
  stop_ = false;
  thread_ = std::thread([this] { run(); });
}

void QueueElement::deactivate() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  if (context_flushing()) {
    std::lock_guard lock(mutex_);
    items_.clear();
  }
}

bool QueueElement::context_flushing() const {
  try {
    return context().flushing.load();
  } catch (const Error&) {
    return false;
  }
}

void QueueElement::wake() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
}

bool QueueElement::idle() const {
  std::lock_guard lock(mutex_);
  return items_.empty() && !busy_;
}

std::size_t QueueElement::max_occupancy() const {
  std::lock_guard lock(mutex_);
  return max_occupancy_;
}

std::uint64_t QueueElement::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

void QueueElement::chain(std::size_t, Frame frame) {
  std::unique_lock lock(mutex_);
  if (items_.size() >= capacity_) {
    switch (policy_) {
      case QueuePolicy::kBlock:
        cv_.wait(lock, [&] { return items_.size() < capacity_ || stop_; });
        if (items_.size() >= capacity_) throw Interrupted();
        break;
      case QueuePolicy::kLeakyOld:
        items_.pop_front();
        ++dropped_;
        break;
      case QueuePolicy::kLeakyNew:
        ++dropped_;
        return;
    }
  }
  items_.push_back(Item{std::move(frame)});
  max_occupancy_ = std::max(max_occupancy_, items_.size());
  lock.unlock();
  cv_.notify_all();
}

void QueueElement::handle_eos(std::size_t) {
  {
    std::lock_guard lock(mutex_);
    items_.push_back(Item{std::nullopt});
  }
  cv_.notify_all();
}

void QueueElement::handle_upstream(std::size_t, const Event& event) {
  if (event.type == Event::Type::kQos && event.lateness_ns > 0 &&
      policy_ != QueuePolicy::kBlock) {
    std::lock_guard lock(mutex_);
    if (!items_.empty() && items_.front().frame) {
      items_.pop_front();
      ++dropped_;
    }
  }
  send_upstream(event);
}

void QueueElement::run() {
  auto& ctx = context();
  try {
    while (true) {
      Item item;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !items_.empty() || stop_; });
        if (stop_) return;
        item = std::move(items_.front());
        items_.pop_front();
        busy_ = true;
      }
      cv_.notify_all();
      struct Idle {
        QueueElement& q;
        ~Idle() {
          std::lock_guard lock(q.mutex_);
          q.busy_ = false;
        }
      } idle{*this};
      if (!item.frame) {
        push_eos(0);
        return;
      }
      push(0, std::move(*item.frame));
    }
  } catch (const Interrupted&) {
  } catch (const StreamError& e) {
    if (ctx.on_error) ctx.on_error(e.element(), e.what());
  } catch (const std::exception& e) {
    if (ctx.on_error) ctx.on_error(name(), e.what());
  }
}

namespace elements {
namespace {

class Identity : public Element {
 public:
  explicit Identity(const std::string& name) : Element("identity", name) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }
  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    return {in.at(0)};
  }

 protected:
  void chain(std::size_t, Frame frame) override { push(0, std::move(frame)); }
};

class Tee : public Element {
 public:
  explicit Tee(const std::string& name) : Element("tee", name) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any());
    allow_request_pads(PadDirection::kSrc, "src_", StreamCaps::any());
  }
  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    return std::vector<StreamCaps>(src_count(), in.at(0));
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    for (std::size_t i = 0; i < src_count(); ++i) push(i, frame);
  }
};

class Valve : public Element {
 public:
  Valve(const std::string& name, bool drop) : Element("valve", name), drop_(drop) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }
  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    return {in.at(0)};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    if (!drop_) push(0, std::move(frame));
  }
  void apply_property(const std::string& key, const std::string& value) override {
    bool v = false;
    if (key != "drop") return Element::apply_property(key, value);
    if (!parse_bool(value, v)) throw ValidationError("valve drop expects true or false");
    drop_ = v;
  }

 private:
  bool drop_;
};

std::size_t parse_active(const std::string& value) {
  std::uint64_t v = 0;
  if (!detail::parse_uint(value, v)) throw ValidationError("active_pad expects a pad index");
  return static_cast<std::size_t>(v);
}

// Forwards frames from one of several sink pads. Frames older than the last
// forwarded timestamp are dropped after a switch.
class InputSelector : public Element {
 public:
  InputSelector(const std::string& name, std::size_t active)
      : Element("input_selector", name), active_(active) {
    allow_request_pads(PadDirection::kSink, "sink_", StreamCaps::any());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }
  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    if (in.empty()) throw Error("input_selector has no linked sink pad");
    for (const auto& c : in) {
      if (!caps_equal(c, in[0])) {
        throw Error("input_selector inputs differ: " + in[0].to_string() + " vs " +
                    c.to_string());
      }
    }
    if (active_ >= in.size()) throw Error("active_pad out of range");
    last_ts_.reset();
    return {in[0]};
  }

 protected:
  void chain(std::size_t sink, Frame frame) override {
    if (sink != active_) return;
    if (last_ts_ && frame.timestamp_ns < *last_ts_) return;
    last_ts_ = frame.timestamp_ns;
    push(0, std::move(frame));
  }
  void apply_property(const std::string& key, const std::string& value) override {
    if (key != "active_pad") return Element::apply_property(key, value);
    auto a = parse_active(value);
    if (a >= sink_count()) throw ValidationError("active_pad out of range");
    active_ = a;
  }

 private:
  std::size_t active_;
  std::optional<std::uint64_t> last_ts_;
};

class OutputSelector : public Element {
 public:
  OutputSelector(const std::string& name, std::size_t active)
      : Element("output_selector", name), active_(active) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any());
    allow_request_pads(PadDirection::kSrc, "src_", StreamCaps::any());
  }
  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    if (src_count() == 0) throw Error("output_selector has no linked src pad");
    if (active_ >= src_count()) throw Error("active_pad out of range");
    return std::vector<StreamCaps>(src_count(), in.at(0));
  }

 protected:
  void chain(std::size_t, Frame frame) override { push(active_, std::move(frame)); }
  void apply_property(const std::string& key, const std::string& value) override {
    if (key != "active_pad") return Element::apply_property(key, value);
    auto a = parse_active(value);
    if (a >= src_count()) throw ValidationError("active_pad out of range");
    active_ = a;
  }

 private:
  std::size_t active_;
};

}  // namespace

std::unique_ptr<Element> make_identity(const std::string& name, const PropertyReader&) {
  return std::make_unique<Identity>(name);
}

std::unique_ptr<Element> make_queue(const std::string& name, const PropertyReader& p) {
  auto capacity = p.uint("max_size");
  if (capacity == 0) p.fail("max_size", "must be at least 1");
  auto policy_name = p.string("policy");
  QueuePolicy policy;
  if (policy_name == "block") {
    policy = QueuePolicy::kBlock;
  } else if (policy_name == "leaky_old") {
    policy = QueuePolicy::kLeakyOld;
  } else if (policy_name == "leaky_new") {
    policy = QueuePolicy::kLeakyNew;
  } else {
    p.fail("policy", "expected block, leaky_old or leaky_new");
  }
  return std::make_unique<QueueElement>(name, capacity, policy);
}

std::unique_ptr<Element> make_tee(const std::string& name, const PropertyReader&) {
  return std::make_unique<Tee>(name);
}

std::unique_ptr<Element> make_valve(const std::string& name, const PropertyReader& p) {
  return std::make_unique<Valve>(name, p.boolean("drop"));
}

std::unique_ptr<Element> make_input_selector(const std::string& name, const PropertyReader& p) {
  return std::make_unique<InputSelector>(name, p.uint("active_pad"));
}

std::unique_ptr<Element> make_output_selector(const std::string& name, const PropertyReader& p) {
  return std::make_unique<OutputSelector>(name, p.uint("active_pad"));
}

}  // namespace elements
}  // namespace nnpipe
