#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nnpipe/caps.hpp"
#include "nnpipe/repo.hpp"
#include "nnpipe/tensor.hpp"

namespace nnpipe {

enum class PadDirection : std::uint8_t { kSink, kSrc };

struct Event {
  enum class Type : std::uint8_t { kEos, kFlushStart, kFlushStop, kQos };

  Type type = Type::kEos;
  std::int64_t lateness_ns = 0;  // kQos only

  static Event eos() { return {Type::kEos, 0}; }
  static Event qos(std::int64_t lateness_ns) { return {Type::kQos, lateness_ns}; }
};

class Element;

class Pad {
 public:
  Pad(Element& owner, PadDirection direction, std::string name, std::size_t index,
      StreamCaps caps_template)
      : owner_(&owner),
        direction_(direction),
        name_(std::move(name)),
        index_(index),
        template_(std::move(caps_template)) {}

  Element& owner() const { return *owner_; }
  PadDirection direction() const { return direction_; }
  const std::string& name() const { return name_; }
  std::size_t index() const { return index_; }
  std::string full_name() const;

  const StreamCaps& caps_template() const { return template_; }
  Pad* peer() const { return peer_; }
  bool linked() const { return peer_ != nullptr; }
  // Caps literal placed on the link (kept on the src side).
  const StreamCaps& link_filter() const { return filter_; }

  const std::optional<StreamCaps>& negotiated() const { return negotiated_; }
  const std::optional<TensorsInfo>& info() const { return info_; }

  std::uint64_t frames() const { return frames_.load(std::memory_order_relaxed); }
  bool eos() const { return eos_.load(); }

  static void link(Pad& src, Pad& sink, StreamCaps filter = StreamCaps::any());
  static void unlink(Pad& src);

 private:
  friend class Element;
  friend class Pipeline;

  void set_negotiated(StreamCaps caps);

  Element* owner_;
  PadDirection direction_;
  std::string name_;
  std::size_t index_;
  StreamCaps template_;
  Pad* peer_ = nullptr;
  StreamCaps filter_;
  std::optional<StreamCaps> negotiated_;
  std::optional<TensorsInfo> info_;
  std::uint64_t next_seq_ = 0;
  std::optional<std::uint64_t> last_ts_;
  std::atomic<std::uint64_t> frames_{0};
  std::atomic<bool> eos_{false};
};

// Shared state of one running pipeline, visible to its elements.
struct ElementContext {
  CopyCounter copies;
  RepoRegistry repos;
  bool paced = false;
  std::chrono::steady_clock::time_point base_time{};
  std::function<void(const std::string& element, const std::string& message)> on_error;
  std::function<void(const std::string& element, const std::string& message)> on_warning;
  std::function<void(Element&)> on_sink_eos;
  std::atomic<bool> flushing{false};
};

std::int64_t steady_now_ns();

enum class ElementRole : std::uint8_t { kSource, kFilter, kSink };

class Element {
 public:
  Element(std::string kind, std::string name) : kind_(std::move(kind)), name_(std::move(name)) {}
  virtual ~Element() = default;
  Element(const Element&) = delete;
  Element& operator=(const Element&) = delete;

  const std::string& kind() const { return kind_; }
  const std::string& name() const { return name_; }
  virtual ElementRole role() const { return ElementRole::kFilter; }

  std::size_t sink_count() const { return sinks_.size(); }
  std::size_t src_count() const { return srcs_.size(); }
  Pad& sink_pad(std::size_t i) const { return *sinks_.at(i); }
  Pad& src_pad(std::size_t i) const { return *srcs_.at(i); }
  Pad* find_pad(PadDirection direction, const std::string& name) const;
  bool has_request_pads(PadDirection direction) const;

  // An unlinked pad for a new link: the named one (created on request when
  // the name matches the request template), else the first free static pad,
  // else a new request pad. Throws ValidationError when none is available.
  Pad& pad_for_link(PadDirection direction, const std::string& pad_name);
  // Removes an unlinked request pad; other request pads keep their names.
  void release_pad(Pad& pad);

  // Negotiation: fixed caps of every sink pad in, caps of every src pad out.
  virtual std::vector<StreamCaps> configure(const std::vector<StreamCaps>& sink_caps) = 0;

  // Runtime-mutable properties. Serialised against streaming.
  void set_property(const std::string& key, const std::string& value);

  virtual void activate() {}
  virtual void deactivate() {}
  // True when the element holds no in-flight work (used when pausing).
  virtual bool idle() const { return true; }
  // Threads of this element have finished all their work.
  virtual bool finished() const { return true; }
  // Wakes blocking waits during a flush; they unwind with Interrupted.
  virtual void wake() {}

  void attach(ElementContext* context) { context_ = context; }

  // Streaming entry points, called by the peer element.
  void receive(Pad& sink, Frame frame);
  void receive_event(Pad& sink, const Event& event);
  void receive_upstream(Pad& src, const Event& event);

 protected:
  Pad& add_pad(PadDirection direction, std::string name, StreamCaps caps_template);
  void allow_request_pads(PadDirection direction, std::string prefix, StreamCaps caps_template);

  virtual void chain(std::size_t sink_index, Frame frame) = 0;
  // Default: forwards end of stream once every sink pad has seen it.
  virtual void handle_eos(std::size_t sink_index);
  // Default: forwards upstream through every sink pad.
  virtual void handle_upstream(std::size_t src_index, const Event& event);
  virtual void apply_property(const std::string& key, const std::string& value);

  void push(std::size_t src_index, Frame frame);
  void push_eos(std::size_t src_index);
  void push_eos_all();
  void send_upstream(const Event& event);
  bool all_sinks_eos() const;
  void warn(const std::string& message);

  ElementContext& context() const;
  CopyCounter* copies() const { return context_ ? &context_->copies : nullptr; }
  std::mutex& stream_mutex() { return stream_mutex_; }

 private:
  struct RequestTemplate {
    std::string prefix;
    StreamCaps caps;
  };

  std::string kind_;
  std::string name_;
  std::vector<std::unique_ptr<Pad>> sinks_;
  std::vector<std::unique_ptr<Pad>> srcs_;
  std::optional<RequestTemplate> request_sink_;
  std::optional<RequestTemplate> request_src_;
  std::size_t request_serial_[2] = {0, 0};
  ElementContext* context_ = nullptr;
  std::mutex stream_mutex_;
  std::atomic<bool> eos_sent_{false};
};

// Base for elements that drive frames from their own thread.
class SourceElement : public Element {
 public:
  using Element::Element;
  ~SourceElement() override;

  ElementRole role() const override { return ElementRole::kSource; }
  void activate() override;
  void deactivate() override;
  bool finished() const override { return done_.load(); }
  void wake() override { interrupt(); }

 protected:
  // Next frame, or nullopt at end of stream. Runs on the source thread.
  virtual std::optional<Frame> next_frame() = 0;
  // Called by deactivate() before joining, to wake a blocked next_frame().
  virtual void interrupt() {}
  virtual void resume_after_interrupt() {}
  // Frame timestamps honour the wall clock when the pipeline is paced.
  virtual bool pace() const { return true; }

  void chain(std::size_t, Frame) override {}
  bool stop_requested() const { return stop_.load(); }

 private:
  void run();

  std::thread thread_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> done_{false};
};

// ---------------------------------------------------------------- registry

struct PropertySpec {
  std::string name;
  std::string default_value;  // empty: required or no default
  std::string help;
};

using Properties = std::map<std::string, std::string>;

struct ElementKind {
  std::string kind;
  ElementRole role = ElementRole::kFilter;
  std::string description;
  std::vector<PropertySpec> properties;
  std::function<std::unique_ptr<Element>(const std::string& name, const Properties&)> create;
  // Optional early check run by the parser (e.g. filter framework names).
  std::function<void(const Properties&)> check;
};

class ElementRegistry {
 public:
  // Process-wide registry with every built-in element kind.
  static ElementRegistry& instance();

  void add(ElementKind kind);
  const ElementKind* find(const std::string& kind) const;
  std::vector<std::string> kinds() const;

  // Validates property names against the kind and constructs the element.
  std::unique_ptr<Element> create(const std::string& kind, const std::string& name,
                                  const Properties& properties) const;
  // Throws ValidationError for unknown kinds or property names.
  void check(const std::string& kind, const Properties& properties) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ElementKind> kinds_;
};

// Typed access to element properties with the kind's defaults.
class PropertyReader {
 public:
  PropertyReader(std::string element, const Properties& values,
                 const std::vector<PropertySpec>& specs);

  bool has(const std::string& key) const;
  std::string string(const std::string& key) const;
  std::string required(const std::string& key) const;
  std::uint64_t uint(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  Framerate rate(const std::string& key) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  std::string element_;
  Properties values_;
};

bool parse_bool(const std::string& text, bool& out);

}  // namespace nnpipe
