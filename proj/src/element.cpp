#include "nnpipe/element.hpp"

#include <algorithm>

#include "util.hpp"

namespace nnpipe {

std::int64_t steady_now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------- Pad

std::string Pad::full_name() const { return owner_->name() + "." + name_; }

void Pad::link(Pad& src, Pad& sink, StreamCaps filter) {
  if (src.direction_ != PadDirection::kSrc || sink.direction_ != PadDirection::kSink) {
    throw ValidationError("links go from a src pad to a sink pad");
  }
  if (src.peer_ || sink.peer_) {
    throw ValidationError("pad " + (src.peer_ ? src.full_name() : sink.full_name()) +
                          " is already linked");
  }
  src.peer_ = &sink;
  sink.peer_ = &src;
  src.filter_ = std::move(filter);
}

void Pad::unlink(Pad& src) {
  if (src.peer_) src.peer_->peer_ = nullptr;
  src.peer_ = nullptr;
  src.filter_ = StreamCaps::any();
}

void Pad::set_negotiated(StreamCaps caps) {
  info_.reset();
  if (caps.is_tensor() && caps.fixed()) info_ = caps.to_info();
  negotiated_ = std::move(caps);
}

// ---------------------------------------------------------------- Element

Pad* Element::find_pad(PadDirection direction, const std::string& name) const {
  const auto& pads = direction == PadDirection::kSink ? sinks_ : srcs_;
  for (const auto& p : pads) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

bool Element::has_request_pads(PadDirection direction) const {
  return direction == PadDirection::kSink ? request_sink_.has_value() : request_src_.has_value();
}

Pad& Element::add_pad(PadDirection direction, std::string name, StreamCaps caps_template) {
  auto& pads = direction == PadDirection::kSink ? sinks_ : srcs_;
  pads.push_back(
      std::make_unique<Pad>(*this, direction, std::move(name), pads.size(), caps_template));
  return *pads.back();
}

void Element::allow_request_pads(PadDirection direction, std::string prefix,
                                 StreamCaps caps_template) {
  auto& slot = direction == PadDirection::kSink ? request_sink_ : request_src_;
  slot = RequestTemplate{std::move(prefix), std::move(caps_template)};
}

Pad& Element::pad_for_link(PadDirection direction, const std::string& pad_name) {
  auto& pads = direction == PadDirection::kSink ? sinks_ : srcs_;
  const auto& request = direction == PadDirection::kSink ? request_sink_ : request_src_;
  auto& serial = request_serial_[direction == PadDirection::kSink ? 0 : 1];
  const char* what = direction == PadDirection::kSink ? "sink" : "src";

  if (!pad_name.empty()) {
    if (Pad* p = find_pad(direction, pad_name)) {
      if (p->linked()) throw ValidationError("pad " + p->full_name() + " is already linked");
      return *p;
    }
    if (request && pad_name.rfind(request->prefix, 0) == 0) {
      serial = std::max(serial, pads.size()) + 1;
      return add_pad(direction, pad_name, request->caps);
    }
    throw ValidationError("element '" + name_ + "' has no " + what + " pad '" + pad_name + "'");
  }
  for (auto& p : pads) {
    if (!p->linked() && !request) return *p;
  }
  if (request) {
    std::string name;
    do {
      name = request->prefix + std::to_string(serial++);
    } while (find_pad(direction, name));
    return add_pad(direction, name, request->caps);
  }
  throw ValidationError("element '" + name_ + "' has no free " + what + " pad");
}

void Element::release_pad(Pad& pad) {
  auto& pads = pad.direction() == PadDirection::kSink ? sinks_ : srcs_;
  if (!has_request_pads(pad.direction()) || pad.linked()) return;
  pads.erase(std::remove_if(pads.begin(), pads.end(),
                            [&](const std::unique_ptr<Pad>& p) { return p.get() == &pad; }),
             pads.end());
  for (std::size_t i = 0; i < pads.size(); ++i) pads[i]->index_ = i;
}

ElementContext& Element::context() const {
  if (!context_) throw Error("element '" + name_ + "' is not attached to a pipeline");
  return *context_;
}

void Element::set_property(const std::string& key, const std::string& value) {
  std::lock_guard lock(stream_mutex_);
  apply_property(key, value);
}

void Element::apply_property(const std::string& key, const std::string&) {
  throw ValidationError("property '" + key + "' of '" + name_ + "' cannot change at runtime");
}

void Element::receive(Pad& sink, Frame frame) {
  std::lock_guard lock(stream_mutex_);
  if (sink.eos_) {
    warn("frame on " + sink.full_name() + " after end of stream ignored");
    return;
  }
  try {
    if (sink.info_) check_frame(*sink.info_, frame);
    if (sink.last_ts_ && frame.timestamp_ns < *sink.last_ts_) {
      throw Error("timestamp went backwards on " + sink.full_name());
    }
  } catch (const Error& e) {
    throw StreamError(name_, std::string("caps mismatch: ") + e.what());
  }
  sink.last_ts_ = frame.timestamp_ns;
  sink.frames_.fetch_add(1, std::memory_order_relaxed);
  try {
    chain(sink.index(), std::move(frame));
  } catch (const StreamError&) {
    throw;
  } catch (const Interrupted&) {
    throw;
  } catch (const std::exception& e) {
    throw StreamError(name_, e.what());
  }
}

void Element::receive_event(Pad& sink, const Event& event) {
  if (event.type != Event::Type::kEos) return;
  std::lock_guard lock(stream_mutex_);
  if (sink.eos_.exchange(true)) return;
  try {
    handle_eos(sink.index());
  } catch (const StreamError&) {
    throw;
  } catch (const Interrupted&) {
    throw;
  } catch (const std::exception& e) {
    throw StreamError(name_, e.what());
  }
}

void Element::receive_upstream(Pad& src, const Event& event) {
  handle_upstream(src.index(), event);
}

void Element::handle_eos(std::size_t) {
  if (all_sinks_eos()) push_eos_all();
}

void Element::handle_upstream(std::size_t, const Event& event) { send_upstream(event); }

void Element::push(std::size_t src_index, Frame frame) {
  Pad& pad = *srcs_.at(src_index);
  if (!pad.peer_) return;
  frame.seq = pad.next_seq_++;
  pad.frames_.fetch_add(1, std::memory_order_relaxed);
  pad.peer_->owner().receive(*pad.peer_, std::move(frame));
}

void Element::push_eos(std::size_t src_index) {
  Pad& pad = *srcs_.at(src_index);
  if (pad.eos_.exchange(true)) return;
  if (pad.peer_) pad.peer_->owner().receive_event(*pad.peer_, Event::eos());
}

void Element::push_eos_all() {
  for (std::size_t i = 0; i < srcs_.size(); ++i) push_eos(i);
}

void Element::send_upstream(const Event& event) {
  for (auto& s : sinks_) {
    if (s->peer_) s->peer_->owner().receive_upstream(*s->peer_, event);
  }
}

bool Element::all_sinks_eos() const {
  return std::all_of(sinks_.begin(), sinks_.end(), [](const auto& p) { return p->eos(); });
}

void Element::warn(const std::string& message) {
  if (context_ && context_->on_warning) context_->on_warning(name_, message);
}

// ---------------------------------------------------------------- SourceElement

SourceElement::~SourceElement() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
}

void SourceElement::activate() {
  if (done_ || thread_.joinable()) return;
  stop_ = false;
  resume_after_interrupt();
  thread_ = std::thread([this] { run(); });
}

void SourceElement::deactivate() {
  stop_ = true;
  interrupt();
  if (thread_.joinable()) thread_.join();
}

void SourceElement::run() {
  auto& ctx = context();
  try {
    while (!stop_ && !ctx.flushing) {
      auto frame = next_frame();
      if (!frame) {
        done_ = true;
        push_eos_all();
        return;
      }
      if (ctx.paced && pace()) {
        std::this_thread::sleep_until(ctx.base_time +
                                      std::chrono::nanoseconds(frame->timestamp_ns));
      }
      if (frame->origin_wall_ns == 0) frame->origin_wall_ns = steady_now_ns();
      push(0, std::move(*frame));
    }
  } catch (const Interrupted&) {
    // Woken by pause or flush.
  } catch (const StreamError& e) {
    if (ctx.on_error) ctx.on_error(e.element(), e.what());
  } catch (const std::exception& e) {
    if (ctx.on_error) ctx.on_error(name(), e.what());
  }
}

// ---------------------------------------------------------------- registry

void ElementRegistry::add(ElementKind kind) {
  std::lock_guard lock(mutex_);
  auto name = kind.kind;
  if (!kinds_.emplace(name, std::move(kind)).second) {
    throw Error("element kind '" + name + "' is already registered");
  }
}

const ElementKind* ElementRegistry::find(const std::string& kind) const {
  std::lock_guard lock(mutex_);
  auto it = kinds_.find(kind);
  return it == kinds_.end() ? nullptr : &it->second;
}

std::vector<std::string> ElementRegistry::kinds() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [k, v] : kinds_) out.push_back(k);
  return out;
}

void ElementRegistry::check(const std::string& kind, const Properties& properties) const {
  const ElementKind* k = find(kind);
  if (!k) throw ValidationError("unknown element kind '" + kind + "'");
  for (const auto& [key, value] : properties) {
    if (key == "name") continue;
    bool known = std::any_of(k->properties.begin(), k->properties.end(),
                             [&](const PropertySpec& s) { return s.name == key; });
    if (!known) {
      std::string allowed;
      for (const auto& s : k->properties) allowed += (allowed.empty() ? "" : ", ") + s.name;
      throw ValidationError("unknown property '" + key + "' for " + kind +
                            (allowed.empty() ? std::string(" (it has none)")
                                             : " (known: " + allowed + ")"));
    }
  }
  if (k->check) k->check(properties);
}

std::unique_ptr<Element> ElementRegistry::create(const std::string& kind,
                                                 const std::string& name,
                                                 const Properties& properties) const {
  check(kind, properties);
  return find(kind)->create(name, properties);
}

// ---------------------------------------------------------------- properties

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    out = false;
    return true;
  }
  return false;
}

PropertyReader::PropertyReader(std::string element, const Properties& values,
                               const std::vector<PropertySpec>& specs)
    : element_(std::move(element)) {
  for (const auto& s : specs) {
    if (!s.default_value.empty()) values_[s.name] = s.default_value;
  }
  for (const auto& [k, v] : values) values_[k] = v;
}

void PropertyReader::fail(const std::string& key, const std::string& message) const {
  throw ValidationError("element '" + element_ + "': property '" + key + "': " + message);
}

bool PropertyReader::has(const std::string& key) const { return values_.count(key) > 0; }

std::string PropertyReader::string(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? std::string() : it->second;
}

std::string PropertyReader::required(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) fail(key, "is required");
  return it->second;
}

std::uint64_t PropertyReader::uint(const std::string& key) const {
  std::uint64_t v = 0;
  if (!detail::parse_uint(required(key), v)) fail(key, "expected an unsigned integer");
  return v;
}

double PropertyReader::real(const std::string& key) const {
  double v = 0;
  if (!detail::parse_double(required(key), v)) fail(key, "expected a number");
  return v;
}

bool PropertyReader::boolean(const std::string& key) const {
  bool v = false;
  if (!parse_bool(required(key), v)) fail(key, "expected true or false");
  return v;
}

Framerate PropertyReader::rate(const std::string& key) const {
  try {
    return Framerate::parse(required(key));
  } catch (const CapsError& e) {
    fail(key, e.what());
  }
}

}  // namespace nnpipe
