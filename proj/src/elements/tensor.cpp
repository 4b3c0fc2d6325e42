#include <atomic>
#include <cmath>
#include <fstream>

#include "elements_internal.hpp"
#include "nnpipe/filter.hpp"
#include "nnpipe/sync.hpp"
#include "nnpipe/tensor_ops.hpp"
#include "util.hpp"

namespace nnpipe::elements {
namespace {

// ---------------------------------------------------------------- converter

class Converter : public Element {
 public:
  Converter(const std::string& name, std::optional<std::uint32_t> input_size,
            std::optional<TensorsInfo> declared)
      : Element("tensor_converter", name), input_size_(input_size), declared_(std::move(declared)) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    const auto& caps = in.at(0);
    if (!caps.is_media()) {
      throw Error("tensor_converter expects raster, text or binary input, got " +
                  caps.to_string());
    }
    const auto& m = caps.media();
    Framerate rate = m.rate.value_or(Framerate());
    kind_ = m.kind;
    TensorsInfo out;
    switch (m.kind) {
      case MediaKind::kRaster:
        if (!m.width || !m.height || !m.channels) throw Error("raster caps are not fixed");
        out = TensorsInfo({TensorInfo{ElementType::kUint8,
                                      TensorDim{*m.channels, *m.width, *m.height, 1}, {}}},
                          rate);
        break;
      case MediaKind::kText:
        if (!input_size_) throw Error("text input needs the input_size property");
        out = TensorsInfo({TensorInfo{ElementType::kUint8, TensorDim{*input_size_, 1, 1, 1}, {}}},
                          rate);
        break;
      case MediaKind::kBinary:
        if (!declared_) throw Error("binary input needs the output_info property");
        out = *declared_;
        out.rate = rate;
        break;
    }
    out_ = out;
    return {StreamCaps::from_info(out)};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    if (frame.chunks.size() != 1) throw Error("media frames carry one chunk");
    const Chunk& c = frame.chunks[0];
    Frame out;
    out.timestamp_ns = frame.timestamp_ns;
    out.origin_wall_ns = frame.origin_wall_ns;
    switch (kind_) {
      case MediaKind::kRaster:
        if (c.size() != out_.tensors[0].byte_size()) {
          throw Error("raster frame of " + std::to_string(c.size()) + " bytes, expected " +
                      std::to_string(out_.tensors[0].byte_size()));
        }
        out.chunks.push_back(c);
        break;
      case MediaKind::kText: {
        std::vector<std::byte> bytes(*input_size_);
        auto src = c.bytes();
        std::copy_n(src.begin(), std::min<std::size_t>(src.size(), bytes.size()), bytes.begin());
        if (copies()) copies()->record(bytes.size());
        out.chunks.push_back(Chunk::adopt(std::move(bytes)));
        break;
      }
      case MediaKind::kBinary: {
        auto total = frame_byte_size(out_);
        if (c.size() != total) {
          throw Error("binary frame of " + std::to_string(c.size()) +
                      " bytes does not match declared " + std::to_string(total) + " bytes");
        }
        std::size_t offset = 0;
        for (const auto& t : out_.tensors) {
          out.chunks.push_back(c.slice(offset, t.byte_size()));
          offset += t.byte_size();
        }
        break;
      }
    }
    push(0, std::move(out));
  }

 private:
  std::optional<std::uint32_t> input_size_;
  std::optional<TensorsInfo> declared_;
  MediaKind kind_ = MediaKind::kRaster;
  TensorsInfo out_;
};

// ---------------------------------------------------------------- decoder

class Decoder : public Element {
 public:
  Decoder(const std::string& name, bool label, std::vector<std::string> labels)
      : Element("tensor_decoder", name), label_(label), labels_(std::move(labels)) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    info_ = tensor_input(in.at(0), kind());
    MediaCaps out;
    out.kind = MediaKind::kText;
    out.rate = info_.rate;
    return {StreamCaps(out)};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    const auto& t = info_.tensors[0];
    auto data = frame.chunks[0].bytes();
    std::string text;
    if (label_) {
      auto index = argmax(t.type, data);
      if (index >= labels_.size()) {
        throw Error("argmax index " + std::to_string(index) + " has no label (" +
                    std::to_string(labels_.size()) + " labels)");
      }
      text = labels_[index];
    } else {
      text = render_values(t.type, data);
    }
    auto* p = reinterpret_cast<const std::byte*>(text.data());
    Frame out;
    out.timestamp_ns = frame.timestamp_ns;
    out.origin_wall_ns = frame.origin_wall_ns;
    out.chunks.push_back(Chunk::adopt(std::vector<std::byte>(p, p + text.size())));
    push(0, std::move(out));
  }

 private:
  bool label_;
  std::vector<std::string> labels_;
  TensorsInfo info_;
};

// ---------------------------------------------------------------- transform

class Transform : public Element {
 public:
  Transform(const std::string& name, TransformOp op) : Element("tensor_transform", name), op_(op) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    in_ = tensor_input(in.at(0), kind());
    if (std::holds_alternative<TransposeOp>(op_) && in_.count() != 1) {
      throw Error("transpose needs a single-tensor stream");
    }
    TensorsInfo out = in_;
    for (auto& t : out.tensors) t = transform_info(op_, t);
    return {tensor_output(out, in.at(0).tensor().multi)};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    for (std::size_t i = 0; i < frame.chunks.size(); ++i) {
      frame.chunks[i] = transform_chunk(op_, in_.tensors[i], frame.chunks[i], copies());
    }
    push(0, std::move(frame));
  }

 private:
  TransformOp op_;
  TensorsInfo in_;
};

// ---------------------------------------------------------------- demux

class Demux : public Element {
 public:
  Demux(const std::string& name, std::vector<std::vector<std::size_t>> pick)
      : Element("tensor_demux", name), pick_(std::move(pick)) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    allow_request_pads(PadDirection::kSrc, "src_", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    auto info = tensor_input(in.at(0), kind());
    if (src_count() == 0) throw Error("tensor_demux has no linked src pad");
    map_ = pick_;
    if (map_.empty()) {
      for (std::size_t i = 0; i < src_count(); ++i) map_.push_back({i});
    }
    if (map_.size() != src_count()) {
      throw Error("tensorpick names " + std::to_string(map_.size()) + " pads but " +
                  std::to_string(src_count()) + " are linked");
    }
    std::vector<StreamCaps> out;
    for (const auto& indices : map_) {
      TensorsInfo o;
      o.rate = info.rate;
      for (auto i : indices) {
        if (i >= info.count()) {
          throw Error("tensor index " + std::to_string(i) + " out of range (" +
                      std::to_string(info.count()) + " tensors)");
        }
        o.tensors.push_back(info.tensors[i]);
      }
      out.push_back(tensor_output(o, false));
    }
    return out;
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    for (std::size_t p = 0; p < map_.size(); ++p) {
      Frame out;
      out.timestamp_ns = frame.timestamp_ns;
      out.origin_wall_ns = frame.origin_wall_ns;
      for (auto i : map_[p]) out.chunks.push_back(frame.chunks[i]);
      push(p, std::move(out));
    }
  }

 private:
  std::vector<std::vector<std::size_t>> pick_;
  std::vector<std::vector<std::size_t>> map_;
};

// ---------------------------------------------------------------- split

class Split : public Element {
 public:
  Split(const std::string& name, std::size_t axis, std::vector<std::uint32_t> segments)
      : Element("tensor_split", name), axis_(axis), segments_(std::move(segments)) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      add_pad(PadDirection::kSrc, "src_" + std::to_string(i), StreamCaps::any_tensor());
    }
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    auto info = tensor_input(in.at(0), kind());
    if (info.count() != 1) throw Error("tensor_split needs a single-tensor stream");
    in_ = info.tensors[0];
    std::vector<StreamCaps> out;
    for (const auto& t : split_info(in_, axis_, segments_)) {
      out.push_back(StreamCaps::from_info(TensorsInfo({t}, info.rate)));
    }
    return out;
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    auto parts = split_chunk(in_, frame.chunks[0], axis_, segments_, copies());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Frame out;
      out.timestamp_ns = frame.timestamp_ns;
      out.origin_wall_ns = frame.origin_wall_ns;
      out.chunks.push_back(std::move(parts[i]));
      push(i, std::move(out));
    }
  }

 private:
  std::size_t axis_;
  std::vector<std::uint32_t> segments_;
  TensorInfo in_;
};

// ---------------------------------------------------------------- aggregator

class Aggregator : public Element {
 public:
  Aggregator(const std::string& name, std::size_t frames_in, std::size_t frames_flush,
             std::size_t axis)
      : Element("tensor_aggregator", name),
        window_(frames_in, frames_flush),
        axis_(axis) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    auto info = tensor_input(in.at(0), kind());
    if (info.count() != 1) throw Error("tensor_aggregator needs a single-tensor stream");
    inputs_.assign(window_.frames_in(), info.tensors[0]);
    auto out = concat_info(inputs_, axis_);
    Framerate rate;
    if (!info.rate.unconstrained()) {
      rate = Framerate(info.rate.numerator(),
                       static_cast<std::int64_t>(info.rate.denominator()) *
                           static_cast<std::int64_t>(window_.frames_flush()));
    }
    window_ = SlidingWindow(window_.frames_in(), window_.frames_flush());
    return {StreamCaps::from_info(TensorsInfo({out}, rate))};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    auto full = window_.push(std::move(frame));
    if (!full) return;
    std::vector<Chunk> chunks;
    for (const auto& f : *full) chunks.push_back(f.chunks[0]);
    Frame out;
    out.timestamp_ns = full->back().timestamp_ns;
    out.origin_wall_ns = full->back().origin_wall_ns;
    out.chunks.push_back(window_.frames_in() == 1 ? chunks[0]
                                                  : concat_chunks(inputs_, chunks, axis_, copies()));
    push(0, std::move(out));
  }

 private:
  SlidingWindow window_;
  std::size_t axis_;
  std::vector<TensorInfo> inputs_;
};

// ---------------------------------------------------------------- tensor_if

enum class Reduce { kElement, kMax, kMin, kMean };
enum class CompareOp { kEq, kNe, kGt, kGe, kLt, kLe, kInRange, kOutRange };

struct IfAction {
  enum Kind { kPass, kDrop, kRoute } kind = kPass;
  std::size_t pad = 0;
};

IfAction parse_action(const std::string& text, const PropertyReader& p, const std::string& key) {
  if (text == "pass") return {IfAction::kPass, 0};
  if (text == "drop") return {IfAction::kDrop, 0};
  if (text.rfind("route:", 0) == 0) {
    std::uint64_t pad = 0;
    if (detail::parse_uint(text.substr(6), pad)) return {IfAction::kRoute, pad};
  }
  p.fail(key, "expected pass, drop or route:N");
}

class TensorIf : public Element {
 public:
  TensorIf(const std::string& name, std::size_t tensor, Reduce reduce, std::size_t element,
           CompareOp op, double lo, double hi, IfAction then_action, IfAction else_action)
      : Element("tensor_if", name),
        tensor_(tensor),
        reduce_(reduce),
        element_(element),
        op_(op),
        lo_(lo),
        hi_(hi),
        then_(then_action),
        else_(else_action) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    allow_request_pads(PadDirection::kSrc, "src_", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    info_ = tensor_input(in.at(0), kind());
    if (tensor_ >= info_.count()) {
      throw Error("source tensor " + std::to_string(tensor_) + " out of range");
    }
    const auto& t = info_.tensors[tensor_];
    if (reduce_ == Reduce::kElement && element_ >= t.dim.element_count()) {
      throw Error("source element " + std::to_string(element_) + " out of range (" +
                  std::to_string(t.dim.element_count()) + " elements)");
    }
    if (src_count() == 0) throw Error("tensor_if has no linked src pad");
    for (const auto& a : {then_, else_}) {
      if (a.kind == IfAction::kRoute && a.pad >= src_count()) {
        throw Error("route target " + std::to_string(a.pad) + " has no src pad");
      }
    }
    return std::vector<StreamCaps>(src_count(), in.at(0));
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    const auto& t = info_.tensors[tensor_];
    auto data = frame.chunks[tensor_].bytes();
    double v = 0;
    if (reduce_ == Reduce::kElement) {
      v = load_element(t.type, data, element_);
    } else {
      auto values = load_all(t.type, data);
      switch (reduce_) {
        case Reduce::kMax: v = *std::max_element(values.begin(), values.end()); break;
        case Reduce::kMin: v = *std::min_element(values.begin(), values.end()); break;
        default: {
          double sum = 0;
          for (double x : values) sum += x;
          v = sum / static_cast<double>(values.size());
        }
      }
    }
    const IfAction& action = evaluate(v) ? then_ : else_;
    if (action.kind == IfAction::kDrop) return;
    push(action.kind == IfAction::kRoute ? action.pad : 0, std::move(frame));
  }

 private:
  bool evaluate(double v) const {
    switch (op_) {
      case CompareOp::kEq: return v == lo_;
      case CompareOp::kNe: return v != lo_;
      case CompareOp::kGt: return v > lo_;
      case CompareOp::kGe: return v >= lo_;
      case CompareOp::kLt: return v < lo_;
      case CompareOp::kLe: return v <= lo_;
      case CompareOp::kInRange: return v >= lo_ && v <= hi_;
      case CompareOp::kOutRange: return v < lo_ || v > hi_;
    }
    return false;
  }

  std::size_t tensor_;
  Reduce reduce_;
  std::size_t element_;
  CompareOp op_;
  double lo_, hi_;
  IfAction then_, else_;
  TensorsInfo info_;
};

// ---------------------------------------------------------------- tensor_rate

class Rate : public Element {
 public:
  Rate(const std::string& name, Framerate target, RateMode mode, bool qos)
      : Element("tensor_rate", name), target_(target), mode_(mode), qos_(qos), gate_(target, mode) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    auto info = tensor_input(in.at(0), kind());
    input_rate_ = info.rate;
    gate_ = RateGate(target_, mode_);
    info.rate = target_;
    return {tensor_output(info, in.at(0).tensor().multi)};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    if (auto late = lateness_.exchange(0); late > 0) gate_.report_lateness(late);
    for (auto& f : gate_.admit(frame)) push(0, std::move(f));
  }
  void handle_eos(std::size_t) override {
    for (auto& f : gate_.finish(input_rate_)) push(0, std::move(f));
    push_eos_all();
  }
  void handle_upstream(std::size_t, const Event& event) override {
    if (event.type == Event::Type::kQos && qos_) {
      if (event.lateness_ns > 0) lateness_.fetch_add(event.lateness_ns);
      return;
    }
    send_upstream(event);
  }

 private:
  Framerate target_;
  RateMode mode_;
  bool qos_;
  RateGate gate_;
  Framerate input_rate_;
  std::atomic<std::int64_t> lateness_{0};
};

// ---------------------------------------------------------------- tensor_filter

class Filter : public Element {
 public:
  Filter(const std::string& name, std::string framework, FilterOptions options)
      : Element("tensor_filter", name), framework_(std::move(framework)), options_(std::move(options)) {
    add_pad(PadDirection::kSink, "sink", StreamCaps::any_tensor());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any_tensor());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    auto backend = BackendRegistry::instance().get(framework_);
    model_ = backend->open(options_);
    in_ = tensor_input(in.at(0), kind());
    if (auto expected = model_->input_info()) {
      auto want = *expected;
      want.rate = in_.rate;
      if (!caps_equal(StreamCaps::from_info(want), StreamCaps::from_info(in_))) {
        throw NegotiationError("model input " + want.to_compact() + " does not match stream " +
                               in_.to_compact());
      }
    }
    if (backend->rank_sensitive()) {
      std::vector<std::optional<std::uint8_t>> ranks;
      for (const auto& t : in_.tensors) ranks.push_back(t.dim.explicit_rank());
      model_->set_input_ranks(ranks);
    }
    auto out = model_->output_info(in_);
    out.rate = in_.rate;
    return {tensor_output(out, false)};
  }

 protected:
  void chain(std::size_t, Frame frame) override {
    Frame out;
    out.timestamp_ns = frame.timestamp_ns;
    out.origin_wall_ns = frame.origin_wall_ns;
    try {
      out.chunks = invoke_checked(framework_, *model_, in_, frame.chunks, copies());
    } catch (const StreamError&) {
      throw;
    } catch (const std::exception& e) {
      throw StreamError(name(), "backend " + framework_ + ": " + e.what());
    }
    push(0, std::move(out));
  }

 private:
  std::string framework_;
  FilterOptions options_;
  std::unique_ptr<FilterModel> model_;
  TensorsInfo in_;
};

std::vector<std::uint32_t> parse_u32_list(const std::string& text, const PropertyReader& p,
                                          const std::string& key) {
  std::vector<std::uint32_t> out;
  for (auto item : detail::split(text, ',')) {
    std::uint64_t v = 0;
    if (!detail::parse_uint(item, v) || v > kMaxDimension) p.fail(key, "bad list entry '" + std::string(item) + "'");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

std::size_t parse_axis(const PropertyReader& p, const std::string& key) {
  auto axis = p.uint(key);
  if (axis >= kRankLimit) p.fail(key, "axis must be 0..3");
  return static_cast<std::size_t>(axis);
}

}  // namespace

std::unique_ptr<Element> make_converter(const std::string& name, const PropertyReader& p) {
  std::optional<std::uint32_t> size;
  if (p.has("input_size")) {
    auto v = p.uint("input_size");
    if (v == 0 || v > kMaxDimension) p.fail("input_size", "outside [1, 65535]");
    size = static_cast<std::uint32_t>(v);
  }
  std::optional<TensorsInfo> declared;
  if (p.has("output_info")) {
    try {
      declared = TensorsInfo::parse_compact(p.string("output_info"));
    } catch (const Error& e) {
      p.fail("output_info", e.what());
    }
  }
  return std::make_unique<Converter>(name, size, declared);
}

std::unique_ptr<Element> make_decoder(const std::string& name, const PropertyReader& p) {
  auto mode = p.string("mode");
  if (mode == "raw_text") return std::make_unique<Decoder>(name, false, std::vector<std::string>{});
  if (mode != "label") p.fail("mode", "expected label or raw_text");
  auto path = p.required("labels");
  std::ifstream in(path);
  if (!in) p.fail("labels", "cannot read '" + path + "'");
  std::vector<std::string> labels;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  return std::make_unique<Decoder>(name, true, std::move(labels));
}

std::unique_ptr<Element> make_transform(const std::string& name, const PropertyReader& p) {
  try {
    return std::make_unique<Transform>(name, parse_transform(p.required("mode"), p.string("option")));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    p.fail("option", e.what());
  }
}

std::unique_ptr<Element> make_demux(const std::string& name, const PropertyReader& p) {
  std::vector<std::vector<std::size_t>> pick;
  auto text = p.string("tensorpick");
  if (!text.empty()) {
    for (auto pad : detail::split(text, ',')) {
      std::vector<std::size_t> indices;
      for (auto item : detail::split(pad, ':')) {
        std::uint64_t v = 0;
        if (!detail::parse_uint(item, v)) p.fail("tensorpick", "bad index '" + std::string(item) + "'");
        indices.push_back(v);
      }
      pick.push_back(std::move(indices));
    }
  }
  return std::make_unique<Demux>(name, std::move(pick));
}

std::unique_ptr<Element> make_split(const std::string& name, const PropertyReader& p) {
  auto segments = parse_u32_list(p.required("segments"), p, "segments");
  return std::make_unique<Split>(name, parse_axis(p, "axis"), std::move(segments));
}

std::unique_ptr<Element> make_aggregator(const std::string& name, const PropertyReader& p) {
  auto n = p.uint("frames_in");
  auto s = p.has("frames_flush") ? p.uint("frames_flush") : n;
  if (n == 0) p.fail("frames_in", "must be at least 1");
  if (s == 0 || s > n) p.fail("frames_flush", "must be in [1, frames_in]");
  return std::make_unique<Aggregator>(name, n, s, parse_axis(p, "axis"));
}

std::unique_ptr<Element> make_if(const std::string& name, const PropertyReader& p) {
  auto source = detail::split(p.required("source"), ':');
  if (source.size() != 2) p.fail("source", "expected tensor:max|min|mean|<element index>");
  std::uint64_t tensor = 0;
  if (!detail::parse_uint(source[0], tensor)) p.fail("source", "bad tensor index");
  Reduce reduce = Reduce::kElement;
  std::uint64_t element = 0;
  if (source[1] == "max") {
    reduce = Reduce::kMax;
  } else if (source[1] == "min") {
    reduce = Reduce::kMin;
  } else if (source[1] == "mean") {
    reduce = Reduce::kMean;
  } else if (!detail::parse_uint(source[1], element)) {
    p.fail("source", "expected max, min, mean or an element index");
  }
  static const std::map<std::string, CompareOp> ops = {
      {"eq", CompareOp::kEq}, {"ne", CompareOp::kNe}, {"gt", CompareOp::kGt},
      {"ge", CompareOp::kGe}, {"lt", CompareOp::kLt}, {"le", CompareOp::kLe},
      {"in_range", CompareOp::kInRange}, {"out_range", CompareOp::kOutRange}};
  auto it = ops.find(p.required("op"));
  if (it == ops.end()) p.fail("op", "expected eq, ne, gt, ge, lt, le, in_range or out_range");
  auto operands = detail::split(p.required("operand"), ',');
  bool range = it->second == CompareOp::kInRange || it->second == CompareOp::kOutRange;
  if (operands.size() != (range ? 2u : 1u)) {
    p.fail("operand", range ? "expected lo,hi" : "expected one number");
  }
  double lo = 0, hi = 0;
  if (!detail::parse_double(operands[0], lo)) p.fail("operand", "expected a number");
  if (range) {
    if (!detail::parse_double(operands[1], hi)) p.fail("operand", "expected a number");
    if (lo > hi) p.fail("operand", "range needs lo <= hi");
  }
  return std::make_unique<TensorIf>(name, tensor, reduce, element, it->second, lo, hi,
                                    parse_action(p.string("then"), p, "then"),
                                    parse_action(p.string("else"), p, "else"));
}

std::unique_ptr<Element> make_rate(const std::string& name, const PropertyReader& p) {
  auto target = p.rate("framerate");
  if (target.unconstrained()) p.fail("framerate", "target rate must be positive");
  auto mode = p.string("mode");
  RateMode m;
  if (mode == "drop_only") {
    m = RateMode::kDropOnly;
  } else if (mode == "duplicate") {
    m = RateMode::kDuplicate;
  } else {
    p.fail("mode", "expected drop_only or duplicate");
  }
  return std::make_unique<Rate>(name, target, m, p.boolean("qos"));
}

std::unique_ptr<Element> make_filter(const std::string& name, const PropertyReader& p) {
  auto framework = p.required("framework");
  FilterOptions options;
  options.model = p.string("model");
  for (const char* key : {"busy_ms", "custom"}) {
    if (p.has(key)) options.properties[key] = p.string(key);
  }
  return std::make_unique<Filter>(name, framework, std::move(options));
}

}  // namespace nnpipe::elements
