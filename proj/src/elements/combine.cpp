#include "elements_internal.hpp"
#include "nnpipe/sync.hpp"
#include "nnpipe/tensor_ops.hpp"

namespace nnpipe::elements {
namespace {

// Shared frame pairing for elements with one request sink pad per input.
class Combiner : public Element {
 public:
  Combiner(std::string kind, const std::string& name, SyncPolicy policy)
      : Element(std::move(kind), name), policy_(policy) {
    allow_request_pads(PadDirection::kSink, "sink_", StreamCaps::any_tensor());
    add_pad(PadDirection::kSrc, "src", StreamCaps::any_tensor());
  }

 protected:
  // Sets up the collector; returns the output rate (the pacing pad's).
  Framerate start_sync(const std::vector<TensorsInfo>& inputs) {
    if (inputs.empty()) throw Error(kind() + " has no linked sink pad");
    std::vector<Framerate> rates;
    for (const auto& i : inputs) rates.push_back(i.rate);
    collector_.emplace(policy_, rates);
    done_ = false;
    if (policy_.mode == SyncMode::kLockstep) {
      Framerate rate = rates[0];
      for (const auto& r : rates) {
        if (!(r == rate)) return Framerate();
      }
      return rate;
    }
    return rates[collector_->pacing_pad()];
  }

  virtual Frame combine(std::vector<Frame>& group) = 0;

  void chain(std::size_t sink, Frame frame) override {
    if (done_) return;
    emit(collector_->push(sink, std::move(frame)));
  }

  void handle_eos(std::size_t sink) override {
    if (done_) return;
    emit(collector_->end_of_stream(sink));
    if (all_sinks_eos() && !done_) {
      done_ = true;
      push_eos_all();
    }
  }

 private:
  void emit(std::vector<SyncCollector::Group> groups) {
    for (auto& g : groups) {
      Frame out = combine(g);
      out.timestamp_ns = 0;
      out.origin_wall_ns = 0;
      for (const auto& f : g) {
        out.timestamp_ns = std::max(out.timestamp_ns, f.timestamp_ns);
        out.origin_wall_ns = std::max(out.origin_wall_ns, f.origin_wall_ns);
      }
      push(0, std::move(out));
    }
    if (collector_->finished()) {
      done_ = true;
      push_eos_all();
    }
  }

  SyncPolicy policy_;
  std::optional<SyncCollector> collector_;
  bool done_ = false;
};

class Mux : public Combiner {
 public:
  Mux(const std::string& name, SyncPolicy policy) : Combiner("tensor_mux", name, policy) {}

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    std::vector<TensorsInfo> inputs;
    TensorsInfo out;
    for (const auto& c : in) {
      inputs.push_back(tensor_input(c, kind()));
      for (const auto& t : inputs.back().tensors) out.tensors.push_back(t);
    }
    if (out.count() > kMaxTensors) {
      throw Error("tensor_mux would carry " + std::to_string(out.count()) +
                  " tensors; the limit is " + std::to_string(kMaxTensors));
    }
    out.rate = start_sync(inputs);
    return {tensor_output(out, true)};
  }

 protected:
  Frame combine(std::vector<Frame>& group) override {
    Frame out;
    for (auto& f : group) {
      for (auto& c : f.chunks) out.chunks.push_back(c);
    }
    return out;
  }
};

class Merge : public Combiner {
 public:
  Merge(const std::string& name, SyncPolicy policy, bool stack, std::size_t axis)
      : Combiner("tensor_merge", name, policy), stack_(stack), axis_(axis) {}

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>& in) override {
    std::vector<TensorsInfo> inputs;
    inputs_.clear();
    for (const auto& c : in) {
      inputs.push_back(tensor_input(c, kind()));
      if (inputs.back().count() != 1) throw Error("tensor_merge inputs must be single tensors");
      inputs_.push_back(inputs.back().tensors[0]);
    }
    if (inputs_.empty()) throw Error("tensor_merge has no linked sink pad");
    if (stack_) {
      for (const auto& t : inputs_) {
        if (!(t.dim == inputs_[0].dim)) {
          throw Error("stack needs equal dimensions, got " + inputs_[0].dim.to_string() +
                      " and " + t.dim.to_string());
        }
      }
      used_axis_ = stack_axis(inputs_[0].dim);
    } else {
      used_axis_ = axis_;
    }
    auto out = concat_info(inputs_, used_axis_);
    auto rate = start_sync(inputs);
    return {StreamCaps::from_info(TensorsInfo({out}, rate))};
  }

 protected:
  Frame combine(std::vector<Frame>& group) override {
    std::vector<Chunk> chunks;
    for (auto& f : group) chunks.push_back(f.chunks[0]);
    Frame out;
    out.chunks.push_back(concat_chunks(inputs_, chunks, used_axis_, copies()));
    return out;
  }

 private:
  bool stack_;
  std::size_t axis_;
  std::size_t used_axis_ = 0;
  std::vector<TensorInfo> inputs_;
};

SyncPolicy read_policy(const PropertyReader& p) {
  try {
    return SyncPolicy::parse(p.string("policy"), p.uint("base_pad"));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    p.fail("policy", e.what());
  }
}

}  // namespace

std::unique_ptr<Element> make_mux(const std::string& name, const PropertyReader& p) {
  return std::make_unique<Mux>(name, read_policy(p));
}

std::unique_ptr<Element> make_merge(const std::string& name, const PropertyReader& p) {
  auto mode = p.string("mode");
  if (mode != "concat" && mode != "stack") p.fail("mode", "expected concat or stack");
  auto axis = p.uint("axis");
  if (axis >= kRankLimit) p.fail("axis", "axis must be 0..3");
  return std::make_unique<Merge>(name, read_policy(p), mode == "stack", axis);
}

}  // namespace nnpipe::elements
