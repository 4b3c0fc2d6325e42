#include "elements_internal.hpp"
#include "nnpipe/filter.hpp"

namespace nnpipe {
namespace {

ElementKind make_kind(std::string kind, ElementRole role, std::string description,
                      std::vector<PropertySpec> specs, elements::Factory factory) {
  ElementKind k;
  k.kind = kind;
  k.role = role;
  k.description = std::move(description);
  k.properties = specs;
  k.create = [factory, specs](const std::string& name, const Properties& props) {
    PropertyReader reader(name, props, specs);
    return factory(name, reader);
  };
  return k;
}

}  // namespace

void register_builtin_elements(ElementRegistry& r) {
  using namespace elements;
  const auto src = ElementRole::kSource;
  const auto flt = ElementRole::kFilter;
  const auto snk = ElementRole::kSink;

  r.add(make_kind("testsrc_tensor", src, "synthetic tensor frames",
                  {{"info", "", "compact tensors info, e.g. uint8:3:4:1:1,float32:2"},
                   {"fill", "zeros", "zeros|counter|random|ramp"},
                   {"seed", "0", "random fill seed"},
                   {"start", "0", "ramp value of frame 0"},
                   {"step", "1", "ramp increment per frame"},
                   {"framerate", "30/1", "stream rate"},
                   {"num_frames", "10", "frames before end of stream"}},
                  make_testsrc_tensor));
  r.add(make_kind("testsrc_raster", src, "synthetic raster frames",
                  {{"pattern", "gradient", "solid|gradient|checker|random"},
                   {"width", "320", ""},
                   {"height", "240", ""},
                   {"format", "RGB", "RGB|GRAY8"},
                   {"framerate", "30/1", ""},
                   {"num_frames", "10", ""}},
                  make_testsrc_raster));
  r.add(make_kind("testsrc_text", src, "repeats a text line",
                  {{"text", "hello", ""}, {"framerate", "30/1", ""}, {"num_frames", "10", ""}},
                  make_testsrc_text));
  r.add(make_kind("filesrc", src, "reads an NNSTRM1 stream file", {{"location", "", ""}},
                  make_filesrc));
  r.add(make_kind("tensor_reposrc", src, "emits frames deposited into a repo slot",
                  {{"slot", "", "repo slot name"},
                   {"info", "", "bootstrap tensors info"},
                   {"framerate", "0/1", ""}},
                  make_reposrc));

  r.add(make_kind("nullsink", snk, "counts frames", {{"qos", "false", ""}}, make_nullsink));
  r.add(make_kind("appsink", snk, "hands frames to the host program", {{"qos", "false", ""}},
                  make_appsink));
  r.add(make_kind("statssink", snk, "frame rate and latency statistics",
                  {{"qos", "false", ""}, {"interval_ms", "1000", ""}}, make_statssink));
  r.add(make_kind("filesink", snk, "writes an NNSTRM1 stream file",
                  {{"location", "", ""}, {"qos", "false", ""}},
                  make_filesink));
  r.add(make_kind("tensor_reposink", snk, "deposits frames into a repo slot",
                  {{"slot", "", "repo slot name"}}, make_reposink));

  r.add(make_kind("identity", flt, "passes frames through", {}, make_identity));
  r.add(make_kind("queue", flt, "thread boundary with a bounded FIFO",
                  {{"max_size", "16", ""}, {"policy", "block", "block|leaky_old|leaky_new"}},
                  make_queue));
  r.add(make_kind("tee", flt, "copies frames to every src pad", {}, make_tee));
  r.add(make_kind("valve", flt, "drops frames while drop=true", {{"drop", "false", ""}},
                  make_valve));
  r.add(make_kind("input_selector", flt, "forwards one of several inputs",
                  {{"active_pad", "0", ""}}, make_input_selector));
  r.add(make_kind("output_selector", flt, "forwards to one of several outputs",
                  {{"active_pad", "0", ""}}, make_output_selector));

  r.add(make_kind("tensor_converter", flt, "media to tensor stream",
                  {{"input_size", "", "text length"}, {"output_info", "", "binary layout"}},
                  make_converter));
  r.add(make_kind("tensor_decoder", flt, "tensor to text stream",
                  {{"mode", "raw_text", "label|raw_text"}, {"labels", "", "labels file"}},
                  make_decoder));
  r.add(make_kind("tensor_transform", flt, "elementwise and layout operators",
                  {{"mode", "", "typecast|arith|transpose|normalize"}, {"option", "", ""}},
                  make_transform));
  r.add(make_kind("tensor_mux", flt, "bundles tensor streams",
                  {{"policy", "slowest", "slowest|fastest|base|lockstep"}, {"base_pad", "0", ""}},
                  make_mux));
  r.add(make_kind("tensor_demux", flt, "unbundles a tensors stream",
                  {{"tensorpick", "", "tensor indices per src pad"}}, make_demux));
  r.add(make_kind("tensor_merge", flt, "merges tensor streams into one tensor",
                  {{"mode", "concat", "concat|stack"},
                   {"axis", "0", ""},
                   {"policy", "slowest", ""},
                   {"base_pad", "0", ""}},
                  make_merge));
  r.add(make_kind("tensor_split", flt, "slices a tensor into several streams",
                  {{"axis", "0", ""}, {"segments", "", "sizes along axis"}}, make_split));
  r.add(make_kind("tensor_aggregator", flt, "sliding window over frames",
                  {{"frames_in", "1", ""}, {"frames_flush", "", "defaults to frames_in"},
                   {"axis", "3", ""}},
                  make_aggregator));
  r.add(make_kind("tensor_if", flt, "routes frames on tensor values",
                  {{"source", "0:max", "tensor:max|min|mean|index"},
                   {"op", "gt", ""},
                   {"operand", "", ""},
                   {"then", "pass", "pass|drop|route:N"},
                   {"else", "drop", ""}},
                  make_if));
  r.add(make_kind("tensor_rate", flt, "frame rate override",
                  {{"framerate", "", ""}, {"mode", "drop_only", "drop_only|duplicate"},
                   {"qos", "true", ""}},
                  make_rate));

  auto filter = make_kind("tensor_filter", flt, "runs a model through a backend",
                          {{"framework", "", ""},
                           {"model", "", ""},
                           {"busy_ms", "", "delay backend"},
                           {"custom", "", "backend specific"}},
                          make_filter);
  filter.check = [](const Properties& props) {
    auto it = props.find("framework");
    if (it == props.end()) throw ValidationError("tensor_filter needs a framework");
    try {
      BackendRegistry::instance().get(it->second);
    } catch (const Error& e) {
      throw ValidationError(e.what());
    }
  };
  r.add(std::move(filter));
}

ElementRegistry& ElementRegistry::instance() {
  static ElementRegistry* registry = [] {
    auto* r = new ElementRegistry;
    register_builtin_elements(*r);
    return r;
  }();
  return *registry;
}

}  // namespace nnpipe
