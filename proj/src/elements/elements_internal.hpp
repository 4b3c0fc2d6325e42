#pragma once

#include <memory>
#include <string>

#include "nnpipe/element.hpp"
#include "nnpipe/elements.hpp"

namespace nnpipe::elements {

using Factory = std::unique_ptr<Element> (*)(const std::string&, const PropertyReader&);

// Timestamp of frame `index` for a source running at `rate`. Unconstrained
// sources advance by one nanosecond per frame.
inline std::uint64_t source_time(const Framerate& rate, std::uint64_t index) {
  return rate.unconstrained() ? index : rate.frame_time_ns(index);
}

// Fixed tensor description of negotiated caps; throws when `caps` is not a
// fixed tensor stream.
inline TensorsInfo tensor_input(const StreamCaps& caps, const std::string& kind) {
  if (!caps.is_tensor() || !caps.fixed()) {
    throw Error(kind + " needs a tensor stream, got " + caps.to_string());
  }
  return caps.to_info();
}

inline StreamCaps tensor_output(const TensorsInfo& info, bool multi) {
  auto caps = StreamCaps::from_info(info);
  auto t = caps.tensor();
  t.multi = multi || info.count() > 1;
  return StreamCaps(std::move(t));
}

std::unique_ptr<Element> make_testsrc_tensor(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_testsrc_raster(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_testsrc_text(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_filesrc(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_reposrc(const std::string&, const PropertyReader&);

std::unique_ptr<Element> make_nullsink(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_appsink(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_statssink(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_filesink(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_reposink(const std::string&, const PropertyReader&);

std::unique_ptr<Element> make_identity(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_queue(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_tee(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_valve(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_input_selector(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_output_selector(const std::string&, const PropertyReader&);

std::unique_ptr<Element> make_converter(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_decoder(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_transform(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_mux(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_demux(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_merge(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_split(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_aggregator(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_if(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_rate(const std::string&, const PropertyReader&);
std::unique_ptr<Element> make_filter(const std::string&, const PropertyReader&);

}  // namespace nnpipe::elements
