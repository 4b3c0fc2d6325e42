#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nnpipe/element.hpp"
#include "nnpipe/elements.hpp"
#include "nnpipe/graph.hpp"

namespace nnpipe {

enum class PipelineState : std::uint8_t { kNull, kReady, kPlaying, kEos, kError };

std::string to_string(PipelineState state);

struct SinkReport {
  std::string name;
  std::string kind;
  std::uint64_t frames = 0;
  double fps = 0;
  double mean_latency_ms = 0;
  double p95_latency_ms = 0;
  bool eos = false;
};

struct QueueReport {
  std::string name;
  std::size_t capacity = 0;
  std::size_t max_occupancy = 0;
  std::uint64_t dropped = 0;
};

struct PadProgress {
  std::string pad;  // element.pad
  std::uint64_t frames = 0;
  bool eos = false;
};

struct RunReport {
  std::vector<SinkReport> sinks;
  std::vector<QueueReport> queues;
  std::vector<PadProgress> progress;  // every linked sink pad
  std::vector<std::string> warnings;
  double elapsed_s = 0;
  std::uint64_t copies = 0;
  std::uint64_t copied_bytes = 0;

  const SinkReport* sink(const std::string& name) const;
};

// Runtime failure or timeout; carries the progress snapshot.
class RunError : public Error {
 public:
  RunError(const std::string& message, RunReport report)
      : Error(message), report_(std::move(report)) {}
  const RunReport& report() const { return report_; }

 private:
  RunReport report_;
};

struct PipelineOptions {
  // Sources sleep so that frame timestamps follow the wall clock.
  bool paced = false;
};

class Pipeline {
 public:
  // Instantiates every element and pad link; throws ValidationError.
  explicit Pipeline(PipelineGraph graph, PipelineOptions options = {});
  static std::unique_ptr<Pipeline> parse(std::string_view text, PipelineOptions options = {});
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  PipelineState state() const;
  // Message of the first error once in the Error state.
  std::string error_message() const;

  // Null -> Ready negotiates, Ready -> Playing starts threads, Playing ->
  // Ready pauses at queue boundaries, any -> Null stops and flushes.
  // Null -> Playing passes through Ready.
  void set_state(PipelineState target);

  // Plays until every sink has seen end of stream. Throws RunError on an
  // element error or when `timeout` expires first.
  RunReport run_until_eos(std::chrono::milliseconds timeout = std::chrono::seconds(60));
  // Waits for Eos or Error; false on timeout.
  bool wait(std::chrono::milliseconds timeout);
  RunReport report() const;

  Element* element(const std::string& name) const;
  template <class T>
  T* element_as(const std::string& name) const {
    return dynamic_cast<T*>(element(name));
  }
  void set_property(const std::string& element, const std::string& key, const std::string& value);

  // Topology edits; allowed in the Null and Ready states.
  void add_element(const std::string& kind, const std::string& name, const Properties& properties);
  void remove_element(const std::string& name);
  void link(const std::string& from, const std::string& to, const std::string& from_pad = "",
            const std::string& to_pad = "", const std::string& caps = "");
  void unlink(const std::string& from, const std::string& to);

  const PipelineGraph& graph() const;
  // Edge labels carry negotiated caps once Ready.
  std::string export_dot() const;
  ElementContext& context();

 private:
  struct Impl;
  static void set_pad_caps(Pad& pad, StreamCaps caps) { pad.set_negotiated(std::move(caps)); }

  std::unique_ptr<Impl> impl_;
};

}  // namespace nnpipe
