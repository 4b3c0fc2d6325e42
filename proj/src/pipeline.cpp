#include "nnpipe/pipeline.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <set>

namespace nnpipe {

std::string to_string(PipelineState state) {
  switch (state) {
    case PipelineState::kNull: return "null";
    case PipelineState::kReady: return "ready";
    case PipelineState::kPlaying: return "playing";
    case PipelineState::kEos: return "eos";
    case PipelineState::kError: return "error";
  }
  return "?";
}

const SinkReport* RunReport::sink(const std::string& name) const {
  for (const auto& s : sinks) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

using Clock = std::chrono::steady_clock;

struct Pipeline::Impl {
  PipelineGraph graph;
  PipelineOptions options;
  ElementContext ctx;
  std::vector<std::unique_ptr<Element>> elements;  // parallel to graph.elements
  std::vector<std::pair<Pad*, Pad*>> pads;         // parallel to graph.links

  std::mutex control;
  mutable std::mutex mutex;
  std::condition_variable cv;
  PipelineState state = PipelineState::kNull;
  std::string error;
  std::vector<std::string> warnings;
  std::set<const Element*> eos_sinks;
  std::size_t sink_total = 0;
  bool dirty = true;
  bool started = false;
  Clock::time_point play_start{};
  Clock::time_point end_time{};
  Clock::time_point paused_at{};
  bool ended = false;

  Element& get(const std::string& name) const {
    for (std::size_t i = 0; i < graph.elements.size(); ++i) {
      if (graph.elements[i].name == name) return *elements[i];
    }
    throw ValidationError("no element named '" + name + "'");
  }

  void instantiate(const ElementDecl& decl) {
    if (graph.find(decl.name)) throw ValidationError("duplicate element name '" + decl.name + "'");
    Properties props(decl.properties.begin(), decl.properties.end());
    auto element = ElementRegistry::instance().create(decl.kind, decl.name, props);
    element->attach(&ctx);
    graph.elements.push_back(decl);
    elements.push_back(std::move(element));
  }

  void connect(const LinkDecl& l) {
    Element& from = get(l.from);
    Element& to = get(l.to);
    StreamCaps filter = StreamCaps::any();
    if (!l.caps.empty()) filter = StreamCaps::parse(l.caps);
    Pad& src = from.pad_for_link(PadDirection::kSrc, l.from_pad);
    Pad* sink = nullptr;
    try {
      sink = &to.pad_for_link(PadDirection::kSink, l.to_pad);
      Pad::link(src, *sink, filter);
    } catch (...) {
      if (!src.linked()) from.release_pad(src);
      if (sink && !sink->linked()) to.release_pad(*sink);
      throw;
    }
    graph.links.push_back(l);
    pads.emplace_back(&src, sink);
  }

  void disconnect(std::size_t i) {
    auto [src, sink] = pads[i];
    Pad::unlink(*src);
    src->owner().release_pad(*src);
    sink->owner().release_pad(*sink);
    pads.erase(pads.begin() + static_cast<std::ptrdiff_t>(i));
    graph.links.erase(graph.links.begin() + static_cast<std::ptrdiff_t>(i));
  }

  void validate() const {
    graph.check_acyclic();
    for (const auto& e : elements) {
      for (std::size_t i = 0; i < e->sink_count(); ++i) {
        if (!e->sink_pad(i).linked()) {
          throw ValidationError("sink pad " + e->sink_pad(i).full_name() + " is not linked");
        }
      }
      for (std::size_t i = 0; i < e->src_count(); ++i) {
        if (!e->src_pad(i).linked()) {
          throw ValidationError("src pad " + e->src_pad(i).full_name() + " is not linked");
        }
      }
    }
    // Repo slots pair exactly one reposink with one reposrc.
    std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> slots;
    for (const auto& d : graph.elements) {
      if (d.kind != "tensor_reposink" && d.kind != "tensor_reposrc") continue;
      auto slot = d.property("slot").value_or("");
      auto& entry = slots[slot];
      (d.kind == "tensor_reposink" ? entry.first : entry.second).push_back(d.name);
    }
    for (const auto& [slot, ends] : slots) {
      if (ends.first.size() > 1) {
        throw ValidationError("repo slot '" + slot + "' has several reposinks (" + ends.first[0] +
                              ", " + ends.first[1] + ")");
      }
      if (ends.second.size() > 1) {
        throw ValidationError("repo slot '" + slot + "' has several reposrcs (" + ends.second[0] +
                              ", " + ends.second[1] + ")");
      }
      if (ends.first.empty() || ends.second.empty()) {
        throw ValidationError("repo slot '" + slot + "' needs both a reposink and a reposrc");
      }
    }
    // Every source reaches a sink.
    for (const auto& e : elements) {
      if (e->role() != ElementRole::kSource) continue;
      std::deque<const Element*> todo{e.get()};
      std::set<const Element*> seen{e.get()};
      bool reached = false;
      while (!todo.empty() && !reached) {
        const Element* cur = todo.front();
        todo.pop_front();
        if (cur->role() == ElementRole::kSink) reached = true;
        for (std::size_t i = 0; i < cur->src_count(); ++i) {
          const Element* next = &cur->src_pad(i).peer()->owner();
          if (seen.insert(next).second) todo.push_back(next);
        }
      }
      if (!reached) throw ValidationError("source '" + e->name() + "' reaches no sink");
    }
    if (std::none_of(elements.begin(), elements.end(),
                     [](const auto& e) { return e->role() == ElementRole::kSink; })) {
      throw ValidationError("pipeline has no sink");
    }
  }

  void negotiate() {
    validate();
    for (const auto& name : graph.topological_order()) {
      Element& e = get(name);
      std::vector<StreamCaps> in;
      for (std::size_t i = 0; i < e.sink_count(); ++i) in.push_back(*e.sink_pad(i).negotiated());
      std::vector<StreamCaps> out;
      try {
        out = e.configure(in);
      } catch (const ValidationError&) {
        throw;
      } catch (const Error& err) {
        throw NegotiationError("element '" + name + "' (" + e.kind() + "): " + err.what());
      }
      if (out.size() != e.src_count()) {
        throw NegotiationError("element '" + name + "' configured " + std::to_string(out.size()) +
                               " outputs for " + std::to_string(e.src_count()) + " src pads");
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        Pad& src = e.src_pad(i);
        Pad& sink = *src.peer();
        try {
          auto offered = caps_intersect(out[i], src.link_filter());
          if (!offered) {
            throw NegotiationError("caps " + out[i].to_string() + " do not satisfy filter " +
                                   src.link_filter().to_string());
          }
          auto fixed = negotiate_link(*offered, sink.caps_template());
          Pipeline::set_pad_caps(src, fixed);
          Pipeline::set_pad_caps(sink, fixed);
        } catch (const Error& err) {
          throw NegotiationError("link " + src.full_name() + " -> " + sink.full_name() + ": " +
                                 err.what());
        }
      }
    }
    sink_total = static_cast<std::size_t>(std::count_if(
        elements.begin(), elements.end(),
        [](const auto& e) { return e->role() == ElementRole::kSink; }));
    dirty = false;
  }

  void start() {
    auto now = Clock::now();
    ctx.paced = options.paced;
    if (!started) {
      ctx.base_time = now;
      play_start = now;
      started = true;
    } else {
      ctx.base_time += now - paused_at;
    }
    {
      std::lock_guard lock(mutex);
      state = PipelineState::kPlaying;
    }
    for (auto& e : elements) {
      if (e->role() != ElementRole::kSource) e->activate();
    }
    for (auto& e : elements) {
      if (e->role() == ElementRole::kSource) e->activate();
    }
  }

  void pause() {
    for (auto& e : elements) {
      if (e->role() == ElementRole::kSource && e->kind() != "tensor_reposrc") e->deactivate();
    }
    auto deadline = Clock::now() + std::chrono::seconds(10);
    while (Clock::now() < deadline) {
      {
        std::lock_guard lock(mutex);
        if (state != PipelineState::kPlaying) break;
      }
      if (std::all_of(elements.begin(), elements.end(), [](const auto& e) { return e->idle(); })) {
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    for (auto& e : elements) e->deactivate();
    ctx.repos.resume_all();
    paused_at = Clock::now();
    std::lock_guard lock(mutex);
    if (state == PipelineState::kPlaying) state = PipelineState::kReady;
  }

  void stop() {
    ctx.flushing = true;
    for (auto& e : elements) e->wake();
    ctx.repos.interrupt_all();
    for (auto& e : elements) e->deactivate();
    ctx.flushing = false;
    ctx.repos.resume_all();
  }

  void on_error(const std::string& element, const std::string& message) {
    std::lock_guard lock(mutex);
    if (state == PipelineState::kError || state == PipelineState::kNull) return;
    error = message.rfind(element + ":", 0) == 0 ? message : element + ": " + message;
    state = PipelineState::kError;
    if (!ended) {
      ended = true;
      end_time = Clock::now();
    }
    cv.notify_all();
  }

  void on_sink_eos(const Element& sink) {
    std::lock_guard lock(mutex);
    eos_sinks.insert(&sink);
    if (eos_sinks.size() >= sink_total && state == PipelineState::kPlaying) {
      state = PipelineState::kEos;
      ended = true;
      end_time = Clock::now();
      cv.notify_all();
    }
  }

  RunReport report() const {
    RunReport r;
    for (const auto& e : elements) {
      if (auto* s = dynamic_cast<const SinkElement*>(e.get())) {
        auto st = s->stats();
        r.sinks.push_back({e->name(), e->kind(), st.frames, st.fps(), st.mean_latency_ms(),
                           st.p95_latency_ms(), st.eos});
      }
      if (auto* q = dynamic_cast<const QueueElement*>(e.get())) {
        r.queues.push_back({e->name(), q->capacity(), q->max_occupancy(), q->dropped()});
      }
      for (std::size_t i = 0; i < e->sink_count(); ++i) {
        const Pad& p = e->sink_pad(i);
        if (p.linked()) r.progress.push_back({p.full_name(), p.frames(), p.eos()});
      }
    }
    std::lock_guard lock(mutex);
    r.warnings = warnings;
    if (started) {
      auto end = ended ? end_time : Clock::now();
      r.elapsed_s = std::chrono::duration<double>(end - play_start).count();
    }
    r.copies = ctx.copies.copies();
    r.copied_bytes = ctx.copies.bytes();
    return r;
  }
};

Pipeline::Pipeline(PipelineGraph graph, PipelineOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  auto& ctx = impl_->ctx;
  ctx.on_error = [this](const std::string& e, const std::string& m) { impl_->on_error(e, m); };
  ctx.on_warning = [this](const std::string& e, const std::string& m) {
    std::lock_guard lock(impl_->mutex);
    impl_->warnings.push_back(e + ": " + m);
  };
  ctx.on_sink_eos = [this](Element& e) { impl_->on_sink_eos(e); };
  for (const auto& d : graph.elements) impl_->instantiate(d);
  for (const auto& l : graph.links) impl_->connect(l);
}

std::unique_ptr<Pipeline> Pipeline::parse(std::string_view text, PipelineOptions options) {
  return std::make_unique<Pipeline>(PipelineGraph::parse(text), options);
}

Pipeline::~Pipeline() { impl_->stop(); }

PipelineState Pipeline::state() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->state;
}

std::string Pipeline::error_message() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->error;
}

void Pipeline::set_state(PipelineState target) {
  std::lock_guard control(impl_->control);
  auto current = state();
  auto illegal = [&] {
    throw Error("illegal state change " + to_string(current) + " -> " + to_string(target));
  };
  switch (target) {
    case PipelineState::kNull:
      impl_->stop();
      {
        std::lock_guard lock(impl_->mutex);
        impl_->state = PipelineState::kNull;
      }
      impl_->dirty = true;
      return;
    case PipelineState::kReady:
      if (current == PipelineState::kNull) {
        impl_->negotiate();
        std::lock_guard lock(impl_->mutex);
        impl_->state = PipelineState::kReady;
      } else if (current == PipelineState::kPlaying) {
        impl_->pause();
      } else if (current != PipelineState::kReady) {
        illegal();
      }
      return;
    case PipelineState::kPlaying:
      if (current == PipelineState::kPlaying) return;
      if (current != PipelineState::kNull && current != PipelineState::kReady) illegal();
      if (impl_->dirty) impl_->negotiate();
      impl_->start();
      return;
    case PipelineState::kEos:
    case PipelineState::kError:
      illegal();
  }
}

bool Pipeline::wait(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  return impl_->cv.wait_for(lock, timeout, [&] {
    return impl_->state == PipelineState::kEos || impl_->state == PipelineState::kError;
  });
}

RunReport Pipeline::run_until_eos(std::chrono::milliseconds timeout) {
  auto current = state();
  if (current == PipelineState::kNull || current == PipelineState::kReady) {
    set_state(PipelineState::kPlaying);
  }
  if (!wait(timeout)) {
    auto report = impl_->report();
    std::string waiting;
    std::vector<const PadProgress*> pending;
    for (const auto& p : report.progress) {
      if (!p.eos) pending.push_back(&p);
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const PadProgress* a, const PadProgress* b) { return a->frames < b->frames; });
    for (const auto* p : pending) {
      waiting += (waiting.empty() ? "" : ", ") + p->pad + " (" + std::to_string(p->frames) +
                 " frames)";
    }
    for (const auto& e : impl_->elements) {
      if (e->kind() == "tensor_reposrc" && e->idle()) {
        waiting += (waiting.empty() ? "" : ", ") + e->name() + ".src (waiting on an empty repo slot)";
      }
    }
    std::string message = "timed out after " +
                          std::to_string(static_cast<double>(timeout.count()) / 1000.0) +
                          " s; starved pads: " + (waiting.empty() ? "none" : waiting);
    impl_->stop();
    {
      std::lock_guard lock(impl_->mutex);
      impl_->state = PipelineState::kError;
      impl_->error = message;
    }
    throw RunError(message, std::move(report));
  }
  impl_->stop();
  auto report = impl_->report();
  if (state() == PipelineState::kError) throw RunError(error_message(), std::move(report));
  return report;
}

RunReport Pipeline::report() const { return impl_->report(); }

Element* Pipeline::element(const std::string& name) const {
  for (std::size_t i = 0; i < impl_->graph.elements.size(); ++i) {
    if (impl_->graph.elements[i].name == name) return impl_->elements[i].get();
  }
  return nullptr;
}

void Pipeline::set_property(const std::string& element, const std::string& key,
                            const std::string& value) {
  impl_->get(element).set_property(key, value);
  for (auto& d : impl_->graph.elements) {
    if (d.name != element) continue;
    auto it = std::find_if(d.properties.begin(), d.properties.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it != d.properties.end()) {
      it->second = value;
    } else {
      d.properties.emplace_back(key, value);
    }
  }
}

namespace {

void require_stopped(PipelineState s) {
  if (s != PipelineState::kNull && s != PipelineState::kReady) {
    throw Error("topology can only change in the null or ready state");
  }
}

}  // namespace

void Pipeline::add_element(const std::string& kind, const std::string& name,
                           const Properties& properties) {
  std::lock_guard control(impl_->control);
  require_stopped(state());
  ElementDecl d;
  d.kind = kind;
  d.name = name;
  d.properties.assign(properties.begin(), properties.end());
  impl_->instantiate(d);
  impl_->dirty = true;
}

void Pipeline::remove_element(const std::string& name) {
  std::lock_guard control(impl_->control);
  require_stopped(state());
  impl_->get(name);
  for (std::size_t i = impl_->graph.links.size(); i-- > 0;) {
    const auto& l = impl_->graph.links[i];
    if (l.from == name || l.to == name) impl_->disconnect(i);
  }
  for (std::size_t i = 0; i < impl_->graph.elements.size(); ++i) {
    if (impl_->graph.elements[i].name != name) continue;
    impl_->elements[i]->deactivate();
    impl_->elements.erase(impl_->elements.begin() + static_cast<std::ptrdiff_t>(i));
    impl_->graph.elements.erase(impl_->graph.elements.begin() + static_cast<std::ptrdiff_t>(i));
    break;
  }
  impl_->dirty = true;
}

void Pipeline::link(const std::string& from, const std::string& to, const std::string& from_pad,
                    const std::string& to_pad, const std::string& caps) {
  std::lock_guard control(impl_->control);
  require_stopped(state());
  impl_->connect(LinkDecl{from, from_pad, to, to_pad, caps});
  impl_->dirty = true;
}

void Pipeline::unlink(const std::string& from, const std::string& to) {
  std::lock_guard control(impl_->control);
  require_stopped(state());
  bool found = false;
  for (std::size_t i = impl_->graph.links.size(); i-- > 0;) {
    const auto& l = impl_->graph.links[i];
    if (l.from == from && l.to == to) {
      impl_->disconnect(i);
      found = true;
    }
  }
  if (!found) throw ValidationError("no link from '" + from + "' to '" + to + "'");
  impl_->dirty = true;
}

const PipelineGraph& Pipeline::graph() const { return impl_->graph; }

std::string Pipeline::export_dot() const {
  return nnpipe::export_dot(impl_->graph, [this](std::size_t i) {
    const Pad* src = impl_->pads[i].first;
    if (src->negotiated()) return src->negotiated()->to_string();
    return impl_->graph.links[i].caps;
  });
}

ElementContext& Pipeline::context() { return impl_->ctx; }

}  // namespace nnpipe
