// Acceptance run: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "helpers.hpp"
#include "nnpipe/caps.hpp"
#include "nnpipe/container.hpp"
#include "nnpipe/filter.hpp"
#include "nnpipe/stats.hpp"
#include "oracles.hpp"

using namespace nnpipe;
using namespace nnpipe::test;

namespace {

// Collects failed checks; the first few end up in the report line.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  bool passed() const { return failures_.empty(); }
  std::string detail() const {
    std::string s = std::to_string(checks_ - failures_.size()) + "/" + std::to_string(checks_) +
                    " checks";
    if (!notes_.empty()) s += "; " + notes_;
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) s += "; failed: " + failures_[i];
    if (failures_.size() > 3) s += "; +" + std::to_string(failures_.size() - 3) + " more";
    return s;
  }

 private:
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::byte> payload(const Chunk& c) {
  auto b = c.bytes();
  return {b.begin(), b.end()};
}

TensorDim sink_dim(const Run& r, const std::string& sink) {
  return r.pipeline->element_as<AppSink>(sink)->caps().to_info().tensors.at(0).dim;
}

// ------------------------------------------------------------------ 1

void zero_copy(Verdict& v) {
  auto t0 = std::chrono::steady_clock::now();
  auto r = run(
      "testsrc_tensor info=uint8:3:4 fill=counter num_frames=1000 ! tee name=t "
      "! queue ! m.sink_0  t. ! queue ! m.sink_1 "
      "tensor_mux name=m ! tensor_demux name=d ! nullsink name=n0  d. ! nullsink name=n1");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.check(r.report.sink("n0")->frames == 1000, "n0 saw " + std::to_string(r.report.sink("n0")->frames));
  v.check(r.report.sink("n1")->frames == 1000, "n1 saw " + std::to_string(r.report.sink("n1")->frames));
  v.check(r.report.copies == 0, std::to_string(r.report.copies) + " copies");
  v.check(secs < 5.0, "took " + fmt(secs) + " s");
  v.note("copies=" + std::to_string(r.report.copies) + ", " + fmt(secs, 3) + " s");
}

// ------------------------------------------------------------------ 2

void table_rows(Verdict& v) {
  struct Row {
    const char* name;
    std::vector<double> single, multi;
    unsigned hw;
    double published;
  };
  const double c = 28.0, d = 10.8, e = 1.2;
  const Row rows[] = {
      {"f", {c, d}, {11.0, 7.0}, 1, 4.5},
      {"g", {c, e}, {27.8, 1.2}, 2, -0.8},
      {"h", {d, e}, {10.5, 1.1}, 2, -4.0},
      {"i", {c, d, e}, {11.0, 6.7, 1.1}, 2, -2.3},
  };
  for (const auto& row : rows) {
    double got = bench_relative_throughput(row.single, row.multi, row.hw);
    v.check(std::abs(got - row.published) <= 0.1,
            std::string(row.name) + " " + fmt(got) + " vs " + fmt(row.published, 1));
    v.note(std::string(row.name) + "=" + fmt(got) + "%");
  }
}

// ------------------------------------------------------------------ 3

double timed(const std::string& description) {
  auto t0 = std::chrono::steady_clock::now();
  run(description, std::chrono::seconds(60));
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void parallelism(Verdict& v) {
  const std::string head = "testsrc_tensor info=uint8:4 num_frames=300 ! tensor_filter framework=delay busy_ms=10 ! ";
  const std::string tail = "tensor_filter framework=delay busy_ms=10 ! nullsink";
  for (int rep = 0; rep < 3; ++rep) {
    double serial = timed(head + tail);
    double piped = timed(head + "queue ! " + tail);
    double ratio = piped / serial;
    v.check(ratio <= 0.65, "rep " + std::to_string(rep) + " ratio " + fmt(ratio, 3));
    v.note(fmt(piped) + "/" + fmt(serial) + " s");
  }
}

// ------------------------------------------------------------------ 4

void sync_accounting(Verdict& v) {
  const Framerate rates[] = {Framerate(30, 1), Framerate(10, 1)};
  const std::vector<std::vector<std::uint64_t>> streams = {timeline(rates[0], 3), timeline(rates[1], 3)};
  struct Case {
    const char* policy;
    std::size_t pacing;
    bool fresh;
    std::size_t count;
  };
  const Case cases[] = {{"slowest", 1, true, 30}, {"fastest", 0, false, 90}, {"base base_pad=0", 0, false, 90}};
  for (const auto& c : cases) {
    auto r = run(
        "testsrc_tensor info=uint32:1 fill=ramp framerate=30/1 num_frames=90 ! m.sink_0 "
        "testsrc_tensor info=uint32:1 fill=ramp framerate=10/1 num_frames=30 ! m.sink_1 "
        "tensor_mux name=m policy=" + std::string(c.policy) + " ! appsink name=a");
    auto frames = r.frames("a");
    auto want = oracle_sync(streams, c.pacing, c.fresh);
    std::string tag = c.policy;
    v.check(frames.size() == c.count, tag + " gave " + std::to_string(frames.size()));
    v.check(want.out_ts.size() == c.count, tag + " oracle gave " + std::to_string(want.out_ts.size()));
    bool same = frames.size() == want.out_ts.size();
    bool max_rule = true;
    for (std::size_t k = 0; same && k < frames.size(); ++k) {
      std::uint64_t newest = 0;
      for (std::size_t p = 0; p < 2; ++p) {
        auto idx = unpack<std::uint32_t>(frames[k].chunks.at(p)).at(0);
        auto ts = rates[p].frame_time_ns(idx);
        same = same && ts == want.picks[k][p];
        newest = std::max(newest, ts);
      }
      max_rule = max_rule && frames[k].timestamp_ns == newest;
      same = same && frames[k].timestamp_ns == want.out_ts[k];
    }
    v.check(same, tag + " picks differ from the oracle");
    v.check(max_rule, tag + " output ts is not the max of its picks");
    v.note(tag.substr(0, tag.find(' ')) + "=" + std::to_string(frames.size()));
  }
}

// ------------------------------------------------------------------ 5

struct Layout {
  const char* merge;  // tensor_merge properties
  std::size_t axis;   // axis used to split back
  TensorDim merged;
  const char* whole;  // compact info of a merged frame
};

const Layout kLayouts[] = {
    {"axis=0", 0, TensorDim({6, 4}), "uint8:6:4"},
    {"axis=1", 1, TensorDim({3, 8}), "uint8:3:8"},
    {"mode=stack", 2, TensorDim({3, 4, 2}), "uint8:3:4:2"},
};

void merge_split(Verdict& v) {
  const TensorInfo part{ElementType::kUint8, TensorDim({3, 4}), {}};
  int seed = 1;
  for (const auto& l : kLayouts) {
    std::string tag = l.merge;
    std::string split = "tensor_split name=s axis=" + std::to_string(l.axis) + " segments=" +
                        (l.axis == 2 ? "1,1" : l.axis == 0 ? "3,3" : "4,4");
    auto src = [&](const std::string& tee) {
      return "testsrc_tensor info=uint8:3:4 fill=random seed=" + std::to_string(seed++) +
             " num_frames=100 ! tee name=" + tee + " ! appsink name=raw_" + tee + "  " + tee + ". ! ";
    };

    // split after merge
    auto r = run(src("a") + "m.sink_0  " + src("b") + "m.sink_1  tensor_merge name=m " + l.merge +
                 " ! tee name=tm ! appsink name=merged  tm. ! " + split +
                 " ! appsink name=sa  s. ! appsink name=sb");
    v.check(sink_dim(r, "merged") == l.merged, tag + " merged dim " + sink_dim(r, "merged").to_string());
    auto a = r.frames("raw_a"), b = r.frames("raw_b"), m = r.frames("merged");
    auto sa = r.frames("sa"), sb = r.frames("sb");
    v.check(a.size() == 100 && b.size() == 100 && m.size() == 100 && sa.size() == 100 && sb.size() == 100,
            tag + " frame counts");
    bool concat_ok = true, split_ok = true;
    for (std::size_t k = 0; k < std::min({m.size(), a.size(), b.size(), sa.size(), sb.size()}); ++k) {
      std::vector<TensorInfo> infos{part, part};
      std::vector<Chunk> chunks{a[k].chunks[0], b[k].chunks[0]};
      concat_ok = concat_ok && payload(m[k].chunks[0]) == oracle_concat(infos, chunks, l.axis);
      split_ok = split_ok && payload(sa[k].chunks[0]) == payload(a[k].chunks[0]) &&
                 payload(sb[k].chunks[0]) == payload(b[k].chunks[0]);
    }
    v.check(concat_ok, tag + " merged content differs from the oracle");
    v.check(split_ok, tag + " split does not invert merge");

    // merge after split
    auto w = run("testsrc_tensor info=" + std::string(l.whole) + " fill=random seed=" + std::to_string(seed++) +
                 " num_frames=100 ! tee name=t ! appsink name=raw  t. ! " + split +
                 " ! m.sink_0  s. ! m.sink_1  tensor_merge name=m " + l.merge + " ! appsink name=out");
    auto raw = w.frames("raw"), out = w.frames("out");
    v.check(raw.size() == 100 && out.size() == 100, tag + " merge-after-split counts");
    bool ident = raw.size() == out.size();
    for (std::size_t k = 0; ident && k < raw.size(); ++k) {
      ident = payload(raw[k].chunks[0]) == payload(out[k].chunks[0]);
    }
    v.check(ident, tag + " merge does not invert split");
    v.check(sink_dim(w, "out") == l.merged, tag + " rebuilt dim " + sink_dim(w, "out").to_string());
  }
}

// ------------------------------------------------------------------ 6

void aggregator_law(Verdict& v) {
  std::mt19937 rng(6);
  int cases = 0;
  for (int i = 0; i < 60; ++i) {
    std::size_t n = 1 + rng() % 8;
    std::size_t s = 1 + rng() % n;
    std::size_t m = rng() % 101;
    std::size_t want = m < n ? 0 : (m - n) / s + 1;
    auto r = run("testsrc_tensor info=uint8:1 fill=counter num_frames=" + std::to_string(m) +
                 " ! tensor_aggregator frames_in=" + std::to_string(n) + " frames_flush=" + std::to_string(s) +
                 " axis=0 ! appsink name=a");
    auto frames = r.frames("a");
    bool content = frames.size() == want;
    for (std::size_t k = 0; content && k < frames.size(); ++k) {
      auto got = ints(frames[k].chunks.at(0));
      for (std::size_t j = 0; j < n; ++j) content = content && got.at(j) == static_cast<int>((k * s + j) % 256);
    }
    v.check(frames.size() == want, "N=" + std::to_string(n) + " S=" + std::to_string(s) + " M=" +
                                       std::to_string(m) + " gave " + std::to_string(frames.size()));
    v.check(content, "window content for N=" + std::to_string(n) + " S=" + std::to_string(s));
    ++cases;
  }
  auto half = run("testsrc_tensor info=uint8:1 framerate=30/1 num_frames=10 ! tensor_aggregator frames_in=2 "
                  "frames_flush=2 ! appsink name=a");
  auto rate = half.pipeline->element_as<AppSink>("a")->caps().rate();
  v.check(rate == Framerate(15, 1), "N=S=2 rate");
  v.check(half.frames("a").size() == 5, "N=S=2 count");
  v.note(std::to_string(cases) + " random triples, N=S=2 gives " + (rate ? rate->to_string() : "none"));
}

// ------------------------------------------------------------------ 7

void recurrence(Verdict& v) {
  auto r = run(
      "testsrc_tensor info=int32:1 fill=ramp start=1 step=1 framerate=0/1 num_frames=5 ! m.sink_0 "
      "tensor_reposrc slot=acc info=int32:1 ! m.sink_1 "
      "tensor_mux name=m policy=lockstep ! tensor_filter framework=custom_fn model=sum_tensors "
      "! tee name=t ! appsink name=a  t. ! tensor_reposink slot=acc");
  std::vector<std::int32_t> got;
  for (const auto& f : r.frames("a")) got.push_back(unpack<std::int32_t>(f.chunks.at(0)).at(0));
  std::vector<std::int32_t> want;
  for (std::int32_t x = 1, acc = 0; x <= 5; ++x) want.push_back(acc += x);
  std::string shown;
  for (auto x : got) shown += (shown.empty() ? "" : ",") + std::to_string(x);
  v.check(got == want, "sums [" + shown + "]");
  v.note("sums [" + shown + "]");

  bool rejected = false;
  try {
    Pipeline::parse("testsrc_tensor info=int32:1 ! m.sink_0  tensor_mux name=m policy=lockstep "
                    "! tensor_filter framework=custom_fn model=sum_tensors ! tee name=t ! nullsink  t. ! m.sink_1")
        ->set_state(PipelineState::kReady);
  } catch (const ValidationError&) {
    rejected = true;
  }
  v.check(rejected, "direct cycle accepted");
  bool accepted = true;
  try {
    Pipeline::parse("testsrc_tensor info=int32:1 ! m.sink_0  tensor_reposrc slot=acc info=int32:1 ! m.sink_1 "
                    "tensor_mux name=m policy=lockstep ! tensor_filter framework=custom_fn model=sum_tensors "
                    "! tee name=t ! nullsink  t. ! tensor_reposink slot=acc")
        ->set_state(PipelineState::kReady);
  } catch (const Error&) {
    accepted = false;
  }
  v.check(accepted, "repo pair rejected");
}

// ------------------------------------------------------------------ 8

StreamCaps tensor_caps(const std::string& dim) {
  return StreamCaps::parse("other/tensor,type=float32,dimension=" + dim);
}

std::string join(const std::vector<std::uint32_t>& d) {
  std::string s;
  for (auto x : d) s += (s.empty() ? "" : ":") + std::to_string(x);
  return s;
}

void negotiation(Verdict& v) {
  for (const auto& [src, sink] : {std::pair{"640:480", "640:480:1:1"}, std::pair{"640:480:1:1", "640:480"}}) {
    bool ok = true;
    try {
      auto r = run("testsrc_tensor info=uint8:" + std::string(src) + " num_frames=2 ! other/tensor,dimension=" +
                   sink + " ! appsink name=a");
      ok = r.frames("a").size() == 2;
    } catch (const Error&) {
      ok = false;
    }
    v.check(ok, std::string(src) + " -> " + sink);
  }

  TensorInfo r2{ElementType::kUint8, TensorDim::parse("3:4"), {}};
  TensorInfo r4{ElementType::kUint8, TensorDim::parse("3:4:1:1"), {}};
  v.check(caps_equal(StreamCaps::from_info(TensorsInfo({r2})), StreamCaps::from_info(TensorsInfo({r4}))),
          "rank changes caps_equal");

  std::mt19937 rng(8);
  int agree = 0, equal_pairs = 0;
  for (int i = 0; i < 1000; ++i) {
    auto random_dim = [&] {
      std::vector<std::uint32_t> d(1 + rng() % 4);
      for (auto& x : d) x = (rng() % 3 == 0) ? 1 : 1 + rng() % 4;
      return d;
    };
    auto a = random_dim();
    auto b = (i % 3 == 0) ? a : random_dim();
    if (i % 5 == 0) {
      b = a;
      b.resize(4, 1);
    }
    std::vector<std::uint32_t> x = a, y = b;
    x.resize(4, 1);
    y.resize(4, 1);
    bool want = x == y;
    equal_pairs += want;
    bool got = caps_equal(tensor_caps(join(a)), tensor_caps(join(b)));
    agree += got == want;
    v.check(got == want, join(a) + " vs " + join(b));
  }
  v.note(std::to_string(agree) + "/1000 random pairs agree, " + std::to_string(equal_pairs) + " equal");
}

// ------------------------------------------------------------------ 9

ElementType random_type(std::mt19937& rng) { return kAllElementTypes[rng() % kAllElementTypes.size()]; }

TensorInfo random_info(std::mt19937& rng, ElementType t) {
  return {t,
          TensorDim({1 + static_cast<std::uint32_t>(rng() % 5), 1 + static_cast<std::uint32_t>(rng() % 4),
                     1 + static_cast<std::uint32_t>(rng() % 3), 1 + static_cast<std::uint32_t>(rng() % 2)}),
          {}};
}

std::string perm_string(const std::array<std::uint8_t, 4>& p) {
  return std::to_string(p[0]) + ":" + std::to_string(p[1]) + ":" + std::to_string(p[2]) + ":" +
         std::to_string(p[3]);
}

void transforms(Verdict& v) {
  std::mt19937 rng(9);
  int bad_cast = 0, bad_arith = 0, bad_transpose = 0, bad_inverse = 0, bad_minmax = 0, out_of_range = 0;
  for (int i = 0; i < 1000; ++i) {
    auto from = random_type(rng), to = random_type(rng);
    auto info = random_info(rng, from);
    auto data = random_values(rng, from, info.dim.element_count(), -1e5, 1e5);
    auto out = transform_chunk(TypecastOp{to}, info, data, nullptr);
    bad_cast += payload(out) != oracle_store(to, oracle_load(from, data));
  }

  const char* names[] = {"add", "sub", "mul", "div"};
  std::uniform_real_distribution<double> operand(0.25, 9.0);
  for (int i = 0; i < 1000; ++i) {
    auto type = random_type(rng);
    auto info = random_info(rng, type);
    auto data = random_values(rng, type, info.dim.element_count());
    auto values = oracle_load(type, data);
    std::string option;
    for (int s = 0, n = 1 + rng() % 3; s < n; ++s) {
      int k = rng() % 4;
      double x = std::round(operand(rng) * 4) / 4;
      option += (option.empty() ? "" : ",") + std::string(names[k]) + ":" + std::to_string(x);
      for (auto& y : values) y = k == 0 ? y + x : k == 1 ? y - x : k == 2 ? y * x : y / x;
    }
    auto out = transform_chunk(parse_transform("arith", option), info, data, nullptr);
    bad_arith += payload(out) != oracle_store(type, values);
  }

  for (int i = 0; i < 1000; ++i) {
    auto info = random_info(rng, random_type(rng));
    auto data = random_chunk(rng, info.byte_size());
    std::array<std::uint8_t, 4> perm{0, 1, 2, 3}, inv{};
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::uint8_t k = 0; k < 4; ++k) inv[perm[k]] = k;
    auto fwd = parse_transform("transpose", perm_string(perm));
    auto out = transform_chunk(fwd, info, data, nullptr);

    const auto& d = info.dim;
    TensorDim od({d[perm[0]], d[perm[1]], d[perm[2]], d[perm[3]]});
    const std::size_t w = element_byte_width(info.type);
    std::vector<std::byte> expect(info.byte_size());
    std::uint32_t idx[4];
    for (idx[3] = 0; idx[3] < d[3]; ++idx[3])
      for (idx[2] = 0; idx[2] < d[2]; ++idx[2])
        for (idx[1] = 0; idx[1] < d[1]; ++idx[1])
          for (idx[0] = 0; idx[0] < d[0]; ++idx[0]) {
            auto o = offset_of(od, idx[perm[0]], idx[perm[1]], idx[perm[2]], idx[perm[3]]);
            std::memcpy(expect.data() + o * w,
                        data.bytes().data() + offset_of(d, idx[0], idx[1], idx[2], idx[3]) * w, w);
          }
    bad_transpose += payload(out) != expect;
    auto back = transform_chunk(parse_transform("transpose", perm_string(inv)), transform_info(fwd, info), out, nullptr);
    bad_inverse += payload(back) != payload(data);
  }

  for (int i = 0; i < 1000; ++i) {
    auto type = random_type(rng);
    auto info = random_info(rng, type);
    auto data = random_values(rng, type, info.dim.element_count());
    auto values = oracle_load(type, data);
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    std::vector<float> expect;
    for (double x : values) expect.push_back(hi > lo ? static_cast<float>((x - lo) / (hi - lo)) : 0.0f);
    auto got = unpack<float>(transform_chunk(parse_transform("normalize", "minmax"), info, data, nullptr));
    bad_minmax += got != expect;
    for (float x : got) out_of_range += !(x >= 0.0f && x <= 1.0f);
  }

  v.check(bad_cast == 0, std::to_string(bad_cast) + " typecast mismatches");
  v.check(bad_arith == 0, std::to_string(bad_arith) + " arith mismatches");
  v.check(bad_transpose == 0, std::to_string(bad_transpose) + " transpose mismatches");
  v.check(bad_inverse == 0, std::to_string(bad_inverse) + " transpose inverses differ");
  v.check(bad_minmax == 0, std::to_string(bad_minmax) + " minmax mismatches");
  v.check(out_of_range == 0, std::to_string(out_of_range) + " minmax values outside [0,1]");
  v.note("4x1000 frames");
}

// ------------------------------------------------------------------ 10

void parser_corpus(Verdict& v) {
  v.check(std::size(kGolden) >= 25, "golden corpus too small");
  v.check(std::size(kMalformed) >= 10, "malformed corpus too small");
  std::set<std::string> kinds;
  for (const auto& g : kGolden) {
    try {
      auto graph = PipelineGraph::parse(g.text);
      for (const auto& e : graph.elements) kinds.insert(e.kind);
      v.check(shape(graph) == g.shape, std::string("shape of ") + g.text);
      auto again = PipelineGraph::parse(graph.serialize());
      v.check(again == graph, std::string("round trip of ") + g.text);
    } catch (const Error& e) {
      v.check(false, std::string(g.text) + ": " + e.what());
    }
  }
  for (const auto& kind : ElementRegistry::instance().kinds()) v.check(kinds.count(kind) > 0, "no " + kind);
  for (const auto& m : kMalformed) {
    try {
      PipelineGraph::parse(m.text);
      v.check(false, std::string("parsed ") + m.text);
    } catch (const ParseError& e) {
      v.check(e.line() == m.line && e.column() == m.column &&
                  std::string(e.what()).find(m.message) != std::string::npos,
              std::string(m.text) + " -> " + e.what());
    }
  }
  v.note(std::to_string(std::size(kGolden)) + " golden, " + std::to_string(std::size(kMalformed)) +
         " malformed, " + std::to_string(kinds.size()) + " kinds");
}

// ------------------------------------------------------------------ 11

std::vector<std::vector<std::byte>> piped(const TensorsInfo& info, const std::vector<Chunk>& inputs,
                                          const std::string& filter) {
  StreamFile file;
  file.caps = StreamCaps::from_info(info);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Frame f;
    f.timestamp_ns = i;
    f.chunks = {inputs[i]};
    file.frames.push_back(f);
  }
  auto path = temp_path("accept_single.nns");
  write_stream_file(path, file);
  auto r = run("filesrc location=" + path.string() + " ! " + filter + " ! appsink name=a");
  std::filesystem::remove(path);
  std::vector<std::vector<std::byte>> out;
  for (const auto& f : r.frames("a")) out.push_back(payload(f.chunks.at(0)));
  return out;
}

DenseLayer random_layer(std::mt19937& rng, std::uint32_t in, std::uint32_t out, Activation act) {
  std::uniform_real_distribution<float> u(-1, 1);
  DenseLayer l{in, out, act, std::vector<float>(in * out), std::vector<float>(out)};
  for (auto& w : l.weights) w = u(rng);
  for (auto& b : l.bias) b = u(rng);
  return l;
}

void single_shot(Verdict& v) {
  std::mt19937 rng(11);
  auto model_path = temp_path("accept.tdn");
  ToyDenseModel{{random_layer(rng, 4, 6, Activation::kRelu), random_layer(rng, 6, 3, Activation::kSigmoid)}}
      .save(model_path);
  register_custom_function(
      "accept_scale",
      CustomFunction{TensorsInfo({TensorInfo{ElementType::kFloat32, TensorDim({5}), {}}}),
                     [](const TensorsInfo& in) { return in; },
                     [](const TensorsInfo&, std::span<const Chunk> c, CopyCounter*) {
                       auto x = unpack<float>(c[0]);
                       for (auto& y : x) y = y * -2.5f + 0.125f;
                       return std::vector<Chunk>{Chunk::adopt(pack(x))};
                     }});

  struct Backend {
    std::string framework, model;
    std::uint32_t width;
  };
  for (const auto& b : {Backend{"toy_dense", model_path.string(), 4}, Backend{"custom_fn", "accept_scale", 5}}) {
    TensorsInfo info({TensorInfo{ElementType::kFloat32, TensorDim({b.width}), {}}});
    std::vector<Chunk> inputs;
    for (int i = 0; i < 10; ++i) inputs.push_back(random_values(rng, ElementType::kFloat32, b.width, -3, 3));
    auto through = piped(info, inputs, "tensor_filter framework=" + b.framework + " model=" + b.model);
    auto shot = SingleShot::open(b.framework, b.model);
    int same = 0;
    for (std::size_t i = 0; i < inputs.size() && i < through.size(); ++i) {
      auto y = shot.invoke({inputs[i]});
      same += payload(y.at(0)) == through[i];
    }
    v.check(through.size() == 10 && same == 10, b.framework + " matched " + std::to_string(same) + "/10");
    v.note(b.framework + " " + std::to_string(same) + "/10");
  }
  std::filesystem::remove(model_path);
}

// ------------------------------------------------------------------ 12

const char* kSensors =
    "testsrc_tensor info=uint8:4 fill=random seed=1 framerate=30/1 num_frames=90 "
    "! tensor_transform mode=typecast option=float32 ! tensor_aggregator frames_in=2 frames_flush=1 "
    "! queue ! m.sink_0 "
    "testsrc_tensor info=int16:4 fill=random seed=2 framerate=20/1 num_frames=60 "
    "! tensor_transform mode=arith option=mul:0.5,typecast:float32 ! tensor_aggregator frames_in=2 frames_flush=1 "
    "! queue ! m.sink_1 "
    "testsrc_tensor info=float32:4 fill=random seed=3 framerate=10/1 num_frames=30 "
    "! tensor_transform mode=normalize option=minmax ! tensor_aggregator frames_in=2 frames_flush=1 "
    "! queue ! m.sink_2 "
    "tensor_mux name=m policy=fastest ! tensor_filter framework=custom_fn model=sum_tensors ! appsink name=out";

void determinism(Verdict& v) {
  auto first = run(kSensors).frames("out");
  auto second = run(kSensors).frames("out");
  v.check(!first.empty(), "no output");
  bool same = first.size() == second.size();
  for (std::size_t k = 0; same && k < first.size(); ++k) {
    same = first[k].timestamp_ns == second[k].timestamp_ns &&
           first[k].chunks.size() == second[k].chunks.size();
    for (std::size_t c = 0; same && c < first[k].chunks.size(); ++c) {
      same = payload(first[k].chunks[c]) == payload(second[k].chunks[c]);
    }
  }
  v.check(same, "runs differ");
  v.note(std::to_string(first.size()) + " and " + std::to_string(second.size()) + " frames");
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void(Verdict&)>>> criteria = {
      {1, zero_copy},       {2, table_rows},     {3, parallelism},    {4, sync_accounting},
      {5, merge_split},     {6, aggregator_law}, {7, recurrence},     {8, negotiation},
      {9, transforms},      {10, parser_corpus}, {11, single_shot},   {12, determinism},
  };
  int failed = 0;
  for (const auto& [n, body] : criteria) {
    Verdict v;
    auto t0 = std::chrono::steady_clock::now();
    try {
      body(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("threw: ") + e.what());
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.passed();
    std::printf("criterion %d: %s (%s; %.0f ms)\n", n, v.passed() ? "PASS" : "FAIL", v.detail().c_str(), ms);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
