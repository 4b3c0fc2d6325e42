#include <random>

#include "elements_internal.hpp"
#include "nnpipe/container.hpp"
#include "nnpipe/tensor_ops.hpp"

namespace nnpipe::elements {
namespace {

enum class Fill { kZeros, kCounter, kRandom, kRamp };

class TensorTestSource : public SourceElement {
 public:
  TensorTestSource(const std::string& name, TensorsInfo info, Fill fill, std::uint64_t seed,
                   double start, double step, std::uint64_t frames)
      : SourceElement("testsrc_tensor", name),
        info_(std::move(info)),
        fill_(fill),
        rng_(seed),
        start_(start),
        step_(step),
        total_(frames) {
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>&) override {
    return {StreamCaps::from_info(info_)};
  }

 protected:
  std::optional<Frame> next_frame() override {
    if (index_ >= total_) return std::nullopt;
    Frame f;
    f.timestamp_ns = source_time(info_.rate, index_);
    for (const auto& t : info_.tensors) {
      std::vector<std::byte> bytes(t.byte_size());
      switch (fill_) {
        case Fill::kZeros:
          break;
        case Fill::kCounter:
          for (auto& b : bytes) b = static_cast<std::byte>(counter_++ & 0xff);
          break;
        case Fill::kRandom:
          if (is_floating(t.type)) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t i = 0; i < t.dim.element_count(); ++i) {
              store_element(t.type, bytes, i, u(rng_));
            }
          } else {
            for (auto& b : bytes) b = static_cast<std::byte>(rng_() & 0xff);
          }
          break;
        case Fill::kRamp:
          for (std::size_t i = 0; i < t.dim.element_count(); ++i) {
            store_element(t.type, bytes, i, start_ + step_ * static_cast<double>(index_));
          }
          break;
      }
      f.chunks.push_back(Chunk::adopt(std::move(bytes)));
    }
    ++index_;
    return f;
  }

 private:
  TensorsInfo info_;
  Fill fill_;
  std::mt19937_64 rng_;
  double start_;
  double step_;
  std::uint64_t total_;
  std::uint64_t index_ = 0;
  std::uint64_t counter_ = 0;
};

enum class Pattern { kSolid, kGradient, kChecker, kRandom };

class RasterTestSource : public SourceElement {
 public:
  RasterTestSource(const std::string& name, Pattern pattern, std::uint32_t width,
                   std::uint32_t height, std::uint32_t channels, Framerate rate,
                   std::uint64_t frames)
      : SourceElement("testsrc_raster", name),
        pattern_(pattern),
        width_(width),
        height_(height),
        channels_(channels),
        rate_(rate),
        total_(frames) {
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>&) override {
    return {StreamCaps::raster(width_, height_, channels_, rate_)};
  }

 protected:
  std::optional<Frame> next_frame() override {
    if (index_ >= total_) return std::nullopt;
    std::vector<std::byte> px(static_cast<std::size_t>(width_) * height_ * channels_);
    std::size_t i = 0;
    for (std::uint32_t y = 0; y < height_; ++y) {
      for (std::uint32_t x = 0; x < width_; ++x) {
        for (std::uint32_t c = 0; c < channels_; ++c) {
          std::uint32_t v = 0;
          switch (pattern_) {
            case Pattern::kSolid: v = 128; break;
            case Pattern::kGradient: v = x + y + c * 85 + static_cast<std::uint32_t>(index_); break;
            case Pattern::kChecker: v = ((x / 8 + y / 8) % 2) ? 255 : 0; break;
            case Pattern::kRandom: v = static_cast<std::uint32_t>(rng_()); break;
          }
          px[i++] = static_cast<std::byte>(v & 0xff);
        }
      }
    }
    Frame f;
    f.timestamp_ns = source_time(rate_, index_++);
    f.chunks.push_back(Chunk::adopt(std::move(px)));
    return f;
  }

 private:
  Pattern pattern_;
  std::uint32_t width_, height_, channels_;
  Framerate rate_;
  std::uint64_t total_;
  std::uint64_t index_ = 0;
  std::mt19937 rng_{7};
};

class TextTestSource : public SourceElement {
 public:
  TextTestSource(const std::string& name, std::string text, Framerate rate, std::uint64_t frames)
      : SourceElement("testsrc_text", name), text_(std::move(text)), rate_(rate), total_(frames) {
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>&) override {
    MediaCaps caps;
    caps.kind = MediaKind::kText;
    caps.rate = rate_;
    return {StreamCaps(caps)};
  }

 protected:
  std::optional<Frame> next_frame() override {
    if (index_ >= total_) return std::nullopt;
    Frame f;
    f.timestamp_ns = source_time(rate_, index_++);
    auto* p = reinterpret_cast<const std::byte*>(text_.data());
    f.chunks.push_back(Chunk::adopt(std::vector<std::byte>(p, p + text_.size())));
    return f;
  }

 private:
  std::string text_;
  Framerate rate_;
  std::uint64_t total_;
  std::uint64_t index_ = 0;
};

class FileSource : public SourceElement {
 public:
  FileSource(const std::string& name, std::string location)
      : SourceElement("filesrc", name), location_(std::move(location)) {
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>&) override {
    if (!loaded_) {
      try {
        file_ = read_stream_file(location_);
      } catch (const std::exception& e) {
        throw ValidationError("filesrc '" + name() + "': " + e.what());
      }
      loaded_ = true;
    }
    return {file_.caps};
  }

 protected:
  std::optional<Frame> next_frame() override {
    if (index_ >= file_.frames.size()) return std::nullopt;
    return file_.frames[index_++];
  }

 private:
  std::string location_;
  StreamFile file_;
  bool loaded_ = false;
  std::size_t index_ = 0;
};

// Emits a zero-filled bootstrap frame, then one frame per reposink deposit.
class RepoSource : public SourceElement {
 public:
  RepoSource(const std::string& name, std::string slot, TensorsInfo info)
      : SourceElement("tensor_reposrc", name), slot_name_(std::move(slot)), info_(std::move(info)) {
    add_pad(PadDirection::kSrc, "src", StreamCaps::any());
  }

  std::vector<StreamCaps> configure(const std::vector<StreamCaps>&) override {
    slot_ = context().repos.bind_source(slot_name_, name());
    return {StreamCaps::from_info(info_)};
  }

  bool idle() const override { return waiting_.load() && slot_ && !slot_->full(); }

 protected:
  std::optional<Frame> next_frame() override {
    if (!bootstrapped_) {
      bootstrapped_ = true;
      Frame f;
      for (const auto& t : info_.tensors) {
        f.chunks.push_back(Chunk::adopt(std::vector<std::byte>(t.byte_size())));
      }
      return f;
    }
    waiting_ = true;
    struct Reset {
      std::atomic<bool>& flag;
      ~Reset() { flag = false; }
    } reset{waiting_};
    return slot_->take();
  }
  void interrupt() override {
    if (slot_) slot_->interrupt();
  }
  void resume_after_interrupt() override {
    if (slot_) slot_->resume();
  }
  bool pace() const override { return false; }

 private:
  std::string slot_name_;
  TensorsInfo info_;
  std::shared_ptr<RepoSlot> slot_;
  bool bootstrapped_ = false;
  std::atomic<bool> waiting_{false};
};

}  // namespace

std::unique_ptr<Element> make_testsrc_tensor(const std::string& name, const PropertyReader& p) {
  TensorsInfo info;
  try {
    info = TensorsInfo::parse_compact(p.required("info"));
  } catch (const CapsError& e) {
    p.fail("info", e.what());
  }
  info.rate = p.rate("framerate");
  auto fill_name = p.string("fill");
  Fill fill;
  if (fill_name == "zeros") {
    fill = Fill::kZeros;
  } else if (fill_name == "counter") {
    fill = Fill::kCounter;
  } else if (fill_name == "random") {
    fill = Fill::kRandom;
  } else if (fill_name == "ramp") {
    fill = Fill::kRamp;
  } else {
    p.fail("fill", "expected zeros, counter, random or ramp");
  }
  return std::make_unique<TensorTestSource>(name, info, fill, p.uint("seed"), p.real("start"),
                                            p.real("step"), p.uint("num_frames"));
}

std::unique_ptr<Element> make_testsrc_raster(const std::string& name, const PropertyReader& p) {
  auto pattern_name = p.string("pattern");
  Pattern pattern;
  if (pattern_name == "solid") {
    pattern = Pattern::kSolid;
  } else if (pattern_name == "gradient") {
    pattern = Pattern::kGradient;
  } else if (pattern_name == "checker") {
    pattern = Pattern::kChecker;
  } else if (pattern_name == "random") {
    pattern = Pattern::kRandom;
  } else {
    p.fail("pattern", "expected solid, gradient, checker or random");
  }
  auto format = p.string("format");
  std::uint32_t channels = 0;
  if (format == "RGB") {
    channels = 3;
  } else if (format == "GRAY8") {
    channels = 1;
  } else {
    p.fail("format", "expected RGB or GRAY8");
  }
  auto width = p.uint("width");
  auto height = p.uint("height");
  if (width == 0 || width > kMaxDimension) p.fail("width", "outside [1, 65535]");
  if (height == 0 || height > kMaxDimension) p.fail("height", "outside [1, 65535]");
  return std::make_unique<RasterTestSource>(name, pattern, static_cast<std::uint32_t>(width),
                                            static_cast<std::uint32_t>(height), channels,
                                            p.rate("framerate"), p.uint("num_frames"));
}

std::unique_ptr<Element> make_testsrc_text(const std::string& name, const PropertyReader& p) {
  return std::make_unique<TextTestSource>(name, p.string("text"), p.rate("framerate"),
                                          p.uint("num_frames"));
}

std::unique_ptr<Element> make_filesrc(const std::string& name, const PropertyReader& p) {
  return std::make_unique<FileSource>(name, p.required("location"));
}

std::unique_ptr<Element> make_reposrc(const std::string& name, const PropertyReader& p) {
  TensorsInfo info;
  try {
    info = TensorsInfo::parse_compact(p.required("info"));
  } catch (const CapsError& e) {
    p.fail("info", e.what());
  }
  info.rate = p.rate("framerate");
  return std::make_unique<RepoSource>(name, p.required("slot"), info);
}

}  // namespace nnpipe::elements
