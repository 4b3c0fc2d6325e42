#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nnpipe/tensor.hpp"

namespace nnpipe {

// One tensor entry of a tensor caps; unset optionals are wildcards.
struct TensorSpec {
  std::optional<ElementType> type;
  std::array<std::optional<std::uint32_t>, kRankLimit> dim{1u, 1u, 1u, 1u};
  std::optional<std::uint8_t> rank;

  static TensorSpec any();
  static TensorSpec from(const TensorInfo& info);
  bool fixed() const;
};

struct TensorCaps {
  // other/tensors when true, other/tensor otherwise.
  bool multi = false;
  std::optional<std::size_t> num_tensors;
  // Empty while num_tensors is a wildcard, num_tensors entries otherwise.
  std::vector<TensorSpec> tensors;
  std::optional<Framerate> rate;
};

enum class MediaKind : std::uint8_t { kRaster, kText, kBinary };

struct MediaCaps {
  MediaKind kind = MediaKind::kRaster;
  std::optional<std::uint32_t> width;
  std::optional<std::uint32_t> height;
  std::optional<std::uint32_t> channels;  // 1 (GRAY8) or 3 (RGB)
  std::optional<Framerate> rate;
};

struct AnyCaps {};

class StreamCaps {
 public:
  using Variant = std::variant<AnyCaps, TensorCaps, MediaCaps>;

  StreamCaps() = default;
  StreamCaps(AnyCaps c) : value_(c) {}
  StreamCaps(TensorCaps c) : value_(std::move(c)) {}
  StreamCaps(MediaCaps c) : value_(std::move(c)) {}

  static StreamCaps any() { return StreamCaps(AnyCaps{}); }
  // Any tensor stream (every field wildcard).
  static StreamCaps any_tensor();
  static StreamCaps from_info(const TensorsInfo& info);
  static StreamCaps raster(std::uint32_t width, std::uint32_t height,
                           std::uint32_t channels, Framerate rate);
  static StreamCaps parse(std::string_view text);

  bool is_any() const { return std::holds_alternative<AnyCaps>(value_); }
  bool is_tensor() const { return std::holds_alternative<TensorCaps>(value_); }
  bool is_media() const { return std::holds_alternative<MediaCaps>(value_); }
  const TensorCaps& tensor() const { return std::get<TensorCaps>(value_); }
  const MediaCaps& media() const { return std::get<MediaCaps>(value_); }
  const Variant& value() const { return value_; }

  bool fixed() const;
  // Requires fixed tensor caps; throws CapsError otherwise.
  TensorsInfo to_info() const;
  std::optional<Framerate> rate() const;

  std::string to_string() const;

 private:
  Variant value_;
};

// Pads trailing axes with 1; explicit rank is kept as metadata.
TensorDim canonical_dim(const TensorDim& dim);

// Equality of fixed caps after canonicalisation; explicit rank is ignored.
bool caps_equal(const StreamCaps& a, const StreamCaps& b);

// Field-wise intersection. Wildcards take the other side's value, 0/1 rates
// act as unconstrained, AnyCaps is the identity. nullopt when incompatible.
std::optional<StreamCaps> caps_intersect(const StreamCaps& a, const StreamCaps& b);

// Fills remaining wildcards: num_tensors 1, type float32, dims 1, rate 0/1.
StreamCaps fixate(const StreamCaps& caps);

// Intersects and fixates; throws NegotiationError naming both caps.
StreamCaps negotiate_link(const StreamCaps& src, const StreamCaps& sink);

}  // namespace nnpipe
