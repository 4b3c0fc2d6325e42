#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnpipe/error.hpp"

#ifndef NNPIPE_MAX_TENSORS
#define NNPIPE_MAX_TENSORS 16
#endif

namespace nnpipe {

// Maximum number of memory chunks (tensors) carried by one frame.
inline constexpr std::size_t kMaxTensors = NNPIPE_MAX_TENSORS;
inline constexpr std::size_t kRankLimit = 4;
inline constexpr std::uint32_t kMaxDimension = 65535;

enum class ElementType : std::uint8_t {
  kUint8,
  kInt8,
  kUint16,
  kInt16,
  kUint32,
  kInt32,
  kUint64,
  kInt64,
  kFloat32,
  kFloat64,
};

inline constexpr std::array<ElementType, 10> kAllElementTypes = {
    ElementType::kUint8,  ElementType::kInt8,    ElementType::kUint16,
    ElementType::kInt16,  ElementType::kUint32,  ElementType::kInt32,
    ElementType::kUint64, ElementType::kInt64,   ElementType::kFloat32,
    ElementType::kFloat64};

std::size_t element_byte_width(ElementType type);
std::string_view to_string(ElementType type);
ElementType parse_element_type(std::string_view text);
bool is_floating(ElementType type);

// Four dimension components, d0 innermost (contiguous). The explicit rank is
// advisory metadata only: it never takes part in equality.
class TensorDim {
 public:
  TensorDim() = default;
  // 1..4 components; missing trailing components become 1.
  explicit TensorDim(std::span<const std::uint32_t> components,
                     std::optional<std::uint8_t> explicit_rank = std::nullopt);
  TensorDim(std::initializer_list<std::uint32_t> components,
            std::optional<std::uint8_t> explicit_rank = std::nullopt);

  // "3:640:480:1" or a shorter prefix such as "640:480" (sets explicit rank).
  static TensorDim parse(std::string_view text);

  std::uint32_t operator[](std::size_t axis) const { return d_[axis]; }
  const std::array<std::uint32_t, kRankLimit>& components() const { return d_; }
  std::optional<std::uint8_t> explicit_rank() const { return rank_; }
  TensorDim with_rank(std::optional<std::uint8_t> rank) const;
  TensorDim with_axis(std::size_t axis, std::uint32_t value) const;

  std::uint64_t element_count() const;
  // Highest axis whose extent is not 1, plus one (at least 1).
  std::size_t effective_rank() const;

  // Renders explicit_rank components when set, otherwise all four.
  std::string to_string() const;

  friend bool operator==(const TensorDim& a, const TensorDim& b) {
    return a.d_ == b.d_;
  }

 private:
  std::array<std::uint32_t, kRankLimit> d_{1, 1, 1, 1};
  std::optional<std::uint8_t> rank_;
};

// Reduced fraction; 0/1 means the rate is unconstrained.
class Framerate {
 public:
  constexpr Framerate() = default;
  Framerate(std::int64_t numerator, std::int64_t denominator);

  static Framerate parse(std::string_view text);

  std::int32_t numerator() const { return num_; }
  std::int32_t denominator() const { return den_; }
  bool unconstrained() const { return num_ == 0; }
  // Timestamp of frame `index` in nanoseconds, floor(index * den * 1e9 / num).
  std::uint64_t frame_time_ns(std::uint64_t index) const;
  std::uint64_t period_ns() const { return frame_time_ns(1); }
  double as_double() const;
  std::string to_string() const;

  friend bool operator==(const Framerate&, const Framerate&) = default;
  friend bool operator<(const Framerate& a, const Framerate& b);

 private:
  std::int32_t num_ = 0;
  std::int32_t den_ = 1;
};

struct TensorInfo {
  ElementType type = ElementType::kUint8;
  TensorDim dim;
  std::string name;

  std::uint64_t byte_size() const;
  friend bool operator==(const TensorInfo& a, const TensorInfo& b) {
    return a.type == b.type && a.dim == b.dim;
  }
};

struct TensorsInfo {
  std::vector<TensorInfo> tensors;
  Framerate rate;

  TensorsInfo() = default;
  TensorsInfo(std::vector<TensorInfo> t, Framerate r = {});

  std::size_t count() const { return tensors.size(); }
  // Throws CapsError when the count is outside [1, kMaxTensors].
  void validate() const;

  // "uint8:3:4:1:1,float32:1" (used by element properties).
  static TensorsInfo parse_compact(std::string_view text);
  std::string to_compact() const;

  friend bool operator==(const TensorsInfo&, const TensorsInfo&) = default;
};

// Sum of all tensor sizes; throws Error("size overflow") past 64 bits.
std::uint64_t frame_byte_size(const TensorsInfo& info);

// Counts payload materialisations that duplicate bytes.
class CopyCounter {
 public:
  void record(std::size_t bytes) {
    copies_.fetch_add(1, std::memory_order_relaxed);
    bytes_.fetch_add(bytes, std::memory_order_relaxed);
  }
  std::uint64_t copies() const { return copies_.load(std::memory_order_relaxed); }
  std::uint64_t bytes() const { return bytes_.load(std::memory_order_relaxed); }
  void reset() {
    copies_ = 0;
    bytes_ = 0;
  }

 private:
  std::atomic<std::uint64_t> copies_{0};
  std::atomic<std::uint64_t> bytes_{0};
};

// Immutable view over shared payload storage. Copying a Chunk shares bytes.
class Chunk {
 public:
  Chunk() = default;

  // Takes ownership; no bytes are duplicated.
  static Chunk adopt(std::vector<std::byte> bytes);
  // Duplicates `bytes` and records one copy when a counter is given.
  static Chunk copy_of(std::span<const std::byte> bytes, CopyCounter* counter);

  std::span<const std::byte> bytes() const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Zero-copy sub-range.
  Chunk slice(std::size_t offset, std::size_t length) const;
  bool shares_storage_with(const Chunk& other) const {
    return storage_ && storage_ == other.storage_;
  }

  template <typename T>
  const T* data_as() const {
    return reinterpret_cast<const T*>(bytes().data());
  }

  friend bool operator==(const Chunk& a, const Chunk& b);

 private:
  std::shared_ptr<const std::vector<std::byte>> storage_;
  std::size_t offset_ = 0;
  std::size_t size_ = 0;
};

struct Frame {
  std::uint64_t timestamp_ns = 0;
  std::uint64_t seq = 0;
  std::vector<Chunk> chunks;
  // Steady-clock time at which the originating source emitted the frame.
  std::int64_t origin_wall_ns = 0;

  // Content equality (timestamps and chunk bytes; seq is pad-local).
  bool same_content(const Frame& other) const;
};

// Wraps payloads without copying. Throws Error on count or size mismatch.
Frame make_frame(const TensorsInfo& info, std::uint64_t timestamp_ns,
                 std::vector<std::vector<std::byte>> payloads);
Frame make_frame(const TensorsInfo& info, std::uint64_t timestamp_ns,
                 std::vector<Chunk> chunks);

// Checks chunk count and sizes against info.
void check_frame(const TensorsInfo& info, const Frame& frame);

}  // namespace nnpipe
