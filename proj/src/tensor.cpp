#include "nnpipe/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <numeric>

#include "util.hpp"

namespace nnpipe {

std::size_t element_byte_width(ElementType type) {
  switch (type) {
    case ElementType::kUint8:
    case ElementType::kInt8:
      return 1;
    case ElementType::kUint16:
    case ElementType::kInt16:
      return 2;
    case ElementType::kUint32:
    case ElementType::kInt32:
    case ElementType::kFloat32:
      return 4;
    case ElementType::kUint64:
    case ElementType::kInt64:
    case ElementType::kFloat64:
      return 8;
  }
  throw Error("invalid element type");
}

std::string_view to_string(ElementType type) {
  switch (type) {
    case ElementType::kUint8: return "uint8";
    case ElementType::kInt8: return "int8";
    case ElementType::kUint16: return "uint16";
    case ElementType::kInt16: return "int16";
    case ElementType::kUint32: return "uint32";
    case ElementType::kInt32: return "int32";
    case ElementType::kUint64: return "uint64";
    case ElementType::kInt64: return "int64";
    case ElementType::kFloat32: return "float32";
    case ElementType::kFloat64: return "float64";
  }
  throw Error("invalid element type");
}

ElementType parse_element_type(std::string_view text) {
  for (ElementType t : kAllElementTypes) {
    if (to_string(t) == text) return t;
  }
  throw CapsError("unknown element type '" + std::string(text) + "'");
}

bool is_floating(ElementType type) {
  return type == ElementType::kFloat32 || type == ElementType::kFloat64;
}

// ---------------------------------------------------------------- TensorDim

TensorDim::TensorDim(std::span<const std::uint32_t> components,
                     std::optional<std::uint8_t> explicit_rank) {
  if (components.empty() || components.size() > kRankLimit) {
    throw CapsError("dimension needs 1 to 4 components, got " +
                    std::to_string(components.size()));
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i] < 1 || components[i] > kMaxDimension) {
      throw CapsError("dimension component " + std::to_string(i) + " = " +
                      std::to_string(components[i]) + " outside [1, 65535]");
    }
    d_[i] = components[i];
  }
  if (explicit_rank) {
    if (*explicit_rank < 1 || *explicit_rank > kRankLimit) {
      throw CapsError("rank must be in [1, 4]");
    }
    for (std::size_t i = *explicit_rank; i < kRankLimit; ++i) {
      if (d_[i] != 1) {
        throw CapsError("dimension " + to_string() + " exceeds rank " +
                        std::to_string(*explicit_rank));
      }
    }
  }
  rank_ = explicit_rank;
}

TensorDim::TensorDim(std::initializer_list<std::uint32_t> components,
                     std::optional<std::uint8_t> explicit_rank)
    : TensorDim(std::span<const std::uint32_t>(components.begin(), components.size()),
                explicit_rank) {}

TensorDim TensorDim::parse(std::string_view text) {
  std::vector<std::uint32_t> parts;
  for (std::string_view field : detail::split(text, ':')) {
    std::uint64_t value = 0;
    if (!detail::parse_uint(field, value) || value > 0xffffffffull) {
      throw CapsError("bad dimension '" + std::string(text) + "'");
    }
    parts.push_back(static_cast<std::uint32_t>(value));
  }
  return TensorDim(parts, static_cast<std::uint8_t>(parts.size()));
}

TensorDim TensorDim::with_rank(std::optional<std::uint8_t> rank) const {
  return TensorDim(d_, rank);
}

TensorDim TensorDim::with_axis(std::size_t axis, std::uint32_t value) const {
  auto d = d_;
  d.at(axis) = value;
  std::optional<std::uint8_t> rank = rank_;
  if (rank && axis >= *rank) rank = static_cast<std::uint8_t>(axis + 1);
  return TensorDim(d, rank);
}

std::uint64_t TensorDim::element_count() const {
  std::uint64_t n = 1;
  for (auto c : d_) n *= c;
  return n;
}

std::size_t TensorDim::effective_rank() const {
  std::size_t r = kRankLimit;
  while (r > 1 && d_[r - 1] == 1) --r;
  return r;
}

std::string TensorDim::to_string() const {
  std::size_t shown = rank_ ? *rank_ : kRankLimit;
  std::string out;
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += ':';
    out += std::to_string(d_[i]);
  }
  return out;
}

// ---------------------------------------------------------------- Framerate

Framerate::Framerate(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) throw CapsError("framerate denominator must be positive");
  if (numerator < 0 || numerator > 2147483647) {
    throw CapsError("framerate numerator outside [0, 2147483647]");
  }
  if (numerator == 0) {
    num_ = 0;
    den_ = 1;
    return;
  }
  std::int64_t g = std::gcd(numerator, denominator);
  numerator /= g;
  denominator /= g;
  if (denominator > 2147483647) throw CapsError("framerate denominator too large");
  num_ = static_cast<std::int32_t>(numerator);
  den_ = static_cast<std::int32_t>(denominator);
}

Framerate Framerate::parse(std::string_view text) {
  auto slash = text.find('/');
  std::int64_t n = 0;
  std::int64_t d = 1;
  bool ok = false;
  if (slash == std::string_view::npos) {
    ok = detail::parse_int(text, n);
  } else {
    ok = detail::parse_int(text.substr(0, slash), n) &&
         detail::parse_int(text.substr(slash + 1), d);
  }
  if (!ok) throw CapsError("bad framerate '" + std::string(text) + "'");
  return Framerate(n, d);
}

std::uint64_t Framerate::frame_time_ns(std::uint64_t index) const {
  if (num_ == 0) return 0;
  unsigned __int128 t = static_cast<unsigned __int128>(index) *
                        static_cast<unsigned __int128>(den_) * 1000000000u;
  return static_cast<std::uint64_t>(t / static_cast<unsigned>(num_));
}

double Framerate::as_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Framerate::to_string() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

bool operator<(const Framerate& a, const Framerate& b) {
  return static_cast<std::int64_t>(a.num_) * b.den_ <
         static_cast<std::int64_t>(b.num_) * a.den_;
}

// ---------------------------------------------------------------- TensorsInfo

std::uint64_t TensorInfo::byte_size() const {
  return element_byte_width(type) * dim.element_count();
}

TensorsInfo::TensorsInfo(std::vector<TensorInfo> t, Framerate r)
    : tensors(std::move(t)), rate(r) {}

void TensorsInfo::validate() const {
  if (tensors.empty() || tensors.size() > kMaxTensors) {
    throw CapsError("tensor count " + std::to_string(tensors.size()) +
                    " outside [1, " + std::to_string(kMaxTensors) + "]");
  }
}

TensorsInfo TensorsInfo::parse_compact(std::string_view text) {
  TensorsInfo info;
  for (std::string_view item : detail::split(text, ',')) {
    auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw CapsError("tensor info '" + std::string(item) + "' needs type:dim");
    }
    TensorInfo t;
    t.type = parse_element_type(item.substr(0, colon));
    t.dim = TensorDim::parse(item.substr(colon + 1));
    info.tensors.push_back(std::move(t));
  }
  info.validate();
  return info;
}

std::string TensorsInfo::to_compact() const {
  std::string out;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (i) out += ',';
    out += std::string(nnpipe::to_string(tensors[i].type)) + ":" +
           tensors[i].dim.to_string();
  }
  return out;
}

std::uint64_t frame_byte_size(const TensorsInfo& info) {
  std::uint64_t total = 0;
  for (const auto& t : info.tensors) {
    std::uint64_t size = element_byte_width(t.type);
    for (auto c : t.dim.components()) {
      if (__builtin_mul_overflow(size, static_cast<std::uint64_t>(c), &size)) {
        throw Error("size overflow");
      }
    }
    if (__builtin_add_overflow(total, size, &total)) throw Error("size overflow");
  }
  return total;
}

// ---------------------------------------------------------------- Chunk/Frame

Chunk Chunk::adopt(std::vector<std::byte> bytes) {
  Chunk c;
  c.size_ = bytes.size();
  c.storage_ = std::make_shared<const std::vector<std::byte>>(std::move(bytes));
  return c;
}

Chunk Chunk::copy_of(std::span<const std::byte> bytes, CopyCounter* counter) {
  if (counter) counter->record(bytes.size());
  return adopt(std::vector<std::byte>(bytes.begin(), bytes.end()));
}

std::span<const std::byte> Chunk::bytes() const {
  if (!storage_) return {};
  return std::span<const std::byte>(storage_->data() + offset_, size_);
}

Chunk Chunk::slice(std::size_t offset, std::size_t length) const {
  if (offset + length > size_) throw Error("chunk slice out of range");
  Chunk c = *this;
  c.offset_ = offset_ + offset;
  c.size_ = length;
  return c;
}

bool operator==(const Chunk& a, const Chunk& b) {
  auto x = a.bytes();
  auto y = b.bytes();
  return x.size() == y.size() &&
         (x.empty() || std::memcmp(x.data(), y.data(), x.size()) == 0);
}

bool Frame::same_content(const Frame& other) const {
  return timestamp_ns == other.timestamp_ns && chunks == other.chunks;
}

void check_frame(const TensorsInfo& info, const Frame& frame) {
  if (frame.chunks.size() != info.tensors.size()) {
    throw Error("frame carries " + std::to_string(frame.chunks.size()) +
                " chunks, caps declare " + std::to_string(info.tensors.size()));
  }
  for (std::size_t i = 0; i < frame.chunks.size(); ++i) {
    if (frame.chunks[i].size() != info.tensors[i].byte_size()) {
      throw Error("payload size mismatch for tensor " + std::to_string(i) +
                  ": got " + std::to_string(frame.chunks[i].size()) +
                  " bytes, expected " +
                  std::to_string(info.tensors[i].byte_size()));
    }
  }
}

Frame make_frame(const TensorsInfo& info, std::uint64_t timestamp_ns,
                 std::vector<Chunk> chunks) {
  info.validate();
  Frame frame;
  frame.timestamp_ns = timestamp_ns;
  frame.chunks = std::move(chunks);
  check_frame(info, frame);
  return frame;
}

Frame make_frame(const TensorsInfo& info, std::uint64_t timestamp_ns,
                 std::vector<std::vector<std::byte>> payloads) {
  std::vector<Chunk> chunks;
  chunks.reserve(payloads.size());
  for (auto& p : payloads) chunks.push_back(Chunk::adopt(std::move(p)));
  return make_frame(info, timestamp_ns, std::move(chunks));
}

}  // namespace nnpipe
