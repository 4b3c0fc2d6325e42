#include "nnpipe/tensor_ops.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "util.hpp"

namespace nnpipe {
namespace {

template <typename T>
T read_as(std::span<const std::byte> data, std::size_t index) {
  T v;
  std::memcpy(&v, data.data() + index * sizeof(T), sizeof(T));
  return v;
}

template <typename T>
void write_as(std::span<std::byte> data, std::size_t index, T v) {
  std::memcpy(data.data() + index * sizeof(T), &v, sizeof(T));
}

template <typename T>
T clamp_cast(double value) {
  if (std::isnan(value)) return T{0};
  if constexpr (std::is_floating_point_v<T>) {
    constexpr double hi = static_cast<double>(std::numeric_limits<T>::max());
    return static_cast<T>(std::clamp(value, -hi, hi));
  } else {
    // Compare against the exclusive upper bound 2^bits so that values which
    // round to max+1 in float64 saturate instead of overflowing.
    constexpr double lo = static_cast<double>(std::numeric_limits<T>::min());
    constexpr double hi_excl = static_cast<double>(std::numeric_limits<T>::max()) + 1.0;
    if (value <= lo) return std::numeric_limits<T>::min();
    if (value >= hi_excl) return std::numeric_limits<T>::max();
    return static_cast<T>(std::trunc(value));
  }
}

std::array<std::uint32_t, 4> unflatten(const TensorDim& dim, std::size_t flat) {
  std::array<std::uint32_t, 4> idx{};
  for (std::size_t k = 0; k < 4; ++k) {
    idx[k] = static_cast<std::uint32_t>(flat % dim[k]);
    flat /= dim[k];
  }
  return idx;
}

std::size_t product(const TensorDim& dim, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t k = from; k < to; ++k) p *= dim[k];
  return p;
}

}  // namespace

double load_element(ElementType type, std::span<const std::byte> data, std::size_t index) {
  switch (type) {
    case ElementType::kUint8: return read_as<std::uint8_t>(data, index);
    case ElementType::kInt8: return read_as<std::int8_t>(data, index);
    case ElementType::kUint16: return read_as<std::uint16_t>(data, index);
    case ElementType::kInt16: return read_as<std::int16_t>(data, index);
    case ElementType::kUint32: return read_as<std::uint32_t>(data, index);
    case ElementType::kInt32: return read_as<std::int32_t>(data, index);
    case ElementType::kUint64: return static_cast<double>(read_as<std::uint64_t>(data, index));
    case ElementType::kInt64: return static_cast<double>(read_as<std::int64_t>(data, index));
    case ElementType::kFloat32: return read_as<float>(data, index);
    case ElementType::kFloat64: return read_as<double>(data, index);
  }
  throw Error("invalid element type");
}

void store_element(ElementType type, std::span<std::byte> data, std::size_t index,
                   double value) {
  switch (type) {
    case ElementType::kUint8: return write_as(data, index, clamp_cast<std::uint8_t>(value));
    case ElementType::kInt8: return write_as(data, index, clamp_cast<std::int8_t>(value));
    case ElementType::kUint16: return write_as(data, index, clamp_cast<std::uint16_t>(value));
    case ElementType::kInt16: return write_as(data, index, clamp_cast<std::int16_t>(value));
    case ElementType::kUint32: return write_as(data, index, clamp_cast<std::uint32_t>(value));
    case ElementType::kInt32: return write_as(data, index, clamp_cast<std::int32_t>(value));
    case ElementType::kUint64: return write_as(data, index, clamp_cast<std::uint64_t>(value));
    case ElementType::kInt64: return write_as(data, index, clamp_cast<std::int64_t>(value));
    case ElementType::kFloat32: return write_as(data, index, clamp_cast<float>(value));
    case ElementType::kFloat64: return write_as(data, index, value);
  }
  throw Error("invalid element type");
}

double cast_value(ElementType type, double value) {
  std::array<std::byte, 8> buf{};
  store_element(type, buf, 0, value);
  return load_element(type, buf, 0);
}

std::vector<double> load_all(ElementType type, std::span<const std::byte> data) {
  std::size_t n = data.size() / element_byte_width(type);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = load_element(type, data, i);
  return out;
}

std::vector<std::byte> store_all(ElementType type, std::span<const double> values) {
  std::vector<std::byte> out(values.size() * element_byte_width(type));
  for (std::size_t i = 0; i < values.size(); ++i) store_element(type, out, i, values[i]);
  return out;
}

// ------------------------------------------------------------------ transform

TransformOp parse_transform(std::string_view mode, std::string_view option) {
  if (mode == "typecast") return TypecastOp{parse_element_type(option)};
  if (mode == "arith" || mode == "arithmetic") {
    ArithOp op;
    auto items = detail::split(option, ',');
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto colon = items[i].find(':');
      if (colon == std::string_view::npos) {
        throw Error("arith step '" + std::string(items[i]) + "' needs op:value");
      }
      auto name = items[i].substr(0, colon);
      auto arg = items[i].substr(colon + 1);
      if (name == "typecast") {
        if (i + 1 != items.size()) throw Error("typecast must end an arith chain");
        op.out_type = parse_element_type(arg);
        continue;
      }
      double v = 0;
      if (!detail::parse_double(arg, v)) {
        throw Error("bad arith operand '" + std::string(arg) + "'");
      }
      ArithKind kind;
      if (name == "add") {
        kind = ArithKind::kAdd;
      } else if (name == "sub") {
        kind = ArithKind::kSub;
      } else if (name == "mul") {
        kind = ArithKind::kMul;
      } else if (name == "div") {
        if (v == 0) throw Error("arith div by zero");
        kind = ArithKind::kDiv;
      } else {
        throw Error("unknown arith op '" + std::string(name) + "'");
      }
      op.steps.push_back({kind, v});
    }
    return op;
  }
  if (mode == "transpose") {
    auto items = detail::split(option, ':');
    if (items.size() != 4) throw Error("transpose needs a permutation of 4 axes");
    TransposeOp op;
    std::array<bool, 4> seen{};
    for (std::size_t i = 0; i < 4; ++i) {
      std::uint64_t v = 0;
      if (!detail::parse_uint(items[i], v) || v > 3 || seen[v]) {
        throw Error("transpose option '" + std::string(option) +
                    "' is not a permutation of 0:1:2:3");
      }
      seen[v] = true;
      op.perm[i] = static_cast<std::uint8_t>(v);
    }
    return op;
  }
  if (mode == "normalize") {
    if (option == "minmax") return NormalizeOp{NormalizeMode::kMinMax};
    if (option == "standardize") return NormalizeOp{NormalizeMode::kStandardize};
    throw Error("unknown normalize mode '" + std::string(option) + "'");
  }
  throw Error("unknown transform mode '" + std::string(mode) + "'");
}

TensorInfo transform_info(const TransformOp& op, const TensorInfo& in) {
  TensorInfo out = in;
  if (auto* t = std::get_if<TypecastOp>(&op)) {
    out.type = t->to;
  } else if (auto* a = std::get_if<ArithOp>(&op)) {
    if (a->out_type) out.type = *a->out_type;
  } else if (auto* p = std::get_if<TransposeOp>(&op)) {
    std::array<std::uint32_t, 4> d{};
    for (std::size_t k = 0; k < 4; ++k) d[k] = in.dim[p->perm[k]];
    out.dim = TensorDim(d);
  } else {
    out.type = ElementType::kFloat32;
  }
  return out;
}

Chunk transform_chunk(const TransformOp& op, const TensorInfo& in, const Chunk& data,
                      CopyCounter* copies) {
  const TensorInfo out_info = transform_info(op, in);
  const std::size_t n = in.dim.element_count();
  std::vector<std::byte> out(out_info.byte_size());
  auto src = data.bytes();

  if (auto* p = std::get_if<TransposeOp>(&op)) {
    const std::size_t width = element_byte_width(in.type);
    for (std::size_t flat = 0; flat < n; ++flat) {
      auto oidx = unflatten(out_info.dim, flat);
      std::array<std::uint32_t, 4> iidx{};
      for (std::size_t k = 0; k < 4; ++k) iidx[p->perm[k]] = oidx[k];
      std::memcpy(out.data() + flat * width, src.data() + flat_index(in.dim, iidx) * width,
                  width);
    }
    if (copies) copies->record(out.size());
    return Chunk::adopt(std::move(out));
  }

  if (auto* t = std::get_if<TypecastOp>(&op)) {
    for (std::size_t i = 0; i < n; ++i) {
      store_element(t->to, out, i, load_element(in.type, src, i));
    }
  } else if (auto* a = std::get_if<ArithOp>(&op)) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = load_element(in.type, src, i);
      for (const auto& step : a->steps) {
        switch (step.kind) {
          case ArithKind::kAdd: v += step.operand; break;
          case ArithKind::kSub: v -= step.operand; break;
          case ArithKind::kMul: v *= step.operand; break;
          case ArithKind::kDiv: v /= step.operand; break;
        }
      }
      store_element(out_info.type, out, i, v);
    }
  } else {
    auto mode = std::get<NormalizeOp>(op).mode;
    auto values = load_all(in.type, src);
    if (mode == NormalizeMode::kMinMax) {
      auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      double low = *lo;
      double range = *hi - *lo;
      for (std::size_t i = 0; i < n; ++i) {
        store_element(ElementType::kFloat32, out, i,
                      range > 0 ? (values[i] - low) / range : 0.0);
      }
    } else {
      double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
      double var = 0;
      for (double v : values) var += (v - mean) * (v - mean);
      double sd = std::sqrt(var / n);
      for (std::size_t i = 0; i < n; ++i) {
        store_element(ElementType::kFloat32, out, i, sd > 0 ? (values[i] - mean) / sd : 0.0);
      }
    }
  }
  return Chunk::adopt(std::move(out));
}

// ---------------------------------------------------------------- reshaping

TensorInfo concat_info(std::span<const TensorInfo> inputs, std::size_t axis) {
  if (inputs.empty()) throw Error("concat needs at least one input");
  if (axis >= kRankLimit) throw Error("concat axis out of range");
  const TensorInfo& first = inputs.front();
  std::uint64_t total = 0;
  for (const auto& t : inputs) {
    if (t.type != first.type) {
      throw Error("concat inputs differ in element type (" +
                  std::string(to_string(first.type)) + " vs " +
                  std::string(to_string(t.type)) + ")");
    }
    for (std::size_t k = 0; k < kRankLimit; ++k) {
      if (k != axis && t.dim[k] != first.dim[k]) {
        throw Error("concat inputs " + first.dim.to_string() + " and " + t.dim.to_string() +
                    " differ outside axis " + std::to_string(axis));
      }
    }
    total += t.dim[axis];
  }
  if (total > kMaxDimension) throw Error("concat result exceeds 65535 on axis");
  TensorInfo out = first;
  auto d = first.dim.components();
  d[axis] = static_cast<std::uint32_t>(total);
  out.dim = TensorDim(d);
  return out;
}

Chunk concat_chunks(std::span<const TensorInfo> inputs, std::span<const Chunk> chunks,
                    std::size_t axis, CopyCounter* copies) {
  TensorInfo out_info = concat_info(inputs, axis);
  const std::size_t width = element_byte_width(out_info.type);
  const std::size_t outer = product(out_info.dim, axis + 1, kRankLimit);
  std::vector<std::byte> out(out_info.byte_size());
  std::byte* dst = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::size_t slab = product(inputs[i].dim, 0, axis + 1) * width;
      std::memcpy(dst, chunks[i].bytes().data() + o * slab, slab);
      dst += slab;
    }
  }
  if (copies) copies->record(out.size());
  return Chunk::adopt(std::move(out));
}

std::size_t stack_axis(const TensorDim& dim) {
  for (std::size_t k = 0; k < kRankLimit; ++k) {
    if (dim[k] == 1) return k;
  }
  throw Error("cannot stack " + dim.to_string() + ": no axis of extent 1");
}

std::vector<TensorInfo> split_info(const TensorInfo& in, std::size_t axis,
                                   std::span<const std::uint32_t> segments) {
  if (axis >= kRankLimit) throw Error("split axis out of range");
  std::uint64_t sum = 0;
  for (auto s : segments) {
    if (s == 0) throw Error("split segment of size 0");
    sum += s;
  }
  if (segments.empty() || sum != in.dim[axis]) {
    throw Error("split segments sum to " + std::to_string(sum) + " but axis " +
                std::to_string(axis) + " has extent " + std::to_string(in.dim[axis]));
  }
  std::vector<TensorInfo> out;
  for (auto s : segments) {
    TensorInfo t = in;
    auto d = in.dim.components();
    d[axis] = s;
    t.dim = TensorDim(d);
    out.push_back(t);
  }
  return out;
}

std::vector<Chunk> split_chunk(const TensorInfo& in, const Chunk& data, std::size_t axis,
                               std::span<const std::uint32_t> segments, CopyCounter* copies) {
  auto infos = split_info(in, axis, segments);
  const std::size_t width = element_byte_width(in.type);
  const std::size_t inner = product(in.dim, 0, axis) * width;
  const std::size_t outer = product(in.dim, axis + 1, kRankLimit);
  std::vector<Chunk> out;
  if (outer == 1) {
    std::size_t offset = 0;
    for (auto s : segments) {
      out.push_back(data.slice(offset, inner * s));
      offset += inner * s;
    }
    return out;
  }
  const std::size_t row = inner * in.dim[axis];
  std::size_t start = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    std::vector<std::byte> buf(infos[i].byte_size());
    std::size_t piece = inner * segments[i];
    for (std::size_t o = 0; o < outer; ++o) {
      std::memcpy(buf.data() + o * piece, data.bytes().data() + o * row + start, piece);
    }
    start += piece;
    if (copies) copies->record(buf.size());
    out.push_back(Chunk::adopt(std::move(buf)));
  }
  return out;
}

// ---------------------------------------------------------------- decoding

std::size_t argmax(ElementType type, std::span<const std::byte> data) {
  std::size_t n = data.size() / element_byte_width(type);
  if (n == 0) throw Error("argmax of empty tensor");
  std::size_t best = 0;
  double best_value = load_element(type, data, 0);
  for (std::size_t i = 1; i < n; ++i) {
    double v = load_element(type, data, i);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

std::string render_values(ElementType type, std::span<const std::byte> data) {
  std::size_t n = data.size() / element_byte_width(type);
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ',';
    std::to_chars_result r{};
    switch (type) {
      case ElementType::kFloat32:
        r = std::to_chars(buf, buf + sizeof buf, read_as<float>(data, i));
        break;
      case ElementType::kFloat64:
        r = std::to_chars(buf, buf + sizeof buf, read_as<double>(data, i));
        break;
      case ElementType::kUint64:
        r = std::to_chars(buf, buf + sizeof buf, read_as<std::uint64_t>(data, i));
        break;
      case ElementType::kInt64:
        r = std::to_chars(buf, buf + sizeof buf, read_as<std::int64_t>(data, i));
        break;
      default:
        r = std::to_chars(buf, buf + sizeof buf,
                          static_cast<std::int64_t>(load_element(type, data, i)));
        break;
    }
    out.append(buf, r.ptr);
  }
  return out;
}

}  // namespace nnpipe
