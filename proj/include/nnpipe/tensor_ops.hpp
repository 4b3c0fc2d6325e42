#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nnpipe/tensor.hpp"

namespace nnpipe {

// Reads element `index` of a packed little-endian buffer as float64.
double load_element(ElementType type, std::span<const std::byte> data, std::size_t index);

// Writes `value` converted with the typecast rule: clamp to the target's
// representable range, then truncate toward zero for integer targets.
void store_element(ElementType type, std::span<std::byte> data, std::size_t index,
                   double value);

double cast_value(ElementType type, double value);

std::vector<double> load_all(ElementType type, std::span<const std::byte> data);
std::vector<std::byte> store_all(ElementType type, std::span<const double> values);

// Flat offset of (i0, i1, i2, i3); d0 varies fastest.
inline std::size_t flat_index(const TensorDim& dim, std::array<std::uint32_t, 4> idx) {
  return idx[0] + static_cast<std::size_t>(dim[0]) *
                      (idx[1] + static_cast<std::size_t>(dim[1]) *
                                    (idx[2] + static_cast<std::size_t>(dim[2]) * idx[3]));
}

// ------------------------------------------------------------------ transform

enum class ArithKind : std::uint8_t { kAdd, kSub, kMul, kDiv };

struct ArithStep {
  ArithKind kind;
  double operand;
};

struct TypecastOp {
  ElementType to;
};

struct ArithOp {
  std::vector<ArithStep> steps;
  // Set when the chain ends in an explicit typecast.
  std::optional<ElementType> out_type;
};

struct TransposeOp {
  std::array<std::uint8_t, 4> perm{0, 1, 2, 3};
};

enum class NormalizeMode : std::uint8_t { kMinMax, kStandardize };

struct NormalizeOp {
  NormalizeMode mode;
};

using TransformOp = std::variant<TypecastOp, ArithOp, TransposeOp, NormalizeOp>;

// Parses `mode` + `option` as used by tensor_transform, e.g.
// ("arith", "mul:2,add:1"), ("typecast", "uint8"), ("transpose", "1:0:2:3"),
// ("normalize", "minmax"). Rejects division by zero and bad permutations.
TransformOp parse_transform(std::string_view mode, std::string_view option);

// Output tensor description for a given input.
TensorInfo transform_info(const TransformOp& op, const TensorInfo& in);

// Applies the op to one tensor payload. Transpose counts one payload copy.
Chunk transform_chunk(const TransformOp& op, const TensorInfo& in, const Chunk& data,
                      CopyCounter* copies);

// ---------------------------------------------------------------- reshaping

// Concatenates tensors along `axis`; all other axes must agree.
TensorInfo concat_info(std::span<const TensorInfo> inputs, std::size_t axis);
Chunk concat_chunks(std::span<const TensorInfo> inputs, std::span<const Chunk> chunks,
                    std::size_t axis, CopyCounter* copies);

// Axis used to stack k equal tensors: the first axis of extent 1.
std::size_t stack_axis(const TensorDim& dim);

// Slices one tensor along `axis` into segments. Zero-copy when every axis
// above `axis` has extent 1 (the slices are contiguous).
std::vector<TensorInfo> split_info(const TensorInfo& in, std::size_t axis,
                                   std::span<const std::uint32_t> segments);
std::vector<Chunk> split_chunk(const TensorInfo& in, const Chunk& data, std::size_t axis,
                               std::span<const std::uint32_t> segments, CopyCounter* copies);

// ---------------------------------------------------------------- decoding

// Index of the largest element; ties resolve to the lowest index.
std::size_t argmax(ElementType type, std::span<const std::byte> data);
// "v0,v1,...", integers without a fraction, floats in shortest round-trip form.
std::string render_values(ElementType type, std::span<const std::byte> data);

}  // namespace nnpipe
