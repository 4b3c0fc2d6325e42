#include <gtest/gtest.h>

#include <cfloat>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

namespace nnpipe {
namespace {

using namespace test;

ElementType random_type(std::mt19937& rng) {
  return kAllElementTypes[rng() % kAllElementTypes.size()];
}

TensorInfo random_info(std::mt19937& rng, ElementType t) {
  return {t, TensorDim({1 + static_cast<std::uint32_t>(rng() % 5),
                        1 + static_cast<std::uint32_t>(rng() % 4),
                        1 + static_cast<std::uint32_t>(rng() % 3),
                        1 + static_cast<std::uint32_t>(rng() % 2)}),
          {}};
}

std::vector<int> raw(const Chunk& c) { return test::ints(c); }
std::vector<int> raw(const std::vector<std::byte>& b) {
  return test::ints(Chunk::adopt(b));
}

TEST(Typecast, Examples) {
  auto in = Chunk::adopt(test::pack<float>({-3.7f, 260.9f, 5.5f}));
  TensorInfo info{ElementType::kFloat32, TensorDim({3}), {}};
  auto out = transform_chunk(parse_transform("typecast", "uint8"), info, in, nullptr);
  EXPECT_EQ(test::ints(out), (std::vector<int>{0, 255, 5}));
  EXPECT_EQ(cast_value(ElementType::kInt8, -200.0), -128);
  EXPECT_EQ(cast_value(ElementType::kInt16, -2.9), -2);
}

TEST(Typecast, MatchesOracleOnRandomFrames) {
  std::mt19937 rng(11);
  for (int i = 0; i < 1000; ++i) {
    auto from = random_type(rng);
    auto to = random_type(rng);
    auto info = random_info(rng, from);
    auto data = test::random_values(rng, from, info.dim.element_count(), -1e5, 1e5);
    auto out = transform_chunk(TypecastOp{to}, info, data, nullptr);
    ASSERT_EQ(raw(out), raw(oracle_store(to, oracle_load(from, data))))
        << to_string(from) << " -> " << to_string(to);
  }
}

TEST(Arith, Example) {
  TensorInfo info{ElementType::kUint8, TensorDim({3}), {}};
  auto out = transform_chunk(parse_transform("arith", "mul:2,add:1"), info,
                             Chunk::adopt(test::bytes({1, 2, 200})), nullptr);
  EXPECT_EQ(test::ints(out), (std::vector<int>{3, 5, 255}));
}

TEST(Arith, MatchesOracleOnRandomFrames) {
  std::mt19937 rng(12);
  const char* names[] = {"add", "sub", "mul", "div"};
  std::uniform_real_distribution<double> operand(0.25, 9.0);
  for (int i = 0; i < 1000; ++i) {
    auto from = random_type(rng);
    auto info = random_info(rng, from);
    auto data = test::random_values(rng, from, info.dim.element_count());

    std::string option;
    std::vector<std::pair<int, double>> steps;
    for (int s = 0, n = 1 + rng() % 3; s < n; ++s) {
      int k = rng() % 4;
      double v = std::round(operand(rng) * 4) / 4;
      steps.emplace_back(k, v);
      option += (option.empty() ? "" : ",") + std::string(names[k]) + ":" + std::to_string(v);
    }
    ElementType to = from;
    if (rng() % 3 == 0) {
      to = random_type(rng);
      option += ",typecast:" + std::string(to_string(to));
    }

    auto values = oracle_load(from, data);
    for (auto& x : values) {
      for (auto [k, v] : steps) {
        if (k == 0) x += v;
        if (k == 1) x -= v;
        if (k == 2) x *= v;
        if (k == 3) x /= v;
      }
    }
    auto op = parse_transform("arith", option);
    EXPECT_EQ(transform_info(op, info).type, to);
    auto out = transform_chunk(op, info, data, nullptr);
    ASSERT_EQ(raw(out), raw(oracle_store(to, values))) << option << " on " << to_string(from);
  }
}

TEST(Arith, RejectsBadOptions) {
  EXPECT_THROW(parse_transform("arith", "div:0"), Error);
  EXPECT_THROW(parse_transform("arith", "pow:2"), Error);
  EXPECT_THROW(parse_transform("arith", "typecast:uint8,add:1"), Error);
  EXPECT_THROW(parse_transform("arith", "add"), Error);
}

std::array<std::uint8_t, 4> random_perm(std::mt19937& rng) {
  std::array<std::uint8_t, 4> p{0, 1, 2, 3};
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

std::string perm_string(const std::array<std::uint8_t, 4>& p) {
  return std::to_string(p[0]) + ":" + std::to_string(p[1]) + ":" + std::to_string(p[2]) + ":" +
         std::to_string(p[3]);
}

TEST(Transpose, MatchesOracleOnRandomFrames) {
  std::mt19937 rng(13);
  for (int i = 0; i < 1000; ++i) {
    auto type = random_type(rng);
    auto info = random_info(rng, type);
    auto data = test::random_chunk(rng, info.byte_size());
    auto perm = random_perm(rng);
    auto op = parse_transform("transpose", perm_string(perm));
    auto out_info = transform_info(op, info);

    const std::size_t w = element_byte_width(type);
    std::uint32_t od[4];
    for (int k = 0; k < 4; ++k) od[k] = info.dim[perm[k]];
    EXPECT_EQ(out_info.dim, TensorDim({od[0], od[1], od[2], od[3]}));
    std::vector<std::byte> expect(info.byte_size());
    std::uint32_t idx[4];
    for (idx[3] = 0; idx[3] < info.dim[3]; ++idx[3])
      for (idx[2] = 0; idx[2] < info.dim[2]; ++idx[2])
        for (idx[1] = 0; idx[1] < info.dim[1]; ++idx[1])
          for (idx[0] = 0; idx[0] < info.dim[0]; ++idx[0]) {
            std::size_t in_off =
                idx[0] + info.dim[0] * (idx[1] + info.dim[1] * (idx[2] + info.dim[2] * idx[3]));
            std::uint32_t o[4];
            for (int k = 0; k < 4; ++k) o[k] = idx[perm[k]];
            std::size_t out_off = o[0] + od[0] * (o[1] + od[1] * (o[2] + od[2] * o[3]));
            std::memcpy(expect.data() + out_off * w, data.bytes().data() + in_off * w, w);
          }
    CopyCounter copies;
    auto out = transform_chunk(op, info, data, &copies);
    ASSERT_EQ(raw(out), raw(expect)) << perm_string(perm);
    EXPECT_EQ(copies.copies(), 1u);
  }
}

TEST(Transpose, InverseIsIdentity) {
  std::mt19937 rng(14);
  for (int i = 0; i < 1000; ++i) {
    auto info = random_info(rng, random_type(rng));
    auto data = test::random_chunk(rng, info.byte_size());
    auto perm = random_perm(rng);
    std::array<std::uint8_t, 4> inv{};
    for (std::uint8_t k = 0; k < 4; ++k) inv[perm[k]] = k;
    auto fwd = parse_transform("transpose", perm_string(perm));
    auto back = parse_transform("transpose", perm_string(inv));
    auto mid = transform_info(fwd, info);
    auto out = transform_chunk(back, mid, transform_chunk(fwd, info, data, nullptr), nullptr);
    EXPECT_EQ(transform_info(back, mid).dim, info.dim);
    ASSERT_EQ(raw(out), raw(data));
  }
}

TEST(Transpose, RejectsNonPermutations) {
  EXPECT_THROW(parse_transform("transpose", "0:0:1:2"), Error);
  EXPECT_THROW(parse_transform("transpose", "0:1:2"), Error);
  EXPECT_THROW(parse_transform("transpose", "0:1:2:4"), Error);
}

TEST(Normalize, MinMaxMatchesOracle) {
  std::mt19937 rng(15);
  for (int i = 0; i < 1000; ++i) {
    auto type = random_type(rng);
    auto info = random_info(rng, type);
    auto data = test::random_values(rng, type, info.dim.element_count());
    auto values = oracle_load(type, data);
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    std::vector<float> expect;
    for (double v : values) expect.push_back(hi > lo ? static_cast<float>((v - lo) / (hi - lo)) : 0.0f);

    auto op = parse_transform("normalize", "minmax");
    EXPECT_EQ(transform_info(op, info).type, ElementType::kFloat32);
    auto got = test::unpack<float>(transform_chunk(op, info, data, nullptr));
    ASSERT_EQ(got, expect);
    for (float v : got) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Normalize, ConstantFrameIsZero) {
  TensorInfo info{ElementType::kUint8, TensorDim({4}), {}};
  for (const char* mode : {"minmax", "standardize"}) {
    auto out = transform_chunk(parse_transform("normalize", mode), info,
                               Chunk::adopt(test::bytes({7, 7, 7, 7})), nullptr);
    EXPECT_EQ(test::unpack<float>(out), (std::vector<float>{0, 0, 0, 0}));
  }
}

TEST(Normalize, StandardizeMoments) {
  std::mt19937 rng(16);
  for (int i = 0; i < 1000; ++i) {
    TensorInfo info{ElementType::kFloat64, TensorDim({16 + static_cast<std::uint32_t>(rng() % 32)}), {}};
    auto data = test::random_values(rng, info.type, info.dim.element_count());
    auto values = oracle_load(info.type, data);
    double mean = 0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / values.size());

    auto got = test::unpack<float>(
        transform_chunk(parse_transform("normalize", "standardize"), info, data, nullptr));
    double m = 0, s = 0;
    for (std::size_t k = 0; k < got.size(); ++k) {
      ASSERT_EQ(got[k], static_cast<float>((values[k] - mean) / sd));
      m += got[k];
    }
    m /= got.size();
    for (float v : got) s += (v - m) * (v - m);
    s = std::sqrt(s / got.size());
    EXPECT_LT(std::abs(m), 1e-5);
    EXPECT_LT(std::abs(s - 1), 1e-3);
  }
}

// ------------------------------------------------------------- merge/split

TEST(Merge, ShapeLaws) {
  TensorInfo a{ElementType::kUint8, TensorDim::parse("3:4"), {}};
  std::vector<TensorInfo> two{a, a};
  EXPECT_EQ(concat_info(two, 0).dim, TensorDim({6, 4}));
  EXPECT_EQ(concat_info(two, 1).dim, TensorDim({3, 8}));
  EXPECT_EQ(stack_axis(a.dim), 2u);
  EXPECT_EQ(concat_info(two, stack_axis(a.dim)).dim, TensorDim({3, 4, 2}));
}

TEST(Split, InvertsEachMerge) {
  TensorInfo a{ElementType::kUint8, TensorDim::parse("3:4"), {}};
  const std::uint32_t halves3[] = {3, 3}, halves4[] = {4, 4}, ones[] = {1, 1};
  for (auto [axis, merged, segs] :
       {std::tuple{0u, TensorDim({6, 4}), std::span<const std::uint32_t>(halves3)},
        std::tuple{1u, TensorDim({3, 8}), std::span<const std::uint32_t>(halves4)},
        std::tuple{2u, TensorDim({3, 4, 2}), std::span<const std::uint32_t>(ones)}}) {
    auto parts = split_info({ElementType::kUint8, merged, {}}, axis, segs);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].dim, a.dim);
    EXPECT_EQ(parts[1].dim, a.dim);
  }
}

TEST(Merge, ConcatMatchesOracle) {
  std::mt19937 rng(17);
  for (int i = 0; i < 300; ++i) {
    auto type = random_type(rng);
    auto base = random_info(rng, type);
    std::size_t axis = rng() % 4;
    std::vector<TensorInfo> infos;
    std::vector<Chunk> chunks;
    for (int k = 0, n = 1 + rng() % 3; k < n; ++k) {
      auto t = base;
      t.dim = t.dim.with_axis(axis, 1 + rng() % 4);
      infos.push_back(t);
      chunks.push_back(test::random_chunk(rng, t.byte_size()));
    }
    CopyCounter copies;
    auto out = concat_chunks(infos, chunks, axis, &copies);
    ASSERT_EQ(raw(out), raw(oracle_concat(infos, chunks, axis)));
    EXPECT_EQ(copies.copies(), 1u);
  }
}

TEST(MergeSplit, ContentIdentities) {
  std::mt19937 rng(18);
  TensorInfo a{ElementType::kFloat32, TensorDim::parse("3:4"), {}};
  const std::uint32_t seg_for_axis[3][2] = {{3, 3}, {4, 4}, {1, 1}};
  for (int i = 0; i < 100; ++i) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
      std::span<const std::uint32_t> segs(seg_for_axis[axis], 2);
      std::vector<TensorInfo> infos{a, a};
      std::vector<Chunk> parts{test::random_chunk(rng, a.byte_size()),
                               test::random_chunk(rng, a.byte_size())};
      // split after merge
      auto merged = concat_chunks(infos, parts, axis, nullptr);
      auto merged_info = concat_info(infos, axis);
      auto back = split_chunk(merged_info, merged, axis, segs, nullptr);
      ASSERT_EQ(back.size(), 2u);
      EXPECT_EQ(raw(back[0]), raw(parts[0]));
      EXPECT_EQ(raw(back[1]), raw(parts[1]));

      // merge after split
      auto whole = test::random_chunk(rng, merged_info.byte_size());
      auto pieces = split_chunk(merged_info, whole, axis, segs, nullptr);
      auto again = concat_chunks(split_info(merged_info, axis, segs), pieces, axis, nullptr);
      EXPECT_EQ(raw(again), raw(whole));
    }
  }
}

TEST(Split, OutermostAxisIsZeroCopy) {
  TensorInfo t{ElementType::kUint8, TensorDim({2, 2, 1, 4}), {}};
  auto data = Chunk::adopt(std::vector<std::byte>(16));
  const std::uint32_t segs[] = {1, 3};
  CopyCounter copies;
  auto parts = split_chunk(t, data, 3, segs, &copies);
  EXPECT_EQ(copies.copies(), 0u);
  EXPECT_TRUE(parts[0].shares_storage_with(data));
  EXPECT_EQ(parts[1].size(), 12u);
}

TEST(Split, RejectsBadSegments) {
  TensorInfo t{ElementType::kUint8, TensorDim({4}), {}};
  const std::uint32_t bad[] = {1, 2};
  const std::uint32_t zero[] = {4, 0};
  EXPECT_THROW(split_info(t, 0, bad), Error);
  EXPECT_THROW(split_info(t, 0, zero), Error);
}

TEST(Decode, ArgmaxTiesPickLowest) {
  auto b = test::bytes({3, 9, 9, 1});
  EXPECT_EQ(argmax(ElementType::kUint8, b), 1u);
  auto f = test::pack<float>({0.1f, 0.7f, 0.2f});
  EXPECT_EQ(argmax(ElementType::kFloat32, f), 1u);
}

TEST(Decode, RenderValues) {
  EXPECT_EQ(render_values(ElementType::kInt16, test::pack<std::int16_t>({-3, 0, 12})), "-3,0,12");
  EXPECT_EQ(render_values(ElementType::kFloat32, test::pack<float>({0.5f, 2.0f, 0.1f})),
            "0.5,2,0.1");
}

}  // namespace
}  // namespace nnpipe
