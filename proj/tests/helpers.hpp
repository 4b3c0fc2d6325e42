#pragma once

#include <chrono>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "nnpipe/pipeline.hpp"
#include "nnpipe/tensor.hpp"
#include "nnpipe/tensor_ops.hpp"

namespace nnpipe::test {

inline std::vector<std::byte> bytes(std::initializer_list<int> values) {
  std::vector<std::byte> out;
  for (int v : values) out.push_back(static_cast<std::byte>(v));
  return out;
}

inline std::vector<int> ints(const Chunk& c) {
  std::vector<int> out;
  for (auto b : c.bytes()) out.push_back(static_cast<int>(b));
  return out;
}

template <typename T>
std::vector<std::byte> pack(const std::vector<T>& values) {
  std::vector<std::byte> out(values.size() * sizeof(T));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

template <typename T>
std::vector<T> unpack(const Chunk& c) {
  std::vector<T> out(c.size() / sizeof(T));
  std::memcpy(out.data(), c.bytes().data(), out.size() * sizeof(T));
  return out;
}

inline std::string text(const Chunk& c) {
  return std::string(reinterpret_cast<const char*>(c.bytes().data()), c.size());
}

inline Chunk random_chunk(std::mt19937& rng, std::size_t size) {
  std::vector<std::byte> b(size);
  for (auto& x : b) x = static_cast<std::byte>(rng() & 0xff);
  return Chunk::adopt(std::move(b));
}

// Random finite values of `type`, stored in a chunk.
inline Chunk random_values(std::mt19937& rng, ElementType type, std::size_t count,
                           double lo = -300, double hi = 300) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(count);
  for (auto& x : v) x = u(rng);
  return Chunk::adopt(store_all(type, v));
}

// Per-process scratch file, removed by the caller when it matters.
inline std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("nnpipe_" + std::to_string(::getpid()) + "_" + name);
}

struct Run {
  std::unique_ptr<Pipeline> pipeline;
  RunReport report;

  std::vector<Frame> frames(const std::string& sink) const {
    return pipeline->element_as<AppSink>(sink)->frames();
  }
};

inline Run run(const std::string& description,
               std::chrono::milliseconds timeout = std::chrono::seconds(20)) {
  Run r;
  r.pipeline = Pipeline::parse(description);
  r.report = r.pipeline->run_until_eos(timeout);
  return r;
}

}  // namespace nnpipe::test
