#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nnpipe/tensor.hpp"

namespace nnpipe {

struct FilterOptions {
  std::string model;
  // Remaining tensor_filter properties (busy_ms, custom, ...).
  std::map<std::string, std::string> properties;
};

// An opened model. invoke() is called by one thread at a time unless the
// owning backend reports concurrent().
class FilterModel {
 public:
  virtual ~FilterModel() = default;

  // Fixed input description, or nullopt when any input is accepted.
  virtual std::optional<TensorsInfo> input_info() const = 0;
  virtual TensorsInfo output_info(const TensorsInfo& input) const = 0;
  virtual std::vector<Chunk> invoke(const TensorsInfo& input, std::span<const Chunk> chunks,
                                    CopyCounter* copies) = 0;
  // Called before streaming by rank-sensitive backends.
  virtual void set_input_ranks(std::vector<std::optional<std::uint8_t>>) {}
};

class FilterBackend {
 public:
  virtual ~FilterBackend() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<FilterModel> open(const FilterOptions& options) const = 0;
  virtual bool rank_sensitive() const { return false; }
  virtual bool concurrent() const { return false; }
};

class BackendRegistry {
 public:
  // Process-wide registry, pre-populated with the built-in backends.
  static BackendRegistry& instance();

  // Throws Error on a duplicate name.
  void add(std::shared_ptr<const FilterBackend> backend);
  std::shared_ptr<const FilterBackend> find(const std::string& name) const;
  // Throws Error listing the registered names when `name` is unknown.
  std::shared_ptr<const FilterBackend> get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const FilterBackend>> backends_;
};

inline void register_backend(std::shared_ptr<const FilterBackend> backend) {
  BackendRegistry::instance().add(std::move(backend));
}

// ---------------------------------------------------------------- custom_fn

struct CustomFunction {
  // nullopt accepts any input.
  std::optional<TensorsInfo> input;
  std::function<TensorsInfo(const TensorsInfo&)> output;
  std::function<std::vector<Chunk>(const TensorsInfo&, std::span<const Chunk>, CopyCounter*)>
      invoke;
};

// Functions reachable as `tensor_filter framework=custom_fn model=<name>`.
// "passthrough" and "sum_tensors" are pre-registered.
void register_custom_function(const std::string& name, CustomFunction fn);

// ---------------------------------------------------------------- toy_dense

enum class Activation : std::uint8_t { kNone = 0, kRelu = 1, kSigmoid = 2 };

struct DenseLayer {
  std::uint32_t in_dim = 0;
  std::uint32_t out_dim = 0;
  Activation activation = Activation::kNone;
  std::vector<float> weights;  // out_dim x in_dim, row-major
  std::vector<float> bias;     // out_dim
};

struct ToyDenseModel {
  std::vector<DenseLayer> layers;

  // Throws Error when consecutive layers do not chain or sizes are wrong.
  void validate() const;
  std::vector<float> forward(std::span<const float> input) const;

  std::vector<std::byte> serialize() const;
  static ToyDenseModel deserialize(std::span<const std::byte> bytes);
  void save(const std::filesystem::path& path) const;
  static ToyDenseModel load(const std::filesystem::path& path);
};

// ---------------------------------------------------------------- single-shot

// Invokes a backend directly, without building a pipeline.
class SingleShot {
 public:
  static SingleShot open(const std::string& framework, const std::string& model,
                         std::map<std::string, std::string> properties = {});

  std::optional<TensorsInfo> input_info() const;
  TensorsInfo output_info(const TensorsInfo& input) const;

  // Uses the model's fixed input description.
  std::vector<Chunk> invoke(std::vector<Chunk> inputs);
  std::vector<Chunk> invoke(const TensorsInfo& info, std::vector<Chunk> inputs);
  void close();
  bool closed() const { return model_ == nullptr; }

 private:
  SingleShot(std::string framework, std::unique_ptr<FilterModel> model);

  std::string framework_;
  std::unique_ptr<FilterModel> model_;
  std::shared_ptr<std::mutex> mutex_;
};

// Shared by tensor_filter and SingleShot: checks sizes around a model call.
std::vector<Chunk> invoke_checked(const std::string& framework, FilterModel& model,
                                  const TensorsInfo& input, std::span<const Chunk> chunks,
                                  CopyCounter* copies);

}  // namespace nnpipe
