#include "nnpipe/filter.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <thread>

#include "nnpipe/tensor_ops.hpp"
#include "util.hpp"

namespace nnpipe {
namespace {

static_assert(std::endian::native == std::endian::little,
              "model and stream files are read with native little-endian loads");

constexpr char kDenseMagic[8] = {'T', 'D', 'N', 'S', 'E', '1', '\0', '\0'};

// ---------------------------------------------------------------- identity/delay

class PassModel : public FilterModel {
 public:
  explicit PassModel(std::chrono::microseconds hold) : hold_(hold) {}

  std::optional<TensorsInfo> input_info() const override { return std::nullopt; }
  TensorsInfo output_info(const TensorsInfo& input) const override { return input; }

  std::vector<Chunk> invoke(const TensorsInfo&, std::span<const Chunk> chunks,
                            CopyCounter*) override {
    if (hold_.count() > 0) {
      // Holds the frame until a wall-clock deadline, yielding so that other
      // stages can make progress on the same core.
      auto deadline = std::chrono::steady_clock::now() + hold_;
      while (std::chrono::steady_clock::now() < deadline) std::this_thread::yield();
    }
    return {chunks.begin(), chunks.end()};
  }

 private:
  std::chrono::microseconds hold_;
};

class IdentityBackend : public FilterBackend {
 public:
  std::string name() const override { return "identity"; }
  std::unique_ptr<FilterModel> open(const FilterOptions&) const override {
    return std::make_unique<PassModel>(std::chrono::microseconds(0));
  }
  bool concurrent() const override { return true; }
};

class DelayBackend : public FilterBackend {
 public:
  std::string name() const override { return "delay"; }
  std::unique_ptr<FilterModel> open(const FilterOptions& options) const override {
    double ms = 0;
    if (auto it = options.properties.find("busy_ms"); it != options.properties.end()) {
      if (!detail::parse_double(it->second, ms) || ms < 0) {
        throw Error("delay: bad busy_ms '" + it->second + "'");
      }
    }
    return std::make_unique<PassModel>(
        std::chrono::microseconds(static_cast<std::int64_t>(std::llround(ms * 1000))));
  }
};

// ---------------------------------------------------------------- custom_fn

std::mutex& custom_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, CustomFunction>& custom_functions() {
  static std::map<std::string, CustomFunction> fns = [] {
    std::map<std::string, CustomFunction> m;
    m["passthrough"] = CustomFunction{
        std::nullopt, [](const TensorsInfo& in) { return in; },
        [](const TensorsInfo&, std::span<const Chunk> c, CopyCounter*) {
          return std::vector<Chunk>(c.begin(), c.end());
        }};
    // Element-wise sum of all input tensors; every tensor must share the
    // first tensor's type and dimension.
    m["sum_tensors"] = CustomFunction{
        std::nullopt,
        [](const TensorsInfo& in) {
          for (const auto& t : in.tensors) {
            if (!(t == in.tensors.front())) {
              throw Error("sum_tensors needs tensors of identical type and dimension");
            }
          }
          return TensorsInfo({in.tensors.front()}, in.rate);
        },
        [](const TensorsInfo& in, std::span<const Chunk> c, CopyCounter*) {
          const auto& t = in.tensors.front();
          std::vector<double> acc(t.dim.element_count(), 0.0);
          for (const auto& chunk : c) {
            for (std::size_t i = 0; i < acc.size(); ++i) {
              acc[i] += load_element(t.type, chunk.bytes(), i);
            }
          }
          return std::vector<Chunk>{Chunk::adopt(store_all(t.type, acc))};
        }};
    return m;
  }();
  return fns;
}

class CustomModel : public FilterModel {
 public:
  explicit CustomModel(CustomFunction fn) : fn_(std::move(fn)) {}
  std::optional<TensorsInfo> input_info() const override { return fn_.input; }
  TensorsInfo output_info(const TensorsInfo& input) const override { return fn_.output(input); }
  std::vector<Chunk> invoke(const TensorsInfo& input, std::span<const Chunk> chunks,
                            CopyCounter* copies) override {
    return fn_.invoke(input, chunks, copies);
  }

 private:
  CustomFunction fn_;
};

class CustomBackend : public FilterBackend {
 public:
  std::string name() const override { return "custom_fn"; }
  std::unique_ptr<FilterModel> open(const FilterOptions& options) const override {
    std::lock_guard lock(custom_mutex());
    auto& fns = custom_functions();
    auto it = fns.find(options.model);
    if (it == fns.end()) {
      std::string known;
      for (const auto& [name, fn] : fns) known += (known.empty() ? "" : ", ") + name;
      throw Error("custom_fn: no function '" + options.model + "' (registered: " + known + ")");
    }
    return std::make_unique<CustomModel>(it->second);
  }
};

// ---------------------------------------------------------------- toy_dense

class DenseModel : public FilterModel {
 public:
  explicit DenseModel(ToyDenseModel model) : model_(std::move(model)) {}

  std::optional<TensorsInfo> input_info() const override {
    return TensorsInfo(
        {TensorInfo{ElementType::kFloat32, TensorDim{model_.layers.front().in_dim}, {}}});
  }
  TensorsInfo output_info(const TensorsInfo& input) const override {
    return TensorsInfo(
        {TensorInfo{ElementType::kFloat32, TensorDim{model_.layers.back().out_dim}, {}}},
        input.rate);
  }
  std::vector<Chunk> invoke(const TensorsInfo&, std::span<const Chunk> chunks,
                            CopyCounter*) override {
    const auto& in = chunks.front();
    std::span<const float> x(in.data_as<float>(), in.size() / sizeof(float));
    auto y = model_.forward(x);
    std::vector<std::byte> out(y.size() * sizeof(float));
    std::memcpy(out.data(), y.data(), out.size());
    return {Chunk::adopt(std::move(out))};
  }

 private:
  ToyDenseModel model_;
};

class DenseBackend : public FilterBackend {
 public:
  std::string name() const override { return "toy_dense"; }
  std::unique_ptr<FilterModel> open(const FilterOptions& options) const override {
    return std::make_unique<DenseModel>(ToyDenseModel::load(options.model));
  }
};

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}
  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw Error(std::string("toy_dense model truncated while reading ") + what);
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------- registry

BackendRegistry& BackendRegistry::instance() {
  static BackendRegistry* registry = [] {
    auto* r = new BackendRegistry();
    r->add(std::make_shared<IdentityBackend>());
    r->add(std::make_shared<DelayBackend>());
    r->add(std::make_shared<CustomBackend>());
    r->add(std::make_shared<DenseBackend>());
    return r;
  }();
  return *registry;
}

void BackendRegistry::add(std::shared_ptr<const FilterBackend> backend) {
  std::lock_guard lock(mutex_);
  auto name = backend->name();
  if (!backends_.emplace(name, std::move(backend)).second) {
    throw Error("filter backend '" + name + "' is already registered");
  }
}

std::shared_ptr<const FilterBackend> BackendRegistry::find(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = backends_.find(name);
  return it == backends_.end() ? nullptr : it->second;
}

std::shared_ptr<const FilterBackend> BackendRegistry::get(const std::string& name) const {
  if (auto b = find(name)) return b;
  std::string known;
  for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
  throw Error("unknown filter framework '" + name + "' (registered: " + known + ")");
}

std::vector<std::string> BackendRegistry::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, b] : backends_) out.push_back(name);
  return out;
}

void register_custom_function(const std::string& name, CustomFunction fn) {
  std::lock_guard lock(custom_mutex());
  if (!custom_functions().emplace(name, std::move(fn)).second) {
    throw Error("custom function '" + name + "' is already registered");
  }
}

// ---------------------------------------------------------------- toy_dense

void ToyDenseModel::validate() const {
  if (layers.empty()) throw Error("toy_dense model has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.in_dim == 0 || l.out_dim == 0 || l.in_dim > kMaxDimension ||
        l.out_dim > kMaxDimension) {
      throw Error("toy_dense layer " + std::to_string(k) + " has a bad shape");
    }
    if (l.weights.size() != static_cast<std::size_t>(l.in_dim) * l.out_dim ||
        l.bias.size() != l.out_dim) {
      throw Error("toy_dense layer " + std::to_string(k) + " weight/bias size mismatch");
    }
    if (static_cast<std::uint8_t>(l.activation) > 2) {
      throw Error("toy_dense layer " + std::to_string(k) + " has an unknown activation");
    }
    if (k > 0 && layers[k - 1].out_dim != l.in_dim) {
      throw Error("toy_dense layer " + std::to_string(k) + " expects " +
                  std::to_string(l.in_dim) + " inputs, previous layer gives " +
                  std::to_string(layers[k - 1].out_dim));
    }
  }
}

std::vector<float> ToyDenseModel::forward(std::span<const float> input) const {
  std::vector<float> x(input.begin(), input.end());
  for (const auto& l : layers) {
    if (x.size() != l.in_dim) throw Error("toy_dense input size mismatch");
    std::vector<float> y(l.out_dim);
    for (std::uint32_t o = 0; o < l.out_dim; ++o) {
      float acc = l.bias[o];
      for (std::uint32_t i = 0; i < l.in_dim; ++i) {
        acc += l.weights[static_cast<std::size_t>(o) * l.in_dim + i] * x[i];
      }
      switch (l.activation) {
        case Activation::kNone: break;
        case Activation::kRelu: acc = acc > 0.0f ? acc : 0.0f; break;
        case Activation::kSigmoid: acc = 1.0f / (1.0f + std::exp(-acc)); break;
      }
      y[o] = acc;
    }
    x = std::move(y);
  }
  return x;
}

std::vector<std::byte> ToyDenseModel::serialize() const {
  validate();
  std::vector<std::byte> out;
  for (char c : kDenseMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    put<std::uint32_t>(out, l.in_dim);
    put<std::uint32_t>(out, l.out_dim);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
    for (int i = 0; i < 3; ++i) put<std::uint8_t>(out, 0);
    for (float w : l.weights) put<float>(out, w);
    for (float b : l.bias) put<float>(out, b);
  }
  return out;
}

ToyDenseModel ToyDenseModel::deserialize(std::span<const std::byte> bytes) {
  if (bytes.size() < sizeof kDenseMagic ||
      std::memcmp(bytes.data(), kDenseMagic, sizeof kDenseMagic) != 0) {
    throw Error("toy_dense model: bad magic");
  }
  Reader r(bytes.subspan(sizeof kDenseMagic));
  auto count = r.get<std::uint32_t>("layer count");
  if (count == 0 || count > 1024) throw Error("toy_dense model: bad layer count");
  ToyDenseModel model;
  for (std::uint32_t k = 0; k < count; ++k) {
    DenseLayer l;
    l.in_dim = r.get<std::uint32_t>("in_dim");
    l.out_dim = r.get<std::uint32_t>("out_dim");
    auto act = r.get<std::uint8_t>("activation");
    if (act > 2) throw Error("toy_dense model: unknown activation " + std::to_string(act));
    l.activation = static_cast<Activation>(act);
    for (int i = 0; i < 3; ++i) r.get<std::uint8_t>("padding");
    std::uint64_t nw = static_cast<std::uint64_t>(l.in_dim) * l.out_dim;
    if (nw * 4 > r.remaining()) throw Error("toy_dense model truncated in weights");
    l.weights.resize(nw);
    for (auto& w : l.weights) w = r.get<float>("weights");
    l.bias.resize(l.out_dim);
    for (auto& b : l.bias) b = r.get<float>("bias");
    model.layers.push_back(std::move(l));
  }
  if (r.remaining() != 0) throw Error("toy_dense model has trailing bytes");
  model.validate();
  return model;
}

void ToyDenseModel::save(const std::filesystem::path& path) const {
  auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write model '" + path.string() + "'");
}

ToyDenseModel ToyDenseModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto* p = reinterpret_cast<const std::byte*>(raw.data());
  return deserialize(std::span<const std::byte>(p, raw.size()));
}

// ---------------------------------------------------------------- single-shot

std::vector<Chunk> invoke_checked(const std::string& framework, FilterModel& model,
                                  const TensorsInfo& input, std::span<const Chunk> chunks,
                                  CopyCounter* copies) {
  std::vector<Chunk> out;
  try {
    out = model.invoke(input, chunks, copies);
  } catch (const std::exception& e) {
    throw Error(framework + " backend failed: " + e.what());
  }
  auto expected = model.output_info(input);
  Frame probe;
  probe.chunks = out;
  try {
    check_frame(expected, probe);
  } catch (const Error& e) {
    throw Error(framework + " backend produced bad output: " + e.what());
  }
  return out;
}

SingleShot::SingleShot(std::string framework, std::unique_ptr<FilterModel> model)
    : framework_(std::move(framework)),
      model_(std::move(model)),
      mutex_(std::make_shared<std::mutex>()) {}

SingleShot SingleShot::open(const std::string& framework, const std::string& model,
                            std::map<std::string, std::string> properties) {
  auto backend = BackendRegistry::instance().get(framework);
  FilterOptions options{model, std::move(properties)};
  return SingleShot(framework, backend->open(options));
}

std::optional<TensorsInfo> SingleShot::input_info() const {
  if (!model_) throw Error("single-shot handle is closed");
  return model_->input_info();
}

TensorsInfo SingleShot::output_info(const TensorsInfo& input) const {
  if (!model_) throw Error("single-shot handle is closed");
  return model_->output_info(input);
}

std::vector<Chunk> SingleShot::invoke(std::vector<Chunk> inputs) {
  auto info = input_info();
  if (!info) throw Error(framework_ + " model has no fixed input; pass a TensorsInfo");
  return invoke(*info, std::move(inputs));
}

std::vector<Chunk> SingleShot::invoke(const TensorsInfo& info, std::vector<Chunk> inputs) {
  if (!model_) throw Error("invoke on a closed single-shot handle");
  std::lock_guard lock(*mutex_);
  Frame probe;
  probe.chunks = inputs;
  check_frame(info, probe);
  if (auto fixed = model_->input_info()) {
    if (fixed->count() != info.count()) throw Error("input tensor count mismatch");
    for (std::size_t i = 0; i < info.count(); ++i) {
      if (!(fixed->tensors[i] == info.tensors[i])) {
        throw Error("input tensor " + std::to_string(i) + " does not match the model");
      }
    }
  }
  return invoke_checked(framework_, *model_, info, inputs, nullptr);
}

void SingleShot::close() { model_.reset(); }

}  // namespace nnpipe
