#include "nnpipe/caps.hpp"

#include <algorithm>
#include <map>

#include "util.hpp"

namespace nnpipe {
namespace {

constexpr std::string_view kTensorName = "other/tensor";
constexpr std::string_view kTensorsName = "other/tensors";
constexpr std::string_view kRasterName = "video/x-raw";
constexpr std::string_view kTextName = "text/x-raw";
constexpr std::string_view kBinaryName = "application/octet-stream";

template <typename T>
bool meet(const std::optional<T>& a, const std::optional<T>& b, std::optional<T>& out) {
  if (!a) {
    out = b;
    return true;
  }
  if (!b || *a == *b) {
    out = a;
    return true;
  }
  return false;
}

bool meet_rate(const std::optional<Framerate>& a, const std::optional<Framerate>& b,
               std::optional<Framerate>& out) {
  if (a && a->unconstrained() && b) {
    out = b;
    return true;
  }
  if (b && b->unconstrained() && a) {
    out = a;
    return true;
  }
  return meet(a, b, out);
}

TensorSpec parse_spec_dim(std::string_view text, TensorSpec spec) {
  auto parts = detail::split(text, ':');
  if (parts.empty() || parts.size() > kRankLimit) {
    throw CapsError("bad dimension '" + std::string(text) + "'");
  }
  spec.dim = {1u, 1u, 1u, 1u};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] == "*") {
      spec.dim[i].reset();
      continue;
    }
    std::uint64_t v = 0;
    if (!detail::parse_uint(parts[i], v) || v < 1 || v > kMaxDimension) {
      throw CapsError("bad dimension '" + std::string(text) + "'");
    }
    spec.dim[i] = static_cast<std::uint32_t>(v);
  }
  spec.rank = static_cast<std::uint8_t>(parts.size());
  return spec;
}

std::string render_spec_dim(const TensorSpec& spec) {
  std::size_t shown = spec.rank ? *spec.rank : kRankLimit;
  std::string out;
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += ':';
    out += spec.dim[i] ? std::to_string(*spec.dim[i]) : "*";
  }
  return out;
}

bool dims_all_wild(const TensorSpec& s) {
  return std::none_of(s.dim.begin(), s.dim.end(), [](auto& d) { return d.has_value(); });
}

std::uint32_t parse_u32_field(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  if (!detail::parse_uint(value, v) || v == 0 || v > kMaxDimension) {
    throw CapsError("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return static_cast<std::uint32_t>(v);
}

StreamCaps parse_tensor_caps(bool multi,
                             const std::vector<std::pair<std::string, std::string>>& fields) {
  TensorCaps caps;
  caps.multi = multi;
  std::vector<std::string_view> types;
  std::vector<std::string_view> dims;
  for (const auto& [key, value] : fields) {
    if (key == "framerate") {
      if (value != "*") caps.rate = Framerate::parse(value);
    } else if (multi && key == "num_tensors") {
      std::uint64_t n = 0;
      if (!detail::parse_uint(value, n) || n < 1 || n > kMaxTensors) {
        throw CapsError("num_tensors '" + value + "' outside [1, " +
                        std::to_string(kMaxTensors) + "]");
      }
      caps.num_tensors = n;
    } else if (key == (multi ? "types" : "type")) {
      types = multi ? detail::split(value, '.') : std::vector<std::string_view>{value};
    } else if (key == (multi ? "dimensions" : "dimension")) {
      dims = multi ? detail::split(value, '.') : std::vector<std::string_view>{value};
    } else {
      throw CapsError("unknown tensor caps field '" + key + "'");
    }
  }
  if (!multi) caps.num_tensors = 1;
  std::size_t count = caps.num_tensors.value_or(std::max(types.size(), dims.size()));
  if (!caps.num_tensors && count > 0) caps.num_tensors = count;
  if ((!types.empty() && types.size() != count) || (!dims.empty() && dims.size() != count)) {
    throw CapsError("types/dimensions count does not match num_tensors");
  }
  if (count > kMaxTensors) throw CapsError("more than 16 tensors");
  caps.tensors.assign(count, TensorSpec::any());
  for (std::size_t i = 0; i < count; ++i) {
    if (!types.empty() && types[i] != "*") caps.tensors[i].type = parse_element_type(types[i]);
    if (!dims.empty()) caps.tensors[i] = parse_spec_dim(dims[i], caps.tensors[i]);
  }
  return StreamCaps(std::move(caps));
}

StreamCaps parse_media_caps(MediaKind kind,
                            const std::vector<std::pair<std::string, std::string>>& fields) {
  MediaCaps caps;
  caps.kind = kind;
  for (const auto& [key, value] : fields) {
    if (key == "framerate") {
      if (value != "*") caps.rate = Framerate::parse(value);
    } else if (kind == MediaKind::kRaster && key == "width") {
      caps.width = parse_u32_field(key, value);
    } else if (kind == MediaKind::kRaster && key == "height") {
      caps.height = parse_u32_field(key, value);
    } else if (kind == MediaKind::kRaster && key == "format") {
      if (value == "RGB") {
        caps.channels = 3;
      } else if (value == "GRAY8") {
        caps.channels = 1;
      } else {
        throw CapsError("unsupported raster format '" + value + "'");
      }
    } else {
      throw CapsError("unknown media caps field '" + key + "'");
    }
  }
  return StreamCaps(std::move(caps));
}

}  // namespace

TensorSpec TensorSpec::any() {
  TensorSpec s;
  s.dim = {std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  return s;
}

TensorSpec TensorSpec::from(const TensorInfo& info) {
  TensorSpec s;
  s.type = info.type;
  for (std::size_t i = 0; i < kRankLimit; ++i) s.dim[i] = info.dim[i];
  s.rank = info.dim.explicit_rank();
  return s;
}

bool TensorSpec::fixed() const {
  return type.has_value() &&
         std::all_of(dim.begin(), dim.end(), [](auto& d) { return d.has_value(); });
}

StreamCaps StreamCaps::any_tensor() {
  TensorCaps caps;
  caps.multi = true;
  return StreamCaps(std::move(caps));
}

StreamCaps StreamCaps::from_info(const TensorsInfo& info) {
  info.validate();
  TensorCaps caps;
  caps.multi = info.count() > 1;
  caps.num_tensors = info.count();
  for (const auto& t : info.tensors) caps.tensors.push_back(TensorSpec::from(t));
  caps.rate = info.rate;
  return StreamCaps(std::move(caps));
}

StreamCaps StreamCaps::raster(std::uint32_t width, std::uint32_t height,
                              std::uint32_t channels, Framerate rate) {
  MediaCaps caps;
  caps.kind = MediaKind::kRaster;
  caps.width = width;
  caps.height = height;
  caps.channels = channels;
  caps.rate = rate;
  return StreamCaps(std::move(caps));
}

StreamCaps StreamCaps::parse(std::string_view text) {
  auto parts = detail::split(text, ',');
  std::string_view name = parts.front();
  std::vector<std::pair<std::string, std::string>> fields;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == parts[i].size()) {
      throw CapsError("bad caps field '" + std::string(parts[i]) + "' in '" +
                      std::string(text) + "'");
    }
    fields.emplace_back(std::string(parts[i].substr(0, eq)),
                        std::string(parts[i].substr(eq + 1)));
  }
  if (name == "ANY") {
    if (!fields.empty()) throw CapsError("ANY caps take no fields");
    return any();
  }
  if (name == kTensorName) return parse_tensor_caps(false, fields);
  if (name == kTensorsName) return parse_tensor_caps(true, fields);
  if (name == kRasterName) return parse_media_caps(MediaKind::kRaster, fields);
  if (name == kTextName) return parse_media_caps(MediaKind::kText, fields);
  if (name == kBinaryName) return parse_media_caps(MediaKind::kBinary, fields);
  throw CapsError("unknown caps type '" + std::string(name) + "'");
}

bool StreamCaps::fixed() const {
  if (is_any()) return false;
  if (is_media()) {
    const auto& m = media();
    if (!m.rate) return false;
    return m.kind != MediaKind::kRaster || (m.width && m.height && m.channels);
  }
  const auto& t = tensor();
  return t.num_tensors && t.rate &&
         std::all_of(t.tensors.begin(), t.tensors.end(),
                     [](const TensorSpec& s) { return s.fixed(); });
}

TensorsInfo StreamCaps::to_info() const {
  if (!is_tensor() || !fixed()) {
    throw CapsError("caps '" + to_string() + "' are not fixed tensor caps");
  }
  TensorsInfo info;
  for (const auto& s : tensor().tensors) {
    std::array<std::uint32_t, kRankLimit> d{};
    for (std::size_t i = 0; i < kRankLimit; ++i) d[i] = *s.dim[i];
    info.tensors.push_back(TensorInfo{*s.type, TensorDim(d, s.rank), {}});
  }
  info.rate = *tensor().rate;
  info.validate();
  return info;
}

std::optional<Framerate> StreamCaps::rate() const {
  if (is_tensor()) return tensor().rate;
  if (is_media()) return media().rate;
  return std::nullopt;
}

std::string StreamCaps::to_string() const {
  if (is_any()) return "ANY";
  std::string out;
  if (is_media()) {
    const auto& m = media();
    switch (m.kind) {
      case MediaKind::kRaster:
        out = kRasterName;
        if (m.channels) out += *m.channels == 3 ? ",format=RGB" : ",format=GRAY8";
        if (m.width) out += ",width=" + std::to_string(*m.width);
        if (m.height) out += ",height=" + std::to_string(*m.height);
        break;
      case MediaKind::kText:
        out = kTextName;
        break;
      case MediaKind::kBinary:
        out = kBinaryName;
        break;
    }
    if (m.rate) out += ",framerate=" + m.rate->to_string();
    return out;
  }
  const auto& t = tensor();
  bool any_type = std::any_of(t.tensors.begin(), t.tensors.end(),
                              [](const TensorSpec& s) { return s.type.has_value(); });
  bool any_dim = std::any_of(t.tensors.begin(), t.tensors.end(),
                             [](const TensorSpec& s) { return !dims_all_wild(s); });
  auto type_str = [](const TensorSpec& s) {
    return s.type ? std::string(nnpipe::to_string(*s.type)) : std::string("*");
  };
  if (!t.multi) {
    out = kTensorName;
    if (!t.tensors.empty()) {
      if (any_type) out += ",type=" + type_str(t.tensors[0]);
      if (any_dim) out += ",dimension=" + render_spec_dim(t.tensors[0]);
    }
  } else {
    out = kTensorsName;
    if (t.num_tensors) out += ",num_tensors=" + std::to_string(*t.num_tensors);
    if (any_type) {
      out += ",types=";
      for (std::size_t i = 0; i < t.tensors.size(); ++i) {
        if (i) out += '.';
        out += type_str(t.tensors[i]);
      }
    }
    if (any_dim) {
      out += ",dimensions=";
      for (std::size_t i = 0; i < t.tensors.size(); ++i) {
        if (i) out += '.';
        out += render_spec_dim(t.tensors[i]);
      }
    }
  }
  if (t.rate) out += ",framerate=" + t.rate->to_string();
  return out;
}

TensorDim canonical_dim(const TensorDim& dim) {
  // Storage is always four components; padding is implicit.
  return dim;
}

bool caps_equal(const StreamCaps& a, const StreamCaps& b) {
  if (a.value().index() != b.value().index()) return false;
  if (a.is_any()) return true;
  if (a.is_media()) {
    const auto& x = a.media();
    const auto& y = b.media();
    return x.kind == y.kind && x.width == y.width && x.height == y.height &&
           x.channels == y.channels && x.rate == y.rate;
  }
  const auto& x = a.tensor();
  const auto& y = b.tensor();
  if (x.num_tensors != y.num_tensors || x.rate != y.rate ||
      x.tensors.size() != y.tensors.size()) {
    return false;
  }
  for (std::size_t i = 0; i < x.tensors.size(); ++i) {
    if (x.tensors[i].type != y.tensors[i].type || x.tensors[i].dim != y.tensors[i].dim) {
      return false;
    }
  }
  return true;
}

std::optional<StreamCaps> caps_intersect(const StreamCaps& a, const StreamCaps& b) {
  if (a.is_any()) return b;
  if (b.is_any()) return a;
  if (a.value().index() != b.value().index()) return std::nullopt;

  if (a.is_media()) {
    const auto& x = a.media();
    const auto& y = b.media();
    if (x.kind != y.kind) return std::nullopt;
    MediaCaps out;
    out.kind = x.kind;
    if (!meet(x.width, y.width, out.width) || !meet(x.height, y.height, out.height) ||
        !meet(x.channels, y.channels, out.channels) || !meet_rate(x.rate, y.rate, out.rate)) {
      return std::nullopt;
    }
    return StreamCaps(std::move(out));
  }

  const auto& x = a.tensor();
  const auto& y = b.tensor();
  TensorCaps out;
  if (!meet(x.num_tensors, y.num_tensors, out.num_tensors)) return std::nullopt;
  if (!meet_rate(x.rate, y.rate, out.rate)) return std::nullopt;
  if (x.tensors.empty()) {
    out.tensors = y.tensors;
  } else if (y.tensors.empty()) {
    out.tensors = x.tensors;
  } else {
    if (x.tensors.size() != y.tensors.size()) return std::nullopt;
    for (std::size_t i = 0; i < x.tensors.size(); ++i) {
      const auto& s = x.tensors[i];
      const auto& t = y.tensors[i];
      TensorSpec m;
      if (!meet(s.type, t.type, m.type)) return std::nullopt;
      for (std::size_t k = 0; k < kRankLimit; ++k) {
        if (!meet(s.dim[k], t.dim[k], m.dim[k])) return std::nullopt;
      }
      if (s.rank && t.rank) {
        m.rank = std::max(*s.rank, *t.rank);
      } else {
        m.rank = s.rank ? s.rank : t.rank;
      }
      out.tensors.push_back(m);
    }
  }
  // other/tensor only describes a single tensor.
  std::size_t count = out.num_tensors.value_or(out.tensors.size());
  out.multi = (x.multi && y.multi) || count > 1;
  if (!out.multi && out.num_tensors && *out.num_tensors != 1) return std::nullopt;
  if (!x.multi && !y.multi) out.num_tensors = 1;
  if (out.num_tensors && out.tensors.empty()) {
    out.tensors.assign(*out.num_tensors, TensorSpec::any());
  }
  if (out.num_tensors && out.tensors.size() != *out.num_tensors) return std::nullopt;
  return StreamCaps(std::move(out));
}

StreamCaps fixate(const StreamCaps& caps) {
  if (caps.is_any()) throw NegotiationError("cannot fixate ANY caps");
  if (caps.is_media()) {
    MediaCaps m = caps.media();
    if (m.kind == MediaKind::kRaster) {
      if (!m.width) m.width = 1;
      if (!m.height) m.height = 1;
      if (!m.channels) m.channels = 3;
    }
    if (!m.rate) m.rate = Framerate{};
    return StreamCaps(std::move(m));
  }
  TensorCaps t = caps.tensor();
  if (!t.num_tensors) {
    t.num_tensors = t.tensors.empty() ? 1 : t.tensors.size();
  }
  if (t.tensors.empty()) t.tensors.assign(*t.num_tensors, TensorSpec::any());
  for (auto& s : t.tensors) {
    if (!s.type) s.type = ElementType::kFloat32;
    for (auto& d : s.dim) {
      if (!d) d = 1;
    }
  }
  if (!t.rate) t.rate = Framerate{};
  t.multi = t.multi || *t.num_tensors > 1;
  return StreamCaps(std::move(t));
}

StreamCaps negotiate_link(const StreamCaps& src, const StreamCaps& sink) {
  auto common = caps_intersect(src, sink);
  if (!common) {
    throw NegotiationError("incompatible caps: '" + src.to_string() + "' vs '" +
                           sink.to_string() + "'");
  }
  if (common->is_any()) {
    throw NegotiationError("cannot fixate ANY caps between '" + src.to_string() +
                           "' and '" + sink.to_string() + "'");
  }
  return fixate(*common);
}

}  // namespace nnpipe
