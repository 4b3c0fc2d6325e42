#include "nnpipe/container.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace nnpipe {
namespace {

constexpr char kMagic[8] = {'N', 'N', 'S', 'T', 'R', 'M', '1', '\0'};

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::byte> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(pos_, std::string("truncated stream file while reading ") + what);
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> encode_stream(const StreamFile& file) {
  TensorsInfo info = file.caps.to_info();
  for (std::size_t i = 0; i < file.frames.size(); ++i) {
    try {
      check_frame(info, file.frames[i]);
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(i) + ": " + e.what());
    }
  }
  nlohmann::json header = {{"caps", file.caps.to_string()},
                           {"frame_count", file.frames.size()},
                           {"paced", file.paced}};
  std::string text = header.dump();
  std::vector<std::byte> out;
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  for (char c : text) out.push_back(static_cast<std::byte>(c));
  for (const auto& f : file.frames) {
    put<std::uint64_t>(out, f.timestamp_ns);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.chunks.size()));
    for (const auto& c : f.chunks) {
      put<std::uint64_t>(out, c.size());
      auto b = c.bytes();
      out.insert(out.end(), b.begin(), b.end());
    }
  }
  return out;
}

StreamFile decode_stream(std::span<const std::byte> bytes) {
  Cursor in(bytes);
  auto magic = in.take(sizeof kMagic, "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError(0, "not an NNSTRM1 stream file (bad magic)");
  }
  auto header_len = in.get<std::uint32_t>("header length");
  std::size_t header_at = in.offset();
  auto raw = in.take(header_len, "header");

  StreamFile file;
  std::uint64_t frame_count = 0;
  try {
    auto header = nlohmann::json::parse(std::string(reinterpret_cast<const char*>(raw.data()),
                                                    raw.size()));
    file.caps = StreamCaps::parse(header.at("caps").get<std::string>());
    frame_count = header.at("frame_count").get<std::uint64_t>();
    file.paced = header.value("paced", false);
  } catch (const std::exception& e) {
    throw FormatError(header_at, std::string("bad stream header: ") + e.what());
  }
  TensorsInfo info;
  try {
    info = file.caps.to_info();
  } catch (const Error& e) {
    throw FormatError(header_at, std::string("header caps: ") + e.what());
  }

  for (std::uint64_t i = 0; i < frame_count; ++i) {
    std::size_t frame_at = in.offset();
    Frame f;
    f.timestamp_ns = in.get<std::uint64_t>("frame timestamp");
    f.seq = i;
    auto count = in.get<std::uint32_t>("chunk count");
    if (count != info.count()) {
      throw FormatError(frame_at, "frame " + std::to_string(i) + " has " +
                                      std::to_string(count) + " chunks, caps declare " +
                                      std::to_string(info.count()));
    }
    for (std::uint32_t c = 0; c < count; ++c) {
      std::size_t chunk_at = in.offset();
      auto len = in.get<std::uint64_t>("chunk length");
      if (len != info.tensors[c].byte_size()) {
        throw FormatError(chunk_at, "frame " + std::to_string(i) + " tensor " +
                                        std::to_string(c) + " has " + std::to_string(len) +
                                        " bytes, caps declare " +
                                        std::to_string(info.tensors[c].byte_size()));
      }
      auto data = in.take(len, "chunk payload");
      f.chunks.push_back(Chunk::adopt(std::vector<std::byte>(data.begin(), data.end())));
    }
    file.frames.push_back(std::move(f));
  }
  if (!in.done()) throw FormatError(in.offset(), "trailing bytes after last frame");
  return file;
}

void write_stream_file(const std::filesystem::path& path, const StreamFile& file) {
  auto bytes = encode_stream(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

StreamFile read_stream_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_stream(
      std::span<const std::byte>(reinterpret_cast<const std::byte*>(raw.data()), raw.size()));
}

}  // namespace nnpipe
