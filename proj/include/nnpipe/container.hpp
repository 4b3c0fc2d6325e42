#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "nnpipe/caps.hpp"
#include "nnpipe/tensor.hpp"

namespace nnpipe {

// NNSTRM1 stream container, little-endian throughout:
//   "NNSTRM1\0"  u32 header_len  JSON header {caps, frame_count, paced}
//   per frame:   u64 timestamp_ns  u32 chunk_count  (u64 len, bytes)*
struct StreamFile {
  StreamCaps caps;
  bool paced = false;
  std::vector<Frame> frames;
};

std::vector<std::byte> encode_stream(const StreamFile& file);
// Throws FormatError carrying the byte offset of the problem.
StreamFile decode_stream(std::span<const std::byte> bytes);

void write_stream_file(const std::filesystem::path& path, const StreamFile& file);
StreamFile read_stream_file(const std::filesystem::path& path);

}  // namespace nnpipe
