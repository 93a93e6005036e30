#pragma once

// Token stream files: header (magic, version, message count), then
// 22 x count u32 token ids, little-endian.

#include <filesystem>
#include <fstream>
#include <vector>

#include "lobgen/tok/codec.hpp"
#include "lobgen/util/binio.hpp"

namespace lobgen::tok {

inline constexpr std::uint32_t kStreamMagic = 0x4C4F4254;  // "LOBT"
inline constexpr std::uint32_t kStreamVersion = 1;

inline void write_token_stream(std::ostream& os,
                               const std::vector<EncodedMessage>& msgs) {
  util::write_le(os, kStreamMagic);
  util::write_le(os, kStreamVersion);
  util::write_le<std::uint64_t>(os, msgs.size());
  for (const auto& m : msgs)
    for (TokenId t : m) util::write_le(os, t);
}

inline void write_token_stream(const std::filesystem::path& path,
                               const std::vector<EncodedMessage>& msgs) {
  util::atomic_write(path, [&](std::ostream& os) { write_token_stream(os, msgs); });
}

inline std::vector<EncodedMessage> read_token_stream(std::istream& is) {
  if (util::read_le<std::uint32_t>(is) != kStreamMagic)
    throw util::IoError("bad token stream magic");
  if (util::read_le<std::uint32_t>(is) != kStreamVersion)
    throw util::IoError("unsupported token stream version");
  auto count = util::read_le<std::uint64_t>(is);
  std::vector<EncodedMessage> msgs(count);
  for (auto& m : msgs)
    for (auto& t : m) t = util::read_le<TokenId>(is);
  return msgs;
}

inline std::vector<EncodedMessage> read_token_stream(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw util::IoError("cannot open " + path.string());
  return read_token_stream(is);
}

}  // namespace lobgen::tok
