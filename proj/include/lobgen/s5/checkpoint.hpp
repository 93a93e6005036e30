#pragma once

// Model checkpoints: a JSON header (architecture, vocabulary hash, training
// step) followed by every parameter tensor as little-endian floats in fixed
// visitation order. Byte-for-byte deterministic for identical models.

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "lobgen/s5/adam.hpp"
#include "lobgen/s5/model.hpp"
#include "lobgen/tok/vocabulary.hpp"
#include "lobgen/util/binio.hpp"

namespace lobgen::s5 {

inline constexpr std::uint32_t kCheckpointMagic = 0x4C4F4243;  // "LOBC"
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return nlohmann::json{{"n_messages", c.n_messages},
                        {"tokens_per_message", c.tokens_per_message},
                        {"vocab_size", c.vocab_size},
                        {"hidden", c.hidden},
                        {"state", c.state},
                        {"layers_msg", c.layers_msg},
                        {"layers_book", c.layers_book},
                        {"layers_joint", c.layers_joint},
                        {"seq_len_joint", c.seq_len_joint},
                        {"P", c.P},
                        {"book_scale", c.book_scale},
                        {"scan_chunks", c.scan_chunks},
                        {"seed", c.seed}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  j.at("n_messages").get_to(c.n_messages);
  j.at("tokens_per_message").get_to(c.tokens_per_message);
  j.at("vocab_size").get_to(c.vocab_size);
  j.at("hidden").get_to(c.hidden);
  j.at("state").get_to(c.state);
  j.at("layers_msg").get_to(c.layers_msg);
  j.at("layers_book").get_to(c.layers_book);
  j.at("layers_joint").get_to(c.layers_joint);
  j.at("seq_len_joint").get_to(c.seq_len_joint);
  j.at("P").get_to(c.P);
  j.at("book_scale").get_to(c.book_scale);
  j.at("scan_chunks").get_to(c.scan_chunks);
  j.at("seed").get_to(c.seed);
  return c;
}

template <class T>
void write_checkpoint(std::ostream& os, S5ModelT<T>& model, long step) {
  nlohmann::json header{{"config", config_to_json(model.config)},
                        {"step", step},
                        {"scalar_bytes", sizeof(T)},
                        {"vocab_hash", tok::vocabulary_manifest_hash()}};
  const std::string hs = header.dump();
  util::write_le<std::uint32_t>(os, kCheckpointMagic);
  util::write_le<std::uint32_t>(os, kCheckpointVersion);
  util::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(hs.size()));
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  auto dump = [&](const std::string&, auto& tensor) {
    auto [p, n] = detail::real_view<T>(tensor);
    util::write_le<std::uint64_t>(os, n);
    for (std::size_t i = 0; i < n; ++i) {
      if constexpr (sizeof(T) == 4)
        util::write_le_f32(os, static_cast<float>(p[i]));
      else
        util::write_le_f64(os, static_cast<double>(p[i]));
    }
  };
  model.visit(dump, dump);
  if (!os) throw CheckpointError("checkpoint write failed");
}

template <class T>
std::pair<S5ModelT<T>, long> read_checkpoint(std::istream& is) {
  if (util::read_le<std::uint32_t>(is) != kCheckpointMagic)
    throw CheckpointError("bad checkpoint magic");
  if (util::read_le<std::uint32_t>(is) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version");
  const auto hlen = util::read_le<std::uint32_t>(is);
  std::string hs(hlen, '\0');
  is.read(hs.data(), hlen);
  if (!is) throw CheckpointError("truncated checkpoint header");
  nlohmann::json header = nlohmann::json::parse(hs);
  if (header.at("vocab_hash").get<std::uint64_t>() != tok::vocabulary_manifest_hash())
    throw CheckpointError("checkpoint vocabulary does not match this build");
  if (header.at("scalar_bytes").get<std::size_t>() != sizeof(T))
    throw CheckpointError("checkpoint scalar width mismatch");

  // shapes come from the config; random_init then overwrite
  auto model = S5ModelT<T>::random_init(config_from_json(header.at("config")));
  auto load = [&](const std::string& name, auto& tensor) {
    auto [p, n] = detail::real_view<T>(tensor);
    if (util::read_le<std::uint64_t>(is) != n)
      throw CheckpointError("tensor size mismatch at " + name);
    for (std::size_t i = 0; i < n; ++i) {
      if constexpr (sizeof(T) == 4)
        p[i] = static_cast<T>(util::read_le_f32(is));
      else
        p[i] = static_cast<T>(util::read_le_f64(is));
    }
  };
  model.visit(load, load);
  if (!is) throw CheckpointError("truncated checkpoint body");
  return {std::move(model), header.at("step").get<long>()};
}

template <class T>
void save_checkpoint(const std::filesystem::path& path, S5ModelT<T>& model, long step) {
  util::atomic_write(path, [&](std::ostream& os) { write_checkpoint(os, model, step); });
}

template <class T>
std::pair<S5ModelT<T>, long> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path.string());
  return read_checkpoint<T>(is);
}

}  // namespace lobgen::s5
