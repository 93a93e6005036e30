#pragma once

// Flat key-value run configuration shared by every subcommand. Precedence is
// command-line flag > config file > built-in default; the effective config
// is serialized next to each run's outputs and hashed into every report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lobgen/s5/model.hpp"
#include "lobgen/util/rng.hpp"

namespace lobgen::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // paths
  std::string data_root{"data/raw"};
  std::string dataset_dir{"data/datasets"};
  std::string checkpoint_dir{"data/checkpoints"};
  std::string report_dir{"data/reports"};
  // ingest / preprocessing
  std::string symbol{"SYN"};
  int P{32};
  // model
  int n_messages{24};
  int hidden{48};
  int state{48};
  int layers_msg{2};
  int layers_book{1};
  int layers_joint{2};
  int seq_len_joint{0};
  double book_scale{1e-3};
  int scan_chunks{8};
  // training
  int epochs{3};
  int batch_size{16};
  int stride{0};
  double lr{1e-3};
  double clip_norm{1.0};
  // evaluation protocol
  int eval_sequences{50};
  int eval_context{100};
  int eval_steps{100};
  // misc
  std::uint64_t seed{1};
  int workers{1};

  s5::ModelConfig model_config() const {
    s5::ModelConfig m;
    m.n_messages = n_messages;
    m.hidden = hidden;
    m.state = state;
    m.layers_msg = layers_msg;
    m.layers_book = layers_book;
    m.layers_joint = layers_joint;
    m.seq_len_joint = seq_len_joint;
    m.P = P;
    m.book_scale = book_scale;
    m.scan_chunks = scan_chunks;
    m.seed = seed;
    return m;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

template <class F>
void visit_fields(RunConfig& c, F&& f) {
  f("data_root", c.data_root);
  f("dataset_dir", c.dataset_dir);
  f("checkpoint_dir", c.checkpoint_dir);
  f("report_dir", c.report_dir);
  f("symbol", c.symbol);
  f("P", c.P);
  f("n_messages", c.n_messages);
  f("hidden", c.hidden);
  f("state", c.state);
  f("layers_msg", c.layers_msg);
  f("layers_book", c.layers_book);
  f("layers_joint", c.layers_joint);
  f("seq_len_joint", c.seq_len_joint);
  f("book_scale", c.book_scale);
  f("scan_chunks", c.scan_chunks);
  f("epochs", c.epochs);
  f("batch_size", c.batch_size);
  f("stride", c.stride);
  f("lr", c.lr);
  f("clip_norm", c.clip_norm);
  f("eval_sequences", c.eval_sequences);
  f("eval_context", c.eval_context);
  f("eval_steps", c.eval_steps);
  f("seed", c.seed);
  f("workers", c.workers);
}

inline void assign_field(std::string& field, const std::string& v) { field = v; }
inline void assign_field(int& field, const std::string& v) { field = std::stoi(v); }
inline void assign_field(double& field, const std::string& v) { field = std::stod(v); }
inline void assign_field(std::uint64_t& field, const std::string& v) {
  field = std::stoull(v);
}

inline std::string field_string(const std::string& v) { return v; }
inline std::string field_string(int v) { return std::to_string(v); }
inline std::string field_string(std::uint64_t v) { return std::to_string(v); }
inline std::string field_string(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

inline std::string serialize_config(const RunConfig& config) {
  std::ostringstream os;
  auto c = config;
  detail::visit_fields(c, [&](const char* key, auto& value) {
    os << key << " = " << detail::field_string(value) << "\n";
  });
  return os.str();
}

// `key = value` lines; '#' starts a comment, blank lines ignored.
inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string{};
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  bool matched = false;
  for (const auto& [key, value] : kv) {
    matched = false;
    detail::visit_fields(base, [&, k = key, v = value](const char* name, auto& field) {
      if (k == name) {
        detail::assign_field(field, v);
        matched = true;
      }
    });
    if (!matched) throw ConfigError("unknown config key: " + key);
  }
  return base;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  return parse_config(is, base);
}

inline std::uint64_t config_hash(const RunConfig& config) {
  return util::fnv1a64(serialize_config(config));
}

// CI fixture hook: LOBGEN_DATA_ROOT overrides the raw-data root.
inline void apply_env_overrides(RunConfig& config) {
  if (const char* root = std::getenv("LOBGEN_DATA_ROOT")) config.data_root = root;
}

}  // namespace lobgen::cli
