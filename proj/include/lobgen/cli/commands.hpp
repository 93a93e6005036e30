#pragma once

// Subcommand implementations behind the command-line front end. Kept header
// side so harnesses can drive the same code paths without spawning the tool.

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "lobgen/cli/config.hpp"
#include "lobgen/data/dataset_io.hpp"
#include "lobgen/data/lobster.hpp"
#include "lobgen/data/preprocess.hpp"
#include "lobgen/data/synthetic.hpp"
#include "lobgen/eval/metrics.hpp"
#include "lobgen/eval/perplexity.hpp"
#include "lobgen/gen/generator.hpp"
#include "lobgen/s5/checkpoint.hpp"
#include "lobgen/s5/train.hpp"
#include "lobgen/tok/stream.hpp"

namespace lobgen::cli {

namespace fs = std::filesystem;

inline constexpr std::size_t kSeedSnapshotDepth = 20;

// ---------------------------------------------------------------------------
// shared helpers

inline s5::EncodedDay encode_day(const data::DayDataset& day) {
  s5::EncodedDay out;
  out.books = day.books;
  out.tokens.reserve(day.messages.size());
  for (const auto& m : day.messages) out.tokens.push_back(tok::encode(m));
  return out;
}

inline s5::EncodedDay slice_day(const data::DayDataset& day, std::size_t start,
                                std::size_t count) {
  s5::EncodedDay out;
  out.tokens.reserve(count);
  out.books.assign(day.books.begin() + static_cast<std::ptrdiff_t>(start),
                   day.books.begin() + static_cast<std::ptrdiff_t>(start + count));
  for (std::size_t i = start; i < start + count; ++i)
    out.tokens.push_back(tok::encode(day.messages[i]));
  return out;
}

// Book state reached by replaying the first `count` recorded messages.
inline lob::OrderBookL3 replay_to(const data::DayDataset& day, std::size_t count) {
  lob::OrderBookL3 book = lob::OrderBookL3::from_snapshot(day.initial_snapshot);
  for (std::size_t i = 0; i < count; ++i) {
    auto anchor = book.mid_anchor_ticks();
    if (!anchor) throw lob::UndefinedMid();
    gen::correct_and_apply(book, day.messages[i], *anchor);
  }
  return book;
}

inline double mid_or_nan(const lob::OrderBookL3& book) {
  auto m = book.mid2_ticks();
  return m ? static_cast<double>(*m) / 2.0 : std::numeric_limits<double>::quiet_NaN();
}

inline void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  util::atomic_write(path, [&](std::ostream& os) { os << text; });
}

// ---------------------------------------------------------------------------
// ingest: raw LOBSTER CSV pair (or synthetic fixture) -> dataset file

struct IngestOptions {
  std::vector<std::string> dates;
  int synthetic_messages{0};  // > 0: generate fixture days instead of reading CSVs
};

inline fs::path dataset_path(const RunConfig& cfg, const std::string& date) {
  return fs::path(cfg.dataset_dir) / (cfg.symbol + "_" + date + ".bin");
}

inline fs::path find_lobster_file(const RunConfig& cfg, const std::string& date,
                                  const std::string& kind) {
  const fs::path root(cfg.data_root);
  if (!fs::is_directory(root))
    throw util::IoError("data root is not a directory: " + root.string());
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.find(cfg.symbol) != std::string::npos &&
        name.find(date) != std::string::npos &&
        name.find(kind) != std::string::npos && entry.path().extension() == ".csv")
      return entry.path();
  }
  throw util::IoError("no " + kind + " file for " + cfg.symbol + " " + date + " in " +
                      root.string());
}

inline int cmd_ingest(const RunConfig& cfg, const IngestOptions& opt,
                      std::ostream& out = std::cout) {
  fs::create_directories(cfg.dataset_dir);
  int day_index = 0;
  for (const auto& date : opt.dates) {
    std::vector<data::RawMessage> raw_msgs;
    std::vector<lob::L2Snapshot> raw_books;
    if (opt.synthetic_messages > 0) {
      data::SyntheticConfig scfg;
      scfg.seed = util::derive_seed(cfg.seed, "synthetic", day_index);
      scfg.n_messages = opt.synthetic_messages;
      auto raw = data::make_synthetic_day(scfg);
      raw_msgs = std::move(raw.messages);
      raw_books = std::move(raw.books);
    } else {
      auto msg_path = find_lobster_file(cfg, date, "message");
      auto book_path = find_lobster_file(cfg, date, "orderbook");
      std::ifstream ms(msg_path), bs(book_path);
      if (!ms) throw util::IoError("cannot open " + msg_path.string());
      if (!bs) throw util::IoError("cannot open " + book_path.string());
      auto [m, b] = data::parse_lobster(ms, bs, 10);
      raw_msgs = std::move(m);
      raw_books = std::move(b);
    }
    auto [msgs, books] = data::filter_messages(raw_msgs, raw_books);
    if (msgs.size() < 2) {
      out << "warning: " << cfg.symbol << " " << date
          << " has no in-session messages, skipped\n";
      ++day_index;
      continue;
    }
    data::ClipStats stats;
    auto day = data::preprocess_day(msgs, books, cfg.P, cfg.symbol, date, &stats);
    const auto path = dataset_path(cfg, date);
    data::save_dataset(path, day);
    out << cfg.symbol << " " << date << ": " << day.messages.size()
        << " messages, clip rate " << std::setprecision(6) << stats.clip_rate()
        << " -> " << path.string() << "\n";
    ++day_index;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// replay-check: stored volume images must be reproducible from the snapshot

inline int cmd_replay_check(const fs::path& dataset_file,
                            std::ostream& out = std::cout) {
  auto day = data::load_dataset(dataset_file);
  if (day.messages.empty()) {
    out << "replay-check " << dataset_file.string() << ": PASS (empty dataset)\n";
    return 0;
  }
  lob::OrderBookL3 book = lob::OrderBookL3::from_snapshot(day.initial_snapshot);
  auto prev_anchor = book.mid_anchor_ticks();
  if (!prev_anchor) {
    out << "replay-check: FAIL (snapshot has no mid)\n";
    return 1;
  }
  lob::Ticks prev = *prev_anchor;
  for (std::size_t i = 0; i < day.messages.size(); ++i) {
    const lob::Ticks anchor = *book.mid_anchor_ticks();
    auto img = book.export_volume_image(prev, day.P);
    if (!(img == day.books[i])) {
      out << "replay-check " << dataset_file.string() << ": FAIL at message " << i
          << " (mid_change stored " << day.books[i].mid_change_ticks << ", replayed "
          << img.mid_change_ticks << ")\n";
      return 1;
    }
    gen::correct_and_apply(book, day.messages[i], anchor);
    prev = anchor;
  }
  out << "replay-check " << dataset_file.string() << ": PASS ("
      << day.messages.size() << " messages)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// encode: dataset -> token stream file

inline int cmd_encode(const fs::path& dataset_file, const fs::path& out_file,
                      std::ostream& out = std::cout) {
  auto day = data::load_dataset(dataset_file);
  std::vector<tok::EncodedMessage> encoded;
  encoded.reserve(day.messages.size());
  for (const auto& m : day.messages) encoded.push_back(tok::encode(m));
  fs::create_directories(out_file.parent_path().empty() ? "." : out_file.parent_path());
  util::atomic_write(out_file,
                     [&](std::ostream& os) { tok::write_token_stream(os, encoded); });
  out << "encoded " << encoded.size() << " messages (" << encoded.size() * 22
      << " tokens) -> " << out_file.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

inline int cmd_train(const RunConfig& cfg, const std::vector<fs::path>& dataset_files,
                     std::ostream& out = std::cout) {
  if (dataset_files.empty()) {
    out << "error: no dataset files\n";
    return 1;
  }
  std::vector<s5::EncodedDay> days;
  for (const auto& f : dataset_files) days.push_back(encode_day(data::load_dataset(f)));
  // last day validates when more than one is given
  std::vector<s5::EncodedDay> val_days;
  if (days.size() > 1) {
    val_days.push_back(days.back());
    days.pop_back();
  }

  auto model = s5::S5Model::random_init(cfg.model_config());
  s5::TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.stride = cfg.stride;
  tc.seed = util::derive_seed(cfg.seed, "train");
  tc.adam.lr = cfg.lr;
  tc.adam.clip_norm = cfg.clip_norm;

  s5::TrainResult result;
  try {
    result = s5::train(model, days, val_days, tc, static_cast<s5::Adam<float>*>(nullptr),
                       [&](const s5::TrainLogEntry& e) {
                         out << "epoch " << e.epoch << " step " << e.step << " loss "
                             << std::setprecision(6) << e.train_loss << "\n";
                       });
  } catch (const s5::TrainDiverged& e) {
    out << "error: " << e.what() << "\n";
    return 1;
  }
  for (std::size_t i = 0; i < result.epoch_val_loss.size(); ++i)
    out << "epoch " << i << " val loss " << std::setprecision(6)
        << result.epoch_val_loss[i] << "\n";

  fs::create_directories(cfg.checkpoint_dir);
  const fs::path ckpt = fs::path(cfg.checkpoint_dir) / "model.ckpt";
  s5::save_checkpoint(ckpt, model, result.steps);

  std::ostringstream log;
  log << "# config_hash=" << config_hash(cfg) << "\n";
  log << "epoch,step,train_loss,grad_norm\n";
  for (const auto& e : result.log)
    log << e.epoch << "," << e.step << "," << std::setprecision(12) << e.train_loss
        << "," << e.grad_norm << "\n";
  write_text_atomic(fs::path(cfg.checkpoint_dir) / "train_log.csv", log.str());
  write_text_atomic(fs::path(cfg.checkpoint_dir) / "config.txt", serialize_config(cfg));
  out << "checkpoint -> " << ckpt.string() << " (" << result.steps << " steps)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// generate

// Seed state for one evaluation/generation sequence: the L2 snapshot n
// messages before `start` plus those n context messages.
struct SeedWindow {
  lob::L2Snapshot snapshot;
  std::vector<data::PreprocessedMessage> context;
  std::size_t start{};  // index of the first generated / compared message
};

inline SeedWindow make_seed_window(const data::DayDataset& day, std::size_t start,
                                   int n) {
  if (start < static_cast<std::size_t>(n))
    throw std::invalid_argument("start before the first full window");
  auto book = replay_to(day, start - static_cast<std::size_t>(n));
  SeedWindow w;
  w.start = start;
  w.snapshot = book.export_l2(kSeedSnapshotDepth,
                              day.messages[start - static_cast<std::size_t>(n)].time_ns);
  w.context.assign(day.messages.begin() + static_cast<std::ptrdiff_t>(start) - n,
                   day.messages.begin() + static_cast<std::ptrdiff_t>(start));
  return w;
}

// Random sequence starts with full context and continuation margins.
inline std::vector<std::size_t> draw_starts(const data::DayDataset& day, int context,
                                            int steps, int count, std::uint64_t seed) {
  const std::size_t lo = static_cast<std::size_t>(context);
  if (day.messages.size() < lo + static_cast<std::size_t>(steps) + 1)
    throw std::invalid_argument("dataset too short for the evaluation protocol");
  const std::size_t hi = day.messages.size() - static_cast<std::size_t>(steps);
  std::mt19937_64 rng(util::derive_seed(seed, "starts"));
  std::uniform_int_distribution<std::size_t> dist(lo, hi - 1);
  std::vector<std::size_t> starts(static_cast<std::size_t>(count));
  for (auto& s : starts) s = dist(rng);
  return starts;
}

inline int cmd_generate(const RunConfig& cfg, const fs::path& checkpoint,
                        const fs::path& dataset_file, const fs::path& out_dir,
                        std::ostream& out = std::cout) {
  auto [model, ckpt_steps] = s5::load_checkpoint<float>(checkpoint);
  s5::S5SequenceModel seq_model(model);
  auto day = data::load_dataset(dataset_file);
  const int n = model.config.n_messages;
  auto starts = draw_starts(day, std::max(cfg.eval_context, n), cfg.eval_steps,
                            cfg.eval_sequences, cfg.seed);
  fs::create_directories(out_dir);

  gen::CorrectionTally total;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto w = make_seed_window(day, starts[i], n);
    auto result = gen::generate(seq_model, w.snapshot, w.context, cfg.eval_steps,
                                util::derive_seed(cfg.seed, "sequence", i));
    data::DayDataset gen_day;
    gen_day.symbol = day.symbol;
    gen_day.date = "generated";
    gen_day.P = day.P;
    gen_day.initial_snapshot = w.snapshot;
    std::vector<std::uint8_t> outcomes;
    for (const auto& step : result.steps) {
      gen_day.messages.push_back(step.message);
      gen_day.books.push_back(step.book);
      outcomes.push_back(static_cast<std::uint8_t>(step.outcome.action));
    }
    std::ostringstream name;
    name << "gen_" << std::setw(4) << std::setfill('0') << i << ".bin";
    data::save_dataset(out_dir / name.str(), gen_day, &outcomes);
    const auto& t = result.tally;
    total.new_order += t.new_order;
    total.exact_match += t.exact_match;
    total.match_ignoring_time += t.match_ignoring_time;
    total.init_volume_cancel += t.init_volume_cancel;
    total.best_order_execution += t.best_order_execution;
    total.size_clipped += t.size_clipped;
    total.discarded += t.discarded;
  }

  std::ostringstream telemetry;
  telemetry << "# config_hash=" << config_hash(cfg) << "\n"
            << "outcome,count\n"
            << "new_order," << total.new_order << "\n"
            << "exact_match," << total.exact_match << "\n"
            << "match_ignoring_time," << total.match_ignoring_time << "\n"
            << "init_volume_cancel," << total.init_volume_cancel << "\n"
            << "best_order_execution," << total.best_order_execution << "\n"
            << "size_clipped," << total.size_clipped << "\n"
            << "discarded," << total.discarded << "\n";
  write_text_atomic(out_dir / "telemetry.csv", telemetry.str());
  write_text_atomic(out_dir / "config.txt", serialize_config(cfg));
  out << "generated " << starts.size() << " x " << cfg.eval_steps << " messages (ckpt "
      << ckpt_steps << " steps), discard rate " << std::setprecision(4)
      << total.discard_rate() << " -> " << out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

inline const std::array<const char*, 17>& position_labels() {
  static const std::array<const char*, 17> labels = {
      "type",         "direction",     "price_sign", "price_mag",  "size",
      "dt_0",         "dt_1",          "dt_2",       "dt_3",       "ref_price_sign",
      "ref_price_mag", "ref_size",     "ref_time_0", "ref_time_1", "ref_time_2",
      "ref_time_3",   "ref_time_4"};
  return labels;
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Runs the full evaluation protocol against an arbitrary scoring model.
inline int run_eval(const s5::SequenceModel& model, const data::DayDataset& day,
                    const RunConfig& cfg, const fs::path& report_dir,
                    std::ostream& out = std::cout) {
  const int n = model.config().n_messages;
  const int steps = cfg.eval_steps;
  auto starts = draw_starts(day, std::max(cfg.eval_context, n), steps,
                            cfg.eval_sequences, cfg.seed);

  // perplexity over the real continuations
  std::vector<s5::EncodedDay> ppl_seqs;
  for (auto s : starts)
    ppl_seqs.push_back(slice_day(day, s - static_cast<std::size_t>(n) + 1,
                                 static_cast<std::size_t>(steps + n - 1)));
  auto ppl = eval::perplexity(model, ppl_seqs, 1, cfg.workers);

  // closed-loop generation vs the recorded continuation
  std::vector<std::vector<double>> gen_returns(static_cast<std::size_t>(steps)),
      real_returns(static_cast<std::size_t>(steps));
  std::vector<data::EventType> gen_types, real_types;
  std::vector<double> gen_dts, real_dts;
  gen::CorrectionTally tally;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    auto w = make_seed_window(day, starts[i], n);
    gen::GenerationContext ctx(model.config(), w.snapshot, w.context,
                               util::derive_seed(cfg.seed, "sequence", i));
    std::vector<double> gen_mids{mid_or_nan(ctx.sim())};
    for (int k = 0; k < steps; ++k) {
      auto step = ctx.step(model);
      gen_mids.push_back(mid_or_nan(ctx.sim()));
      gen_types.push_back(step.message.type);
      gen_dts.push_back(static_cast<double>(step.message.dt_ns));
    }
    const auto& t = ctx.tally();
    tally.new_order += t.new_order;
    tally.exact_match += t.exact_match;
    tally.match_ignoring_time += t.match_ignoring_time;
    tally.init_volume_cancel += t.init_volume_cancel;
    tally.best_order_execution += t.best_order_execution;
    tally.size_clipped += t.size_clipped;
    tally.discarded += t.discarded;

    auto book = replay_to(day, starts[i]);
    std::vector<double> real_mids{mid_or_nan(book)};
    for (int k = 0; k < steps; ++k) {
      const auto& msg = day.messages[starts[i] + static_cast<std::size_t>(k)];
      auto anchor = *book.mid_anchor_ticks();
      gen::correct_and_apply(book, msg, anchor);
      real_mids.push_back(mid_or_nan(book));
      real_types.push_back(msg.type);
      real_dts.push_back(static_cast<double>(msg.dt_ns));
    }
    auto gr = eval::mid_returns(gen_mids, steps);
    auto rr = eval::mid_returns(real_mids, steps);
    for (int h = 0; h < steps; ++h) {
      gen_returns[static_cast<std::size_t>(h)].push_back(gr[static_cast<std::size_t>(h)]);
      real_returns[static_cast<std::size_t>(h)].push_back(rr[static_cast<std::size_t>(h)]);
    }
  }

  auto corr = eval::return_correlation(gen_returns, real_returns);
  auto freqs = eval::event_type_frequencies(gen_types, real_types);
  auto inter = eval::interarrival_ecdf(gen_dts, real_dts);

  // reports
  fs::create_directories(report_dir);
  const std::string hash_line = "# config_hash=" + std::to_string(config_hash(cfg)) + "\n";
  std::ostringstream os;
  os << std::setprecision(12);

  os << hash_line;
  for (std::size_t i = 0; i < position_labels().size(); ++i)
    os << position_labels()[i] << (i + 1 < position_labels().size() ? "," : "\n");
  for (std::size_t i = 0; i < ppl.per_position.size(); ++i)
    os << ppl.per_position[i] << (i + 1 < ppl.per_position.size() ? "," : "\n");
  write_text_atomic(report_dir / "perplexity_positions.csv", os.str());

  os.str("");
  os << hash_line << "metric,value\n"
     << "overall_ppl," << ppl.overall << "\n"
     << "mean_nll," << ppl.mean_nll << "\n"
     << "std_err_tokens," << ppl.std_err_tokens << "\n"
     << "std_err_sequences," << ppl.std_err_sequences << "\n"
     << "token_count," << ppl.token_count << "\n";
  write_text_atomic(report_dir / "perplexity_summary.csv", os.str());

  os.str("");
  os << hash_line
     << "horizon,gen_q05,gen_q25,gen_q50,gen_q75,gen_q95,real_q05,real_q25,real_q50,"
        "real_q75,real_q95\n";
  for (int h = 0; h < steps; ++h) {
    auto g = gen_returns[static_cast<std::size_t>(h)];
    auto r = real_returns[static_cast<std::size_t>(h)];
    std::sort(g.begin(), g.end());
    std::sort(r.begin(), r.end());
    os << (h + 1);
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) os << "," << quantile_sorted(g, q);
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) os << "," << quantile_sorted(r, q);
    os << "\n";
  }
  write_text_atomic(report_dir / "return_quantiles.csv", os.str());

  os.str("");
  os << hash_line << "horizon,rho,p_value,n\n";
  for (const auto& hc : corr.horizons) {
    os << hc.horizon << ",";
    if (hc.rho)
      os << *hc.rho << "," << *hc.p_value;
    else
      os << "nan,nan";
    os << "," << hc.n << "\n";
  }
  write_text_atomic(report_dir / "correlation.csv", os.str());

  os.str("");
  os << hash_line << "class,gen,real\n";
  for (std::size_t i = 0; i < 3; ++i)
    os << eval::EventFrequencies::kLabels[i] << "," << freqs.gen[i] << ","
       << freqs.real[i] << "\n";
  write_text_atomic(report_dir / "event_frequencies.csv", os.str());

  os.str("");
  os << hash_line << "f_gen,f_real\n";
  for (auto [fg, fr] : inter.pp) os << fg << "," << fr << "\n";
  write_text_atomic(report_dir / "interarrival_pp.csv", os.str());

  os.str("");
  os << hash_line << "bin_lo_ns,bin_hi_ns,gen_count,real_count\n";
  for (std::size_t b = 0; b + 1 < inter.bin_edges.size(); ++b)
    os << inter.bin_edges[b] << "," << inter.bin_edges[b + 1] << ","
       << inter.gen_counts[b] << "," << inter.real_counts[b] << "\n";
  write_text_atomic(report_dir / "interarrival_hist.csv", os.str());

  os.str("");
  os << "sequences " << starts.size() << ", context " << cfg.eval_context
     << ", generated " << steps << " each\n"
     << "overall perplexity " << std::setprecision(6) << ppl.overall
     << " (std.err tokens " << ppl.std_err_tokens << ", sequences "
     << ppl.std_err_sequences << ")\n"
     << "referential messages " << tally.referential() << ", discard rate "
     << tally.discard_rate() << "\n"
     << "dt mean gen " << inter.gen_mean << " real " << inter.real_mean
     << ", median gen " << inter.gen_median << " real " << inter.real_median << "\n";
  write_text_atomic(report_dir / "summary.txt", os.str());
  write_text_atomic(report_dir / "config.txt", serialize_config(cfg));

  out << "eval: " << starts.size() << " sequences, overall PPL "
      << std::setprecision(6) << ppl.overall << " -> " << report_dir.string() << "\n";
  return 0;
}

inline int cmd_eval(const RunConfig& cfg, const fs::path& checkpoint,
                    const fs::path& dataset_file, std::ostream& out = std::cout) {
  auto [model, steps] = s5::load_checkpoint<float>(checkpoint);
  (void)steps;
  s5::S5SequenceModel seq_model(model);
  auto day = data::load_dataset(dataset_file);
  return run_eval(seq_model, day, cfg, cfg.report_dir, out);
}

}  // namespace lobgen::cli
