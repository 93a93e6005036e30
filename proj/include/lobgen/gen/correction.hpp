#pragma once

// Error-corrected application of a pre-processed message to the simulator
// book. Referential messages carry a (price, size, time) description of the
// original order instead of an id; hallucinated references are repaired by
// an exact attribute match, a time-agnostic retry, or a fallback against
// remaining initialization volume. Executions always target the single
// best-priority order on their side.

#include <optional>
#include <vector>

#include "lobgen/data/message.hpp"
#include "lobgen/lob/order_book.hpp"

namespace lobgen::gen {

enum class CorrectionAction : std::uint8_t {
  NewOrder = 0,  // type 1, no reference involved
  ExactMatch,
  MatchIgnoringTime,
  InitVolumeCancel,
  BestOrderExecution,
  SizeClipped,  // execution applied but clipped to the best order's remainder
  Discarded,
};

inline const char* to_string(CorrectionAction a) {
  switch (a) {
    case CorrectionAction::NewOrder: return "new_order";
    case CorrectionAction::ExactMatch: return "exact_match";
    case CorrectionAction::MatchIgnoringTime: return "match_ignoring_time";
    case CorrectionAction::InitVolumeCancel: return "init_volume_cancel";
    case CorrectionAction::BestOrderExecution: return "best_order_execution";
    case CorrectionAction::SizeClipped: return "size_clipped";
    case CorrectionAction::Discarded: return "discarded";
  }
  return "?";
}

struct CorrectionOutcome {
  CorrectionAction action{CorrectionAction::Discarded};
  data::PreprocessedMessage original;
  // The message as applied; absent when discarded (book untouched).
  std::optional<data::PreprocessedMessage> applied;
};

namespace detail {

// Latest-arrival candidate matching the reference attributes; ties on time
// resolve to the highest sequence number (the last order in the list).
inline std::optional<lob::RestingOrder> find_reference(
    const lob::OrderBookL3& book, lob::Side side, std::int32_t ref_price,
    std::int32_t ref_size, std::int64_t ref_time, bool ignore_time) {
  std::optional<lob::RestingOrder> best;
  book.for_each_order(side, [&](const lob::RestingOrder& o) {
    if (o.is_init_volume) return;
    if (o.submit_rel_price != ref_price) return;
    if (o.orig_size != ref_size) return;
    if (!ignore_time && o.key.entry_time_ns != ref_time) return;
    if (!best || o.key.entry_time_ns > best->key.entry_time_ns ||
        (o.key.entry_time_ns == best->key.entry_time_ns &&
         o.key.entry_seq > best->key.entry_seq)) {
      best = o;
    }
  });
  return best;
}

}  // namespace detail

// Applies `msg` to `book`, repairing the reference if needed. `anchor_ticks`
// is the mid anchor the message's relative prices refer to (the anchor just
// before this message).
inline std::pair<CorrectionOutcome, std::vector<lob::Trade>> correct_and_apply(
    lob::OrderBookL3& book, const data::PreprocessedMessage& msg,
    lob::Ticks anchor_ticks) {
  using data::EventType;
  CorrectionOutcome outcome;
  outcome.original = msg;
  std::vector<lob::Trade> trades;
  const lob::Ticks abs_price = anchor_ticks + msg.price_ticks;

  switch (msg.type) {
    case EventType::NewLimit: {
      auto res = book.apply_limit(msg.direction, abs_price, msg.size, msg.time_ns,
                                  msg.price_ticks);
      trades = std::move(res.trades);
      outcome.action = CorrectionAction::NewOrder;
      outcome.applied = msg;
      break;
    }
    case EventType::PartialCancel:
    case EventType::Delete: {
      auto hit = detail::find_reference(book, msg.direction, msg.ref_price_ticks,
                                        msg.ref_size, msg.ref_time_ns,
                                        /*ignore_time=*/false);
      CorrectionAction action = CorrectionAction::ExactMatch;
      if (!hit) {
        hit = detail::find_reference(book, msg.direction, msg.ref_price_ticks,
                                     msg.ref_size, msg.ref_time_ns,
                                     /*ignore_time=*/true);
        action = CorrectionAction::MatchIgnoringTime;
      }
      if (hit) {
        lob::Qty reduce = msg.type == EventType::Delete
                              ? hit->remaining_size
                              : std::min<lob::Qty>(msg.size, hit->remaining_size);
        book.apply_cancel(hit->key, reduce);
        outcome.action = action;
        outcome.applied = msg;
      } else if (auto init_key =
                     book.init_volume_at(msg.direction, abs_price)) {
        book.apply_cancel(*init_key, msg.size);
        outcome.action = CorrectionAction::InitVolumeCancel;
        outcome.applied = msg;
      } else {
        outcome.action = CorrectionAction::Discarded;
      }
      break;
    }
    case EventType::Execution: {
      auto best = book.best_price(msg.direction);
      if (!best) {
        outcome.action = CorrectionAction::Discarded;
        break;
      }
      trades = book.apply_execution(msg.direction, msg.size);
      outcome.action = (trades.front().size < msg.size)
                           ? CorrectionAction::SizeClipped
                           : CorrectionAction::BestOrderExecution;
      outcome.applied = msg;
      break;
    }
  }
  return {std::move(outcome), std::move(trades)};
}

}  // namespace lobgen::gen
