#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rawsea/aiscoco.hpp"
#include "rawsea/time.hpp"

namespace rawsea::review {

enum class Action { Accept, Reject, Reassign };

std::string to_string(Action a);

struct ReviewDecision {
  std::string granule_id;
  std::string box_id;
  Action action = Action::Accept;
  std::optional<std::int64_t> mmsi;  ///< reassign target
  std::string reviewer;
  UtcTime decided_at{};
  /// Box version the reviewer saw; a stale value is a conflict.
  std::int64_t base_version = 0;
};

nlohmann::json to_json(const ReviewDecision& d);
/// Throws SchemaViolation naming the offending field.
ReviewDecision decision_from_json(const nlohmann::json& j);

/// Files that make up one review store, all derived from the matcher output
/// `<dir>/<stem>.json`:
///   <stem>.candidates.json    per-box candidates written by match-ais
///   <stem>.reviewed.json      current store (AISCOCO)
///   <stem>.review-log.jsonl   append-only decision log
///   <stem>.review.lock        held while a server owns the store
struct StorePaths {
  std::filesystem::path annotations;
  std::filesystem::path candidates;
  std::filesystem::path reviewed;
  std::filesystem::path log;
  std::filesystem::path lock;

  static StorePaths for_annotations(const std::filesystem::path& annotations);
  /// As above, with RAWSEA_STORE taking precedence over `annotations`.
  static StorePaths resolve(const std::filesystem::path& annotations);
};

enum class OutcomeKind { Applied, Conflict, Invalid };

std::string to_string(OutcomeKind k);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Invalid;
  std::int64_t version = 0;  ///< box version after the attempt
  std::string status;        ///< box status after the attempt
  std::string message;
};

/// Review status of one annotation: the last applied decision, else the
/// matcher status from the candidates file, else matched/unmatched by mmsi.
std::string box_status(const aiscoco::Annotation& a, const nlohmann::json& candidates, const std::string& granule);
std::int64_t box_version(const aiscoco::Annotation& a);

/// Validates `d` against the document and applies it in place.
Outcome apply_decision(aiscoco::Document& doc, const nlohmann::json& candidates, const ReviewDecision& d);

/// Re-applies every "applied" entry of a decision log to `original`.
aiscoco::Document replay(const aiscoco::Document& original, const nlohmann::json& candidates, std::istream& log);

/// Single-writer review store. Construction takes the lock file (StoreLocked
/// if another owner holds it), replays any existing log and writes the
/// reviewed file.
class ReviewStore {
 public:
  explicit ReviewStore(StorePaths paths);
  ~ReviewStore();
  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  const StorePaths& paths() const { return paths_; }
  const aiscoco::Document& original() const { return original_; }
  const nlohmann::json& candidates() const { return candidates_; }
  std::shared_ptr<const aiscoco::Document> snapshot() const;

  /// Serialized: logs the attempt, then persists the store when applied.
  Outcome submit(const ReviewDecision& d);

 private:
  void persist(const aiscoco::Document& doc) const;

  StorePaths paths_;
  int lock_fd_ = -1;
  aiscoco::Document original_;
  nlohmann::json candidates_;
  std::int64_t seq_ = 0;

  std::mutex write_mu_;
  mutable std::mutex snap_mu_;
  std::shared_ptr<const aiscoco::Document> current_;
};

}  // namespace rawsea::review
