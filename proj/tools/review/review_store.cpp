#include "review_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rawsea/error.hpp"

namespace rawsea::review {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Action a) {
  switch (a) {
    case Action::Accept: return "accept";
    case Action::Reject: return "reject";
    case Action::Reassign: return "reassign";
  }
  return "?";
}

std::string to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Applied: return "applied";
    case OutcomeKind::Conflict: return "conflict";
    case OutcomeKind::Invalid: return "invalid";
  }
  return "?";
}

json to_json(const ReviewDecision& d) {
  json j;
  j["granule_id"] = d.granule_id;
  j["box_id"] = d.box_id;
  j["action"] = to_string(d.action);
  if (d.mmsi) j["mmsi"] = *d.mmsi;
  j["reviewer"] = d.reviewer;
  j["decided_at"] = format_utc(d.decided_at);
  j["base_version"] = d.base_version;
  return j;
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, what, path);
}

std::string str_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("$.") + key, "missing required field");
  if (!it->is_string()) bad(std::string("$.") + key, "expected a string");
  return it->get<std::string>();
}

std::int64_t int_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("$.") + key, "missing required field");
  if (!it->is_number_integer()) bad(std::string("$.") + key, "expected an integer");
  return it->get<std::int64_t>();
}

}  // namespace

ReviewDecision decision_from_json(const json& j) {
  if (!j.is_object()) bad("$", "expected an object");
  ReviewDecision d;
  d.granule_id = str_field(j, "granule_id");
  d.box_id = str_field(j, "box_id");
  const std::string action = str_field(j, "action");
  if (action == "accept") {
    d.action = Action::Accept;
  } else if (action == "reject") {
    d.action = Action::Reject;
  } else if (action == "reassign") {
    d.action = Action::Reassign;
    d.mmsi = int_field(j, "mmsi");
  } else {
    bad("$.action", "expected accept, reject or reassign");
  }
  d.reviewer = str_field(j, "reviewer");
  try {
    d.decided_at = parse_utc(str_field(j, "decided_at"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaViolation) throw;
    bad("$.decided_at", "expected a UTC instant");
  }
  d.base_version = int_field(j, "base_version");
  return d;
}

StorePaths StorePaths::for_annotations(const fs::path& annotations) {
  StorePaths p;
  p.annotations = annotations;
  const fs::path dir = annotations.parent_path();
  const std::string stem = annotations.stem().string();
  p.candidates = dir / (stem + ".candidates.json");
  p.reviewed = dir / (stem + ".reviewed.json");
  p.log = dir / (stem + ".review-log.jsonl");
  p.lock = dir / (stem + ".review.lock");
  return p;
}

StorePaths StorePaths::resolve(const fs::path& annotations) {
  const char* env = std::getenv("RAWSEA_STORE");
  return for_annotations(env && *env ? fs::path(env) : annotations);
}

// ---------------------------------------------------------------------------

namespace {

const aiscoco::Image* image_by_name(const aiscoco::Document& doc, const std::string& granule) {
  for (const auto& img : doc.images)
    if (img.file_name == granule) return &img;
  return nullptr;
}

const json* box_candidates(const json& candidates, const std::string& granule, const std::string& box_id) {
  if (!candidates.is_object()) return nullptr;
  const auto g = candidates.find("granules");
  if (g == candidates.end() || !g->is_object()) return nullptr;
  const auto entry = g->find(granule);
  if (entry == g->end() || !entry->is_object()) return nullptr;
  const auto boxes = entry->find("boxes");
  if (boxes == entry->end() || !boxes->is_object()) return nullptr;
  const auto b = boxes->find(box_id);
  return b == boxes->end() ? nullptr : &*b;
}

bool in_filtered_ais(const json& candidates, const std::string& granule, std::int64_t mmsi) {
  if (!candidates.is_object() || !candidates.contains("granules")) return false;
  const json& g = candidates["granules"];
  if (!g.contains(granule)) return false;
  for (const auto& m : g[granule].value("ais", json::array()))
    if (m.is_number_integer() && m.get<std::int64_t>() == mmsi) return true;
  return false;
}

void drop_vessel(aiscoco::Annotation& a) {
  if (!a.attributes) return;
  a.attributes->mmsi.reset();
  a.attributes->ship_type.reset();
  a.attributes->route.reset();
  if (a.attributes->empty()) a.attributes.reset();
}

Outcome invalid(std::string message) { return {OutcomeKind::Invalid, 0, {}, std::move(message)}; }

}  // namespace

std::int64_t box_version(const aiscoco::Annotation& a) {
  const auto it = a.extra.find("review");
  if (it == a.extra.end() || !it->is_object()) return 0;
  return it->value("version", std::int64_t{0});
}

std::string box_status(const aiscoco::Annotation& a, const json& candidates, const std::string& granule) {
  const auto it = a.extra.find("review");
  if (it != a.extra.end() && it->is_object() && it->contains("status")) return (*it)["status"].get<std::string>();
  if (const json* c = box_candidates(candidates, granule, std::to_string(a.id)); c && c->contains("status")) {
    return (*c)["status"].get<std::string>();
  }
  return a.attributes && a.attributes->mmsi ? "matched" : "unmatched";
}

Outcome apply_decision(aiscoco::Document& doc, const json& candidates, const ReviewDecision& d) {
  const aiscoco::Image* img = image_by_name(doc, d.granule_id);
  if (!img) return invalid("unknown granule '" + d.granule_id + "'");
  std::int64_t id = 0;
  try {
    std::size_t used = 0;
    id = std::stoll(d.box_id, &used);
    if (used != d.box_id.size()) return invalid("box id '" + d.box_id + "' is not an annotation id");
  } catch (const std::exception&) {
    return invalid("box id '" + d.box_id + "' is not an annotation id");
  }
  aiscoco::Annotation* a = doc.find_annotation(id);
  if (!a || a->image_id != img->id) return invalid("granule '" + d.granule_id + "' has no box " + d.box_id);

  const std::int64_t version = box_version(*a);
  if (d.base_version != version) {
    return {OutcomeKind::Conflict, version, box_status(*a, candidates, d.granule_id),
            "box " + d.box_id + " is at version " + std::to_string(version)};
  }

  std::string status;
  switch (d.action) {
    case Action::Accept:
      status = "accepted";
      break;
    case Action::Reject:
      status = "rejected";
      drop_vessel(*a);
      break;
    case Action::Reassign: {
      if (!d.mmsi || !in_filtered_ais(candidates, d.granule_id, *d.mmsi)) {
        return invalid("MMSI is not in the filtered AIS set of granule '" + d.granule_id + "'");
      }
      for (const auto& other : doc.annotations) {
        if (other.id != a->id && other.attributes && other.attributes->mmsi == d.mmsi) {
          return invalid("MMSI " + std::to_string(*d.mmsi) + " is already linked to box " + std::to_string(other.id));
        }
      }
      drop_vessel(*a);
      if (!a->attributes) a->attributes.emplace();
      a->attributes->mmsi = *d.mmsi;
      status = "reassigned";
      break;
    }
  }
  json review;
  review["status"] = status;
  review["reviewer"] = d.reviewer;
  review["decided_at"] = format_utc(d.decided_at);
  review["version"] = version + 1;
  a->extra["review"] = std::move(review);
  return {OutcomeKind::Applied, version + 1, status, {}};
}

aiscoco::Document replay(const aiscoco::Document& original, const json& candidates, std::istream& log) {
  aiscoco::Document doc = original;
  std::string line;
  std::size_t n = 0;
  while (std::getline(log, line)) {
    ++n;
    if (line.empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "decision log line " + std::to_string(n) + ": " + e.what());
    }
    if (entry.value("outcome", std::string()) != "applied") continue;
    const Outcome o = apply_decision(doc, candidates, decision_from_json(entry.at("decision")));
    if (o.kind != OutcomeKind::Applied) {
      throw Error(ErrorCode::InvariantViolation,
                  "decision log line " + std::to_string(n) + " no longer applies: " + o.message);
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------

ReviewStore::ReviewStore(StorePaths paths) : paths_(std::move(paths)) {
  original_ = aiscoco::read_aiscoco(paths_.annotations);
  candidates_ = json::object();
  if (fs::exists(paths_.candidates)) {
    std::ifstream in(paths_.candidates);
    try {
      candidates_ = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, paths_.candidates.string() + ": " + e.what());
    }
  }

  lock_fd_ = ::open(paths_.lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (lock_fd_ < 0) {
    if (errno == EEXIST) throw Error(ErrorCode::StoreLocked, "store is locked by " + paths_.lock.string());
    throw Error(ErrorCode::Io, "cannot create " + paths_.lock.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(lock_fd_, pid.data(), pid.size());

  try {
    aiscoco::Document doc = original_;
    if (fs::exists(paths_.log)) {
      std::ifstream in(paths_.log);
      doc = replay(original_, candidates_, in);
      std::ifstream count(paths_.log);
      std::string line;
      while (std::getline(count, line))
        if (!line.empty()) ++seq_;
    }
    persist(doc);
    current_ = std::make_shared<const aiscoco::Document>(std::move(doc));
  } catch (...) {
    ::close(lock_fd_);
    fs::remove(paths_.lock);
    throw;
  }
}

ReviewStore::~ReviewStore() {
  if (lock_fd_ >= 0) {
    ::close(lock_fd_);
    std::error_code ec;
    fs::remove(paths_.lock, ec);
  }
}

std::shared_ptr<const aiscoco::Document> ReviewStore::snapshot() const {
  std::lock_guard lock(snap_mu_);
  return current_;
}

void ReviewStore::persist(const aiscoco::Document& doc) const {
  const fs::path tmp = paths_.reviewed.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << aiscoco::dump(doc);
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, paths_.reviewed);
}

Outcome ReviewStore::submit(const ReviewDecision& d) {
  std::lock_guard lock(write_mu_);
  aiscoco::Document next = *snapshot();
  const Outcome o = apply_decision(next, candidates_, d);

  json entry;
  entry["seq"] = ++seq_;
  entry["decision"] = to_json(d);
  entry["outcome"] = to_string(o.kind);
  entry["version"] = o.version;
  if (!o.message.empty()) entry["message"] = o.message;
  {
    std::ofstream log(paths_.log, std::ios::app | std::ios::binary);
    if (!log) throw Error(ErrorCode::Io, "cannot append to " + paths_.log.string());
    log << entry.dump() << '\n';
  }

  if (o.kind == OutcomeKind::Applied) {
    persist(next);
    auto published = std::make_shared<const aiscoco::Document>(std::move(next));
    std::lock_guard snap(snap_mu_);
    current_ = std::move(published);
  }
  return o;
}

}  // namespace rawsea::review
