#include "rawsea/ais.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "rawsea/error.hpp"

namespace rawsea::ais {

namespace {

constexpr std::array<const char*, 9> kColumns{"timestamp", "mmsi", "lat", "lon", "sog",
                                              "nav_status", "ship_type", "length", "width"};

// RFC 4180 field split; returns false on an unterminated quote.
bool split_csv(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return !quoted;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

template <class T>
bool parse_number(const std::string& s, T& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

// Returns the empty string on success, otherwise the rejection reason.
std::string parse_row(const std::vector<std::string>& f, const std::array<std::size_t, 9>& idx, AisRecord& r) {
  const auto get = [&](int k) { return trim(f[idx[k]]); };
  try {
    r.timestamp = parse_utc(get(0));
  } catch (const Error&) {
    return "invalid timestamp";
  }
  if (!parse_number(get(1), r.mmsi)) return "invalid mmsi";
  if (r.mmsi <= 0) return "mmsi not positive";
  if (r.mmsi > 999999999) return "mmsi exceeds 9 digits";
  if (!parse_number(get(2), r.lat) || !std::isfinite(r.lat)) return "invalid lat";
  if (r.lat < -90.0 || r.lat > 90.0) return "lat out of range";
  if (!parse_number(get(3), r.lon) || !std::isfinite(r.lon)) return "invalid lon";
  if (r.lon < -180.0 || r.lon > 180.0) return "lon out of range";
  const auto optional_field = [&](int k, std::optional<double>& out, const char* name) -> std::string {
    const std::string s = get(k);
    if (s.empty()) {
      out.reset();
      return {};
    }
    double v = 0.0;
    if (!parse_number(s, v) || !std::isfinite(v) || v < 0.0) return std::string("invalid ") + name;
    out = v;
    return {};
  };
  if (auto e = optional_field(4, r.sog, "sog"); !e.empty()) return e;
  r.nav_status = get(5);
  r.ship_type = get(6);
  if (auto e = optional_field(7, r.length_m, "length"); !e.empty()) return e;
  if (auto e = optional_field(8, r.width_m, "width"); !e.empty()) return e;
  return {};
}

}  // namespace

ParseResult parse_ais_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw Error(ErrorCode::EmptyFile, "AIS CSV has no header row");

  std::vector<std::string> fields;
  split_csv(line, fields);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string name = trim(fields[i]);
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
    position.emplace(name, i);
  }
  std::array<std::size_t, 9> idx{};
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    const auto it = position.find(kColumns[k]);
    if (it == position.end()) throw Error(ErrorCode::MissingColumn, std::string("AIS CSV lacks column '") + kColumns[k] + "'");
    idx[k] = it->second;
  }
  const std::size_t needed = *std::max_element(idx.begin(), idx.end()) + 1;

  ParseResult result;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!split_csv(line, fields)) {
      result.rejects.push_back({line_no, "unterminated quote", line});
      continue;
    }
    if (fields.size() < needed) {
      result.rejects.push_back({line_no, "too few fields", line});
      continue;
    }
    AisRecord r;
    if (std::string reason = parse_row(fields, idx, r); !reason.empty()) {
      result.rejects.push_back({line_no, std::move(reason), line});
      continue;
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

ParseResult read_ais_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_ais_csv(in);
}

void write_ais_csv(std::ostream& out, std::span<const AisRecord> records) {
  out << "timestamp,mmsi,lat,lon,sog,nav_status,ship_type,length,width\n";
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : records) {
    out << format_utc(r.timestamp) << ',' << r.mmsi << ',' << format_double(r.lat) << ',' << format_double(r.lon)
        << ',' << opt(r.sog) << ',' << quote(r.nav_status) << ',' << quote(r.ship_type) << ',' << opt(r.length_m)
        << ',' << opt(r.width_m) << '\n';
  }
}

void MatchConfig::validate() const {
  if (!(temporal_window_s > 0.0) || !(radius_m > 0.0) || day_window < 0 || !(max_cost_m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "match config values must be positive");
  }
  if (!(fishing_weight > 0.0 && fishing_weight <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fishing_weight must be in (0, 1]");
  }
}

std::string to_string(FilterMode m) { return m == FilterMode::Dense ? "dense" : "daily"; }

FilterMode filter_mode_from_string(const std::string& s) {
  if (s == "dense") return FilterMode::Dense;
  if (s == "daily") return FilterMode::Daily;
  throw Error(ErrorCode::InvalidArgument, "unknown matching mode '" + s + "'");
}

std::vector<AisRecord> filter_records(std::span<const AisRecord> records, const GranuleMeta& meta, int width,
                                      int height, const MatchConfig& cfg, FilterMode mode) {
  cfg.validate();
  if (!meta.geotransform.invertible()) throw Error(ErrorCode::InvalidArgument, "geotransform is singular");
  const geo::Footprint fp(meta.geotransform, width, height);
  const auto window = std::chrono::milliseconds(std::llround(cfg.temporal_window_s * 1000.0));
  const std::int64_t day0 = utc_day_number(meta.sensing_time);
  std::vector<AisRecord> kept;
  for (const auto& r : records) {
    bool in_time = false;
    if (mode == FilterMode::Dense) {
      const auto dt = r.timestamp - meta.sensing_time;
      in_time = (dt < dt.zero() ? -dt : dt) <= window;
    } else {
      in_time = std::abs(utc_day_number(r.timestamp) - day0) <= cfg.day_window;
    }
    if (in_time && fp.contains(r.position(), cfg.radius_m)) kept.push_back(r);
  }
  return kept;
}

double perpendicular_distance(geo::Vec2 p, geo::Vec2 a, geo::Vec2 b) {
  const geo::Vec2 ab = b - a;
  const double len = geo::norm(ab);
  if (len == 0.0) return geo::distance(p, a);
  const geo::Vec2 ap = p - a;
  return std::abs(ab.x * ap.y - ab.y * ap.x) / len;
}

std::vector<TrackObservation> track_observations(std::span<const AisRecord> records, UtcTime sensing,
                                                 const geo::LocalFrame& frame) {
  std::map<std::int64_t, std::vector<const AisRecord*>> by_mmsi;
  for (const auto& r : records) by_mmsi[r.mmsi].push_back(&r);
  std::vector<TrackObservation> out;
  out.reserve(by_mmsi.size());
  for (auto& [mmsi, recs] : by_mmsi) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const AisRecord* a, const AisRecord* b) { return a->timestamp < b->timestamp; });
    // First record strictly after sensing time.
    const auto split = std::upper_bound(recs.begin(), recs.end(), sensing,
                                        [](UtcTime t, const AisRecord* r) { return t < r->timestamp; });
    const std::size_t after = std::size_t(split - recs.begin());
    const AisRecord* first = nullptr;
    const AisRecord* second = nullptr;
    if (recs.size() == 1) {
      first = recs[0];
    } else if (after > 0 && after < recs.size()) {
      first = recs[after - 1];
      second = recs[after];
    } else if (after == recs.size()) {
      first = recs[after - 2];
      second = recs[after - 1];
    } else {
      first = recs[0];
      second = recs[1];
    }
    const auto gap = [&](const AisRecord* r) {
      const auto d = r->timestamp - sensing;
      return d < d.zero() ? -d : d;
    };
    const AisRecord* nearest = first;
    const AisRecord* other = second;
    if (second && gap(second) < gap(first)) std::swap(nearest, other);
    TrackObservation t;
    t.mmsi = mmsi;
    t.nearest = frame.to_local(nearest->position());
    if (other) t.other = frame.to_local(other->position());
    t.nav_status = nearest->nav_status;
    out.push_back(std::move(t));
  }
  return out;
}

CostMatrix::CostMatrix(std::size_t n, std::size_t m)
    : rows(n), cols(m), costs(n * m, kSentinel), cells(n * m), row_ids(n), col_ids(m) {}

namespace {
bool finite(geo::Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }
}  // namespace

CostMatrix build_cost_matrix(std::span<const geo::Vec2> centers, std::span<const TrackObservation> tracks,
                             const MatchConfig& cfg) {
  cfg.validate();
  CostMatrix c(centers.size(), tracks.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!finite(centers[i])) throw Error(ErrorCode::FrameMismatch, "box center " + std::to_string(i) + " is not finite");
    c.row_ids[i] = std::to_string(i);
  }
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    const auto& t = tracks[j];
    if (!finite(t.nearest) || (t.other && !finite(*t.other))) {
      throw Error(ErrorCode::FrameMismatch, "AIS position for MMSI " + std::to_string(t.mmsi) + " is not finite");
    }
    c.col_ids[j] = std::to_string(t.mmsi);
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const auto& t = tracks[j];
      CostCell cell;
      cell.d_eucl = geo::distance(centers[i], t.nearest);
      cell.d_perp = t.other ? perpendicular_distance(centers[i], t.nearest, *t.other) : cell.d_eucl;
      cell.w_nav = t.nav_status == kFishingStatus ? cfg.fishing_weight : 1.0;
      const double cost = cell.w_nav * (cell.d_perp + cell.d_eucl);
      c.cells[i * c.cols + j] = cell;
      c.at(i, j) = cost > cfg.max_cost_m ? CostMatrix::kSentinel : cost;
    }
  }
  return c;
}

CostMatrix build_radius_cost_matrix(std::span<const geo::Vec2> centers, std::span<const AisRecord> records,
                                    const geo::LocalFrame& frame, const MatchConfig& cfg) {
  cfg.validate();
  std::map<std::int64_t, std::vector<geo::Vec2>> by_mmsi;
  for (const auto& r : records) by_mmsi[r.mmsi].push_back(frame.to_local(r.position()));
  CostMatrix c(centers.size(), by_mmsi.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!finite(centers[i])) throw Error(ErrorCode::FrameMismatch, "box center " + std::to_string(i) + " is not finite");
    c.row_ids[i] = std::to_string(i);
  }
  std::size_t j = 0;
  for (const auto& [mmsi, points] : by_mmsi) {
    c.col_ids[j] = std::to_string(mmsi);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      double best = CostMatrix::kSentinel;
      for (const auto& p : points) best = std::min(best, geo::distance(centers[i], p));
      c.cells[i * c.cols + j] = {best, 0.0, 1.0};
      c.at(i, j) = best > cfg.radius_m ? CostMatrix::kSentinel : best;
    }
    ++j;
  }
  return c;
}

}  // namespace rawsea::ais
