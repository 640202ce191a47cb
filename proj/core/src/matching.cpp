#include "rawsea/matching.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rawsea/error.hpp"

namespace rawsea::ais {

using nlohmann::json;

std::string to_string(DecisionStatus s) {
  switch (s) {
    case DecisionStatus::Matched: return "matched";
    case DecisionStatus::Unmatched: return "unmatched";
    case DecisionStatus::SkippedDuplicate: return "skipped_duplicate";
  }
  return "unmatched";
}

DecisionStatus decision_status_from_string(const std::string& s) {
  if (s == "matched") return DecisionStatus::Matched;
  if (s == "unmatched") return DecisionStatus::Unmatched;
  if (s == "skipped_duplicate") return DecisionStatus::SkippedDuplicate;
  throw Error(ErrorCode::Format, "unknown decision status '" + s + "'");
}

geo::Vec2 box_center_local(const BBox& box, const Geotransform& gt, const geo::LocalFrame& frame) {
  return frame.to_local(geo::pixel_to_lonlat(gt, box.cx(), box.cy()));
}

namespace {

GranuleMatch solve_granule(const GranuleBoxes& g, std::span<const AisRecord> records, const MatchConfig& cfg,
                           FilterMode mode) {
  GranuleMatch gm;
  gm.granule_id = g.granule_id;
  const auto kept = filter_records(records, g.meta, g.width, g.height, cfg, mode);
  const geo::LocalFrame frame = geo::granule_frame(g.meta.geotransform, g.width, g.height);
  std::vector<geo::Vec2> centers;
  centers.reserve(g.boxes.size());
  for (const auto& b : g.boxes) centers.push_back(box_center_local(b.box, g.meta.geotransform, frame));

  if (mode == FilterMode::Dense) {
    const auto tracks = track_observations(kept, g.meta.sensing_time, frame);
    gm.costs = build_cost_matrix(centers, tracks, cfg);
    for (const auto& t : tracks) gm.col_mmsi.push_back(t.mmsi);
  } else {
    gm.costs = build_radius_cost_matrix(centers, kept, frame, cfg);
    for (const auto& id : gm.costs.col_ids) gm.col_mmsi.push_back(std::stoll(id));
  }
  for (std::size_t i = 0; i < g.boxes.size(); ++i) gm.costs.row_ids[i] = g.boxes[i].box_id;

  gm.candidates.resize(g.boxes.size());
  for (std::size_t i = 0; i < gm.costs.rows; ++i) {
    for (std::size_t j = 0; j < gm.costs.cols; ++j) {
      const double c = gm.costs.at(i, j);
      if (!CostMatrix::is_sentinel(c)) gm.candidates[i].push_back({gm.col_mmsi[j], c, gm.costs.cells[i * gm.costs.cols + j]});
    }
    std::stable_sort(gm.candidates[i].begin(), gm.candidates[i].end(),
                     [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  }

  if (gm.costs.rows > 0 && gm.costs.cols > 0) {
    gm.assignment = hungarian(gm.costs);
  } else {
    for (std::size_t i = 0; i < gm.costs.rows; ++i) gm.assignment.unmatched_rows.push_back(i);
    for (std::size_t j = 0; j < gm.costs.cols; ++j) gm.assignment.unmatched_cols.push_back(j);
  }
  return gm;
}

}  // namespace

MatchReport match_granules(std::span<const GranuleBoxes> granules, std::span<const AisRecord> records,
                           const MatchConfig& cfg, FilterMode mode) {
  cfg.validate();
  MatchReport report;
  report.granules.reserve(granules.size());
  for (const auto& g : granules) report.granules.push_back(solve_granule(g, records, cfg, mode));

  for (std::size_t gi = 0; gi < granules.size(); ++gi) {
    const auto& g = granules[gi];
    const auto& gm = report.granules[gi];
    std::vector<const Match*> by_row(g.boxes.size(), nullptr);
    for (const auto& m : gm.assignment.matches) by_row[m.row] = &m;
    for (std::size_t i = 0; i < g.boxes.size(); ++i) {
      Decision d{g.granule_id, g.boxes[i].box_id, std::nullopt, std::nullopt, DecisionStatus::Unmatched};
      if (const Match* m = by_row[i]) {
        const std::int64_t mmsi = gm.col_mmsi[m->col];
        d.mmsi = mmsi;
        d.cost = m->cost;
        if (report.global.contains(mmsi)) {
          d.status = DecisionStatus::SkippedDuplicate;
          ++report.skipped_duplicates;
        } else {
          d.status = DecisionStatus::Matched;
          report.global.emplace(mmsi, GlobalMatch{g.granule_id, g.boxes[i].box_id, m->cost});
        }
      }
      report.decisions.push_back(std::move(d));
    }
  }
  return report;
}

void write_decisions_jsonl(std::ostream& out, std::span<const Decision> decisions) {
  for (const auto& d : decisions) {
    json j;
    j["granule"] = d.granule;
    j["box_id"] = d.box_id;
    j["mmsi"] = d.mmsi ? json(*d.mmsi) : json(nullptr);
    j["cost"] = d.cost ? json(*d.cost) : json(nullptr);
    j["status"] = to_string(d.status);
    out << j.dump() << '\n';
  }
}

std::vector<Decision> read_decisions_jsonl(std::istream& in) {
  std::vector<Decision> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Decision d;
      d.granule = j.at("granule").get<std::string>();
      d.box_id = j.at("box_id").get<std::string>();
      if (!j.at("mmsi").is_null()) d.mmsi = j["mmsi"].get<std::int64_t>();
      if (!j.at("cost").is_null()) d.cost = j["cost"].get<double>();
      d.status = decision_status_from_string(j.at("status").get<std::string>());
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "decision log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rawsea::ais
