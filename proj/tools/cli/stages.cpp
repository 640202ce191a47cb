#include "stages.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rawsea/ais.hpp"
#include "rawsea/aiscoco.hpp"
#include "rawsea/band_analysis.hpp"
#include "rawsea/coregister.hpp"
#include "rawsea/detector.hpp"
#include "rawsea/error.hpp"
#include "rawsea/geo.hpp"
#include "rawsea/labeler.hpp"
#include "rawsea/matching.hpp"
#include "rawsea/metrics.hpp"
#include "rawsea/sensor.hpp"
#include "rawsea/synthetic.hpp"

namespace rawsea::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Manifest

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, std::size_t(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

json file_entries(const std::vector<fs::path>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inside;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        const bool manifest = name == "manifest.json" || name.ends_with(".manifest.json");
        if (e.is_regular_file() && !manifest) inside.push_back(e.path());
      }
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    }
  }
  json out = json::array();
  for (const auto& f : files) {
    out.push_back({{"path", f.generic_string()}, {"bytes", fs::file_size(f)}, {"sha256", sha256_file(f)}});
  }
  return out;
}

}  // namespace

json make_manifest(const std::string& command, const RunLog& log) {
  json m;
  m["tool"] = "rawsea";
  m["version"] = RAWSEA_VERSION;
  m["command"] = command;
  m["config"] = log.config;
  m["seed"] = log.seed ? json(*log.seed) : json(nullptr);
  m["inputs"] = file_entries(log.inputs);
  m["outputs"] = file_entries(log.outputs);
  m["libraries"] = {{"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return m;
}

void write_manifest(const fs::path& path, const std::string& command, const RunLog& log) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << make_manifest(command, log).dump(2) << '\n';
}

// ---------------------------------------------------------------------------

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

json box_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

const aiscoco::Image* image_by_name(const aiscoco::Document& doc, const std::string& name) {
  for (const auto& img : doc.images)
    if (img.file_name == name) return &img;
  return nullptr;
}

std::vector<BBox> boxes_of(const aiscoco::Document& doc, const std::string& granule) {
  std::vector<BBox> out;
  if (const auto* img = image_by_name(doc, granule))
    for (const auto* a : doc.annotations_of(img->id)) out.push_back(a->bbox);
  return out;
}

std::vector<Granule> load_sorted(const std::vector<fs::path>& dirs) {
  std::vector<Granule> out;
  for (const auto& d : dirs) out.push_back(load_granule(d));
  std::sort(out.begin(), out.end(), [](const Granule& a, const Granule& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) throw Error(ErrorCode::InvalidArgument, "duplicate granule id '" + out[i].id + "'");
  }
  return out;
}

aiscoco::Category vessel_category() {
  aiscoco::Category c;
  c.id = 1;
  c.name = "vessel";
  return c;
}

aiscoco::Image image_of(const Granule& g, std::int64_t id) {
  aiscoco::Image img;
  img.id = id;
  img.file_name = g.id;
  img.width = g.width();
  img.height = g.height();
  img.sensing_time = g.meta.sensing_time;
  return img;
}

}  // namespace

// ---------------------------------------------------------------------------

void run_register(const RegisterOptions& o, RunLog& log) {
  if (o.mode != "estimate" && o.mode != "lut") throw Error(ErrorCode::InvalidArgument, "mode must be estimate or lut");
  coreg::RegistrationMode mode = coreg::EstimateMode{o.max_shift};
  if (o.mode == "lut") {
    if (o.table.empty()) throw Error(ErrorCode::InvalidArgument, "lut mode needs --table");
    mode = coreg::LutMode{coreg::shift_table_from_json(read_json(o.table))};
    log.inputs.push_back(o.table);
  }
  log.config = {{"reference", o.reference}, {"mode", o.mode}, {"max_shift", o.max_shift}};
  for (const auto& dir : o.granules) {
    log.inputs.push_back(dir);
    const Granule g = load_granule(dir);
    if (g.bands.empty()) throw Error(ErrorCode::MissingBand, "granule '" + g.id + "' has no bands");
    const std::string ref = o.reference.empty() ? g.bands.front().band_id : o.reference;
    const auto r = coreg::register_granule(g, ref, mode);
    const fs::path dest = o.out / g.id;
    write_granule(r.registered.granule, dest);
    write_text(dest / "shift_table.json", coreg::to_json(r.applied).dump(2) + "\n");
  }
  log.outputs.push_back(o.out);
}

void run_label(const LabelOptions& o, RunLog& log) {
  log.config = {{"margin", o.margin}};
  log.inputs = {o.granule, o.annotations};
  const Granule g = load_granule(o.granule);
  const auto doc = aiscoco::read_aiscoco(o.annotations);
  const auto* img = image_by_name(doc, g.id);
  std::vector<BBox> coarse;
  json ids = json::array();
  if (img) {
    for (const auto* a : doc.annotations_of(img->id)) {
      coarse.push_back(a->bbox);
      ids.push_back(a->id);
    }
  }
  json bands = json::object();
  for (const auto& [band, boxes] : label::refine_annotations(g, coarse, o.margin)) {
    json list = json::array();
    for (const auto& b : boxes) list.push_back(box_json(b));
    bands[band] = std::move(list);
  }
  write_text(o.out, json{{"granule", g.id}, {"annotation_ids", ids}, {"bands", bands}}.dump(2) + "\n");
  log.outputs.push_back(o.out);
}

void run_detect(const DetectOptions& o, RunLog& log) {
  detect::DetectConfig cfg;
  cfg.min_area = o.min_area;
  cfg.max_area = o.max_area;
  cfg.tile = o.tile;
  cfg.overlap = o.overlap;
  cfg.min_score = o.min_score;
  cfg.validate();
  log.config = {{"band", o.band},           {"min_area", o.min_area}, {"max_area", o.max_area},
                {"tile", o.tile},           {"overlap", o.overlap},   {"min_score", o.min_score}};
  log.inputs = o.granules;

  aiscoco::Document doc;
  doc.categories.push_back(vessel_category());
  std::int64_t next_id = 1;
  std::int64_t image_id = 1;
  for (const Granule& g : load_sorted(o.granules)) {
    if (g.bands.empty()) throw Error(ErrorCode::MissingBand, "granule '" + g.id + "' has no bands");
    const BandImage& band = o.band.empty() ? g.bands.front() : g.band(o.band);
    doc.images.push_back(image_of(g, image_id));
    for (const auto& d : detect::detect(band, cfg)) {
      aiscoco::Annotation a;
      a.id = next_id++;
      a.image_id = image_id;
      a.bbox = d.box;
      a.category_id = 1;
      a.score = d.score;
      doc.annotations.push_back(std::move(a));
    }
    ++image_id;
  }
  aiscoco::write_aiscoco(doc, o.out);
  log.outputs.push_back(o.out);
}

// ---------------------------------------------------------------------------

void run_match(const MatchOptions& o, RunLog& log) {
  ais::MatchConfig cfg;
  cfg.temporal_window_s = o.window_s;
  cfg.radius_m = o.radius_m;
  cfg.day_window = o.day_window;
  cfg.max_cost_m = o.max_cost_m;
  cfg.validate();
  const ais::FilterMode mode = ais::filter_mode_from_string(o.mode);
  log.config = {{"mode", o.mode},
                {"temporal_window_s", o.window_s},
                {"radius_m", o.radius_m},
                {"day_window", o.day_window},
                {"fishing_weight", cfg.fishing_weight},
                {"max_cost_m", o.max_cost_m}};
  log.inputs = {o.annotations, o.ais};

  const auto doc = aiscoco::read_aiscoco(o.annotations);
  const auto parsed = ais::read_ais_csv(o.ais);

  std::map<std::string, fs::path> dirs;
  if (fs::is_directory(o.granule_root)) {
    for (const auto& e : fs::directory_iterator(o.granule_root)) {
      if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs[read_meta(e.path() / "meta.json").id] = e.path();
    }
  }

  std::vector<ais::GranuleBoxes> granules;
  for (const auto& img : doc.images) {
    const auto it = dirs.find(img.file_name);
    if (it == dirs.end()) throw Error(ErrorCode::Io, "no granule '" + img.file_name + "' under " + o.granule_root.string());
    log.inputs.push_back(it->second / "meta.json");
    ais::GranuleBoxes gb;
    gb.granule_id = img.file_name;
    gb.meta = read_meta(it->second / "meta.json").meta;
    gb.width = img.width;
    gb.height = img.height;
    for (const auto* a : doc.annotations_of(img.id)) gb.boxes.push_back({std::to_string(a->id), a->bbox});
    granules.push_back(std::move(gb));
  }

  const auto report = ais::match_granules(granules, parsed.records, cfg, mode);

  std::vector<aiscoco::AisLink> links;
  for (const auto& d : report.decisions) {
    if (d.status == ais::DecisionStatus::Matched) links.push_back({std::stoll(d.box_id), *d.mmsi});
  }
  aiscoco::write_aiscoco(aiscoco::merge_ais(doc, links, parsed.records), o.out);

  std::map<std::pair<std::string, std::string>, const ais::Decision*> by_box;
  for (const auto& d : report.decisions) by_box[{d.granule, d.box_id}] = &d;

  json cand_granules = json::object();
  for (std::size_t gi = 0; gi < granules.size(); ++gi) {
    const auto& gb = granules[gi];
    const auto& gm = report.granules[gi];
    const auto filtered = ais::filter_records(parsed.records, gb.meta, gb.width, gb.height, cfg, mode);

    std::map<std::int64_t, const ais::AisRecord*> nearest;
    for (const auto& r : filtered) {
      auto& slot = nearest[r.mmsi];
      const auto gap = [&](const ais::AisRecord* x) { return std::chrono::abs(x->timestamp - gb.meta.sensing_time); };
      if (!slot || gap(&r) < gap(slot)) slot = &r;
    }
    json mmsis = json::array();
    json positions = json::array();
    for (const auto& [mmsi, r] : nearest) {
      mmsis.push_back(mmsi);
      const auto px = gb.meta.geotransform.invert(geo::lonlat_to_projected(r->position()).x,
                                                  geo::lonlat_to_projected(r->position()).y);
      positions.push_back({{"mmsi", mmsi},
                           {"lon", r->lon},
                           {"lat", r->lat},
                           {"x", px.x},
                           {"y", px.y},
                           {"timestamp", format_utc(r->timestamp)},
                           {"nav_status", r->nav_status}});
    }

    json boxes = json::object();
    for (std::size_t b = 0; b < gb.boxes.size(); ++b) {
      const auto* d = by_box.at({gb.granule_id, gb.boxes[b].box_id});
      json list = json::array();
      for (const auto& c : gm.candidates[b]) {
        list.push_back({{"mmsi", c.mmsi},
                        {"cost", c.cost},
                        {"d_perp", c.cell.d_perp},
                        {"d_eucl", c.cell.d_eucl},
                        {"w_nav", c.cell.w_nav}});
      }
      boxes[gb.boxes[b].box_id] = {{"status", ais::to_string(d->status)},
                                   {"mmsi", d->mmsi ? json(*d->mmsi) : json(nullptr)},
                                   {"cost", d->cost ? json(*d->cost) : json(nullptr)},
                                   {"candidates", std::move(list)}};
    }
    cand_granules[gb.granule_id] = {{"ais", mmsis}, {"ais_positions", positions}, {"boxes", boxes}};
  }
  const fs::path candidates = sibling(o.out, ".candidates.json");
  write_text(candidates, json{{"mode", o.mode}, {"granules", cand_granules}}.dump(2) + "\n");

  const fs::path decisions = sibling(o.out, ".decisions.jsonl");
  {
    std::ostringstream s;
    ais::write_decisions_jsonl(s, report.decisions);
    write_text(decisions, s.str());
  }

  json rejects = json::array();
  for (const auto& r : parsed.rejects) rejects.push_back({{"line", r.line}, {"reason", r.reason}, {"raw", r.raw}});
  const fs::path rejects_path = sibling(o.out, ".ais-rejects.json");
  write_text(rejects_path, rejects.dump(2) + "\n");

  log.outputs = {o.out, candidates, decisions, rejects_path};
}

// ---------------------------------------------------------------------------

json run_evaluate(const EvaluateOptions& o, RunLog& log) {
  const eval::SIoUParams params{o.gamma, o.kappa};
  params.validate();
  if (!(o.siou_thresh >= 0.0 && o.siou_thresh <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "SIoU threshold must be in [0,1]");
  }
  log.config = {{"siou_thresh", o.siou_thresh}, {"gamma", o.gamma}, {"kappa", o.kappa}};
  log.inputs = {o.pred, o.truth};

  const auto pred = aiscoco::read_aiscoco(o.pred);
  const auto truth = aiscoco::read_aiscoco(o.truth);
  std::set<std::string> names;
  for (const auto& i : pred.images) names.insert(i.file_name);
  for (const auto& i : truth.images) names.insert(i.file_name);

  std::vector<eval::GranuleEval> per;
  for (const auto& name : names) {
    std::vector<detect::Detection> dets;
    if (const auto* img = image_by_name(pred, name)) {
      for (const auto* a : pred.annotations_of(img->id)) dets.push_back({a->bbox, a->score.value_or(1.0), {}});
    }
    const auto tboxes = boxes_of(truth, name);
    per.push_back({name, eval::evaluate_detections(dets, tboxes, o.siou_thresh, params)});
  }

  std::optional<eval::ConfusionMatrix> cm;
  if (!o.confusion.empty()) {
    log.inputs.push_back(o.confusion);
    const json rows = read_json(o.confusion);
    if (!rows.is_array()) throw Error(ErrorCode::Format, "confusion matrix must be an array of rows");
    std::vector<std::int64_t> counts;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != rows.size()) throw Error(ErrorCode::SizeMismatch, "confusion matrix must be square");
      for (const auto& v : row) counts.push_back(v.get<std::int64_t>());
    }
    cm.emplace(rows.size(), std::move(counts));
  }
  json report = eval::evaluation_report(o.siou_thresh, per, cm);
  if (!o.out.empty()) {
    write_text(o.out, report.dump(2) + "\n");
    log.outputs.push_back(o.out);
  }
  return report;
}

// ---------------------------------------------------------------------------

void run_band_report(const BandReportOptions& o, RunLog& log) {
  log.config = {{"sea_sample", o.sea_sample}, {"refine", o.refine}};
  log.seed = o.seed;
  log.inputs = {o.granule, o.annotations};
  const Granule g = load_granule(o.granule);
  const auto doc = aiscoco::read_aiscoco(o.annotations);
  const auto coarse = boxes_of(doc, g.id);

  bands::BandBoxes boxes;
  if (o.refine && !coarse.empty()) {
    boxes = label::refine_annotations(g, coarse);
  } else {
    for (const auto& id : g.band_ids()) boxes[id] = coarse;
  }

  json report;
  if (coarse.empty()) {
    report = bands::band_report({}, {}, {});
  } else {
    bands::StatsConfig sc;
    sc.sea_sample = o.sea_sample;
    sc.seed = o.seed;
    const auto stats = bands::band_stats(g, boxes, sc);
    std::vector<bands::DissimilarityMatrix> dissim;
    if (g.bands.size() >= 2) {
      dissim.push_back(bands::dissimilarity(g, coarse, bands::Metric::PCC));
      dissim.push_back(bands::dissimilarity(g, coarse, bands::Metric::ED));
    }
    std::map<std::string, bands::BandMetrics> metrics;
    for (const auto& band : g.bands) {
      const auto e = eval::evaluate_detections(detect::detect(band), boxes.at(band.band_id));
      metrics[band.band_id] = {e.precision(), e.recall(), e.f1()};
    }
    report = bands::band_report(stats, dissim, metrics);
  }
  for (const auto& f : bands::write_band_report(report, o.out)) log.outputs.push_back(f);
}

// ---------------------------------------------------------------------------

namespace {

std::string grid_label(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

void run_degrade(const DegradeOptions& o, RunLog& log) {
  if (o.mtf.empty() || o.snr.empty()) throw Error(ErrorCode::InvalidArgument, "degrade needs --mtf and --snr values");
  const sensor::MtfSpec source{o.source_mtf, o.kernel_size};
  source.validate();
  if (o.truth.empty() && !o.write_granules) {
    throw Error(ErrorCode::InvalidArgument, "degrade needs --truth for a sweep or --write-granules");
  }
  log.config = {{"mtf", o.mtf},       {"snr", json::array()},       {"source_mtf", o.source_mtf},
                {"kernel_size", o.kernel_size}, {"dn_ref", o.dn_ref}, {"band", o.band},
                {"write_granules", o.write_granules}};
  for (double s : o.snr) log.config["snr"].push_back(grid_label(s));
  log.seed = o.seed;
  log.inputs = o.granules;

  const auto granules = load_sorted(o.granules);

  if (o.write_granules) {
    for (double m : o.mtf) {
      for (double s : o.snr) {
        const fs::path cell = o.out / "granules" / ("mtf" + grid_label(m) + "_snr" + grid_label(s));
        for (const auto& g : granules) {
          write_granule(sensor::degrade(g, source, m, sensor::NoiseSpec{s, o.dn_ref, o.seed}), cell / g.id);
        }
      }
    }
    log.outputs.push_back(o.out / "granules");
  }

  if (!o.truth.empty()) {
    log.inputs.push_back(o.truth);
    const auto truth = aiscoco::read_aiscoco(o.truth);
    const auto eval_fn = [&](const std::vector<Granule>& degraded) {
      eval::DetectionCounts total;
      for (const auto& g : degraded) {
        const BandImage& band = o.band.empty() ? g.bands.front() : g.band(o.band);
        const auto dets = detect::detect(band);
        total += eval::evaluate_detections(dets, boxes_of(truth, g.id)).counts;
      }
      return total;
    };
    const auto sweep = sensor::degradation_sweep(granules, source, o.mtf, o.snr, o.dn_ref, o.seed, eval_fn);
    for (const auto& f : sensor::write_sweep(sweep, o.out)) log.outputs.push_back(f);
  }
}

// ---------------------------------------------------------------------------

void run_synth(const SynthOptions& o, RunLog& log) {
  if (o.count < 0) throw Error(ErrorCode::InvalidArgument, "count must be >= 0");
  synth::SceneConfig cfg;
  cfg.width = o.width;
  cfg.height = o.height;
  if (o.snr > 0.0) cfg.snr = o.snr;
  for (const auto& spec : o.shifts) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "shift '" + spec + "' is not BAND:DX:DY");
    }
    try {
      cfg.displacement[spec.substr(0, a)] = {std::stoi(spec.substr(a + 1, b - a - 1)), std::stoi(spec.substr(b + 1))};
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "shift '" + spec + "' is not BAND:DX:DY");
    }
  }
  log.config = {{"count", o.count}, {"width", o.width}, {"height", o.height}, {"snr", o.snr}, {"shifts", o.shifts}};
  log.seed = o.seed;

  aiscoco::Document truth;
  truth.categories.push_back(vessel_category());
  std::vector<ais::AisRecord> records;
  std::int64_t ann_id = 1;
  for (int i = 0; i < o.count; ++i) {
    synth::SceneConfig sc = cfg;
    // Scenes are laid out apart so one scene's AIS never reaches another's footprint.
    sc.origin_lon = cfg.origin_lon + 0.2 * (i % 10);
    sc.origin_lat = cfg.origin_lat + 0.2 * (i / 10);
    sc.mmsi_base = cfg.mmsi_base + 1000 * i;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04d", i);
    const auto scene = synth::make_scene(o.seed * 7919 + std::uint64_t(i), sc, id);
    write_granule(scene.granule, o.out / "granules" / id);
    truth.images.push_back(image_of(scene.granule, i + 1));
    for (const auto& v : scene.vessels) {
      aiscoco::Annotation a;
      a.id = ann_id++;
      a.image_id = i + 1;
      a.bbox = v.box;
      a.category_id = 1;
      if (v.mmsi) {
        a.attributes.emplace();
        a.attributes->mmsi = *v.mmsi;
      }
      truth.annotations.push_back(std::move(a));
    }
    records.insert(records.end(), scene.ais.begin(), scene.ais.end());
  }
  aiscoco::write_aiscoco(truth, o.out / "truth.json");
  std::ostringstream csv;
  ais::write_ais_csv(csv, records);
  write_text(o.out / "ais.csv", csv.str());
  log.outputs = {o.out / "granules", o.out / "truth.json", o.out / "ais.csv"};
}

}  // namespace rawsea::cli
