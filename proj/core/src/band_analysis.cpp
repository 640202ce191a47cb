#include "rawsea/band_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "rawsea/error.hpp"
#include "rawsea/svg.hpp"

namespace rawsea::bands {

using nlohmann::json;

namespace {

const coreg::ValidityMask* find_mask(const std::vector<coreg::ValidityMask>* masks, const std::string& band_id) {
  if (!masks) return nullptr;
  for (const auto& m : *masks)
    if (m.band_id == band_id) return &m;
  return nullptr;
}

void paint(std::vector<std::uint8_t>& mask, int w, int h, const BBox& box, double dilation) {
  const PixelRect r = pixel_rect(box.expanded(dilation), w, h);
  for (int y = r.y0; y < r.y1; ++y)
    std::fill(mask.begin() + std::ptrdiff_t(y) * w + r.x0, mask.begin() + std::ptrdiff_t(y) * w + r.x1, 1);
}

double gradient_magnitude(const BandImage& b, int x, int y) {
  const int xl = std::max(x - 1, 0), xr = std::min(x + 1, b.width - 1);
  const int yu = std::max(y - 1, 0), yd = std::min(y + 1, b.height - 1);
  const double gx = 0.5 * (double(b.at(xr, y)) - double(b.at(xl, y)));
  const double gy = 0.5 * (double(b.at(x, yd)) - double(b.at(x, yu)));
  return std::hypot(gx, gy);
}

void check_taus(std::span<const double> taus) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0 && taus[i] < 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must be in (0, 1)");
    if (i > 0 && !(taus[i] > taus[i - 1])) throw Error(ErrorCode::InvalidArgument, "taus must be ascending");
  }
}

}  // namespace

std::vector<double> hog_cell_strengths(const BandImage& band, std::span<const BBox> boxes) {
  std::vector<double> cells;
  for (const auto& box : boxes) {
    const PixelRect r = pixel_rect(box, band.width, band.height);
    for (int cy = r.y0; cy < r.y1; cy += 2) {
      for (int cx = r.x0; cx < r.x1; cx += 2) {
        double best = 0.0;
        for (int y = cy; y < std::min(cy + 2, r.y1); ++y)
          for (int x = cx; x < std::min(cx + 2, r.x1); ++x) best = std::max(best, gradient_magnitude(band, x, y));
        cells.push_back(best);
      }
    }
  }
  return cells;
}

std::vector<std::pair<double, double>> hog_feature_count(const BandImage& band, std::span<const BBox> boxes,
                                                         std::span<const double> taus) {
  check_taus(taus);
  const auto cells = hog_cell_strengths(band, boxes);
  if (cells.empty()) throw Error(ErrorCode::EmptyBoxes, "no 2x2 cells inside the boxes of band '" + band.band_id + "'");
  const double top = *std::max_element(cells.begin(), cells.end());
  std::vector<std::pair<double, double>> out;
  for (double tau : taus) {
    std::size_t n = 0;
    if (top > 0.0)
      for (double c : cells) n += c > tau * top;
    out.emplace_back(tau, double(n) / double(cells.size()));
  }
  return out;
}

std::vector<BandStats> band_stats(const Granule& g, const BandBoxes& boxes, const StatsConfig& cfg,
                                  const std::vector<coreg::ValidityMask>* masks) {
  check_taus(cfg.taus);
  const int w = g.width(), h = g.height();
  std::vector<std::uint8_t> excluded(std::size_t(w) * h, 0);
  for (const auto& [band, list] : boxes)
    for (const auto& b : list) paint(excluded, w, h, b, kSeaDilation);

  std::vector<BandStats> out;
  for (const auto& band : g.bands) {
    const coreg::ValidityMask* mask = find_mask(masks, band.band_id);
    const auto valid = [&](std::size_t i) { return !mask || mask->valid[i] != 0; };
    const auto it = boxes.find(band.band_id);
    if (it == boxes.end() || it->second.empty()) {
      throw Error(ErrorCode::EmptyBoxes, "band '" + band.band_id + "' has no boxes");
    }
    BandStats s;
    s.band_id = band.band_id;

    std::vector<std::uint8_t> inside(band.size(), 0);
    for (const auto& b : it->second) paint(inside, w, h, b, 0.0);
    long double vsum = 0;
    std::size_t vn = 0;
    for (std::size_t i = 0; i < band.size(); ++i)
      if (inside[i] && valid(i)) {
        vsum += band.data[i];
        ++vn;
      }
    if (vn == 0) throw Error(ErrorCode::EmptyBoxes, "boxes of band '" + band.band_id + "' cover no valid pixel");
    s.mean_vessel_dn = double(vsum / vn);

    std::vector<std::uint32_t> sea;
    for (std::size_t i = 0; i < band.size(); ++i)
      if (!excluded[i] && valid(i)) sea.push_back(std::uint32_t(i));
    if (sea.size() < cfg.sea_sample || cfg.sea_sample == 0) {
      throw Error(ErrorCode::InsufficientSeaPixels, "band '" + band.band_id + "' has " + std::to_string(sea.size()) +
                                                         " sea pixels, need " + std::to_string(cfg.sea_sample));
    }
    std::mt19937_64 rng(cfg.seed);
    long double ssum = 0;
    for (std::size_t k = 0; k < cfg.sea_sample; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, sea.size() - 1);
      std::swap(sea[k], sea[pick(rng)]);
      ssum += band.data[sea[k]];
    }
    s.mean_sea_dn = double(ssum / cfg.sea_sample);

    long double sum = 0, n = 0;
    for (std::size_t i = 0; i < band.size(); ++i)
      if (valid(i)) {
        sum += band.data[i];
        n += 1;
      }
    if (n > 0) {
      const long double mean = sum / n;
      long double ss = 0;
      for (std::size_t i = 0; i < band.size(); ++i)
        if (valid(i)) ss += (band.data[i] - mean) * (band.data[i] - mean);
      s.std_dn = double(std::sqrt(ss / n));
    }
    s.hog_counts = hog_feature_count(band, it->second, cfg.taus);
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_string(Metric m) { return m == Metric::PCC ? "pcc" : "ed"; }

double pcc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "PCC inputs differ in length");
  if (a.empty()) throw Error(ErrorCode::EmptyBoxes, "PCC of empty vectors");
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0 || vb == 0) throw Error(ErrorCode::ConstantBand, "PCC undefined for a constant band");
  return std::clamp(double(cov / std::sqrt(va * vb)), -1.0, 1.0);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "ED inputs differ in length");
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (long double)(a[i] - b[i]) * (a[i] - b[i]);
  return double(std::sqrt(s));
}

std::vector<double> box_pixels(const BandImage& band, std::span<const BBox> boxes) {
  std::vector<double> v;
  for (const auto& box : boxes) {
    const PixelRect r = pixel_rect(box, band.width, band.height);
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) v.push_back(band.at(x, y));
  }
  return v;
}

DissimilarityMatrix dissimilarity(const Granule& g, std::span<const BBox> boxes, Metric metric) {
  if (g.bands.size() < 2) throw Error(ErrorCode::InvalidArgument, "dissimilarity needs at least two bands");
  DissimilarityMatrix d;
  d.metric = metric;
  d.band_ids = g.band_ids();
  std::vector<std::vector<double>> vecs;
  for (const auto& b : g.bands) vecs.push_back(box_pixels(b, boxes));
  for (const auto& v : vecs) {
    if (v.size() != vecs.front().size()) throw Error(ErrorCode::SizeMismatch, "box pixel vectors differ across bands");
  }
  if (vecs.front().empty()) throw Error(ErrorCode::EmptyBoxes, "boxes cover no pixels");
  const std::size_t k = vecs.size();
  const double norm = std::sqrt(double(vecs.front().size()));
  d.values.assign(k * k, metric == Metric::PCC ? 1.0 : 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = metric == Metric::PCC ? pcc(vecs[i], vecs[j]) : euclidean(vecs[i], vecs[j]) / norm;
      d.values[i * k + j] = v;
      d.values[j * k + i] = v;
    }
    if (metric == Metric::PCC) {
      // Diagonal is defined as 1 but a constant band still has no correlation.
      pcc(vecs[i], vecs[i]);
    }
  }
  return d;
}

json band_report(std::span<const BandStats> stats, std::span<const DissimilarityMatrix> dissim,
                 const std::map<std::string, BandMetrics>& metrics) {
  json j;
  j["bands"] = json::array();
  j["stats"] = json::array();
  for (const auto& s : stats) {
    j["bands"].push_back(s.band_id);
    json hog = json::array();
    for (const auto& [tau, c] : s.hog_counts) hog.push_back({{"tau", tau}, {"count", c}});
    j["stats"].push_back({{"band_id", s.band_id},
                          {"mean_vessel_dn", s.mean_vessel_dn},
                          {"mean_sea_dn", s.mean_sea_dn},
                          {"std_dn", s.std_dn},
                          {"hog_counts", std::move(hog)}});
  }
  j["metrics"] = json::object();
  for (const auto& [band, m] : metrics) {
    j["metrics"][band] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  }
  j["dissimilarity"] = json::object();
  for (const auto& d : dissim) {
    const std::size_t k = d.band_ids.size();
    json rows = json::array();
    for (std::size_t r = 0; r < k; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < k; ++c) row.push_back(d.at(r, c));
      rows.push_back(std::move(row));
    }
    j["dissimilarity"][to_string(d.metric)] = {{"bands", d.band_ids}, {"values", std::move(rows)}};
  }
  return j;
}

namespace {
void write_text(const std::filesystem::path& p, const std::string& text, std::vector<std::filesystem::path>& out) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + p.string());
  f << text;
  out.push_back(p);
}

std::string tau_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tau %.2f", tau);
  return buf;
}
}  // namespace

std::vector<std::filesystem::path> write_band_report(const json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  write_text(dir / "band_report.json", report.dump(2) + "\n", written);
  const auto ids = report.at("bands").get<std::vector<std::string>>();
  if (ids.empty()) return written;

  svg::Series vessel{"vessel", {}}, sea{"sea", {}}, stdev{"std", {}};
  std::vector<svg::Series> hog;
  for (const auto& s : report.at("stats")) {
    vessel.values.push_back(s.at("mean_vessel_dn").get<double>());
    sea.values.push_back(s.at("mean_sea_dn").get<double>());
    stdev.values.push_back(s.at("std_dn").get<double>());
    const auto& h = s.at("hog_counts");
    if (hog.empty())
      for (const auto& e : h) hog.push_back({tau_label(e.at("tau").get<double>()), {}});
    for (std::size_t k = 0; k < h.size() && k < hog.size(); ++k) hog[k].values.push_back(h[k].at("count").get<double>());
  }
  write_text(dir / "band_intensity.svg", svg::bar_chart("Mean intensity (DN)", ids, {vessel, sea, stdev}), written);

  svg::Series p{"precision", {}}, r{"recall", {}}, f{"f1", {}};
  const auto& metrics = report.at("metrics");
  for (const auto& id : ids) {
    const bool have = metrics.contains(id);
    p.values.push_back(have ? metrics[id].at("precision").get<double>() : 0.0);
    r.values.push_back(have ? metrics[id].at("recall").get<double>() : 0.0);
    f.values.push_back(have ? metrics[id].at("f1").get<double>() : 0.0);
  }
  write_text(dir / "band_metrics.svg", svg::bar_chart("Detection metrics", ids, {p, r, f}), written);
  write_text(dir / "band_hog.svg", svg::bar_chart("Normalized HOG feature count", ids, hog), written);

  const auto& dis = report.at("dissimilarity");
  for (const char* metric : {"pcc", "ed"}) {
    std::vector<std::string> labels = ids;
    std::vector<double> values;
    if (dis.contains(metric)) {
      labels = dis[metric].at("bands").get<std::vector<std::string>>();
      for (const auto& row : dis[metric].at("values"))
        for (const auto& v : row) values.push_back(v.get<double>());
    }
    double lo = 0.0, hi = 1.0;
    if (std::string(metric) == "pcc") {
      lo = -1.0;
    } else if (!values.empty()) {
      hi = std::max(1e-12, *std::max_element(values.begin(), values.end()));
    }
    values.resize(labels.size() * labels.size(), 0.0);
    const std::string title = std::string(metric) == "pcc" ? "Pearson correlation" : "Euclidean distance";
    write_text(dir / (std::string("dissim_") + metric + ".svg"), svg::heatmap(title, labels, values, lo, hi), written);
  }
  return written;
}

}  // namespace rawsea::bands
