#include "rawsea/detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rawsea/components.hpp"
#include "rawsea/error.hpp"
#include "rawsea/metrics.hpp"
#include "rawsea/threshold.hpp"

namespace rawsea::detect {

void DetectConfig::validate() const {
  if (tile < 64) throw Error(ErrorCode::InvalidArgument, "tile must be >= 64");
  if (overlap < 0 || overlap >= tile) throw Error(ErrorCode::InvalidArgument, "overlap must be in [0, tile)");
  if (!(min_area < max_area)) throw Error(ErrorCode::InvalidArgument, "min_area must be < max_area");
  if (!(max_fg_fraction > 0.0 && max_fg_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "max_fg_fraction must be in (0, 1]");
  }
}

std::vector<int> tile_starts(int extent, int tile, int overlap) {
  if (extent <= tile) return {0};
  std::vector<int> starts;
  const int stride = tile - overlap;
  for (int s = 0; s + tile < extent; s += stride) starts.push_back(s);
  starts.push_back(extent - tile);
  return starts;
}

std::vector<std::uint8_t> tile_foreground(const BandImage& tile, double max_fg_fraction) {
  using label::Method;
  const std::size_t n = tile.size();
  std::vector<std::uint8_t> sel(n, 1);
  std::vector<DN> values = tile.data;
  std::vector<std::uint8_t> next(n, 0);
  for (int level = 0; level < 32; ++level) {
    const auto hist = label::Histogram::of(values);
    if (hist.constant()) {
      if (level == 0) return {};
      break;
    }
    std::array<double, 4> t;
    int i = 0;
    for (Method m : {Method::Otsu, Method::Li, Method::Isodata, Method::Mean}) {
      try {
        t[i] = label::threshold_value(m, hist);
      } catch (const Error&) {
        t[i] = std::numeric_limits<double>::infinity();
      }
      ++i;
    }
    std::size_t kept = 0;
    double dropped_sum = 0.0, bg_sum = 0.0, bg_sum2 = 0.0;
    std::size_t dropped = 0, bg = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const double v = tile.data[p];
      if (!sel[p]) {
        bg_sum += v;
        bg_sum2 += v * v;
        ++bg;
        next[p] = 0;
        continue;
      }
      const int votes = (v > t[0]) + (v > t[1]) + (v > t[2]) + (v > t[3]);
      next[p] = votes >= label::kConsensusVotes;
      if (next[p]) {
        ++kept;
      } else {
        dropped_sum += v;
        ++dropped;
      }
    }
    // A split that would discard pixels standing far above the background
    // is cutting between targets, not between targets and clutter.
    if (bg > 1 && dropped > 0) {
      const double mu = bg_sum / double(bg);
      const double sd = std::sqrt(std::max(0.0, bg_sum2 / double(bg) - mu * mu));
      if (dropped_sum / double(dropped) >= mu + kTargetSeparation * sd) break;
    }
    sel.swap(next);
    values.clear();
    for (std::size_t p = 0; p < n; ++p)
      if (sel[p]) values.push_back(tile.data[p]);
    if (kept == 0 || double(kept) <= max_fg_fraction * double(n)) break;
  }
  return sel;
}

namespace {

void detect_tile(const BandImage& band, const PixelRect& rect, const DetectConfig& cfg, std::vector<Detection>& out) {
  const BandImage tile = extract(band, rect);
  const auto fg = tile_foreground(tile, cfg.max_fg_fraction);
  if (fg.empty()) return;
  std::vector<int> labels;
  const auto components = connected_components(fg, tile.width, tile.height, &labels);
  for (std::size_t c = 0; c < components.size(); ++c) {
    const PixelRect& b = components[c].bounds;
    const bool inner_left = b.x0 == 0 && rect.x0 > 0;
    const bool inner_top = b.y0 == 0 && rect.y0 > 0;
    const bool inner_right = b.x1 == tile.width && rect.x1 < band.width;
    const bool inner_bottom = b.y1 == tile.height && rect.y1 < band.height;
    if (inner_left || inner_top || inner_right || inner_bottom) continue;
    const double area = double(b.width()) * b.height();
    if (area < cfg.min_area || area > cfg.max_area) continue;

    const int id = int(c) + 1;
    double fg_sum = 0.0;
    for (int y = b.y0; y < b.y1; ++y)
      for (int x = b.x0; x < b.x1; ++x)
        if (labels[std::size_t(y) * tile.width + x] == id) fg_sum += tile.at(x, y);
    const double mu_fg = fg_sum / double(components[c].pixels);

    const int r = cfg.background_ring;
    const int x0 = std::max(0, b.x0 - r), x1 = std::min(tile.width, b.x1 + r);
    const int y0 = std::max(0, b.y0 - r), y1 = std::min(tile.height, b.y1 + r);
    double bg_sum = 0.0;
    std::size_t bg_n = 0;
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        if (!fg[std::size_t(y) * tile.width + x]) {
          bg_sum += tile.at(x, y);
          ++bg_n;
        }
    double score = 0.0;
    if (bg_n > 0 && mu_fg > 0.0) score = std::clamp((mu_fg - bg_sum / double(bg_n)) / mu_fg, 0.0, 1.0);
    if (score < cfg.min_score) continue;
    out.push_back({{double(rect.x0 + b.x0), double(rect.y0 + b.y0), double(b.width()), double(b.height())},
                   score,
                   band.band_id});
  }
}

}  // namespace

std::vector<Detection> detect(const BandImage& band, const DetectConfig& cfg) {
  cfg.validate();
  std::vector<Detection> raw;
  if (band.size() == 0) return raw;
  for (int ty : tile_starts(band.height, cfg.tile, cfg.overlap)) {
    for (int tx : tile_starts(band.width, cfg.tile, cfg.overlap)) {
      const PixelRect rect{tx, ty, std::min(band.width, tx + cfg.tile), std::min(band.height, ty + cfg.tile)};
      detect_tile(band, rect, cfg, raw);
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    if (a.box.x != b.box.x) return a.box.x < b.box.x;
    if (a.box.w != b.box.w) return a.box.w < b.box.w;
    return a.box.h < b.box.h;
  });
  std::vector<Detection> kept;
  for (auto& d : raw) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return eval::iou(k.box, d.box) > cfg.merge_iou;
    });
    if (!duplicate) kept.push_back(std::move(d));
  }
  return kept;
}

}  // namespace rawsea::detect
