#include "rawsea/coregister.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include <nlohmann/json.hpp>

#include "rawsea/error.hpp"

namespace rawsea::coreg {

using nlohmann::json;

ShiftTable ShiftTable::negated() const {
  ShiftTable t{reference_band, {}};
  for (const auto& [band, s] : entries) t.entries[band] = {-s.dx, -s.dy};
  return t;
}

json to_json(const ShiftTable& table) {
  json entries = json::object();
  for (const auto& [band, s] : table.entries) entries[band] = json::array({s.dx, s.dy});
  return json{{"reference_band", table.reference_band}, {"entries", entries}};
}

ShiftTable shift_table_from_json(const json& j) {
  ShiftTable t;
  try {
    t.reference_band = j.at("reference_band").get<std::string>();
    for (const auto& [band, v] : j.at("entries").items()) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw Error(ErrorCode::Format, "shift table entry '" + band + "' must be [dx, dy] integers");
      }
      t.entries[band] = {v[0].get<int>(), v[1].get<int>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("shift table: ") + e.what());
  }
  auto ref = t.entries.find(t.reference_band);
  if (ref != t.entries.end() && !(ref->second == Shift{})) {
    throw Error(ErrorCode::InvalidArgument, "reference band entry must be (0, 0)");
  }
  return t;
}

const ValidityMask& RegisteredGranule::mask(const std::string& band_id) const {
  for (const auto& m : masks)
    if (m.band_id == band_id) return m;
  throw Error(ErrorCode::MissingBand, "no validity mask for band '" + band_id + "'");
}

BandImage translate(const BandImage& band, Shift shift, ValidityMask* mask) {
  BandImage out(band.band_id, band.width, band.height);
  if (mask) *mask = {band.band_id, band.width, band.height, std::vector<std::uint8_t>(band.size(), 0)};
  for (int y = 0; y < band.height; ++y) {
    const int sy = y - shift.dy;
    if (sy < 0 || sy >= band.height) continue;
    for (int x = 0; x < band.width; ++x) {
      const int sx = x - shift.dx;
      if (sx < 0 || sx >= band.width) continue;
      out.at(x, y) = band.at(sx, sy);
      if (mask) mask->valid[std::size_t(y) * band.width + x] = 1;
    }
  }
  return out;
}

RegisteredGranule apply_shift_table(const Granule& g, const ShiftTable& table) {
  RegisteredGranule r;
  r.granule.id = g.id;
  r.granule.meta = g.meta;
  for (const auto& b : g.bands) {
    auto it = table.entries.find(b.band_id);
    if (it == table.entries.end()) {
      throw Error(ErrorCode::MissingTableEntry, "shift table has no entry for band '" + b.band_id + "'");
    }
    ValidityMask m;
    r.granule.bands.push_back(translate(b, it->second, &m));
    r.masks.push_back(std::move(m));
  }
  return r;
}

namespace {

/// Summed-area tables of values and squared values (exact, 64-bit).
struct Integral {
  int w = 0;
  int h = 0;
  std::vector<std::int64_t> s, s2;

  explicit Integral(const BandImage& b) : w(b.width), h(b.height), s((w + 1) * std::size_t(h + 1)), s2(s.size()) {
    for (int y = 0; y < h; ++y) {
      std::int64_t row = 0, row2 = 0;
      for (int x = 0; x < w; ++x) {
        const std::int64_t v = b.at(x, y);
        row += v;
        row2 += v * v;
        s[idx(x + 1, y + 1)] = s[idx(x + 1, y)] + row;
        s2[idx(x + 1, y + 1)] = s2[idx(x + 1, y)] + row2;
      }
    }
  }
  std::size_t idx(int x, int y) const { return std::size_t(y) * (w + 1) + x; }
  std::int64_t sum(const std::vector<std::int64_t>& t, int x0, int y0, int x1, int y1) const {
    return t[idx(x1, y1)] - t[idx(x0, y1)] - t[idx(x1, y0)] + t[idx(x0, y0)];
  }
};

bool has_variance(const BandImage& b) {
  for (DN v : b.data)
    if (v != b.data.front()) return true;
  return false;
}

bool better(double score, int dx, int dy, const ShiftEstimate& best) {
  if (score != best.score) return score > best.score;
  const int l1 = std::abs(dx) + std::abs(dy);
  const int best_l1 = std::abs(best.dx) + std::abs(best.dy);
  if (l1 != best_l1) return l1 < best_l1;
  if (dy != best.dy) return dy < best.dy;
  return dx < best.dx;
}

}  // namespace

ShiftEstimate estimate_shift(const BandImage& ref, const BandImage& moving, int max_shift) {
  if (ref.width != moving.width || ref.height != moving.height) {
    throw Error(ErrorCode::DimensionMismatch, "estimate_shift needs equally sized bands");
  }
  if (max_shift < 1) throw Error(ErrorCode::InvalidArgument, "max_shift must be >= 1");
  if (2 * max_shift >= ref.width || 2 * max_shift >= ref.height) {
    throw Error(ErrorCode::InvalidArgument, "max_shift too large for a " + std::to_string(ref.width) + "x" +
                                                std::to_string(ref.height) + " band");
  }
  if (!has_variance(ref) || !has_variance(moving)) {
    throw Error(ErrorCode::ConstantInput, "cannot correlate a constant band");
  }
  const Integral ia(ref), ib(moving);
  const int w = ref.width, h = ref.height;
  ShiftEstimate best{0, 0, -std::numeric_limits<double>::infinity()};
  bool found = false;
  for (int dy = -max_shift; dy <= max_shift; ++dy) {
    for (int dx = -max_shift; dx <= max_shift; ++dx) {
      // Overlap in reference coordinates.
      const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
      const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
      const __int128 n = __int128(x1 - x0) * (y1 - y0);
      const __int128 sa = ia.sum(ia.s, x0, y0, x1, y1);
      const __int128 sa2 = ia.sum(ia.s2, x0, y0, x1, y1);
      const __int128 sb = ib.sum(ib.s, x0 + dx, y0 + dy, x1 + dx, y1 + dy);
      const __int128 sb2 = ib.sum(ib.s2, x0 + dx, y0 + dy, x1 + dx, y1 + dy);
      const __int128 va = n * sa2 - sa * sa;
      const __int128 vb = n * sb2 - sb * sb;
      if (va <= 0 || vb <= 0) continue;
      std::int64_t sab = 0;
      for (int y = y0; y < y1; ++y) {
        const DN* pa = &ref.data[std::size_t(y) * w];
        const DN* pb = &moving.data[std::size_t(y + dy) * w + dx];
        for (int x = x0; x < x1; ++x) sab += std::int64_t(pa[x]) * pb[x];
      }
      const __int128 cov = n * __int128(sab) - sa * sb;
      const long double den = std::sqrt(static_cast<long double>(va) * static_cast<long double>(vb));
      const double score = static_cast<double>(static_cast<long double>(cov) / den);
      if (!found || better(score, dx, dy, best)) {
        best = {dx, dy, score};
        found = true;
      }
    }
  }
  if (!found) throw Error(ErrorCode::ConstantInput, "no overlap window with non-zero variance");
  best.score = std::clamp(best.score, -1.0, 1.0);
  return best;
}

Registration register_granule(const Granule& g, const std::string& reference_band, const RegistrationMode& mode) {
  const BandImage& ref = g.band(reference_band);
  ShiftTable table;
  if (const auto* lut = std::get_if<LutMode>(&mode)) {
    table = lut->table;
    table.reference_band = reference_band;
    auto it = table.entries.find(reference_band);
    if (it != table.entries.end() && !(it->second == Shift{})) {
      throw Error(ErrorCode::InvalidArgument, "reference band entry must be (0, 0)");
    }
    table.entries[reference_band] = {};
  } else {
    const int max_shift = std::get<EstimateMode>(mode).max_shift;
    table.reference_band = reference_band;
    for (const auto& b : g.bands) {
      if (b.band_id == reference_band) {
        table.entries[b.band_id] = {};
        continue;
      }
      const ShiftEstimate e = estimate_shift(ref, b, max_shift);
      table.entries[b.band_id] = {-e.dx, -e.dy};
    }
  }
  return {apply_shift_table(g, table), table};
}

ShiftTable venus_detector_table(const std::vector<std::string>& detector_a_bands) {
  ShiftTable t;
  t.reference_band = "B5";
  t.entries["B5"] = {};
  for (const auto& b : detector_a_bands)
    if (b != "B5") t.entries[b] = {1, 0};
  for (const char* b : {"B10", "B11", "B12"}) t.entries[b] = {4, 0};
  for (const char* b : {"B3", "B4", "B6"}) t.entries[b] = {10, 0};
  return t;
}

}  // namespace rawsea::coreg
