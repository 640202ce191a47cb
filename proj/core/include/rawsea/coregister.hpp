#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rawsea/raster.hpp"

namespace rawsea::coreg {

/// Integer translation in pixels: +dx moves content right (cross-track X),
/// +dy moves it down (along-track Y).
struct Shift {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

/// Per-band translations that bring each band onto the reference band grid.
struct ShiftTable {
  std::string reference_band;
  std::map<std::string, Shift> entries;

  ShiftTable negated() const;
  friend bool operator==(const ShiftTable&, const ShiftTable&) = default;
};

nlohmann::json to_json(const ShiftTable& table);
ShiftTable shift_table_from_json(const nlohmann::json& j);

/// Per-pixel validity (1 = original data, 0 = fill introduced by a shift).
struct ValidityMask {
  std::string band_id;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;

  bool at(int x, int y) const { return valid[std::size_t(y) * width + x] != 0; }
};

struct RegisteredGranule {
  Granule granule;
  std::vector<ValidityMask> masks;

  const ValidityMask& mask(const std::string& band_id) const;
};

/// Translates a band by (dx, dy), filling vacated pixels with 0 DN.
BandImage translate(const BandImage& band, Shift shift, ValidityMask* mask = nullptr);

/// Applies each band's table entry. Throws MissingTableEntry.
RegisteredGranule apply_shift_table(const Granule& g, const ShiftTable& table);

struct ShiftEstimate {
  int dx = 0;
  int dy = 0;
  double score = 0.0;
};

/// Displacement of `moving` relative to `ref` (moving(x+dx, y+dy) ~ ref(x, y))
/// maximising zero-normalised cross-correlation over the overlap, for
/// |dx|,|dy| <= max_shift. Equal scores resolve to the smallest |dx|+|dy|,
/// then smallest dy, then smallest dx.
ShiftEstimate estimate_shift(const BandImage& ref, const BandImage& moving, int max_shift);

struct LutMode {
  ShiftTable table;
};
struct EstimateMode {
  int max_shift = 10;
};
using RegistrationMode = std::variant<LutMode, EstimateMode>;

struct Registration {
  RegisteredGranule registered;
  ShiftTable applied;  ///< the table that was actually applied
};

Registration register_granule(const Granule& g, const std::string& reference_band, const RegistrationMode& mode);

/// Residual X offsets of the VENuS detectors relative to B5 after the coarse
/// look-up-table step, rounded to whole pixels: detector A 0.64 px -> 1,
/// detector B (B10-B12) 4.2 px -> 4, detector D (B3, B4, B6) ~10 px -> 10.
/// Only B5 is known to sit on detector A, so the caller names any other
/// detector-A bands.
ShiftTable venus_detector_table(const std::vector<std::string>& detector_a_bands = {});

}  // namespace rawsea::coreg
