#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rawsea/ais.hpp"
#include "rawsea/raster.hpp"
#include "rawsea/time.hpp"

namespace rawsea::aiscoco {

enum class Flag : int { Wake = 1, Border = 2, Cloud = 3, Proximity = 7 };

bool is_known_flag(int f);

struct RoutePoint {
  double lon = 0.0;
  double lat = 0.0;
  UtcTime timestamp{};

  friend bool operator==(const RoutePoint&, const RoutePoint&) = default;
};

struct Attributes {
  std::optional<std::int64_t> mmsi;
  std::optional<std::string> ship_type;
  std::optional<std::vector<RoutePoint>> route;  ///< ascending timestamp
  std::optional<std::vector<int>> flags;
  nlohmann::json extra = nlohmann::json::object();

  bool empty() const { return !mmsi && !ship_type && !route && !flags && extra.empty(); }
  friend bool operator==(const Attributes&, const Attributes&) = default;
};

struct Image {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::optional<UtcTime> sensing_time;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Image&, const Image&) = default;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  BBox bbox;
  std::int64_t category_id = 0;
  std::optional<double> score;
  std::optional<Attributes> attributes;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Category&, const Category&) = default;
};

struct Document {
  std::vector<Image> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;
  nlohmann::json extra = nlohmann::json::object();

  const Image* find_image(std::int64_t id) const;
  const Annotation* find_annotation(std::int64_t id) const;
  Annotation* find_annotation(std::int64_t id);
  std::vector<const Annotation*> annotations_of(std::int64_t image_id) const;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Throws SchemaViolation (with JSON path) or DanglingReference.
Document from_json(const nlohmann::json& j);
/// Canonical form: ids ascending, integral numbers written as integers.
/// Throws InvariantViolation.
nlohmann::json to_json(const Document& doc);
/// Canonical text: sorted keys, 2-space indent, trailing newline.
std::string dump(const Document& doc);

Document read_aiscoco(const std::filesystem::path& path);
Document parse_aiscoco(const std::string& text);
void write_aiscoco(const Document& doc, const std::filesystem::path& path);

/// Throws InvariantViolation naming the first offending element.
void check_invariants(const Document& doc);

struct AisLink {
  std::int64_t annotation_id = 0;
  std::int64_t mmsi = 0;
};

/// Matched annotations gain mmsi, ship_type (record nearest the image's
/// sensing time) and the MMSI's route. Throws UnknownAnnotationId.
Document merge_ais(const Document& doc, std::span<const AisLink> links, std::span<const ais::AisRecord> records);

}  // namespace rawsea::aiscoco
