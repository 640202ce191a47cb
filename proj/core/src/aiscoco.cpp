#include "rawsea/aiscoco.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rawsea/error.hpp"

namespace rawsea::aiscoco {

using nlohmann::json;

bool is_known_flag(int f) { return f == 1 || f == 2 || f == 3 || f == 7; }

const Image* Document::find_image(std::int64_t id) const {
  for (const auto& i : images)
    if (i.id == id) return &i;
  return nullptr;
}

const Annotation* Document::find_annotation(std::int64_t id) const {
  for (const auto& a : annotations)
    if (a.id == id) return &a;
  return nullptr;
}

Annotation* Document::find_annotation(std::int64_t id) {
  return const_cast<Annotation*>(std::as_const(*this).find_annotation(id));
}

std::vector<const Annotation*> Document::annotations_of(std::int64_t image_id) const {
  std::vector<const Annotation*> out;
  for (const auto& a : annotations)
    if (a.image_id == image_id) out.push_back(&a);
  return out;
}

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, what, path);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) violation(path + "." + key, "missing required field");
  return *it;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) violation(path, "expected an object");
}

void expect_array(const json& j, const std::string& path) {
  if (!j.is_array()) violation(path, "expected an array");
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) return std::int64_t(d);
  }
  violation(path, "expected an integer");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) violation(path, "expected a number");
  const double d = j.get<double>();
  if (!std::isfinite(d)) violation(path, "expected a finite number");
  return d;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) violation(path, "expected a string");
  return j.get<std::string>();
}

UtcTime get_time(const json& j, const std::string& path) {
  const std::string s = get_string(j, path);
  try {
    return parse_utc(s);
  } catch (const Error&) {
    violation(path, "invalid UTC timestamp '" + s + "'");
  }
}

json rest(const json& obj, std::initializer_list<const char*> known) {
  json extra = json::object();
  for (const auto& [k, v] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* n) { return k == n; }) == known.end()) extra[k] = v;
  }
  return extra;
}

json number(double v) {
  if (v == std::floor(v) && std::abs(v) < 9.0e15) return json(std::int64_t(v));
  return json(v);
}

Attributes read_attributes(const json& j, const std::string& path) {
  expect_object(j, path);
  Attributes a;
  if (j.contains("mmsi") && !j["mmsi"].is_null()) {
    a.mmsi = get_int(j["mmsi"], path + ".mmsi");
    if (*a.mmsi <= 0) violation(path + ".mmsi", "mmsi must be positive");
  }
  if (j.contains("ship_type") && !j["ship_type"].is_null()) a.ship_type = get_string(j["ship_type"], path + ".ship_type");
  if (j.contains("route") && !j["route"].is_null()) {
    const std::string rp = path + ".route";
    expect_array(j["route"], rp);
    std::vector<RoutePoint> route;
    for (std::size_t i = 0; i < j["route"].size(); ++i) {
      const std::string pp = rp + "[" + std::to_string(i) + "]";
      const json& p = j["route"][i];
      if (!p.is_array() || p.size() != 3) violation(pp, "route point must be [lon, lat, timestamp]");
      RoutePoint r;
      r.lon = get_number(p[0], pp + "[0]");
      r.lat = get_number(p[1], pp + "[1]");
      if (r.lon < -180.0 || r.lon > 180.0) violation(pp + "[0]", "lon out of range");
      if (r.lat < -90.0 || r.lat > 90.0) violation(pp + "[1]", "lat out of range");
      r.timestamp = get_time(p[2], pp + "[2]");
      route.push_back(r);
    }
    std::stable_sort(route.begin(), route.end(),
                     [](const RoutePoint& x, const RoutePoint& y) { return x.timestamp < y.timestamp; });
    a.route = std::move(route);
  }
  if (j.contains("flags") && !j["flags"].is_null()) {
    const std::string fp = path + ".flags";
    expect_array(j["flags"], fp);
    std::vector<int> flags;
    std::set<int> seen;
    for (std::size_t i = 0; i < j["flags"].size(); ++i) {
      const std::string p = fp + "[" + std::to_string(i) + "]";
      const std::int64_t f = get_int(j["flags"][i], p);
      if (!is_known_flag(int(f)) || f != int(f)) violation(p, "flag " + std::to_string(f) + " not in {1, 2, 3, 7}");
      if (!seen.insert(int(f)).second) violation(p, "duplicate flag");
      flags.push_back(int(f));
    }
    a.flags = std::move(flags);
  }
  a.extra = rest(j, {"mmsi", "ship_type", "route", "flags"});
  return a;
}

template <class T>
void check_unique_ids(const std::vector<T>& items, const std::string& path) {
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!ids.insert(items[i].id).second) violation(path + "[" + std::to_string(i) + "].id", "duplicate id");
  }
}

}  // namespace

Document from_json(const json& j) {
  expect_object(j, "$");
  Document doc;
  const json& images = field(j, "images", "$");
  expect_array(images, "$.images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string p = "$.images[" + std::to_string(i) + "]";
    const json& o = images[i];
    expect_object(o, p);
    Image im;
    im.id = get_int(field(o, "id", p), p + ".id");
    im.file_name = get_string(field(o, "file_name", p), p + ".file_name");
    im.width = int(get_int(field(o, "width", p), p + ".width"));
    im.height = int(get_int(field(o, "height", p), p + ".height"));
    if (im.width <= 0) violation(p + ".width", "width must be positive");
    if (im.height <= 0) violation(p + ".height", "height must be positive");
    if (o.contains("sensing_time") && !o["sensing_time"].is_null()) im.sensing_time = get_time(o["sensing_time"], p + ".sensing_time");
    im.extra = rest(o, {"id", "file_name", "width", "height", "sensing_time"});
    doc.images.push_back(std::move(im));
  }
  check_unique_ids(doc.images, "$.images");

  const json& cats = field(j, "categories", "$");
  expect_array(cats, "$.categories");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string p = "$.categories[" + std::to_string(i) + "]";
    const json& o = cats[i];
    expect_object(o, p);
    Category c;
    c.id = get_int(field(o, "id", p), p + ".id");
    c.name = get_string(field(o, "name", p), p + ".name");
    c.extra = rest(o, {"id", "name"});
    doc.categories.push_back(std::move(c));
  }
  check_unique_ids(doc.categories, "$.categories");

  const json& anns = field(j, "annotations", "$");
  expect_array(anns, "$.annotations");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string p = "$.annotations[" + std::to_string(i) + "]";
    const json& o = anns[i];
    expect_object(o, p);
    Annotation a;
    a.id = get_int(field(o, "id", p), p + ".id");
    a.image_id = get_int(field(o, "image_id", p), p + ".image_id");
    const json& bb = field(o, "bbox", p);
    if (!bb.is_array() || bb.size() != 4) violation(p + ".bbox", "bbox must be [x, y, w, h]");
    a.bbox = {get_number(bb[0], p + ".bbox[0]"), get_number(bb[1], p + ".bbox[1]"), get_number(bb[2], p + ".bbox[2]"),
              get_number(bb[3], p + ".bbox[3]")};
    if (!(a.bbox.w > 0.0)) violation(p + ".bbox[2]", "bbox width must be positive");
    if (!(a.bbox.h > 0.0)) violation(p + ".bbox[3]", "bbox height must be positive");
    a.category_id = get_int(field(o, "category_id", p), p + ".category_id");
    if (o.contains("score") && !o["score"].is_null()) {
      a.score = get_number(o["score"], p + ".score");
      if (*a.score < 0.0 || *a.score > 1.0) violation(p + ".score", "score must be in [0, 1]");
    }
    if (o.contains("attributes") && !o["attributes"].is_null()) a.attributes = read_attributes(o["attributes"], p + ".attributes");
    a.extra = rest(o, {"id", "image_id", "bbox", "category_id", "score", "attributes"});
    doc.annotations.push_back(std::move(a));
  }
  check_unique_ids(doc.annotations, "$.annotations");

  for (std::size_t i = 0; i < doc.annotations.size(); ++i) {
    const auto& a = doc.annotations[i];
    const std::string p = "$.annotations[" + std::to_string(i) + "]";
    if (!doc.find_image(a.image_id)) {
      throw Error(ErrorCode::DanglingReference, "image_id " + std::to_string(a.image_id) + " does not exist", p + ".image_id");
    }
    const bool cat = std::any_of(doc.categories.begin(), doc.categories.end(),
                                 [&](const Category& c) { return c.id == a.category_id; });
    if (!cat) {
      throw Error(ErrorCode::DanglingReference, "category_id " + std::to_string(a.category_id) + " does not exist",
                  p + ".category_id");
    }
  }
  doc.extra = rest(j, {"images", "annotations", "categories"});
  return doc;
}

void check_invariants(const Document& doc) {
  const auto fail = [](const std::string& path, const std::string& what) {
    throw Error(ErrorCode::InvariantViolation, what, path);
  };
  std::set<std::int64_t> images, cats, anns;
  for (std::size_t i = 0; i < doc.images.size(); ++i) {
    const auto& im = doc.images[i];
    const std::string p = "$.images[" + std::to_string(i) + "]";
    if (!images.insert(im.id).second) fail(p + ".id", "duplicate image id");
    if (im.width <= 0 || im.height <= 0) fail(p, "image size must be positive");
  }
  for (std::size_t i = 0; i < doc.categories.size(); ++i) {
    if (!cats.insert(doc.categories[i].id).second) fail("$.categories[" + std::to_string(i) + "].id", "duplicate category id");
  }
  for (std::size_t i = 0; i < doc.annotations.size(); ++i) {
    const auto& a = doc.annotations[i];
    const std::string p = "$.annotations[" + std::to_string(i) + "]";
    if (!anns.insert(a.id).second) fail(p + ".id", "duplicate annotation id");
    if (!images.contains(a.image_id)) fail(p + ".image_id", "unknown image");
    if (!cats.contains(a.category_id)) fail(p + ".category_id", "unknown category");
    if (!(a.bbox.w > 0.0 && a.bbox.h > 0.0) || !std::isfinite(a.bbox.x) || !std::isfinite(a.bbox.y) ||
        !std::isfinite(a.bbox.w) || !std::isfinite(a.bbox.h)) {
      fail(p + ".bbox", "bbox must be finite with w, h > 0");
    }
    if (a.score && !(*a.score >= 0.0 && *a.score <= 1.0)) fail(p + ".score", "score must be in [0, 1]");
    if (!a.attributes) continue;
    const auto& at = *a.attributes;
    if (at.mmsi && *at.mmsi <= 0) fail(p + ".attributes.mmsi", "mmsi must be positive");
    if (at.flags) {
      std::set<int> seen;
      for (std::size_t k = 0; k < at.flags->size(); ++k) {
        const int f = (*at.flags)[k];
        const std::string fp = p + ".attributes.flags[" + std::to_string(k) + "]";
        if (!is_known_flag(f)) fail(fp, "flag " + std::to_string(f) + " not in {1, 2, 3, 7}");
        if (!seen.insert(f).second) fail(fp, "duplicate flag");
      }
    }
    if (at.route) {
      for (std::size_t k = 0; k < at.route->size(); ++k) {
        const auto& r = (*at.route)[k];
        const std::string rp = p + ".attributes.route[" + std::to_string(k) + "]";
        if (!(r.lat >= -90.0 && r.lat <= 90.0 && r.lon >= -180.0 && r.lon <= 180.0)) fail(rp, "position out of range");
        if (k > 0 && r.timestamp < (*at.route)[k - 1].timestamp) fail(rp, "route not in timestamp order");
      }
    }
  }
}

json to_json(const Document& doc) {
  check_invariants(doc);
  const auto by_id = [](const auto* a, const auto* b) { return a->id < b->id; };
  json j = doc.extra;

  std::vector<const Image*> images;
  for (const auto& i : doc.images) images.push_back(&i);
  std::sort(images.begin(), images.end(), by_id);
  j["images"] = json::array();
  for (const auto* im : images) {
    json o = im->extra;
    o["id"] = im->id;
    o["file_name"] = im->file_name;
    o["width"] = im->width;
    o["height"] = im->height;
    if (im->sensing_time) o["sensing_time"] = format_utc(*im->sensing_time);
    j["images"].push_back(std::move(o));
  }

  std::vector<const Annotation*> anns;
  for (const auto& a : doc.annotations) anns.push_back(&a);
  std::sort(anns.begin(), anns.end(), by_id);
  j["annotations"] = json::array();
  for (const auto* a : anns) {
    json o = a->extra;
    o["id"] = a->id;
    o["image_id"] = a->image_id;
    o["bbox"] = {number(a->bbox.x), number(a->bbox.y), number(a->bbox.w), number(a->bbox.h)};
    o["category_id"] = a->category_id;
    if (a->score) o["score"] = number(*a->score);
    if (a->attributes) {
      const auto& at = *a->attributes;
      json ao = at.extra;
      if (at.mmsi) ao["mmsi"] = *at.mmsi;
      if (at.ship_type) ao["ship_type"] = *at.ship_type;
      if (at.route) {
        ao["route"] = json::array();
        for (const auto& r : *at.route) ao["route"].push_back({number(r.lon), number(r.lat), format_utc(r.timestamp)});
      }
      if (at.flags) ao["flags"] = *at.flags;
      o["attributes"] = std::move(ao);
    }
    j["annotations"].push_back(std::move(o));
  }

  std::vector<const Category*> cats;
  for (const auto& c : doc.categories) cats.push_back(&c);
  std::sort(cats.begin(), cats.end(), by_id);
  j["categories"] = json::array();
  for (const auto* c : cats) {
    json o = c->extra;
    o["id"] = c->id;
    o["name"] = c->name;
    j["categories"].push_back(std::move(o));
  }
  return j;
}

std::string dump(const Document& doc) { return to_json(doc).dump(2) + "\n"; }

Document parse_aiscoco(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("not valid JSON: ") + e.what(), "$");
  }
  return from_json(j);
}

Document read_aiscoco(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_aiscoco(ss.str());
}

void write_aiscoco(const Document& doc, const std::filesystem::path& path) {
  const std::string text = dump(doc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Document merge_ais(const Document& doc, std::span<const AisLink> links, std::span<const ais::AisRecord> records) {
  Document out = doc;
  std::map<std::int64_t, std::vector<const ais::AisRecord*>> by_mmsi;
  for (const auto& r : records) by_mmsi[r.mmsi].push_back(&r);
  for (auto& [mmsi, recs] : by_mmsi) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const ais::AisRecord* a, const ais::AisRecord* b) { return a->timestamp < b->timestamp; });
  }
  for (const auto& link : links) {
    Annotation* a = out.find_annotation(link.annotation_id);
    if (!a) throw Error(ErrorCode::UnknownAnnotationId, "annotation " + std::to_string(link.annotation_id) + " does not exist");
    Attributes at = a->attributes.value_or(Attributes{});
    at.mmsi = link.mmsi;
    const auto it = by_mmsi.find(link.mmsi);
    if (it != by_mmsi.end() && !it->second.empty()) {
      const Image* im = out.find_image(a->image_id);
      const ais::AisRecord* nearest = it->second.back();
      if (im && im->sensing_time) {
        auto gap = [&](const ais::AisRecord* r) {
          const auto d = r->timestamp - *im->sensing_time;
          return d < d.zero() ? -d : d;
        };
        nearest = *std::min_element(it->second.begin(), it->second.end(),
                                    [&](const auto* x, const auto* y) { return gap(x) < gap(y); });
      }
      if (!nearest->ship_type.empty()) at.ship_type = nearest->ship_type;
      std::vector<RoutePoint> route;
      for (const auto* r : it->second) route.push_back({r->lon, r->lat, r->timestamp});
      at.route = std::move(route);
    }
    a->attributes = std::move(at);
  }
  return out;
}

}  // namespace rawsea::aiscoco
