#include "review_server.hpp"

#include <sys/socket.h>

#include <httplib.h>

#include "rawsea/error.hpp"
#include "rawsea/raster.hpp"
#include "rawsea/tiff.hpp"

namespace rawsea::review {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

std::map<std::string, fs::path> scan_granules(const fs::path& root) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "meta.json")) continue;
    const MetaFile m = read_meta(entry.path() / "meta.json");
    out.emplace(m.id, entry.path());
  }
  return out;
}

const aiscoco::Image* image_by_name(const aiscoco::Document& doc, const std::string& name) {
  for (const auto& img : doc.images)
    if (img.file_name == name) return &img;
  return nullptr;
}

double query_double(const httplib::Request& req, const char* key, double fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument(v);
  return d;
}

}  // namespace

ReviewServer::ReviewServer(ReviewStore& store, fs::path granule_root, std::optional<fs::path> static_dir)
    : store_(store), root_(std::move(granule_root)), http_(std::make_unique<httplib::Server>()) {
  granules_ = scan_granules(root_);
  // SO_REUSEPORT (the library default) would let a second server share the port.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (static_dir) http_->set_mount_point("/", static_dir->string());
  routes();
}

ReviewServer::~ReviewServer() = default;

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = http_->bind_to_any_port(host);
    if (port_ < 0) throw Error(ErrorCode::PortInUse, "cannot bind " + host);
  } else {
    if (!http_->bind_to_port(host, port)) {
      throw Error(ErrorCode::PortInUse, "port " + std::to_string(port) + " on " + host + " is in use");
    }
    port_ = port;
  }
  return port_;
}

void ReviewServer::run() { http_->listen_after_bind(); }

void ReviewServer::stop() { http_->stop(); }

void ReviewServer::routes() {
  auto& s = *http_;

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, 500, std::string(to_string(e.code())), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  });

  s.Get("/api/granules", [this](const httplib::Request&, httplib::Response& res) {
    const auto doc = store_.snapshot();
    json list = json::array();
    for (const auto& [id, dir] : granules_) {
      const MetaFile m = read_meta(dir / "meta.json");
      const aiscoco::Image* img = image_by_name(*doc, id);
      list.push_back({{"id", id},
                      {"bands", m.bands},
                      {"sensing_time", format_utc(m.meta.sensing_time)},
                      {"annotations", img ? doc->annotations_of(img->id).size() : 0}});
    }
    send_json(res, list);
  });

  s.Get(R"(/api/granules/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto it = granules_.find(id);
    if (it == granules_.end()) return send_error(res, 404, "NotFound", "unknown granule '" + id + "'");
    const MetaFile m = read_meta(it->second / "meta.json");
    const BandImage first = m.bands.empty() ? BandImage() : tiff::read(it->second / (m.bands[0] + ".tif"), m.bands[0]);
    send_json(res, {{"id", id},
                    {"bands", m.bands},
                    {"width", first.width},
                    {"height", first.height},
                    {"sensing_time", format_utc(m.meta.sensing_time)},
                    {"resolution_m", m.meta.resolution_m},
                    {"bit_depth", m.meta.bit_depth},
                    {"sensor", to_string(m.meta.sensor)},
                    {"geotransform", m.meta.geotransform.c}});
  });

  s.Get(R"(/api/granules/([^/]+)/band/([^/]+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const std::string band = req.matches[2];
    const auto it = granules_.find(id);
    if (it == granules_.end()) return send_error(res, 404, "NotFound", "unknown granule '" + id + "'");
    const fs::path file = it->second / (band + ".tif");
    if (!fs::exists(file)) return send_error(res, 404, "MissingBand", "granule '" + id + "' has no band " + band);
    double lo = 2.0, hi = 98.0;
    try {
      lo = query_double(req, "lo", 2.0);
      hi = query_double(req, "hi", 98.0);
    } catch (const std::exception&) {
      return send_error(res, 400, "InvalidArgument", "lo and hi must be numbers");
    }
    if (!(lo >= 0.0 && lo < hi && hi <= 100.0)) {
      return send_error(res, 400, "InvalidArgument", "percentiles must satisfy 0 <= lo < hi <= 100");
    }
    const auto png = stretch_to_png(tiff::read(file, band), lo, hi);
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  });

  s.Get(R"(/api/granules/([^/]+)/annotations)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto doc = store_.snapshot();
    const aiscoco::Image* img = image_by_name(*doc, id);
    if (!img && !granules_.count(id)) return send_error(res, 404, "NotFound", "unknown granule '" + id + "'");
    json out{{"granule", id}, {"annotations", json::array()}};
    if (!img) return send_json(res, out);
    const json full = aiscoco::to_json(*doc);
    for (const auto& j : full["images"])
      if (j["id"] == img->id) out["image"] = j;
    for (const auto& j : full["annotations"]) {
      if (j["image_id"] != img->id) continue;
      const aiscoco::Annotation& a = *doc->find_annotation(j["id"].get<std::int64_t>());
      json item = j;
      item["box_id"] = std::to_string(a.id);
      item["status"] = box_status(a, store_.candidates(), id);
      item["version"] = box_version(a);
      out["annotations"].push_back(std::move(item));
    }
    send_json(res, out);
  });

  s.Get(R"(/api/granules/([^/]+)/candidates)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const json& c = store_.candidates();
    if (c.contains("granules") && c["granules"].contains(id)) {
      json out = c["granules"][id];
      out["granule"] = id;
      return send_json(res, out);
    }
    const auto doc = store_.snapshot();
    if (!image_by_name(*doc, id) && !granules_.count(id)) {
      return send_error(res, 404, "NotFound", "unknown granule '" + id + "'");
    }
    send_json(res, {{"granule", id}, {"ais", json::array()}, {"boxes", json::object()}});
  });

  s.Post("/api/decisions", [this](const httplib::Request& req, httplib::Response& res) {
    ReviewDecision d;
    try {
      d = decision_from_json(json::parse(req.body));
    } catch (const json::exception& e) {
      return send_error(res, 400, "Format", e.what());
    } catch (const Error& e) {
      return send_json(res, {{"error", "SchemaViolation"}, {"message", e.what()}, {"path", e.path()}}, 400);
    }
    const Outcome o = store_.submit(d);
    json body{{"granule_id", d.granule_id},
              {"box_id", d.box_id},
              {"outcome", to_string(o.kind)},
              {"version", o.version},
              {"status", o.status}};
    if (!o.message.empty()) body["message"] = o.message;
    switch (o.kind) {
      case OutcomeKind::Applied: return send_json(res, body, 200);
      case OutcomeKind::Conflict: body["error"] = "Conflict"; return send_json(res, body, 409);
      case OutcomeKind::Invalid: body["error"] = "InvalidArgument"; return send_json(res, body, 422);
    }
  });
}

}  // namespace rawsea::review
