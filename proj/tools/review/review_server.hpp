#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "review_store.hpp"

namespace httplib {
class Server;
}

namespace rawsea::review {

/// JSON API over a ReviewStore and a directory of granules
/// (<root>/<dir>/meta.json plus band TIFFs). Granules are keyed by the id
/// in meta.json, which is the image file_name in the annotation store.
class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, std::filesystem::path granule_root,
               std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ReviewServer();

  /// Port 0 picks a free port. Throws PortInUse.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  ReviewStore& store_;
  std::filesystem::path root_;
  std::map<std::string, std::filesystem::path> granules_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = -1;
};

}  // namespace rawsea::review
