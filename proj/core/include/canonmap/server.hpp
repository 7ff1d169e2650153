#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "canonmap/mesh.hpp"

namespace canonmap {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 7878;  // 0 binds an ephemeral port
  std::optional<std::filesystem::path> static_dir;  // UI bundle served at /
};

/// HTTP backend for the part selector:
///   GET    /api/mesh
///   POST   /api/geodesic-group   {seed, threshold_m}
///   GET    /api/parts
///   POST   /api/parts            {name, seed, threshold_m[, meta]}
///   DELETE /api/parts/<name>
/// JSON everywhere; errors are {"error": code, "message": text}. The mesh is
/// read-only; every parts mutation is written through to the parts file.
class ApiServer {
 public:
  explicit ApiServer(ServerOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Installs the session. Loads `parts_path` if it exists (revalidated
  /// against the mesh, rewritten if member caches were stale); otherwise the
  /// file is created on the first mutation. Call before bind().
  void load(CanonicalMesh mesh, std::filesystem::path parts_path);

  /// Binds the listening socket and returns the port. Throws IoError.
  int bind();
  /// Serves until stop(). bind() is called first if needed.
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace canonmap
