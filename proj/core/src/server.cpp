#include "canonmap/server.hpp"

#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "canonmap/error.hpp"
#include "canonmap/geodesic.hpp"
#include "canonmap/parts.hpp"

namespace canonmap {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

json part_json(const PartDefinition& p) {
  json j = {{"name", p.name},
            {"seed", p.seed},
            {"threshold_m", p.threshold},
            {"members", p.members},
            {"centroid", {p.centroid.x(), p.centroid.y(), p.centroid.z()}}};
  if (!p.meta.is_null()) j["meta"] = p.meta;
  return j;
}

// Request bodies: {seed: int, threshold_m: number}. Throws SchemaError.
std::pair<int, double> seed_and_threshold(const json& body) {
  if (!body.is_object() || !body.contains("seed") || !body.contains("threshold_m"))
    throw Error(ErrorCode::SchemaError, "body needs 'seed' and 'threshold_m'");
  const auto& seed = body.at("seed");
  const auto& thr = body.at("threshold_m");
  if (!seed.is_number_integer()) throw Error(ErrorCode::SchemaError, "'seed' must be an integer");
  if (!thr.is_number()) throw Error(ErrorCode::SchemaError, "'threshold_m' must be a number");
  return {seed.get<int>(), thr.get<double>()};
}

}  // namespace

struct ApiServer::Impl {
  ServerOptions options;
  httplib::Server http;
  bool bound = false;
  int port = 0;

  // Session; immutable once loaded except for the registry.
  bool loaded = false;
  CanonicalMesh mesh;
  EdgeGraph graph;
  std::string checksum;
  json mesh_doc;
  std::filesystem::path parts_path;
  PartRegistry registry;
  std::mutex writer;  // serializes registry mutation + file write

  void persist() {
    save_parts(parts_path, PartsFile{checksum, registry.snapshot()});
  }

  json parts_doc() const {
    json parts = json::array();
    for (const auto& p : registry.snapshot()) parts.push_back(part_json(p));
    return {{"mesh_checksum", checksum}, {"parts", std::move(parts)}};
  }

  void routes() {
    http.Get("/api/mesh", [this](const httplib::Request&, httplib::Response& res) {
      if (!loaded) return send_error(res, 503, "NotLoaded", "no mesh loaded");
      send_json(res, 200, mesh_doc);
    });

    http.Post("/api/geodesic-group", [this](const httplib::Request& req, httplib::Response& res) {
      if (!loaded) return send_error(res, 503, "NotLoaded", "no mesh loaded");
      const json body = json::parse(req.body, nullptr, false);
      const auto [seed, threshold] = seed_and_threshold(body);
      const PartDefinition part = grow_part(mesh, graph, seed, threshold, "");
      send_json(res, 200,
                {{"seed", seed},
                 {"threshold_m", threshold},
                 {"members", part.members},
                 {"centroid", {part.centroid.x(), part.centroid.y(), part.centroid.z()}}});
    });

    http.Get("/api/parts", [this](const httplib::Request&, httplib::Response& res) {
      if (!loaded) return send_error(res, 503, "NotLoaded", "no mesh loaded");
      send_json(res, 200, parts_doc());
    });

    http.Post("/api/parts", [this](const httplib::Request& req, httplib::Response& res) {
      if (!loaded) return send_error(res, 503, "NotLoaded", "no mesh loaded");
      const json body = json::parse(req.body, nullptr, false);
      const auto [seed, threshold] = seed_and_threshold(body);
      if (!body.contains("name") || !body.at("name").is_string() || body.at("name").get<std::string>().empty())
        throw Error(ErrorCode::SchemaError, "'name' must be a nonempty string");
      PartDefinition part = grow_part(mesh, graph, seed, threshold, body.at("name").get<std::string>());
      if (body.contains("meta")) part.meta = body.at("meta");
      std::lock_guard lock(writer);
      if (!registry.add(part))
        return send_error(res, 409, "DuplicateName", "part '" + part.name + "' already exists");
      try {
        persist();
      } catch (...) {
        registry.remove(part.name);
        throw;
      }
      send_json(res, 201, part_json(part));
    });

    http.Delete(R"(/api/parts/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      if (!loaded) return send_error(res, 503, "NotLoaded", "no mesh loaded");
      const std::string name = req.matches[1];
      std::lock_guard lock(writer);
      const auto old = registry.find(name);
      if (!old) return send_error(res, 404, "UnknownPart", "no part named '" + name + "'");
      registry.remove(name);
      try {
        persist();
      } catch (...) {
        registry.put(*old);
        throw;
      }
      send_json(res, 200, {{"deleted", name}});
    });

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        const int status = e.code() == ErrorCode::IoError ? 500 : 400;
        send_error(res, status, to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
      }
    });

    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "HttpError", httplib::status_message(res.status));
    });
  }
};

ApiServer::ApiServer(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->routes();
  if (impl_->options.static_dir && !impl_->http.set_mount_point("/", impl_->options.static_dir->string()))
    throw Error(ErrorCode::IoError, "static directory '" + impl_->options.static_dir->string() + "' not found");
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::load(CanonicalMesh mesh, std::filesystem::path parts_path) {
  validate_mesh(mesh);
  Impl& s = *impl_;
  s.graph = build_edge_graph(mesh);
  s.checksum = checksum_hex(mesh_checksum(mesh));
  s.parts_path = std::move(parts_path);

  std::vector<double> vertices;
  vertices.reserve(mesh.vertex_count() * 3);
  for (const auto& v : mesh.vertices) vertices.insert(vertices.end(), {v.x(), v.y(), v.z()});
  std::vector<int> faces;
  faces.reserve(mesh.face_count() * 3);
  for (const auto& f : mesh.faces) faces.insert(faces.end(), f.begin(), f.end());
  const auto box = bounding_box(mesh);
  s.mesh_doc = {{"vertex_count", mesh.vertex_count()},
                {"face_count", mesh.face_count()},
                {"vertices", std::move(vertices)},
                {"faces", std::move(faces)},
                {"checksum", s.checksum},
                {"bbox",
                 {{"min", {box.min().x(), box.min().y(), box.min().z()}},
                  {"max", {box.max().x(), box.max().y(), box.max().z()}}}}};
  s.mesh = std::move(mesh);

  if (std::filesystem::exists(s.parts_path)) {
    LoadedParts loaded = load_parts(s.parts_path, s.mesh, s.graph);
    for (auto& part : loaded.file.parts) s.registry.put(std::move(part));
    if (loaded.members_rewritten) s.persist();
  }
  s.loaded = true;
}

int ApiServer::bind() {
  Impl& s = *impl_;
  if (s.bound) return s.port;
  if (s.options.port == 0) {
    s.port = s.http.bind_to_any_port(s.options.host);
    if (s.port < 0) throw Error(ErrorCode::IoError, "cannot bind " + s.options.host);
  } else {
    if (!s.http.bind_to_port(s.options.host, s.options.port))
      throw Error(ErrorCode::IoError, "cannot bind " + s.options.host + ":" + std::to_string(s.options.port));
    s.port = s.options.port;
  }
  s.bound = true;
  return s.port;
}

void ApiServer::run() {
  bind();
  impl_->http.listen_after_bind();
}

void ApiServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

bool ApiServer::running() const { return impl_->http.is_running(); }

}  // namespace canonmap
