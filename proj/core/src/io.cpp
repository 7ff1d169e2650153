#include "canonmap/io.hpp"

#include <fstream>
#include <string>

#include "canonmap/error.hpp"

namespace canonmap::io {
namespace {

template <typename F>
auto schema_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": " + e.what());
  }
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::SchemaError, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json matrix4_to_json(const Eigen::Matrix4d& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  return rows;
}

Eigen::Matrix4d matrix4_from_json(const json& j) {
  return schema_guard("4x4 matrix", [&] {
    Eigen::Matrix4d m;
    if (j.is_array() && j.size() == 16) {
      for (int k = 0; k < 16; ++k) m(k / 4, k % 4) = j[static_cast<std::size_t>(k)].get<double>();
      return m;
    }
    if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::SchemaError, "expected a 4x4 matrix");
    for (int r = 0; r < 4; ++r) {
      const auto& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || row.size() != 4) throw Error(ErrorCode::SchemaError, "expected a 4x4 matrix");
      for (int c = 0; c < 4; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  });
}

json pose_to_json(const RigidPose& pose) { return matrix4_to_json(pose.matrix()); }
RigidPose pose_from_json(const json& j) { return RigidPose::from_matrix(matrix4_from_json(j), 1e-6); }

json intrinsics_to_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  return schema_guard("intrinsics", [&] {
    CameraIntrinsics k;
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    return k;
  });
}

json matrix_to_json(const EmbeddingMatrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"dims", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

EmbeddingMatrix matrix_from_json(const json& j) {
  return schema_guard("matrix", [&] {
    const auto dims = j.at("dims").get<std::vector<long long>>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (dims.size() != 2 || dims[0] < 0 || dims[1] < 0 ||
        static_cast<std::size_t>(dims[0] * dims[1]) != data.size())
      throw Error(ErrorCode::SchemaError, "matrix dims do not match data length");
    EmbeddingMatrix m(dims[0], dims[1]);
    std::copy(data.begin(), data.end(), m.data());
    return m;
  });
}

json embedding_table_to_json(const VertexEmbeddingTable& t) {
  json j = matrix_to_json(t.rows);
  j["provenance"] = std::string(to_string(t.provenance));
  return j;
}

VertexEmbeddingTable embedding_table_from_json(const json& j) {
  return schema_guard("embedding table", [&] {
    VertexEmbeddingTable t;
    t.rows = matrix_from_json(j);
    t.provenance = provenance_from_string(j.value("provenance", std::string("imported")));
    return t;
  });
}

json observation_to_json(const Observation& obs) {
  json pixels = json::array();
  for (const auto& p : obs.pixels) pixels.push_back(json::array({p.x(), p.y()}));
  json j = {{"pixels", std::move(pixels)},
            {"embeddings", matrix_to_json(obs.embeddings)},
            {"intrinsics", intrinsics_to_json(obs.intrinsics)}};
  if (obs.has_depth()) j["depth"] = obs.depth;
  if (obs.extrinsics) j["extrinsics"] = pose_to_json(*obs.extrinsics);
  return j;
}

Observation observation_from_json(const json& j) {
  return schema_guard("observation", [&] {
    Observation obs;
    for (const auto& p : j.at("pixels")) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::SchemaError, "pixel must be [u, v]");
      obs.pixels.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    obs.embeddings = matrix_from_json(j.at("embeddings"));
    if (j.contains("depth") && !j.at("depth").is_null()) obs.depth = j.at("depth").get<std::vector<double>>();
    obs.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    if (j.contains("extrinsics") && !j.at("extrinsics").is_null()) obs.extrinsics = pose_from_json(j.at("extrinsics"));
    return obs;
  });
}

json pose_result_to_json(const PoseResult& result) {
  json parts = json::array();
  for (const auto& p : result.parts)
    parts.push_back({{"name", p.name},
                     {"pose", pose_to_json(p.pose)},
                     {"mode", std::string(to_string(p.mode))},
                     {"pixels", p.pixels}});
  return {{"object_pose", pose_to_json(result.object_pose)},
          {"solver_transform", pose_to_json(result.solver_transform)},
          {"residual_rms", result.residual_rms},
          {"inliers", result.inlier_count},
          {"kept_pixels", result.kept_pixels},
          {"parts", std::move(parts)}};
}

json grasp_to_json(const GraspPose& grasp) {
  return {{"pose", pose_to_json(grasp.pose)}, {"part", grasp.part}, {"strategy", std::string(to_string(grasp.strategy))}};
}

json scenario_to_json(const ScenarioConfig& cfg) {
  json arts = json::array();
  for (const auto& a : cfg.articulations) {
    json e = {{"part", a.part}, {"axis", vec3_to_json(a.axis)}, {"angle_rad", a.angle_rad}};
    if (a.pivot) e["pivot"] = vec3_to_json(*a.pivot);
    arts.push_back(std::move(e));
  }
  json j = {{"name", cfg.name},
            {"object_pose", pose_to_json(cfg.object_pose)},
            {"camera", intrinsics_to_json(cfg.camera)},
            {"pixel_budget", cfg.pixel_budget},
            {"embedding_noise", cfg.embedding_noise},
            {"outlier_rate", cfg.outlier_rate},
            {"depth_noise", cfg.depth_noise},
            {"deformation_jitter", cfg.deformation_jitter},
            {"articulations", std::move(arts)},
            {"hidden_parts", cfg.hidden_parts},
            {"rng_seed", cfg.rng_seed}};
  if (cfg.extrinsics) j["extrinsics"] = pose_to_json(*cfg.extrinsics);
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  return schema_guard("scenario", [&] {
    ScenarioConfig cfg = default_scenario();
    cfg.name = j.value("name", cfg.name);
    if (j.contains("camera")) cfg.camera = intrinsics_from_json(j.at("camera"));
    if (j.contains("extrinsics")) {
      cfg.extrinsics = j.at("extrinsics").is_null() ? std::nullopt : std::optional(pose_from_json(j.at("extrinsics")));
    }
    if (j.contains("object_pose")) {
      cfg.object_pose = pose_from_json(j.at("object_pose"));
    } else if (j.contains("object_pose_world")) {
      if (!cfg.extrinsics) throw Error(ErrorCode::SchemaError, "object_pose_world requires extrinsics");
      cfg.object_pose = cfg.extrinsics->inverse() * pose_from_json(j.at("object_pose_world"));
    } else if (cfg.extrinsics) {
      cfg.object_pose = cfg.extrinsics->inverse();
    }
    cfg.pixel_budget = j.value("pixel_budget", cfg.pixel_budget);
    cfg.embedding_noise = j.value("embedding_noise", cfg.embedding_noise);
    cfg.outlier_rate = j.value("outlier_rate", cfg.outlier_rate);
    cfg.depth_noise = j.value("depth_noise", cfg.depth_noise);
    cfg.deformation_jitter = j.value("deformation_jitter", cfg.deformation_jitter);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.hidden_parts = j.value("hidden_parts", cfg.hidden_parts);
    if (j.contains("articulations")) {
      for (const auto& e : j.at("articulations")) {
        Articulation a;
        a.part = e.at("part").get<std::string>();
        a.axis = vec3_from_json(e.at("axis"));
        if (e.contains("angle_rad")) {
          a.angle_rad = e.at("angle_rad").get<double>();
        } else {
          a.angle_rad = e.at("angle_deg").get<double>() * M_PI / 180.0;
        }
        if (e.contains("pivot")) a.pivot = vec3_from_json(e.at("pivot"));
        cfg.articulations.push_back(std::move(a));
      }
    }
    cfg.validate();
    return cfg;
  });
}

json truth_to_json(const SyntheticObservation& synth) {
  json parts = json::array();
  for (const auto& p : synth.true_part_poses) parts.push_back({{"name", p.name}, {"pose", pose_to_json(p.pose)}});
  std::vector<int> outlier(synth.outlier.begin(), synth.outlier.end());
  return {{"object_pose", pose_to_json(synth.true_object_pose)},
          {"solver_transform", pose_to_json(synth.true_object_pose.inverse())},
          {"vertex", synth.true_vertex},
          {"outlier", outlier},
          {"parts", std::move(parts)}};
}

json annotations_to_json(const Annotations& a) {
  json j = {{"format", "canonmap.annotations/1"},
            {"mesh", {{"checksum", a.mesh_checksum}, {"vertex_count", a.vertex_count}, {"face_count", a.face_count}}},
            {"frame", pose_to_json(a.frame)},
            {"symmetry", {{"axis", a.symmetry.axis}, {"partner", a.symmetry.partner}, {"residual", a.symmetry.residual}}},
            {"embeddings", embedding_table_to_json(a.embeddings)},
            {"embedding_nn_median", a.embedding_nn_median}};
  std::vector<double> ev(a.eigenvalues.data(), a.eigenvalues.data() + a.eigenvalues.size());
  j["eigenvalues"] = std::move(ev);
  if (a.geodesic_cache) j["geodesic_cache"] = *a.geodesic_cache;
  return j;
}

Annotations annotations_from_json(const json& j) {
  return schema_guard("annotations", [&] {
    if (j.value("format", std::string()) != "canonmap.annotations/1")
      throw Error(ErrorCode::SchemaError, "unknown annotations format");
    Annotations a;
    const auto& mesh = j.at("mesh");
    a.mesh_checksum = mesh.at("checksum").get<std::string>();
    a.vertex_count = mesh.at("vertex_count").get<std::size_t>();
    a.face_count = mesh.at("face_count").get<std::size_t>();
    a.frame = pose_from_json(j.at("frame"));
    const auto& sym = j.at("symmetry");
    a.symmetry.axis = sym.at("axis").get<int>();
    a.symmetry.partner = sym.at("partner").get<std::vector<int>>();
    a.symmetry.residual = sym.at("residual").get<std::vector<double>>();
    a.embeddings = embedding_table_from_json(j.at("embeddings"));
    a.embedding_nn_median = j.at("embedding_nn_median").get<double>();
    const auto ev = j.value("eigenvalues", std::vector<double>{});
    a.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
    if (j.contains("geodesic_cache")) a.geodesic_cache = j.at("geodesic_cache").get<std::string>();
    return a;
  });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "'" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot replace '" + path.string() + "': " + ec.message());
}

}  // namespace canonmap::io
