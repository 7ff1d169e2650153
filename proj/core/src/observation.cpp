#include "canonmap/observation.hpp"

#include <cmath>
#include <string>

#include "canonmap/error.hpp"

namespace canonmap {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw Error(ErrorCode::ValidationError, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::ValidationError, "image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw Error(ErrorCode::ValidationError, "principal point outside the image");
}

void validate_observation(const Observation& obs, int expected_dims) {
  obs.intrinsics.validate();
  const auto n = obs.pixels.size();
  if (n == 0) throw Error(ErrorCode::ValidationError, "observation has no pixels");
  if (static_cast<std::size_t>(obs.embeddings.rows()) != n)
    throw Error(ErrorCode::DimensionMismatch, "embedding rows (" + std::to_string(obs.embeddings.rows()) +
                                                  ") differ from pixel count (" + std::to_string(n) + ")");
  if (expected_dims >= 0 && obs.embeddings.cols() != expected_dims)
    throw Error(ErrorCode::DimensionMismatch, "pixel embedding dimension " + std::to_string(obs.embeddings.cols()) +
                                                  " differs from vertex table dimension " +
                                                  std::to_string(expected_dims));
  if (!obs.embeddings.allFinite()) throw Error(ErrorCode::ValidationError, "pixel embeddings are not finite");
  for (const auto& p : obs.pixels)
    if (!p.allFinite()) throw Error(ErrorCode::ValidationError, "pixel coordinates are not finite");
  if (obs.has_depth()) {
    if (obs.depth.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "depth count differs from pixel count");
    for (std::size_t i = 0; i < n; ++i)
      if (!(obs.depth[i] > 0.0) || !std::isfinite(obs.depth[i]))
        throw Error(ErrorCode::NonPositiveDepth, "pixel " + std::to_string(i) + " has non-positive depth");
  }
}

Eigen::Vector3d pixel_ray(const CameraIntrinsics& k, const Eigen::Vector2d& pixel) {
  return {(pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy, 1.0};
}

}  // namespace canonmap
