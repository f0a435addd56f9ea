#include "meshstyle/config.hpp"

#include "meshstyle/errors.hpp"

namespace meshstyle {

SymmetryPlane RunConfig::plane() const { return parse_symmetry_plane(symmetry_plane); }

void validate_config(const RunConfig& config) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw data_error(std::string("config: ") + what);
  };
  require(config.lambda > 0.0, "lambda must be positive");
  require(config.alpha >= 0.0, "alpha must be non-negative");
  require(config.beta >= 0.0, "beta must be non-negative");
  require(config.gamma >= 0.0, "gamma must be non-negative");
  require(config.sample_count >= 1, "sample_count must be at least 1");
  require(config.ellipsoid_surface_samples >= 1, "ellipsoid_surface_samples must be at least 1");
  require(config.views >= 1, "views must be at least 1");
  require(config.image_resolution >= 1, "image_resolution must be at least 1");
  require(config.geo_iters >= 0, "geo_iters must be non-negative");
  require(config.joint_steps >= 0, "joint_steps must be non-negative");
  require(config.correspondence_refresh >= 1, "correspondence_refresh must be at least 1");
  require(config.fscore_tau_fraction > 0.0, "fscore_tau_fraction must be positive");
  parse_symmetry_plane(config.symmetry_plane);  // throws on bad syntax
}

}  // namespace meshstyle
