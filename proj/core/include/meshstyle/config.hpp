#pragma once

#include <cstdint>
#include <string>

#include "meshstyle/geometry.hpp"

namespace meshstyle {

// All run tunables. Field names double as the keys of the on-disk config
// document.
struct RunConfig {
  double lambda = 4.0;  // Gaussian spread of the blend field
  double alpha = 0.1;   // symmetry regularization weight
  double beta = 0.01;   // render-space content weight
  double gamma = 0.001; // render-space style weight

  int sample_count = 4096;
  int ellipsoid_surface_samples = 512;
  int views = 8;
  double elevation_deg = 20.0;
  int image_resolution = 256;
  int geo_iters = 400;
  int joint_steps = 20;
  int correspondence_refresh = 5;
  double fscore_tau_fraction = 0.01;
  std::string symmetry_plane = "x=0";
  std::uint64_t random_seed = 1234;

  SymmetryPlane plane() const;
};

// Throws data_error when a field is outside its documented range.
void validate_config(const RunConfig& config);

}  // namespace meshstyle
