#pragma once

#include <span>
#include <string>
#include <vector>

#include "meshstyle/geometry.hpp"
#include "meshstyle/sampling.hpp"

namespace meshstyle {

// Oriented ellipsoid: the image of the unit sphere under
// p = center + rotation * diag(semi_axes) * u.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 semi_axes = Vec3::Ones();
};

// Normalized per-ellipsoid blend weights at one query point.
struct BlendWeights {
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  double operator[](std::size_t i) const { return weights[i]; }
};

// Moment-matched PCA fit: center = mean, axes = principal directions
// (descending spread, right-handed), semi-axes = sqrt(5 * eigenvalue)
// floored so the ellipsoid never degenerates.
Ellipsoid fit_ellipsoid(std::span<const Vec3> points);

// One PCA fit per part of the labeled set.
std::vector<Ellipsoid> fit_part_ellipsoids(const LabeledPointSet& parts);

// Squared Mahalanobis distance (p - center)^T Sigma^-1 (p - center) with
// Sigma = lambda * R * diag(semi_axes^2) * R^T.
double mahalanobis_sq(const Vec3& p, const Ellipsoid& e, double lambda);

// Unnormalized aligned-Gaussian density exp(-mahalanobis_sq / 2), peak 1.
double gaussian_weight(const Vec3& p, const Ellipsoid& e, double lambda);

// w_i = g_i / sum_j g_j. If the sum underflows below 1e-30 the weight
// collapses to 1 on the ellipsoid with the smallest Mahalanobis distance.
BlendWeights blend_weights(const Vec3& p, std::span<const Ellipsoid> ells, double lambda);

// Deterministic spherical Fibonacci lattice mapped onto the ellipsoid.
std::vector<Vec3> sample_ellipsoid_surface(const Ellipsoid& e, int m);

// Surface samples of every ellipsoid, labeled by part index.
LabeledPointSet sample_parts_surface(std::span<const Ellipsoid> ells,
                                     std::span<const std::string> part_names,
                                     int samples_per_ellipsoid);

// Coordinate-descent refinement of (center, orientation, log semi-axes)
// against the part-aware distance between ellipsoid surface samples and the
// labeled part samples. Only strictly improving steps are accepted, so the
// objective is monotone non-increasing; zero iterations is the identity.
std::vector<Ellipsoid> refine_ellipsoids(std::vector<Ellipsoid> ells, const LabeledPointSet& parts,
                                         int iters, int surface_samples = 512);

}  // namespace meshstyle
