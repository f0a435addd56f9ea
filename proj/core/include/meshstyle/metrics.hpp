#pragma once

#include <span>

#include "meshstyle/geometry.hpp"
#include "meshstyle/sampling.hpp"

namespace meshstyle {

// Symmetric averaged Chamfer distance under the coordinate-wise L1 norm:
// ½·[mean over p of min over q of ‖p−q‖₁ + mean over q of min over p].
double chamfer_l1(std::span<const Vec3> p, std::span<const Vec3> q);

// Symmetric averaged Chamfer distance over squared Euclidean distances.
double chamfer_l2(std::span<const Vec3> p, std::span<const Vec3> q);

// Full-set Chamfer-L1 plus the sum of per-part Chamfer-L1 terms. A part
// empty on both sides contributes zero; a part empty on exactly one side
// contributes the non-empty side's mean L1 distance to the full other set.
double part_distance(const LabeledPointSet& p, const LabeledPointSet& q);

// chamfer_l1 between a point set and its reflection across the plane.
double symmetry_distance(std::span<const Vec3> p, const SymmetryPlane& plane);

// Harmonic mean of precision and recall at Euclidean threshold tau;
// zero when both are zero.
double f_score(std::span<const Vec3> p, std::span<const Vec3> q, double tau);

}  // namespace meshstyle
