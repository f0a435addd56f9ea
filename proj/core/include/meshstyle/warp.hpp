#pragma once

#include <memory>
#include <span>
#include <vector>

#include "meshstyle/config.hpp"
#include "meshstyle/errors.hpp"
#include "meshstyle/geometry.hpp"
#include "meshstyle/mesh.hpp"
#include "meshstyle/nn_index.hpp"
#include "meshstyle/part_field.hpp"
#include "meshstyle/sampling.hpp"

namespace meshstyle {

// One affine map per part; the blend field interpolates them.
struct PartTransforms {
  struct Affine {
    Mat3 linear = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
  };
  std::vector<Affine> parts;

  static PartTransforms identity(int n) {
    PartTransforms t;
    t.parts.resize(n);
    return t;
  }
  int size() const { return int(parts.size()); }
};

// Normalized blend weights for each point (rest pose), evaluated in parallel.
std::vector<BlendWeights> compute_blend_weights(std::span<const Vec3> points,
                                                std::span<const Ellipsoid> ells, double lambda);

// Linear-blend warp: p + sum_i w_i * (M_i p + t_i - p). Written in delta
// form so identity transforms reproduce the input exactly even when the
// normalized weights only sum to 1 up to rounding.
std::vector<Vec3> warp_points(std::span<const Vec3> points,
                              std::span<const BlendWeights> weights,
                              const PartTransforms& transforms);

// Warps vertex positions; connectivity, UVs, and texture are untouched.
TexturedMesh warp_mesh(const TexturedMesh& mesh, std::span<const Ellipsoid> ells,
                       const PartTransforms& transforms, double lambda);

// Term-by-term value of the geometric objective
//   D_part(warped, target) + D_part(xi, source) + alpha * (D_sym(warped) + D_sym(xi))
// where xi is the ellipsoid surface sampling of the source parts.
struct GeoLossBreakdown {
  double data = 0.0;      // D_part(warped source, target)
  double xi = 0.0;        // D_part(ellipsoid samples, source)
  double sym_warp = 0.0;  // D_sym of the warped source
  double sym_xi = 0.0;    // D_sym of the ellipsoid samples
  double alpha = 0.0;
  double total() const { return data + xi + alpha * (sym_warp + sym_xi); }
};

GeoLossBreakdown geometric_loss(const LabeledPointSet& source, const LabeledPointSet& target,
                                std::span<const Ellipsoid> ells, const PartTransforms& transforms,
                                const RunConfig& cfg);

// The geometric objective with nearest-neighbor correspondences frozen at
// the transforms passed to refresh(). Between refreshes the loss is
// piecewise linear in the warped coordinates, with exact analytic gradients
// (the L1 sign vector, defined as 0 at exact zeros, chained through the
// blend weights).
class FrozenObjective {
 public:
  struct Eval {
    double data = 0.0;
    double sym_warp = 0.0;
    double total = 0.0;  // includes the constant xi terms and the alpha scaling
  };

  FrozenObjective(const LabeledPointSet& source, const LabeledPointSet& target,
                  std::span<const Ellipsoid> ells, const RunConfig& cfg);

  void refresh(const PartTransforms& transforms);

  Eval loss(const PartTransforms& transforms) const;
  // Gradient over the flattened parameters (12 per part: row-major linear,
  // then translation), alongside the loss.
  Eval loss_and_gradient(const PartTransforms& transforms, std::vector<double>& gradient) const;

  double xi_term() const { return xi_; }
  double sym_xi_term() const { return sym_xi_; }
  int part_count() const { return int(ells_count_); }

 private:
  struct TargetPair {
    int warped;   // index into the warped source points
    Vec3 fixed;   // frozen matching point
    double coeff;
  };
  struct ReflectionPair {
    int a;  // warped index on the plain side
    int b;  // warped index whose reflection is matched
    double coeff;
  };

  std::vector<Vec3> warped(const PartTransforms& transforms) const;
  Eval loss_and_gradient_impl(const PartTransforms& transforms,
                              std::vector<double>* gradient) const;

  LabeledPointSet source_;
  LabeledPointSet target_;
  std::size_t ells_count_;
  double alpha_;
  SymmetryPlane plane_;
  std::vector<BlendWeights> weights_;
  std::vector<std::vector<int>> source_parts_;
  std::vector<std::vector<Vec3>> target_parts_;
  std::vector<std::unique_ptr<NnIndex>> target_part_trees_;
  std::unique_ptr<NnIndex> target_tree_;
  double xi_ = 0.0;
  double sym_xi_ = 0.0;
  std::vector<TargetPair> target_pairs_;
  std::vector<ReflectionPair> reflection_pairs_;
};

// Loss curve and outcome of one optimization run.
struct OptimizerTrace {
  struct Entry {
    int iteration = 0;
    double data = 0.0;
    double sym_warp = 0.0;
    double total = 0.0;
  };
  std::vector<Entry> entries;
  double xi = 0.0;
  double sym_xi = 0.0;
  int iterations = 0;
  int best_iteration = -1;
  double best_total = 0.0;
  bool converged = false;  // stopped on the relative-change test
  double wall_seconds = 0.0;
};

// Raised when the loss or gradient turns non-finite; carries the progress
// made so far for diagnostics.
struct optimizer_abort : numeric_error {
  OptimizerTrace trace;
  optimizer_abort(const std::string& message, OptimizerTrace t)
      : numeric_error(message), trace(std::move(t)) {}
};

struct OptimizeResult {
  PartTransforms transforms;
  OptimizerTrace trace;
};

// Adam descent on all affine entries with periodically refreshed frozen
// correspondences; returns the best-loss iterate.
OptimizeResult optimize_transforms(const LabeledPointSet& source, const LabeledPointSet& target,
                                   std::span<const Ellipsoid> ells, const RunConfig& cfg);

// Flattening helpers shared by the optimizer and its tests (12 doubles per
// part: row-major linear then translation).
std::vector<double> transforms_to_vector(const PartTransforms& transforms);
PartTransforms vector_to_transforms(std::span<const double> values);

}  // namespace meshstyle
