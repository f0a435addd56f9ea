#include "meshstyle/warp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "meshstyle/metrics.hpp"
#include "meshstyle/parallel.hpp"

namespace meshstyle {

namespace {

double l1_norm(const Vec3& u) { return std::abs(u.x()) + std::abs(u.y()) + std::abs(u.z()); }

// Sign vector of the L1 norm; exact zeros get gradient 0.
// A query against a non-empty set comes back unmatched only when every
// candidate distance is NaN; the loss is undefined there, so refuse early
// instead of indexing with the -1 sentinel.
int matched(const NnIndex::Result& r) {
  if (r.index < 0) throw numeric_error("frozen correspondences: distances are not finite");
  return r.index;
}

Vec3 l1_sign(const Vec3& u) {
  Vec3 s;
  for (int k = 0; k < 3; ++k) s[k] = u[k] > 0.0 ? 1.0 : (u[k] < 0.0 ? -1.0 : 0.0);
  return s;
}

}  // namespace

std::vector<BlendWeights> compute_blend_weights(std::span<const Vec3> points,
                                                std::span<const Ellipsoid> ells, double lambda) {
  std::vector<BlendWeights> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = blend_weights(points[i], ells, lambda); });
  return out;
}

std::vector<Vec3> warp_points(std::span<const Vec3> points, std::span<const BlendWeights> weights,
                              const PartTransforms& transforms) {
  if (points.size() != weights.size())
    throw data_error("warp_points: one weight vector per point required");
  std::vector<Vec3> out(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const Vec3& p = points[k];
    const BlendWeights& w = weights[k];
    if (w.size() != transforms.parts.size())
      throw data_error("warp_points: weight/transform part counts differ");
    Vec3 acc = p;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      const PartTransforms::Affine& a = transforms.parts[i];
      acc += w[i] * (a.linear * p + a.translation - p);
    }
    out[k] = acc;
  }, 256);
  return out;
}

TexturedMesh warp_mesh(const TexturedMesh& mesh, std::span<const Ellipsoid> ells,
                       const PartTransforms& transforms, double lambda) {
  TexturedMesh out = mesh;
  const std::vector<BlendWeights> weights =
      compute_blend_weights(mesh.vertices, ells, lambda);
  out.vertices = warp_points(mesh.vertices, weights, transforms);
  return out;
}

GeoLossBreakdown geometric_loss(const LabeledPointSet& source, const LabeledPointSet& target,
                                std::span<const Ellipsoid> ells, const PartTransforms& transforms,
                                const RunConfig& cfg) {
  if (int(ells.size()) != source.part_count())
    throw data_error("geometric_loss: one ellipsoid per source part required");

  const std::vector<BlendWeights> weights =
      compute_blend_weights(source.points, ells, cfg.lambda);
  LabeledPointSet warped = source;
  warped.points = warp_points(source.points, weights, transforms);

  const LabeledPointSet xi =
      sample_parts_surface(ells, source.part_names, cfg.ellipsoid_surface_samples);
  const SymmetryPlane plane = cfg.plane();

  GeoLossBreakdown b;
  b.data = part_distance(warped, target);
  b.xi = part_distance(xi, source);
  b.sym_warp = symmetry_distance(warped.points, plane);
  b.sym_xi = symmetry_distance(xi.points, plane);
  b.alpha = cfg.alpha;
  return b;
}

FrozenObjective::FrozenObjective(const LabeledPointSet& source, const LabeledPointSet& target,
                                 std::span<const Ellipsoid> ells, const RunConfig& cfg)
    : source_(source),
      target_(target),
      ells_count_(ells.size()),
      alpha_(cfg.alpha),
      plane_(cfg.plane()) {
  if (source_.part_names != target_.part_names)
    throw data_error("frozen objective: part alphabets differ");
  if (int(ells_count_) != source_.part_count())
    throw data_error("frozen objective: one ellipsoid per part required");
  if (source_.points.empty() || target_.points.empty())
    throw data_error("frozen objective: empty point set");

  weights_ = compute_blend_weights(source_.points, ells, cfg.lambda);

  const int n_parts = source_.part_count();
  source_parts_.resize(n_parts);
  for (std::size_t k = 0; k < source_.labels.size(); ++k)
    source_parts_[source_.labels[k]].push_back(int(k));

  target_parts_.resize(n_parts);
  target_part_trees_.resize(n_parts);
  for (int i = 0; i < n_parts; ++i) {
    target_parts_[i] = target_.points_of_part(i);
    if (!target_parts_[i].empty())
      target_part_trees_[i] =
          std::make_unique<NnIndex>(std::span<const Vec3>(target_parts_[i]), Metric::l1);
  }
  target_tree_ = std::make_unique<NnIndex>(std::span<const Vec3>(target_.points), Metric::l1);

  const LabeledPointSet xi =
      sample_parts_surface(ells, source_.part_names, cfg.ellipsoid_surface_samples);
  xi_ = part_distance(xi, source_);
  sym_xi_ = symmetry_distance(xi.points, plane_);
}

std::vector<Vec3> FrozenObjective::warped(const PartTransforms& transforms) const {
  return warp_points(source_.points, weights_, transforms);
}

void FrozenObjective::refresh(const PartTransforms& transforms) {
  const std::vector<Vec3> w = warped(transforms);
  const std::size_t n_w = w.size();
  const std::size_t n_q = target_.points.size();

  target_pairs_.clear();
  reflection_pairs_.clear();

  const NnIndex w_tree(std::span<const Vec3>(w), Metric::l1);

  for (std::size_t k = 0; k < n_w; ++k) {
    const int j = matched(target_tree_->nearest(w[k]));
    target_pairs_.push_back({int(k), target_.points[j], 0.5 / double(n_w)});
  }
  for (std::size_t j = 0; j < n_q; ++j) {
    const int a = matched(w_tree.nearest(target_.points[j]));
    target_pairs_.push_back({a, target_.points[j], 0.5 / double(n_q)});
  }

  for (int i = 0; i < source_.part_count(); ++i) {
    const std::vector<int>& wi = source_parts_[i];
    const std::vector<Vec3>& qi = target_parts_[i];
    if (wi.empty() && qi.empty()) continue;
    if (wi.empty()) {
      // Part missing on the source side: its target points match the full
      // warped set, unhalved.
      for (const Vec3& q : qi) {
        const int a = matched(w_tree.nearest(q));
        target_pairs_.push_back({a, q, 1.0 / double(qi.size())});
      }
      continue;
    }
    if (qi.empty()) {
      for (const int k : wi) {
        const int j = matched(target_tree_->nearest(w[k]));
        target_pairs_.push_back({k, target_.points[j], 1.0 / double(wi.size())});
      }
      continue;
    }
    for (const int k : wi) {
      const int j = matched(target_part_trees_[i]->nearest(w[k]));
      target_pairs_.push_back({k, qi[j], 0.5 / double(wi.size())});
    }
    std::vector<Vec3> local(wi.size());
    for (std::size_t s = 0; s < wi.size(); ++s) local[s] = w[wi[s]];
    const NnIndex local_tree(std::span<const Vec3>(local), Metric::l1);
    for (const Vec3& q : qi) {
      const int a = matched(local_tree.nearest(q));
      target_pairs_.push_back({wi[a], q, 0.5 / double(qi.size())});
    }
  }

  if (alpha_ > 0.0) {
    std::vector<Vec3> reflected(n_w);
    for (std::size_t k = 0; k < n_w; ++k) reflected[k] = plane_.reflect(w[k]);
    const NnIndex r_tree(std::span<const Vec3>(reflected), Metric::l1);
    for (std::size_t a = 0; a < n_w; ++a) {
      const int b = matched(r_tree.nearest(w[a]));
      reflection_pairs_.push_back({int(a), b, 0.5 / double(n_w)});
    }
    for (std::size_t b = 0; b < n_w; ++b) {
      const int a = matched(w_tree.nearest(reflected[b]));
      reflection_pairs_.push_back({a, int(b), 0.5 / double(n_w)});
    }
  }
}

FrozenObjective::Eval FrozenObjective::loss(const PartTransforms& transforms) const {
  return loss_and_gradient_impl(transforms, nullptr);
}

FrozenObjective::Eval FrozenObjective::loss_and_gradient(const PartTransforms& transforms,
                                                         std::vector<double>& gradient) const {
  return loss_and_gradient_impl(transforms, &gradient);
}

FrozenObjective::Eval FrozenObjective::loss_and_gradient_impl(const PartTransforms& transforms,
                                                              std::vector<double>* gradient) const {
  const std::vector<Vec3> w = warped(transforms);
  std::vector<Vec3> dw;
  if (gradient) dw.assign(w.size(), Vec3::Zero());

  Eval eval;
  for (const TargetPair& pair : target_pairs_) {
    const Vec3 u = w[pair.warped] - pair.fixed;
    eval.data += pair.coeff * l1_norm(u);
    if (gradient) dw[pair.warped] += pair.coeff * l1_sign(u);
  }

  if (!reflection_pairs_.empty()) {
    const Mat3 h = plane_.linear_part();
    const Vec3 h0 = plane_.affine_part();
    for (const ReflectionPair& pair : reflection_pairs_) {
      const Vec3 u = w[pair.a] - (h * w[pair.b] + h0);
      eval.sym_warp += pair.coeff * l1_norm(u);
      if (gradient) {
        const Vec3 s = l1_sign(u);
        dw[pair.a] += (alpha_ * pair.coeff) * s;
        // h is symmetric, so h^T s = h s.
        dw[pair.b] -= (alpha_ * pair.coeff) * (h * s);
      }
    }
  }

  eval.total = eval.data + xi_ + alpha_ * (eval.sym_warp + sym_xi_);

  if (gradient) {
    gradient->assign(12 * ells_count_, 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Vec3& g = dw[k];
      if (g.x() == 0.0 && g.y() == 0.0 && g.z() == 0.0) continue;
      const Vec3& p = source_.points[k];
      const BlendWeights& bw = weights_[k];
      for (std::size_t i = 0; i < ells_count_; ++i) {
        const double wi = bw[i];
        if (wi == 0.0) continue;
        const std::size_t base = 12 * i;
        for (int r = 0; r < 3; ++r) {
          const double gr = wi * g[r];
          for (int c = 0; c < 3; ++c) (*gradient)[base + 3 * r + c] += gr * p[c];
          (*gradient)[base + 9 + r] += gr;
        }
      }
    }
  }
  return eval;
}

std::vector<double> transforms_to_vector(const PartTransforms& transforms) {
  std::vector<double> out;
  out.reserve(12 * transforms.parts.size());
  for (const PartTransforms::Affine& a : transforms.parts) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out.push_back(a.linear(r, c));
    for (int r = 0; r < 3; ++r) out.push_back(a.translation[r]);
  }
  return out;
}

PartTransforms vector_to_transforms(std::span<const double> values) {
  if (values.size() % 12 != 0)
    throw data_error("vector_to_transforms: length must be a multiple of 12");
  PartTransforms t;
  t.parts.resize(values.size() / 12);
  for (std::size_t i = 0; i < t.parts.size(); ++i) {
    const double* v = values.data() + 12 * i;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.parts[i].linear(r, c) = v[3 * r + c];
    for (int r = 0; r < 3; ++r) t.parts[i].translation[r] = v[9 + r];
  }
  return t;
}

OptimizeResult optimize_transforms(const LabeledPointSet& source, const LabeledPointSet& target,
                                   std::span<const Ellipsoid> ells, const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  FrozenObjective objective(source, target, ells, cfg);

  const int n = int(ells.size());
  std::vector<double> x = transforms_to_vector(PartTransforms::identity(n));
  std::vector<double> best_x = x;

  constexpr double kRate = 0.01;
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<double> m(x.size(), 0.0), v(x.size(), 0.0);

  OptimizerTrace trace;
  trace.xi = objective.xi_term();
  trace.sym_xi = objective.sym_xi_term();
  double best_total = std::numeric_limits<double>::infinity();
  double prev_refresh_total = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> grad;
  for (int iter = 0; iter < cfg.geo_iters; ++iter) {
    const PartTransforms current = vector_to_transforms(x);
    const bool fresh = iter % cfg.correspondence_refresh == 0;
    if (fresh) {
      try {
        objective.refresh(current);
      } catch (const numeric_error& e) {
        trace.iterations = int(trace.entries.size());
        trace.best_total = best_total;
        trace.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        throw optimizer_abort(std::string("optimize_transforms: ") + e.what(),
                              std::move(trace));
      }
    }

    const FrozenObjective::Eval eval = objective.loss_and_gradient(current, grad);

    bool finite = std::isfinite(eval.total);
    for (const double g : grad)
      if (!std::isfinite(g)) finite = false;
    if (!finite) {
      trace.iterations = int(trace.entries.size());
      trace.best_total = best_total;
      trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      throw optimizer_abort("optimize_transforms: non-finite loss or gradient at iteration " +
                                std::to_string(iter),
                            std::move(trace));
    }

    trace.entries.push_back({iter, eval.data, eval.sym_warp, eval.total});
    if (eval.total < best_total) {
      best_total = eval.total;
      best_x = x;
      trace.best_iteration = iter;
    }

    if (fresh) {
      if (iter > 0 && std::abs(prev_refresh_total - eval.total) <=
                          1e-5 * std::max(std::abs(prev_refresh_total), 1e-12)) {
        trace.converged = true;
        break;
      }
      prev_refresh_total = eval.total;
    }

    const double bc1 = 1.0 - std::pow(kBeta1, double(iter + 1));
    const double bc2 = 1.0 - std::pow(kBeta2, double(iter + 1));
    for (std::size_t j = 0; j < x.size(); ++j) {
      m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * grad[j];
      v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * grad[j] * grad[j];
      x[j] -= kRate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + kEps);
    }
  }

  trace.iterations = int(trace.entries.size());
  trace.best_total = best_total;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  OptimizeResult result;
  result.transforms = vector_to_transforms(best_x);
  result.trace = std::move(trace);
  return result;
}

}  // namespace meshstyle
