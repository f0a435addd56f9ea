#include "meshstyle/metrics.hpp"

#include <cmath>
#include <optional>
#include <vector>

#include "meshstyle/errors.hpp"
#include "meshstyle/nn_index.hpp"
#include "meshstyle/parallel.hpp"

namespace meshstyle {

namespace {

// Nearest-neighbor distances for all queries; queries run in parallel but
// the reduction below always sums in index order for determinism.
std::vector<double> nearest_distances(std::span<const Vec3> queries, const NnIndex& index) {
  std::vector<double> d(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) { d[i] = index.nearest(queries[i]).distance; });
  return d;
}

double mean_nearest(std::span<const Vec3> queries, const NnIndex& index) {
  const std::vector<double> d = nearest_distances(queries, index);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / double(d.size());
}

double chamfer(std::span<const Vec3> p, std::span<const Vec3> q, Metric metric,
               const char* name) {
  if (p.empty() || q.empty()) throw data_error(std::string(name) + ": empty point set");
  const NnIndex q_index(q, metric);
  const NnIndex p_index(p, metric);
  return 0.5 * (mean_nearest(p, q_index) + mean_nearest(q, p_index));
}

}  // namespace

double chamfer_l1(std::span<const Vec3> p, std::span<const Vec3> q) {
  return chamfer(p, q, Metric::l1, "chamfer_l1");
}

double chamfer_l2(std::span<const Vec3> p, std::span<const Vec3> q) {
  return chamfer(p, q, Metric::l2, "chamfer_l2");
}

double part_distance(const LabeledPointSet& p, const LabeledPointSet& q) {
  if (p.part_names != q.part_names)
    throw data_error("part_distance: part alphabets differ");

  double total = chamfer_l1(p.points, q.points);

  std::optional<NnIndex> full_p, full_q;
  for (int part = 0; part < p.part_count(); ++part) {
    const std::vector<Vec3> pi = p.points_of_part(part);
    const std::vector<Vec3> qi = q.points_of_part(part);
    if (pi.empty() && qi.empty()) continue;
    if (pi.empty()) {
      if (!full_p) full_p.emplace(std::span<const Vec3>(p.points), Metric::l1);
      total += mean_nearest(qi, *full_p);
    } else if (qi.empty()) {
      if (!full_q) full_q.emplace(std::span<const Vec3>(q.points), Metric::l1);
      total += mean_nearest(pi, *full_q);
    } else {
      total += chamfer_l1(pi, qi);
    }
  }
  return total;
}

double symmetry_distance(std::span<const Vec3> p, const SymmetryPlane& plane) {
  const SymmetryPlane unit = make_symmetry_plane(plane.normal, plane.offset);
  std::vector<Vec3> reflected(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) reflected[i] = unit.reflect(p[i]);
  return chamfer_l1(p, reflected);
}

double f_score(std::span<const Vec3> p, std::span<const Vec3> q, double tau) {
  if (p.empty() || q.empty()) throw data_error("f_score: empty point set");
  if (!(tau > 0.0)) throw data_error("f_score: tau must be positive");

  const NnIndex q_index(q, Metric::l2);
  const NnIndex p_index(p, Metric::l2);
  const double tau_sq = tau * tau;

  auto hit_fraction = [&](std::span<const Vec3> queries, const NnIndex& index) {
    const std::vector<double> d = nearest_distances(queries, index);
    std::size_t hits = 0;
    for (double v : d)
      if (v <= tau_sq) ++hits;
    return double(hits) / double(queries.size());
  };

  const double precision = hit_fraction(p, q_index);
  const double recall = hit_fraction(q, p_index);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace meshstyle
