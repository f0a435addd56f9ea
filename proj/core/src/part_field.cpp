#include "meshstyle/part_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "meshstyle/errors.hpp"
#include "meshstyle/nn_index.hpp"

namespace meshstyle {

namespace {

constexpr double kAxisFloorFraction = 1e-4;
constexpr double kAxisFloorAbsolute = 1e-12;
constexpr double kUnderflowSum = 1e-30;

// Flips an eigenvector so its first component of meaningful magnitude is
// positive; gives the PCA basis a deterministic sign.
void fix_sign(Vec3& v) {
  for (int k = 0; k < 3; ++k) {
    if (std::abs(v[k]) > 1e-12) {
      if (v[k] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

Ellipsoid fit_ellipsoid(std::span<const Vec3> points) {
  if (points.empty()) throw data_error("fit_ellipsoid: no points");

  const double n = double(points.size());
  Vec3 center = Vec3::Zero();
  for (const Vec3& p : points) center += p;
  center /= n;

  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - center;
    cov += d * d.transpose();
  }
  cov /= n;

  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);

  // Eigen reports eigenvalues ascending; we want axes by decreasing spread.
  Vec3 eig;
  Mat3 axes;
  for (int k = 0; k < 3; ++k) {
    eig[k] = std::max(0.0, es.eigenvalues()[2 - k]);
    axes.col(k) = es.eigenvectors().col(2 - k);
  }
  Vec3 a0 = axes.col(0), a1 = axes.col(1);
  fix_sign(a0);
  fix_sign(a1);
  const Vec3 a2 = a0.cross(a1);

  Ellipsoid e;
  e.center = center;
  e.rotation.col(0) = a0;
  e.rotation.col(1) = a1;
  e.rotation.col(2) = a2;

  const double floor =
      std::max(kAxisFloorFraction * bounds_of(points).diagonal(), kAxisFloorAbsolute);
  for (int k = 0; k < 3; ++k)
    e.semi_axes[k] = std::max(std::sqrt(5.0) * std::sqrt(eig[k]), floor);
  return e;
}

std::vector<Ellipsoid> fit_part_ellipsoids(const LabeledPointSet& parts) {
  std::vector<Ellipsoid> out;
  out.reserve(parts.part_count());
  for (int i = 0; i < parts.part_count(); ++i) {
    const std::vector<Vec3> pts = parts.points_of_part(i);
    if (pts.empty())
      throw data_error("fit_part_ellipsoids: part '" + parts.part_names[i] +
                       "' has no sample points; increase the sample count");
    out.push_back(fit_ellipsoid(pts));
  }
  return out;
}

double mahalanobis_sq(const Vec3& p, const Ellipsoid& e, double lambda) {
  const Vec3 q = e.rotation.transpose() * (p - e.center);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double r = q[k] / e.semi_axes[k];
    s += r * r;
  }
  return s / lambda;
}

double gaussian_weight(const Vec3& p, const Ellipsoid& e, double lambda) {
  return std::exp(-0.5 * mahalanobis_sq(p, e, lambda));
}

BlendWeights blend_weights(const Vec3& p, std::span<const Ellipsoid> ells, double lambda) {
  if (ells.empty()) throw data_error("blend_weights: no ellipsoids");

  const std::size_t n = ells.size();
  std::vector<double> m2(n);
  BlendWeights w;
  w.weights.assign(n, 0.0);

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m2[i] = mahalanobis_sq(p, ells[i], lambda);
    w.weights[i] = std::exp(-0.5 * m2[i]);
    sum += w.weights[i];
  }

  if (sum < kUnderflowSum) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (m2[i] < m2[best]) best = i;
    std::fill(w.weights.begin(), w.weights.end(), 0.0);
    w.weights[best] = 1.0;
    return w;
  }

  for (double& v : w.weights) v /= sum;
  return w;
}

std::vector<Vec3> sample_ellipsoid_surface(const Ellipsoid& e, int m) {
  if (m < 1) throw data_error("sample_ellipsoid_surface: need at least one sample");

  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double z = 1.0 - 2.0 * (double(k) + 0.5) / double(m);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double theta = golden * double(k);
    const Vec3 u(r * std::cos(theta), r * std::sin(theta), z);
    out.push_back(e.center + e.rotation * (e.semi_axes.cwiseProduct(u)));
  }
  return out;
}

LabeledPointSet sample_parts_surface(std::span<const Ellipsoid> ells,
                                     std::span<const std::string> part_names,
                                     int samples_per_ellipsoid) {
  if (ells.size() != part_names.size())
    throw data_error("sample_parts_surface: one ellipsoid per part required");

  LabeledPointSet out;
  out.part_names.assign(part_names.begin(), part_names.end());
  out.points.reserve(ells.size() * samples_per_ellipsoid);
  for (std::size_t i = 0; i < ells.size(); ++i) {
    for (const Vec3& p : sample_ellipsoid_surface(ells[i], samples_per_ellipsoid)) {
      out.points.push_back(p);
      out.labels.push_back(int(i));
      out.source_face.push_back(-1);
    }
  }
  return out;
}

namespace {

// Incremental evaluator for D_part(surface samples, parts): caches the
// per-ellipsoid sums so that a trial move of one ellipsoid only recomputes
// that ellipsoid's contributions.
class RefineObjective {
 public:
  RefineObjective(const LabeledPointSet& parts, int n_parts, int m)
      : parts_(parts),
        n_parts_(n_parts),
        m_(m),
        full_tree_(std::span<const Vec3>(parts.points), Metric::l1) {
    part_points_.resize(n_parts);
    part_trees_.resize(n_parts);
    for (int i = 0; i < n_parts_; ++i) {
      part_points_[i] = parts.points_of_part(i);
      if (!part_points_[i].empty())
        part_trees_[i] =
            std::make_unique<NnIndex>(std::span<const Vec3>(part_points_[i]), Metric::l1);
    }
    forward_full_.assign(n_parts, 0.0);
    forward_part_.assign(n_parts, 0.0);
    rows_.assign(n_parts, std::vector<double>(parts.points.size(), 0.0));
  }

  struct Contribution {
    double forward_full = 0.0;  // sum of sample distances to the full part set
    double forward_part = 0.0;  // sum of sample distances to the own part
    std::vector<double> row;    // per part point: min distance to the samples
  };

  Contribution evaluate_part(int i, const std::vector<Vec3>& samples) const {
    Contribution c;
    const NnIndex sample_tree(std::span<const Vec3>(samples), Metric::l1);
    for (const Vec3& x : samples) c.forward_full += full_tree_.nearest(x).distance;
    if (part_trees_[i]) {
      for (const Vec3& x : samples) c.forward_part += part_trees_[i]->nearest(x).distance;
    }
    c.row.resize(parts_.points.size());
    for (std::size_t k = 0; k < parts_.points.size(); ++k)
      c.row[k] = sample_tree.nearest(parts_.points[k]).distance;
    return c;
  }

  void commit_part(int i, Contribution c) {
    forward_full_[i] = c.forward_full;
    forward_part_[i] = c.forward_part;
    rows_[i] = std::move(c.row);
  }

  // Total with part i's cached contribution replaced by `trial` (pass
  // nullptr to evaluate the committed state).
  double total_with(int i, const Contribution* trial) const {
    const std::size_t n_points = parts_.points.size();
    const double n_samples = double(n_parts_) * double(m_);

    double forward_sum = 0.0;
    for (int j = 0; j < n_parts_; ++j)
      forward_sum += (j == i && trial) ? trial->forward_full : forward_full_[j];

    double backward_sum = 0.0;
    for (std::size_t k = 0; k < n_points; ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n_parts_; ++j) {
        const double d = (j == i && trial) ? trial->row[k] : rows_[j][k];
        if (d < best) best = d;
      }
      backward_sum += best;
    }
    double total = 0.5 * (forward_sum / n_samples + backward_sum / double(n_points));

    for (int j = 0; j < n_parts_; ++j) {
      const bool use_trial = (j == i && trial);
      const double fwd_part = use_trial ? trial->forward_part : forward_part_[j];
      const double fwd_full = use_trial ? trial->forward_full : forward_full_[j];
      if (part_points_[j].empty()) {
        // One-sided rule: the samples' mean distance to the full part set.
        total += fwd_full / double(m_);
        continue;
      }
      double back_part = 0.0;
      for (std::size_t k = 0; k < parts_.labels.size(); ++k) {
        if (parts_.labels[k] != j) continue;
        back_part += use_trial ? trial->row[k] : rows_[j][k];
      }
      total += 0.5 * (fwd_part / double(m_) + back_part / double(part_points_[j].size()));
    }
    return total;
  }

 private:
  const LabeledPointSet& parts_;
  int n_parts_;
  int m_;
  NnIndex full_tree_;
  std::vector<std::vector<Vec3>> part_points_;
  std::vector<std::unique_ptr<NnIndex>> part_trees_;
  std::vector<double> forward_full_;
  std::vector<double> forward_part_;
  std::vector<std::vector<double>> rows_;
};

Mat3 renormalize_rotation(const Mat3& r) {
  return Eigen::Quaterniond(r).normalized().toRotationMatrix();
}

}  // namespace

std::vector<Ellipsoid> refine_ellipsoids(std::vector<Ellipsoid> ells, const LabeledPointSet& parts,
                                         int iters, int surface_samples) {
  if (int(ells.size()) != parts.part_count())
    throw data_error("refine_ellipsoids: one ellipsoid per part required");
  if (iters <= 0 || ells.empty()) return ells;
  if (parts.points.empty()) throw data_error("refine_ellipsoids: empty part samples");
  if (surface_samples < 1) throw data_error("refine_ellipsoids: need at least one surface sample");

  const int n = int(ells.size());
  RefineObjective objective(parts, n, surface_samples);
  for (int i = 0; i < n; ++i)
    objective.commit_part(i, objective.evaluate_part(i, sample_ellipsoid_surface(ells[i], surface_samples)));
  double current = objective.total_with(0, nullptr);

  struct Steps {
    double center;
    double log_axis;
    double angle;
    bool converged = false;
  };
  std::vector<Steps> steps(n);
  for (int i = 0; i < n; ++i) {
    const double scale = std::max(ells[i].semi_axes.maxCoeff(), kAxisFloorAbsolute);
    steps[i] = {0.1 * scale, 0.1, 0.1};
  }

  auto perturbed = [](const Ellipsoid& e, int coord, double delta) {
    Ellipsoid out = e;
    if (coord < 3) {
      out.center[coord] += delta;
    } else if (coord < 6) {
      out.semi_axes[coord - 3] =
          std::max(e.semi_axes[coord - 3] * std::exp(delta), kAxisFloorAbsolute);
    } else {
      Vec3 axis = Vec3::Zero();
      axis[coord - 6] = 1.0;
      out.rotation = renormalize_rotation(Eigen::AngleAxisd(delta, axis).toRotationMatrix() * e.rotation);
    }
    return out;
  };

  for (int iter = 0; iter < iters; ++iter) {
    bool any_active = false;
    for (int i = 0; i < n; ++i) {
      if (steps[i].converged) continue;
      any_active = true;
      bool improved = false;
      for (int coord = 0; coord < 9; ++coord) {
        const double step = coord < 3   ? steps[i].center
                            : coord < 6 ? steps[i].log_axis
                                        : steps[i].angle;
        for (const double sign : {1.0, -1.0}) {
          const Ellipsoid trial_ell = perturbed(ells[i], coord, sign * step);
          auto trial = objective.evaluate_part(i, sample_ellipsoid_surface(trial_ell, surface_samples));
          const double trial_total = objective.total_with(i, &trial);
          if (trial_total < current - 1e-12 * std::max(1.0, current)) {
            ells[i] = trial_ell;
            objective.commit_part(i, std::move(trial));
            current = trial_total;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        steps[i].center *= 0.5;
        steps[i].log_axis *= 0.5;
        steps[i].angle *= 0.5;
        const double scale = std::max(ells[i].semi_axes.maxCoeff(), kAxisFloorAbsolute);
        if (steps[i].center < 1e-4 * scale && steps[i].log_axis < 1e-4 &&
            steps[i].angle < 1e-4)
          steps[i].converged = true;
      }
    }
    if (!any_active) break;
  }
  return ells;
}

}  // namespace meshstyle
