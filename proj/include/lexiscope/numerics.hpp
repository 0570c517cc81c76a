#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lexiscope/error.hpp"

namespace lexiscope {

using Vector = std::vector<double>;

// Dense row-major matrix. One row per point / image.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<Vector>& rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(r);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  // The first row fixes the column count of an empty 0x0 matrix.
  void append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) {
      fail(ErrorCode::kDimensionMismatch,
           "row of dim " + std::to_string(r.size()) + " appended to matrix of dim " + std::to_string(cols_));
    }
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  // Keeps the rows whose flag is true, in order.
  Matrix select_rows(const std::vector<bool>& keep) const {
    Matrix out(0, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      if (keep[i]) out.append_row(row(i));
    return out;
  }

  Vector row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Cosine of the angle between a and b. A zero vector has similarity 0 with
// everything, so all-black images never abort a ranking run.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "cosine_similarity");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  // sqrt(aa*bb) rather than sqrt(aa)*sqrt(bb): exact 1.0 for identical inputs.
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

inline void l2_normalize(std::span<double> v) {
  const double n = l2_norm(v);
  if (n == 0.0) return;
  for (double& x : v) x /= n;
}

inline void l1_normalize(std::span<double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  if (s == 0.0) return;
  for (double& x : v) x /= s;
}

inline Vector column_mean(const Matrix& m) {
  if (m.empty()) fail(ErrorCode::kEmptySet, "mean of an empty matrix");
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += r[j];
  }
  for (double& x : out) x /= static_cast<double>(m.rows());
  return out;
}

inline Vector column_max(const Matrix& m) {
  if (m.empty()) fail(ErrorCode::kEmptySet, "max of an empty matrix");
  Vector out(m.row(0).begin(), m.row(0).end());
  for (std::size_t i = 1; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] = std::max(out[j], r[j]);
  }
  return out;
}

// Index of the row of `centroids` nearest to `p` in Euclidean distance; ties
// go to the lowest index.
inline std::size_t nearest_row(const Matrix& centroids, std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

struct KMeansResult {
  Matrix centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  // Inertia after each Lloyd update, first entry follows the first update.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(0, points.cols());
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t idx = first(rng);
  centroids.append_row(points.row(idx));
  chosen[idx] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), points.row(idx));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centroids.rows() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!chosen[i]) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    } else {
      // every remaining point coincides with a centroid
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = true;
    centroids.append_row(points.row(pick));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points.row(i), points.row(pick)));
  }
  return centroids;
}

}  // namespace detail

// Lloyd's algorithm from a seeded k-means++ start. Stops when an assignment
// pass changes nothing or after max_iters updates.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100) {
  const std::size_t n = points.rows();
  if (k == 0) fail(ErrorCode::kBadConfig, "k-means needs k >= 1");
  if (n < k) fail(ErrorCode::kTooFewPoints, std::to_string(n) + " points for k=" + std::to_string(k));

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = detail::kmeans_plus_plus(points, k, rng);
  res.assignments.assign(n, k);  // k == unassigned

  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_row(res.centroids, points.row(i));
      if (c != res.assignments[i]) {
        res.assignments[i] = c;
        changed = true;
      }
    }
    if (!changed) {
      res.converged = true;
      break;
    }

    // Repair empty clusters: move in the point farthest from its centroid,
    // taken from a cluster that keeps at least one member.
    std::fill(counts.begin(), counts.end(), 0);
    for (auto a : res.assignments) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[res.assignments[i]] < 2) continue;
        const double d = squared_distance(points.row(i), res.centroids.row(res.assignments[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[res.assignments[far]];
      res.assignments[far] = c;
      counts[c] = 1;
    }

    Matrix next(k, points.cols());
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = next.row(res.assignments[i]);
      auto src = points.row(i);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c)
      for (double& x : next.row(c)) x /= static_cast<double>(counts[c]);
    res.centroids = std::move(next);

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += squared_distance(points.row(i), res.centroids.row(res.assignments[i]));
    res.inertia_history.push_back(inertia);
    res.iterations = iter + 1;
  }
  res.inertia = res.inertia_history.empty() ? 0.0 : res.inertia_history.back();
  return res;
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

struct PcaModel {
  Vector mean;
  Matrix basis;  // out_dim rows, each a unit principal axis
  Vector explained_variance;
  std::size_t rank = 0;     // number of axes with non-negligible variance
  bool degenerate = false;  // rank < out_dim; basis padded with null-space axes
};

namespace detail {

inline void fix_sign(std::span<double> v) {
  std::size_t arg = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
  if (v[arg] < 0.0)
    for (double& x : v) x = -x;
}

// Extends `basis` (orthonormal rows) to `target` rows with canonical axes
// orthogonalized against what is already there.
inline void complete_basis(Matrix& basis, std::size_t dim, std::size_t target) {
  for (std::size_t e = 0; e < dim && basis.rows() < target; ++e) {
    Vector v(dim, 0.0);
    v[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t r = 0; r < basis.rows(); ++r) {
        const double p = dot(basis.row(r), v);
        auto b = basis.row(r);
        for (std::size_t j = 0; j < dim; ++j) v[j] -= p * b[j];
      }
    }
    const double nrm = l2_norm(v);
    if (nrm < 1e-6) continue;
    for (double& x : v) x /= nrm;
    basis.append_row(v);
  }
}

}  // namespace detail

// Principal axes of the sample covariance (divisor n-1), ordered by
// non-increasing variance. The eigenproblem is solved in whichever of
// feature space (dim x dim) or sample space (n x n) is smaller.
inline PcaModel pca_fit(const Matrix& points, std::size_t out_dim) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (n < 2) fail(ErrorCode::kTooFewPoints, "PCA needs at least 2 points");
  if (out_dim == 0) fail(ErrorCode::kBadConfig, "PCA out_dim must be positive");
  if (out_dim > std::min(n, dim)) {
    fail(ErrorCode::kDimensionTooLarge, "out_dim " + std::to_string(out_dim) + " exceeds min(n=" + std::to_string(n) +
                                            ", dim=" + std::to_string(dim) + ")");
  }

  PcaModel model;
  model.mean = column_mean(points);
  Eigen::MatrixXd x(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = points(i, j) - model.mean[j];
  const double denom = static_cast<double>(n - 1);

  const bool feature_space = dim <= n;
  Eigen::MatrixXd gram = feature_space ? Eigen::MatrixXd(x.transpose() * x / denom) : Eigen::MatrixXd(x * x.transpose() / denom);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) fail(ErrorCode::kBadConfig, "PCA eigendecomposition failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& evecs = solver.eigenvectors();
  const auto m = static_cast<std::size_t>(evals.size());
  const double top = std::max(evals(static_cast<Eigen::Index>(m - 1)), 0.0);
  const double tol = top * 1e-10 * static_cast<double>(std::max(n, dim));

  model.basis = Matrix(0, dim);
  for (std::size_t r = 0; r < m && model.basis.rows() < out_dim; ++r) {
    const auto col = static_cast<Eigen::Index>(m - 1 - r);
    const double lambda = evals(col);
    if (!(lambda > tol)) break;
    Vector v(dim);
    if (feature_space) {
      for (std::size_t j = 0; j < dim; ++j) v[j] = evecs(static_cast<Eigen::Index>(j), col);
    } else {
      const Eigen::VectorXd axis = x.transpose() * evecs.col(col);
      for (std::size_t j = 0; j < dim; ++j) v[j] = axis(static_cast<Eigen::Index>(j));
      l2_normalize(v);
    }
    model.basis.append_row(v);
    model.explained_variance.push_back(lambda);
  }
  model.rank = model.basis.rows();
  model.degenerate = model.rank < out_dim;
  if (model.degenerate) {
    if (feature_space) {
      for (std::size_t r = model.rank; r < out_dim; ++r) {
        const auto col = static_cast<Eigen::Index>(m - 1 - r);
        Vector v(dim);
        for (std::size_t j = 0; j < dim; ++j) v[j] = evecs(static_cast<Eigen::Index>(j), col);
        model.basis.append_row(v);
      }
    } else {
      detail::complete_basis(model.basis, dim, out_dim);
    }
    model.explained_variance.resize(out_dim, 0.0);
  }
  for (std::size_t r = 0; r < out_dim; ++r) detail::fix_sign(model.basis.row(r));
  return model;
}

inline Vector pca_transform(const PcaModel& model, std::span<const double> v) {
  require_same_dim(v.size(), model.mean.size(), "pca_transform");
  Vector centered(v.begin(), v.end());
  for (std::size_t j = 0; j < centered.size(); ++j) centered[j] -= model.mean[j];
  Vector out(model.basis.rows());
  for (std::size_t r = 0; r < model.basis.rows(); ++r) out[r] = dot(model.basis.row(r), centered);
  return out;
}

// mean + basis^T * projected
inline Vector pca_reconstruct(const PcaModel& model, std::span<const double> projected) {
  require_same_dim(projected.size(), model.basis.rows(), "pca_reconstruct");
  Vector out = model.mean;
  for (std::size_t r = 0; r < model.basis.rows(); ++r) {
    auto b = model.basis.row(r);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += projected[r] * b[j];
  }
  return out;
}

}  // namespace lexiscope
