#pragma once

// Brute-force reference computations used by the unit and acceptance tests.
// Nothing here calls into the prox, PAVA or weight-sequence code it checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace sparc::oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline double oscar_penalty(const Vector& x, double l1, double l2) {
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = i + 1; j < x.size(); ++j) pairs += std::max(std::abs(x[i]), std::abs(x[j]));
  return l1 * x.lpNorm<1>() + l2 * pairs;
}

/// Direct evaluation: +inf off the K-sparse set, otherwise the pairwise-max
/// sum over an index set made of every nonzero plus enough zeros to reach K.
/// Each padding zero pairs with every nonzero at that nonzero's magnitude.
inline double sparc_penalty(const Vector& x, double lambda, Eigen::Index k) {
  Eigen::Index nonzero = 0;
  double pairs = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    ++nonzero;
    total += std::abs(x[i]);
    for (Eigen::Index j = i + 1; j < x.size(); ++j)
      if (x[j] != 0.0) pairs += std::max(std::abs(x[i]), std::abs(x[j]));
  }
  if (nonzero > k) return std::numeric_limits<double>::infinity();
  return lambda * (pairs + static_cast<double>(k - nonzero) * total);
}

/// Exact projection onto {z_1 >= ... >= z_d} by enumerating every partition of
/// the indices into contiguous blocks, setting each block to its mean, and
/// keeping the best feasible candidate.
inline Vector isotonic_by_partitions(const Vector& u) {
  const auto d = u.size();
  if (d == 0) return u;
  Vector best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1ul << (d - 1)); ++mask) {
    Vector z(d);
    Eigen::Index start = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool cut = i == d - 1 || ((mask >> i) & 1ul);
      if (cut) {
        z.segment(start, i - start + 1).setConstant(u.segment(start, i - start + 1).mean());
        start = i + 1;
      }
    }
    bool feasible = true;
    for (Eigen::Index i = 0; i + 1 < d; ++i) feasible = feasible && z[i] >= z[i + 1] - 1e-15;
    if (!feasible) continue;
    const double cost = (z - u).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = z;
    }
  }
  return best;
}

/// Minimizes f over a scalar grid [lo, hi] with the given step.
inline double scalar_grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best_x = lo, best_f = f(lo);
  for (double x = lo; x <= hi + 1e-12; x += step) {
    if (const double fx = f(x); fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  return best_x;
}

struct GridMin {
  Vector x;
  double value;
};

/// Two-stage brute-force minimizer over R^p: an exhaustive lattice on
/// [-radius, radius]^p containing the origin, then pattern search from the
/// best lattice points along every direction in {-1, 0, 1}^p \ {0}, halving
/// the step until it reaches `final_step`.
inline GridMin brute_force_minimize(const std::function<double(const Vector&)>& f, Eigen::Index p,
                                    double radius, double coarse_step, double final_step = 1e-4,
                                    int starts = 6) {
  const long half = static_cast<long>(std::ceil(radius / coarse_step));
  const long side = 2 * half + 1;
  long total = 1;
  for (Eigen::Index i = 0; i < p; ++i) total *= side;

  std::vector<std::pair<double, Vector>> top;
  Vector x(p);
  for (long idx = 0; idx < total; ++idx) {
    long r = idx;
    for (Eigen::Index i = 0; i < p; ++i) {
      x[i] = static_cast<double>(r % side - half) * coarse_step;
      r /= side;
    }
    const double fx = f(x);
    if (!std::isfinite(fx)) continue;
    if (static_cast<int>(top.size()) < starts || fx < top.back().first) {
      top.emplace_back(fx, x);
      std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      if (static_cast<int>(top.size()) > starts) top.pop_back();
    }
  }

  std::vector<Vector> directions;
  long dir_total = 1;
  for (Eigen::Index i = 0; i < p; ++i) dir_total *= 3;
  for (long idx = 0; idx < dir_total; ++idx) {
    Vector d(p);
    long r = idx;
    for (Eigen::Index i = 0; i < p; ++i) {
      d[i] = static_cast<double>(r % 3 - 1);
      r /= 3;
    }
    if (d.squaredNorm() > 0) directions.push_back(d);
  }

  GridMin best{top.front().second, top.front().first};
  Vector cand(p);
  for (auto [fx, point] : top) {
    for (double step = coarse_step; step >= final_step * 0.999; step *= 0.5) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (const Vector& d : directions) {
          cand = point + step * d;
          const double fc = f(cand);
          if (fc < fx) {
            fx = fc;
            point.swap(cand);
            moved = true;
          }
        }
      }
    }
    if (fx < best.value) best = {point, fx};
  }
  return best;
}

/// Cyclic coordinate descent for 0.5||y - Ax||^2 + lambda ||x||_1.
inline Vector lasso_coordinate_descent(const Matrix& A, const Vector& y, double lambda, int sweeps = 20000) {
  Vector x = Vector::Zero(A.cols());
  Vector r = y;
  for (int s = 0; s < sweeps; ++s) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double col_sq = A.col(j).squaredNorm();
      if (col_sq == 0.0) continue;
      const double rho = A.col(j).dot(r) + col_sq * x[j];
      const double updated = (rho > lambda ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0)) / col_sq;
      const double delta = updated - x[j];
      if (delta != 0.0) {
        r -= delta * A.col(j);
        x[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < 1e-14) break;
  }
  return x;
}

/// Central finite-difference gradient.
inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x,
                                 double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2 * h);
  }
  return g;
}

/// Number of connected components of nonzero magnitudes under
/// |a - b| <= tol * (1 + max(a, b)), by union-find over all pairs.
inline int magnitude_classes(const Vector& e, double tol, double zero_tol) {
  std::vector<double> m;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (std::abs(e[i]) > zero_tol) m.push_back(std::abs(e[i]));
  std::vector<std::size_t> parent(m.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (std::abs(m[i] - m[j]) <= tol * (1.0 + std::max(m[i], m[j]))) parent[find(i)] = find(j);
  int classes = 0;
  for (std::size_t i = 0; i < m.size(); ++i) classes += find(i) == i;
  return classes;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index p, double scale = 3.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(p);
  for (Eigen::Index i = 0; i < p; ++i) v[i] = u(rng);
  return v;
}

}  // namespace sparc::oracle
