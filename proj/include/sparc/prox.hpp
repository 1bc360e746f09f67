#pragma once

// Proximity operators and penalty evaluators for LASSO, elastic net, OSCAR and
// SPARC. Every function here is pure; vectors are Eigen column vectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace sparc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Regularizer descriptions
// ---------------------------------------------------------------------------

/// lambda1 * ||x||_1
struct Lasso {
  double lambda1 = 0.0;
};

/// lambda1 * ||x||_1 + (lambda2 / 2) * ||x||_2^2
struct ElasticNet {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// lambda1 * ||x||_1 + lambda2 * sum_{i<j} max(|x_i|, |x_j|)
struct Oscar {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Indicator of {||x||_0 <= k} plus lambda * sum of pairwise maxima over the
/// k largest-magnitude entries.
struct Sparc {
  double lambda = 0.0;
  Index k = 1;
};

using Regularizer = std::variant<Lasso, ElasticNet, Oscar, Sparc>;

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline void require_parameter(double value, const char* name) {
  require(std::isfinite(value) && value >= 0.0,
          std::string(name) + " must be finite and non-negative, got " +
              std::to_string(value));
}

inline void require_finite(const Eigen::Ref<const Vector>& v, const char* what) {
  require(v.allFinite(), std::string(what) + " contains non-finite entries");
}

inline void require_support_size(Index k, Index p) {
  require(k >= 1 && k <= p, "K must satisfy 1 <= K <= p (K=" + std::to_string(k) +
                                ", p=" + std::to_string(p) + ")");
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

/// Throws std::invalid_argument if any parameter of `reg` is negative or
/// non-finite, or if a SPARC K is below one.
inline void validate(const Regularizer& reg) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) {
          detail::require_parameter(r.lambda1, "lambda1");
        } else if constexpr (std::is_same_v<T, ElasticNet> || std::is_same_v<T, Oscar>) {
          detail::require_parameter(r.lambda1, "lambda1");
          detail::require_parameter(r.lambda2, "lambda2");
        } else {
          detail::require_parameter(r.lambda, "lambda");
          detail::require(r.k >= 1, "K must be a positive integer");
        }
      },
      reg);
}

inline bool is_convex(const Regularizer& reg) { return !std::holds_alternative<Sparc>(reg); }

inline std::string name_of(const Regularizer& reg) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) return "lasso";
        else if constexpr (std::is_same_v<T, ElasticNet>) return "en";
        else if constexpr (std::is_same_v<T, Oscar>) return "oscar";
        else return "sparc";
      },
      reg);
}

// ---------------------------------------------------------------------------
// Sorted-magnitude machinery
// ---------------------------------------------------------------------------

/// |v| sorted non-increasingly, with the signs of v and the map from sorted
/// rank back to the original position. Equal magnitudes keep index order.
struct SortedMagnitudeView {
  Vector magnitudes;
  Vector signs;
  std::vector<Index> permutation;

  explicit SortedMagnitudeView(const Eigen::Ref<const Vector>& v)
      : magnitudes(v.size()), signs(v.size()), permutation(static_cast<std::size_t>(v.size())) {
    std::iota(permutation.begin(), permutation.end(), Index{0});
    std::stable_sort(permutation.begin(), permutation.end(),
                     [&](Index a, Index b) { return std::abs(v[a]) > std::abs(v[b]); });
    for (Index r = 0; r < v.size(); ++r) {
      const Index i = permutation[static_cast<std::size_t>(r)];
      magnitudes[r] = std::abs(v[i]);
      signs[r] = detail::sign_of(v[i]);
    }
  }

  Index size() const { return magnitudes.size(); }

  /// Places signs[r] * sorted[r] back at permutation[r].
  Vector restore(const Eigen::Ref<const Vector>& sorted) const {
    Vector out(sorted.size());
    for (Index r = 0; r < sorted.size(); ++r) {
      out[permutation[static_cast<std::size_t>(r)]] = signs[r] * sorted[r];
    }
    return out;
  }
};

/// Non-increasing, non-negative per-rank weights.
struct WeightSequence {
  Vector weights;

  Index size() const { return weights.size(); }

  /// sum_k weights[k] * sorted[k] for magnitudes already sorted descending.
  double apply(const Eigen::Ref<const Vector>& sorted) const {
    return weights.head(sorted.size()).dot(sorted);
  }
};

/// Per-rank weights of the OSCAR penalty over d entries. The k-th largest
/// magnitude (1-based) is the maximum in exactly d - k pairs, so it carries
/// lambda1 + lambda2 * (d - k).
inline WeightSequence owl_weights(double lambda1, double lambda2, Index d) {
  detail::require_parameter(lambda1, "lambda1");
  detail::require_parameter(lambda2, "lambda2");
  detail::require(d >= 1, "weight sequence length must be positive");
  WeightSequence w{Vector(d)};
  for (Index r = 0; r < d; ++r) w.weights[r] = lambda1 + lambda2 * static_cast<double>(d - 1 - r);
  return w;
}

/// Euclidean projection onto the non-increasing cone, by pool-adjacent-violators.
inline Vector isotonic_decreasing(const Eigen::Ref<const Vector>& u) {
  detail::require_finite(u, "isotonic input");
  struct Block {
    double sum;
    Index width;
    double mean() const { return sum / static_cast<double>(width); }
  };
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(u.size()));
  for (Index i = 0; i < u.size(); ++i) {
    stack.push_back({u[i], 1});
    while (stack.size() > 1 && !(stack[stack.size() - 2].mean() > stack.back().mean())) {
      const Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().width += top.width;
    }
  }
  Vector out(u.size());
  Index pos = 0;
  for (const Block& b : stack) {
    out.segment(pos, b.width).setConstant(b.mean());
    pos += b.width;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Proximity operators
// ---------------------------------------------------------------------------

inline Vector soft_threshold(const Eigen::Ref<const Vector>& v, double t) {
  detail::require_finite(v, "soft_threshold input");
  detail::require_parameter(t, "threshold");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    out[i] = detail::sign_of(v[i]) * std::max(std::abs(v[i]) - t, 0.0);
  }
  return out;
}

inline Vector prox_elastic_net(const Eigen::Ref<const Vector>& v, double lambda1, double lambda2) {
  detail::require_parameter(lambda2, "lambda2");
  return soft_threshold(v, lambda1) / (1.0 + lambda2);
}

/// Prox of the OSCAR penalty: subtract the rank weights from the sorted
/// magnitudes, project onto the non-increasing cone, clip at zero, then
/// restore signs and order.
inline Vector prox_oscar(const Eigen::Ref<const Vector>& v, double lambda1, double lambda2) {
  detail::require_finite(v, "prox_oscar input");
  const WeightSequence w = owl_weights(lambda1, lambda2, std::max<Index>(v.size(), 1));
  if (v.size() == 0) return Vector(0);
  const SortedMagnitudeView view(v);
  Vector shrunk = isotonic_decreasing(view.magnitudes - w.weights).cwiseMax(0.0);
  return view.restore(shrunk);
}

/// Indices of the k largest |v_i|, in increasing index order. Ties go to
/// the lower index.
inline std::vector<Index> top_k_support(const Eigen::Ref<const Vector>& v, Index k) {
  detail::require_support_size(k, v.size());
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(v[a]) > std::abs(v[b]); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

inline Vector project_k_sparse(const Eigen::Ref<const Vector>& v, Index k) {
  Vector out = Vector::Zero(v.size());
  for (Index i : top_k_support(v, k)) out[i] = v[i];
  return out;
}

/// Prox of the SPARC penalty: the OSCAR(0, lambda) prox on the k largest
/// entries of v, zero elsewhere.
inline Vector prox_sparc(const Eigen::Ref<const Vector>& v, double lambda, Index k) {
  detail::require_finite(v, "prox_sparc input");
  detail::require_parameter(lambda, "lambda");
  const std::vector<Index> support = top_k_support(v, k);
  Vector restricted(k);
  for (Index j = 0; j < k; ++j) restricted[j] = v[support[static_cast<std::size_t>(j)]];
  const Vector shrunk = prox_oscar(restricted, 0.0, lambda);
  Vector out = Vector::Zero(v.size());
  for (Index j = 0; j < k; ++j) out[support[static_cast<std::size_t>(j)]] = shrunk[j];
  return out;
}

// ---------------------------------------------------------------------------
// Penalty evaluation and dispatch
// ---------------------------------------------------------------------------

inline Index count_nonzero(const Eigen::Ref<const Vector>& x) {
  return static_cast<Index>((x.array() != 0.0).count());
}

/// Value of the penalty at x; +inf for a SPARC penalty when ||x||_0 > K.
inline double penalty_value(const Regularizer& reg, const Eigen::Ref<const Vector>& x) {
  detail::require_finite(x, "penalty argument");
  validate(reg);
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) {
          return r.lambda1 * x.lpNorm<1>();
        } else if constexpr (std::is_same_v<T, ElasticNet>) {
          return r.lambda1 * x.lpNorm<1>() + 0.5 * r.lambda2 * x.squaredNorm();
        } else if constexpr (std::is_same_v<T, Oscar>) {
          if (x.size() == 0) return 0.0;
          return owl_weights(r.lambda1, r.lambda2, x.size()).apply(SortedMagnitudeView(x).magnitudes);
        } else {
          detail::require_support_size(r.k, x.size());
          if (count_nonzero(x) > r.k) return std::numeric_limits<double>::infinity();
          const Vector sorted = SortedMagnitudeView(x).magnitudes;
          return owl_weights(0.0, r.lambda, r.k).apply(sorted.head(r.k));
        }
      },
      reg);
}

/// penalty(z) + 0.5 * ||z - v||^2
inline double prox_objective(const Regularizer& reg, const Eigen::Ref<const Vector>& z,
                             const Eigen::Ref<const Vector>& v) {
  return penalty_value(reg, z) + 0.5 * (z - v).squaredNorm();
}

/// Prox of penalty / alpha. Scalar weights are divided by alpha; the SPARC
/// support size is left unchanged.
inline Vector prox_scaled(const Regularizer& reg, const Eigen::Ref<const Vector>& v, double alpha) {
  detail::require(std::isfinite(alpha) && alpha > 0.0, "prox scaling alpha must be positive");
  validate(reg);
  return std::visit(
      [&](const auto& r) -> Vector {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Lasso>) {
          return soft_threshold(v, r.lambda1 / alpha);
        } else if constexpr (std::is_same_v<T, ElasticNet>) {
          return prox_elastic_net(v, r.lambda1 / alpha, r.lambda2 / alpha);
        } else if constexpr (std::is_same_v<T, Oscar>) {
          return prox_oscar(v, r.lambda1 / alpha, r.lambda2 / alpha);
        } else {
          return prox_sparc(v, r.lambda / alpha, r.k);
        }
      },
      reg);
}

inline Vector prox(const Regularizer& reg, const Eigen::Ref<const Vector>& v) {
  return prox_scaled(reg, v, 1.0);
}

}  // namespace sparc
