#include "sparc/prox.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace sparc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

void expect_near(const Vector& got, const Vector& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (Index i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "entry " << i;
}

}  // namespace

TEST(SoftThreshold, Examples) {
  expect_near(soft_threshold(vec({3, -1, 0.5}), 1), vec({2, 0, 0}));
  expect_near(soft_threshold(vec({-2.5}), 1.25), vec({-1.25}));
  const Vector v = vec({1.5, -7, 0, 2e-3});
  EXPECT_EQ(soft_threshold(v, 0), v);
}

TEST(SoftThreshold, RejectsNonFinite) {
  EXPECT_THROW(soft_threshold(vec({1, std::numeric_limits<double>::quiet_NaN()}), 1), std::invalid_argument);
  EXPECT_THROW(soft_threshold(vec({1, std::numeric_limits<double>::infinity()}), 1), std::invalid_argument);
  EXPECT_THROW(soft_threshold(vec({1}), -1), std::invalid_argument);
}

TEST(ElasticNet, ScalarMatchesGridOracle) {
  // lambda1 |x| + (lambda2 / 2) x^2 + 0.5 (x - 3)^2 with lambda1 = lambda2 = 1
  const double oracle = oracle::scalar_grid_argmin(
      [](double x) { return std::abs(x) + 0.5 * x * x + 0.5 * (x - 3) * (x - 3); }, -5, 5, 1e-5);
  EXPECT_NEAR(oracle, 1.0, 1e-4);
  expect_near(prox_elastic_net(vec({3}), 1, 1), vec({1}));
}

TEST(ElasticNet, Examples) {
  const Vector v = vec({0.3, -2, 9});
  EXPECT_EQ(prox_elastic_net(v, 0, 0), v);
  expect_near(prox_elastic_net(vec({-4, 2}), 2, 0), vec({-2, 0}));
  EXPECT_THROW(prox_elastic_net(v, -1, 0), std::invalid_argument);
  EXPECT_THROW(prox_elastic_net(v, 0, -1), std::invalid_argument);
}

TEST(OwlWeights, Examples) {
  expect_near(owl_weights(2, 3, 3).weights, vec({8, 5, 2}));
  expect_near(owl_weights(0, 1, 2).weights, vec({1, 0}));
  EXPECT_TRUE(owl_weights(0, 0, 7).weights.isZero());
  EXPECT_THROW(owl_weights(1, 1, 0), std::invalid_argument);
}

TEST(OwlWeights, SortedFormEqualsPairwiseSum) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0, 3);
  for (int t = 0; t < 100; ++t) {
    const Index d = 1 + static_cast<Index>(rng() % 9);
    const double l1 = lam(rng), l2 = lam(rng);
    const Vector x = oracle::random_vector(rng, d);
    const SortedMagnitudeView view(x);
    const double weighted = owl_weights(l1, l2, d).apply(view.magnitudes);
    EXPECT_NEAR(weighted, oracle::oscar_penalty(x, l1, l2), 1e-10 * (1 + std::abs(weighted)));
  }
}

TEST(SortedMagnitudeView, ReconstructsInput) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    Vector v = oracle::random_vector(rng, 1 + static_cast<Index>(rng() % 12));
    if (t % 3 == 0) v[0] = 0;
    const SortedMagnitudeView view(v);
    for (Index r = 0; r + 1 < view.size(); ++r) EXPECT_GE(view.magnitudes[r], view.magnitudes[r + 1]);
    EXPECT_EQ(view.restore(view.magnitudes), v);
    std::vector<Index> perm = view.permutation;
    std::sort(perm.begin(), perm.end());
    for (Index i = 0; i < v.size(); ++i) EXPECT_EQ(perm[static_cast<std::size_t>(i)], i);
  }
}

TEST(Isotonic, Examples) {
  // Expected values come from the partition-enumeration oracle.
  expect_near(oracle::isotonic_by_partitions(vec({1, 3, 2})), vec({2, 2, 2}));
  expect_near(oracle::isotonic_by_partitions(vec({0, 10})), vec({5, 5}));
  expect_near(isotonic_decreasing(vec({1, 3, 2})), vec({2, 2, 2}));
  expect_near(isotonic_decreasing(vec({5, 4, 1})), vec({5, 4, 1}));
  expect_near(isotonic_decreasing(vec({0, 10})), vec({5, 5}));
  EXPECT_EQ(isotonic_decreasing(Vector(0)).size(), 0);
}

TEST(Isotonic, MatchesLatticeOracleAndIsIdempotent) {
  // Every vector of length <= 4 with entries in {-1, 0, 1, 2}.
  const double values[] = {-1, 0, 1, 2};
  for (Index d = 1; d <= 4; ++d) {
    long total = 1;
    for (Index i = 0; i < d; ++i) total *= 4;
    for (long idx = 0; idx < total; ++idx) {
      Vector u(d);
      long r = idx;
      for (Index i = 0; i < d; ++i, r /= 4) u[i] = values[r % 4];
      const Vector z = isotonic_decreasing(u);
      expect_near(z, oracle::isotonic_by_partitions(u), 1e-12);
      for (Index i = 0; i + 1 < d; ++i) EXPECT_GE(z[i], z[i + 1]);
      EXPECT_EQ(isotonic_decreasing(z), z);
    }
  }
}

TEST(Oscar, ExamplesAgainstGridOracle) {
  const auto objective = [](const Vector& v, double l1, double l2) {
    return [=](const Vector& x) { return oracle::oscar_penalty(x, l1, l2) + 0.5 * (x - v).squaredNorm(); };
  };
  const Vector v1 = vec({3, 2.9});
  const auto g1 = oracle::brute_force_minimize(objective(v1, 0, 1), 2, 6, 0.01);
  expect_near(g1.x, vec({2.45, 2.45}), 2e-4);
  expect_near(prox_oscar(v1, 0, 1), vec({2.45, 2.45}));

  const Vector v2 = vec({5, -3});
  const auto g2 = oracle::brute_force_minimize(objective(v2, 0, 1), 2, 10, 0.01);
  expect_near(g2.x, vec({4, -3}), 2e-4);
  expect_near(prox_oscar(v2, 0, 1), vec({4, -3}));

  const Vector v3 = vec({1, -2, 0.5});
  EXPECT_EQ(prox_oscar(v3, 0, 0), v3);
  EXPECT_THROW(prox_oscar(v3, -0.1, 0), std::invalid_argument);
}

TEST(Oscar, PreservesMagnitudeOrderAndSigns) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lam(0, 2);
  for (int t = 0; t < 200; ++t) {
    const Vector v = oracle::random_vector(rng, 2 + static_cast<Index>(rng() % 10));
    const Vector z = prox_oscar(v, lam(rng), lam(rng));
    for (Index i = 0; i < v.size(); ++i) {
      EXPECT_TRUE(z[i] == 0 || std::signbit(z[i]) == std::signbit(v[i]));
      for (Index j = 0; j < v.size(); ++j) {
        if (std::abs(v[i]) >= std::abs(v[j])) {
          EXPECT_GE(std::abs(z[i]), std::abs(z[j]) - 1e-12);
        }
      }
    }
  }
}

TEST(TopK, Examples) {
  EXPECT_EQ(top_k_support(vec({5, 1, -3}), 2), (std::vector<Index>{0, 2}));
  EXPECT_EQ(top_k_support(vec({2, 2, 0}), 1), (std::vector<Index>{0}));
  EXPECT_EQ(top_k_support(vec({0.1, -9, 4}), 3), (std::vector<Index>{0, 1, 2}));
  EXPECT_THROW(top_k_support(vec({1, 2}), 3), std::invalid_argument);
  EXPECT_THROW(top_k_support(vec({1, 2}), 0), std::invalid_argument);
}

TEST(ProjectKSparse, Examples) {
  expect_near(project_k_sparse(vec({5, 1, -3}), 2), vec({5, 0, -3}));
  const Vector v = vec({1, -2, 3});
  EXPECT_EQ(project_k_sparse(v, 3), v);
  EXPECT_TRUE(project_k_sparse(Vector::Zero(3), 1).isZero());
  EXPECT_THROW(project_k_sparse(v, 4), std::invalid_argument);
}

TEST(Sparc, Examples) {
  expect_near(prox_sparc(vec({5, 1, -3}), 1, 2), vec({4, 0, -3}));
  expect_near(prox_sparc(vec({3, 2.9, 0.1}), 1, 2), vec({2.45, 2.45, 0}));
  const Vector v = vec({0.5, -4, 2, 1});
  EXPECT_EQ(prox_sparc(v, 0, 2), project_k_sparse(v, 2));
  EXPECT_TRUE(prox_sparc(Vector::Zero(4), 1.5, 2).isZero());
  EXPECT_THROW(prox_sparc(v, 1, 5), std::invalid_argument);
  EXPECT_THROW(prox_sparc(v, -1, 2), std::invalid_argument);
}

TEST(Sparc, ExampleAgainstGridOracle) {
  // Restricted to S = {1, 3}, the SPARC prox is the OSCAR(0, 1) prox of (5, -3).
  const Vector vs = vec({5, -3});
  const auto g = oracle::brute_force_minimize(
      [&](const Vector& x) { return oracle::sparc_penalty(x, 1, 2) + 0.5 * (x - vs).squaredNorm(); }, 2, 10,
      0.01);
  expect_near(g.x, vec({4, -3}), 2e-4);
}

TEST(Sparc, OutputIsKSparseWithinTopK) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 300; ++t) {
    const Index p = 1 + static_cast<Index>(rng() % 15);
    const Index k = 1 + static_cast<Index>(rng() % static_cast<unsigned long>(p));
    const Vector v = oracle::random_vector(rng, p);
    const Vector z = prox_sparc(v, std::uniform_real_distribution<double>(0, 3)(rng), k);
    EXPECT_LE(count_nonzero(z), k);
    const auto support = top_k_support(v, k);
    for (Index i = 0; i < p; ++i) {
      if (z[i] != 0) {
        EXPECT_NE(std::find(support.begin(), support.end(), i), support.end());
      }
    }
  }
}

TEST(Penalty, Examples) {
  EXPECT_DOUBLE_EQ(penalty_value(Sparc{1, 2}, vec({4, 0, -3})), 4);
  EXPECT_DOUBLE_EQ(owl_weights(0, 1, 2).apply(vec({4, 3})), 4);
  EXPECT_DOUBLE_EQ(penalty_value(Sparc{2.5, 1}, vec({0, -7, 0})), 0);
  EXPECT_EQ(penalty_value(Sparc{1, 1}, vec({1, 1, 0})), std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(penalty_value(Lasso{2}, vec({1, -3})), 8);
  EXPECT_DOUBLE_EQ(penalty_value(ElasticNet{1, 2}, vec({1, -3})), 4 + 10);
  EXPECT_DOUBLE_EQ(penalty_value(Oscar{1, 1}, vec({1, -3})), 4 + 3);
  for (const Regularizer& r : {Regularizer{Lasso{1}}, Regularizer{ElasticNet{1, 1}}, Regularizer{Oscar{1, 1}},
                               Regularizer{Sparc{1, 2}}}) {
    EXPECT_EQ(penalty_value(r, Vector::Zero(3)), 0);
  }
}

TEST(Penalty, SparcCountsZerosInsideTopK) {
  // One nonzero with K = 3: two pairs (4, 0) each contribute 4.
  EXPECT_DOUBLE_EQ(penalty_value(Sparc{1, 3}, vec({0, 4, 0, 0})), 8);
  EXPECT_DOUBLE_EQ(oracle::sparc_penalty(vec({0, 4, 0, 0}), 1, 3), 8);
}

TEST(Penalty, RejectsBadParameters) {
  EXPECT_THROW(penalty_value(Lasso{-1}, vec({1})), std::invalid_argument);
  EXPECT_THROW(penalty_value(Sparc{1, 0}, vec({1})), std::invalid_argument);
  EXPECT_THROW(penalty_value(Sparc{1, 3}, vec({1, 2})), std::invalid_argument);
  EXPECT_THROW(penalty_value(Oscar{std::numeric_limits<double>::infinity(), 0}, vec({1})),
               std::invalid_argument);
}

TEST(ProxScaled, Examples) {
  const Vector v = vec({5, 1, -3});
  expect_near(prox_scaled(Sparc{2, 2}, v, 2), vec({4, 0, -3}));
  expect_near(prox_scaled(Lasso{3}, v, 3), soft_threshold(v, 1));
  expect_near(prox_scaled(Oscar{1, 1}, v, 1e12), v, 1e-10);
  expect_near(prox_scaled(ElasticNet{1, 1}, v, 1e12), v, 1e-10);
  EXPECT_THROW(prox_scaled(Lasso{1}, v, 0), std::invalid_argument);
  EXPECT_THROW(prox_scaled(Lasso{1}, v, -2), std::invalid_argument);
}

namespace {

std::vector<Regularizer> random_regularizers(std::mt19937_64& rng, Index p) {
  std::uniform_real_distribution<double> lam(0, 2);
  const Index k = 1 + static_cast<Index>(rng() % static_cast<unsigned long>(p));
  return {Lasso{lam(rng)}, ElasticNet{lam(rng), lam(rng)}, Oscar{lam(rng), lam(rng)}, Sparc{lam(rng), k}};
}

}  // namespace

TEST(ProxProperties, OptimalAgainstRandomCandidates) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> noise(0, 1);
  for (int t = 0; t < 60; ++t) {
    const Index p = 1 + static_cast<Index>(rng() % 6);
    const Vector v = oracle::random_vector(rng, p);
    for (const Regularizer& reg : random_regularizers(rng, p)) {
      const Vector z = prox(reg, v);
      const double fz = prox_objective(reg, z, v);
      std::vector<Vector> candidates{v, Vector::Zero(p)};
      for (int c = 0; c < 198; ++c) {
        Vector x = (c % 2 ? z : v) + (c % 3 + 1) * 0.05 * Vector::NullaryExpr(p, [&] { return noise(rng); });
        if (const auto* s = std::get_if<Sparc>(&reg); s && c % 4 == 0) x = project_k_sparse(x, s->k);
        candidates.push_back(x);
      }
      for (const Vector& x : candidates) EXPECT_LE(fz, prox_objective(reg, x, v) + 1e-12) << name_of(reg);
    }
  }
}

TEST(ProxProperties, ConvexProxesAreNonexpansive) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    const Index p = 1 + static_cast<Index>(rng() % 10);
    const Vector u = oracle::random_vector(rng, p), v = oracle::random_vector(rng, p);
    for (const Regularizer& reg : random_regularizers(rng, p)) {
      if (!is_convex(reg)) continue;
      EXPECT_LE((prox(reg, u) - prox(reg, v)).norm(), (u - v).norm() + 1e-12) << name_of(reg);
    }
  }
}

TEST(ProxProperties, PermutationEquivariance) {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 200; ++t) {
    const Index p = 2 + static_cast<Index>(rng() % 9);
    const Vector v = oracle::random_vector(rng, p);  // distinct magnitudes almost surely
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(p);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + p, rng);
    const double lam = std::uniform_real_distribution<double>(0, 2)(rng);
    const Index k = 1 + static_cast<Index>(rng() % static_cast<unsigned long>(p));
    for (const Regularizer& reg : {Regularizer{Oscar{lam / 2, lam}}, Regularizer{Sparc{lam, k}}}) {
      const Vector lhs = prox(reg, perm * v);
      const Vector rhs = perm * prox(reg, v);
      for (Index i = 0; i < p; ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
    }
  }
}

TEST(ProxProperties, WeightFormMatchesDirectPenalty) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lam(0, 3);
  for (int t = 0; t < 1000; ++t) {
    const Index p = 1 + static_cast<Index>(rng() % 50);
    Vector x = oracle::random_vector(rng, p);
    const double l1 = lam(rng), l2 = lam(rng);
    const double direct = oracle::oscar_penalty(x, l1, l2);
    EXPECT_NEAR(penalty_value(Oscar{l1, l2}, x), direct, 1e-10 * std::max(1.0, direct));
    const Index k = 1 + static_cast<Index>(rng() % static_cast<unsigned long>(p));
    x = project_k_sparse(x, k);
    const double sp = oracle::sparc_penalty(x, l2, k);
    EXPECT_NEAR(penalty_value(Sparc{l2, k}, x), sp, 1e-10 * std::max(1.0, sp));
  }
}
