#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ncrs/rng.hpp"
#include "ncrs/subspace.hpp"
#include "ncrs/vec.hpp"

using namespace ncrs;

TEST(Rng, FreshStreamRepeatsItsSequence) {
  RngStream a(0, 0);
  RngStream b(0, 0);
  const Vec x = gaussian_vector(a, 3);
  const Vec y = gaussian_vector(b, 3);
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x, y);
}

TEST(Rng, DistinctKeysGiveDistinctStreams) {
  RngStream a(1, 0);
  RngStream b(2, 0);
  RngStream c(1, 1);
  const auto xa = a.next();
  EXPECT_NE(xa, b.next());
  EXPECT_NE(xa, c.next());
}

TEST(Rng, StreamIdDependsOnRoleAndRunIndex) {
  EXPECT_EQ(stream_id(3, "oracle"), stream_id(3, "oracle"));
  EXPECT_NE(stream_id(3, "oracle"), stream_id(3, "directions"));
  EXPECT_NE(stream_id(3, "oracle"), stream_id(4, "oracle"));
  RngStream role_ctor(9, 3, "oracle");
  RngStream id_ctor(9, stream_id(3, "oracle"));
  EXPECT_EQ(role_ctor.next(), id_ctor.next());
}

TEST(Rng, SplitIsDeterministicAndDoesNotAdvanceParent) {
  RngStream parent(5, 7);
  RngStream twin(5, 7);
  RngStream child1 = parent.split("x");
  RngStream child2 = twin.split("x");
  EXPECT_EQ(child1.next(), child2.next());
  EXPECT_EQ(parent.next(), twin.next());
  EXPECT_NE(parent.split("x").next(), parent.split("y").next());
}

TEST(Rng, UniformRange) {
  RngStream rng(3, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, GaussianMeanAndVariancePerCoordinate) {
  RngStream rng(11, 0);
  constexpr int d = 3;
  constexpr int n = 1000000;
  double sum[d] = {};
  double sum2[d] = {};
  Vec s(d);
  for (int i = 0; i < n; ++i) {
    fill_gaussian(rng, s);
    for (int j = 0; j < d; ++j) {
      sum[j] += s[j];
      sum2[j] += s[j] * s[j];
    }
  }
  for (int j = 0; j < d; ++j) {
    const double mean = sum[j] / n;
    const double var = sum2[j] / n - mean * mean;
    EXPECT_LE(std::abs(mean), 0.005) << "coordinate " << j;
    EXPECT_GE(var, 0.99);
    EXPECT_LE(var, 1.01);
  }
}

TEST(Vec, BasicOps) {
  Vec a{1.0, 2.0, 2.0};
  Vec b{0.0, 1.0, -1.0};
  EXPECT_DOUBLE_EQ(dot(a, b), 0.0);
  EXPECT_DOUBLE_EQ(norm(a), 3.0);
  axpy(2.0, b, a);
  EXPECT_EQ(a, (Vec{1.0, 4.0, 0.0}));
  EXPECT_EQ(sub(a, b), (Vec{1.0, 3.0, 1.0}));
  EXPECT_DOUBLE_EQ(max_abs(Vec{-5.0, 3.0}), 5.0);
  EXPECT_FALSE(all_finite(Vec{1.0, std::nan("")}));
  EXPECT_TRUE(all_finite(Vec{1.0, 2.0}));
}

namespace {

double max_projector_dev_from_identity(const Subspace& s) {
  const std::size_t d = s.ambient_dim();
  double err = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    const Vec col = s.project(e);
    for (std::size_t j = 0; j < d; ++j) err = std::max(err, std::abs(col[j] - (i == j ? 1.0 : 0.0)));
  }
  return err;
}

}  // namespace

TEST(Subspace, FullRankProjectorIsIdentity) {
  RngStream rng(1, 1);
  const Subspace s = random_subspace(rng, 5, 5);
  EXPECT_LE(max_projector_dev_from_identity(s), 1e-10);
}

TEST(Subspace, RowsOrthonormalForManyShapes) {
  RngStream rng(2, 2);
  for (std::size_t d : {1u, 2u, 7u, 50u, 200u}) {
    for (std::size_t k : {1u, 2u, 5u, 50u}) {
      if (k > d) continue;
      const Subspace s = random_subspace(rng, d, k);
      EXPECT_EQ(s.rank(), k);
      EXPECT_EQ(s.ambient_dim(), d);
      EXPECT_LE(s.orthonormality_error(), 1e-10) << "d=" << d << " k=" << k;
    }
  }
}

TEST(Subspace, TraceOfProjectorIsRank) {
  RngStream rng(3, 3);
  const Subspace s = random_subspace(rng, 50, 7);
  double trace = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    Vec e(50, 0.0);
    e[i] = 1.0;
    trace += s.project(e)[i];
  }
  EXPECT_NEAR(trace, 7.0, 1e-9);
}

TEST(Subspace, RankAboveDimensionRejected) {
  RngStream rng(4, 4);
  EXPECT_THROW(random_subspace(rng, 3, 4), ConfigError);
  EXPECT_THROW(random_subspace(rng, 3, 0), ConfigError);
  const Subspace s = random_subspace(rng, 5, 3);
  EXPECT_THROW(random_complement(rng, s, 3), ConfigError);
}

TEST(Subspace, AxisProjector) {
  const Subspace s = Subspace::from_rows({{1.0, 0.0}});
  const Vec p = project(s, Vec{3.0, 4.0});
  EXPECT_EQ(p, (Vec{3.0, 0.0}));
}

TEST(Subspace, FromRowsRejectsNonOrthonormal) {
  EXPECT_THROW(Subspace::from_rows({{1.0, 1.0}}), ConfigError);
  EXPECT_THROW(Subspace::from_rows({{1.0, 0.0}, {1.0, 0.0}}), ConfigError);
  EXPECT_THROW(Subspace::from_rows({{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}), ConfigError);
}

TEST(Subspace, RangeFixedKernelAnnihilated) {
  RngStream rng(5, 5);
  const Subspace s = random_subspace(rng, 20, 4);
  const Subspace perp = random_complement(rng, s, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec in = s.lift(gaussian_vector(rng, 4));
    const Vec out = perp.lift(gaussian_vector(rng, 6));
    const Vec p_in = s.project(in);
    const Vec p_out = s.project(out);
    for (std::size_t j = 0; j < 20; ++j) {
      EXPECT_NEAR(p_in[j], in[j], 1e-10);
      EXPECT_NEAR(p_out[j], 0.0, 1e-10);
    }
  }
}

TEST(Subspace, ComplementIsOrthogonal) {
  RngStream rng(6, 6);
  const Subspace s = random_subspace(rng, 30, 5);
  const Subspace w = random_complement(rng, s, 8);
  EXPECT_LE(w.orthonormality_error(), 1e-10);
  for (std::size_t i = 0; i < w.rank(); ++i) {
    for (std::size_t j = 0; j < s.rank(); ++j) EXPECT_LE(std::abs(dot(w.row(i), s.row(j))), 1e-12);
  }
}

TEST(Subspace, DimensionMismatchIsContractViolation) {
  RngStream rng(7, 7);
  const Subspace s = random_subspace(rng, 6, 2);
  EXPECT_THROW(s.project(Vec(5, 1.0)), ContractViolation);
  EXPECT_THROW(s.lift(Vec(3, 1.0)), ContractViolation);
}

TEST(Subspace, ProjectorProperties) {
  RngStream rng(8, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 3 + static_cast<std::size_t>(rng.uniform() * 40);
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(d));
    const Subspace s = random_subspace(rng, d, std::min(k, d));
    const Vec v = gaussian_vector(rng, d);
    const Vec w = gaussian_vector(rng, d);
    const Vec pv = s.project(v);
    const Vec pw = s.project(w);
    // symmetry
    EXPECT_NEAR(dot(pv, w), dot(v, pw), 1e-9);
    // idempotence
    const Vec ppv = s.project(pv);
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(ppv[j], pv[j], 1e-10);
    // Pythagoras
    const Vec rest = sub(v, pv);
    EXPECT_NEAR(norm2(pv) + norm2(rest), norm2(v), 1e-9 * norm2(v));
  }
}

TEST(Subspace, SameStreamSameSubspace) {
  RngStream a(42, 1, "subspace");
  RngStream b(42, 1, "subspace");
  EXPECT_EQ(random_subspace(a, 30, 4).data(), random_subspace(b, 30, 4).data());
}
