#include "pch.hpp"

namespace ratfact {
namespace {

using testing::example1;
using testing::example2;
using testing::RandomSystems;
using testing::same_multiset;

RangeResult basis(const DescriptorSystem& g, ZerosPolicy z, bool inner = false,
                  bool stabilize = false) {
  RangeOptions o;
  o.zeros = z;
  o.inner = inner;
  o.stabilize = stabilize;
  return range_basis(g, RegionPartition::stability(g.ts), o);
}

TEST(RangeBasis, Example1Minimal) {
  const DescriptorSystem g = example1();
  const RangeResult rr = basis(g, ZerosPolicy::none);
  const EigenvalueList rp = poles(rr.R), rz = zeros(rr.R);
  EXPECT_EQ(rp.total(), 1);
  EXPECT_EQ(rz.total(), 0);
  ASSERT_EQ(rp.finite.size(), 1u);

  const DescriptorSystem x = cofactor(g, rr);
  EXPECT_EQ(mcmillan_degree(x), 4);
  const EigenvalueList xz = zeros(x);
  EXPECT_TRUE(same_multiset(xz.finite, {1.0, 2.0, rp.finite[0]}, 1e-6));
  EXPECT_EQ(xz.infinite_count(), 1);
  EXPECT_LT(product_residual(g, rr.R, x, frequency_grid(g.ts)).max_residual, 1e-8);
}

TEST(RangeBasis, Example1UnstableZeros) {
  const RangeResult rr = basis(example1(), ZerosPolicy::bad);
  EXPECT_EQ(mcmillan_degree(rr.R), 3);
  EXPECT_TRUE(same_multiset(zeros(rr.R).finite, {1.0, 2.0}, 1e-6));
}

// The inner basis keeps the range, hence the unstable zeros {1, 2}; its
// poles are the stable reflections {-1, -2} together with -sqrt(3).
TEST(RangeBasis, Example1Inner) {
  const DescriptorSystem g = example1();
  const RangeResult rr = basis(g, ZerosPolicy::bad, true);
  EXPECT_TRUE(same_multiset(poles(rr.R).finite, {-1.0, -std::sqrt(3.0), -2.0}, 1e-4));
  EXPECT_TRUE(same_multiset(zeros(rr.R).finite, {1.0, 2.0}, 1e-4));
  EXPECT_LT(inner_residual(rr.R, frequency_grid(g.ts, 32)).max_residual, 1e-8);
  EXPECT_LT(product_residual(g, rr.R, cofactor(g, rr),
                             common_sample_points({&g, &rr.R}, 16, 1))
                .max_residual,
            1e-8);
}

TEST(RangeBasis, Example2Minimal) {
  const DescriptorSystem g = example2();
  const RangeResult rr = basis(g, ZerosPolicy::none);
  const EigenvalueList rp = poles(rr.R);
  ASSERT_EQ(rp.finite.size(), 1u);
  EXPECT_EQ(rp.infinite_count(), 0);
  const DescriptorSystem x = cofactor(g, rr);
  EXPECT_EQ(mcmillan_degree(x), 2);
  EXPECT_TRUE(same_multiset(zeros(x).finite, {rp.finite[0], 1.0}, 1e-6));
}

TEST(RangeBasis, Identity) {
  const DescriptorSystem g = static_gain(Matrix::Identity(3, 3), TimeDomain::continuous);
  const RangeResult rr = basis(g, ZerosPolicy::bad);
  EXPECT_EQ(rr.R.n(), 0);
  EXPECT_EQ(rr.R.D, Matrix::Identity(3, 3));
  EXPECT_EQ(rr.F.size(), 0);
  EXPECT_EQ(rr.W, Matrix::Identity(3, 3));
  EXPECT_EQ(cofactor(g, rr).D, Matrix::Identity(3, 3));
}

TEST(RangeBasis, StabilizeReflectsPoles) {
  const RangeResult rr = basis(example1(), ZerosPolicy::bad, false, true);
  for (const Complex& p : poles(rr.R).finite) EXPECT_LT(p.real(), 0.0);
  EXPECT_TRUE(same_multiset(zeros(rr.R).finite, {1.0, 2.0}, 1e-6));
}

TEST(RangeBasis, InnerWithBoundaryZeroFails) {
  // s/(s+1) has its zero on the imaginary axis
  const DescriptorSystem g =
      make_dss(Matrix::Constant(1, 1, -1), std::nullopt, Matrix::Ones(1, 1),
               Matrix::Constant(1, 1, -1), Matrix::Ones(1, 1), TimeDomain::continuous);
  EXPECT_THROW(basis(g, ZerosPolicy::all, true), FactorizationError);
}

TEST(RangeBasis, BoundaryStripIsAnError) {
  const DescriptorSystem g =
      make_dss(Matrix::Constant(1, 1, -1), std::nullopt, Matrix::Ones(1, 1),
               Matrix::Constant(1, 1, -1), Matrix::Ones(1, 1), TimeDomain::continuous);
  ToleranceConfig tol;
  tol.boundary_offset = 1e-6;
  EXPECT_THROW(range_basis(g, RegionPartition::stability(g.ts), {}, tol), BoundaryError);
}

TEST(RangeBasis, CofactorProvenance) {
  const RangeResult rr = basis(example1(), ZerosPolicy::none);
  EXPECT_THROW(cofactor(example2(), rr), InputError);
}

TEST(RangeProperties, RandomSystems) {
  RandomSystems gen(404);
  const ZerosPolicy policies[] = {ZerosPolicy::none, ZerosPolicy::bad, ZerosPolicy::all};
  for (int i = 0; i < 50; ++i) {
    const DescriptorSystem g = gen.any(8);
    const Index r = normal_rank(g, i);
    for (ZerosPolicy z : policies) {
      for (int mode = 0; mode < 3; ++mode) {
        const bool inner = mode == 2, stabilize = mode >= 1;
        RangeResult rr;
        ASSERT_NO_THROW(rr = basis(g, z, inner, stabilize))
            << "system " << i << " policy " << int(z) << " mode " << mode;
        const DescriptorSystem x = cofactor(g, rr);
        EXPECT_LT(product_residual(g, rr.R, x, common_sample_points({&g, &rr.R}, 16, i))
                      .max_residual,
                  1e-8)
            << "system " << i << " policy " << int(z) << " mode " << mode;
        EXPECT_EQ(poles(rr.R).infinite_count(), 0) << "system " << i;
        if (stabilize)
          for (const Complex& p : poles(rr.R).finite)
            EXPECT_NE(classify_finite(p, RegionPartition::stability(g.ts), {}),
                      EigenClass::bad)
                << "system " << i;
      }
    }
    const RangeResult rr = basis(g, ZerosPolicy::bad);
    EXPECT_EQ(normal_rank(rr.R, i), r) << "system " << i;
    EXPECT_EQ(normal_rank(stack_horizontal(rr.R, g), i), r) << "system " << i;
  }
}

}  // namespace
}  // namespace ratfact
