#include "pch.hpp"

namespace ratfact {
namespace {

using testing::example1;
using testing::RandomSystems;

std::vector<Complex> finite_of(const KlfResult& k) {
  std::vector<Complex> v;
  for (const auto& e : k.finite_eigenvalues) v.push_back(e.value());
  return v;
}

TEST(KroneckerLikeForm, RegularDiagonal) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1;
  A(1, 1) = 2;
  const KlfResult k = kronecker_like_form(A, Matrix::Identity(2, 2));
  EXPECT_TRUE(k.structure.right_indices.empty());
  EXPECT_TRUE(k.structure.left_indices.empty());
  EXPECT_EQ(k.structure.finite_dim, 2);
  EXPECT_TRUE(testing::same_multiset(finite_of(k), {1.0, 2.0}, 1e-12));
}

TEST(KroneckerLikeForm, ZeroPaddedRow) {
  Matrix A(1, 2), E(1, 2);
  A << 1, 0;
  E << 1, 0;
  const KlfResult k = kronecker_like_form(A, E);
  ASSERT_EQ(k.structure.right_indices.size(), 1u);
  EXPECT_EQ(k.structure.right_indices[0], 0);
  EXPECT_EQ(k.structure.finite_dim, 1);
  EXPECT_NEAR(finite_of(k)[0].real(), 1.0, 1e-12);
  EXPECT_EQ(testing::check_klf(A, E), "");
}

TEST(KroneckerLikeForm, Example1SystemPencil) {
  auto [M, N] = system_pencil(example1());
  const KlfResult k = kronecker_like_form(M, N);
  EXPECT_TRUE(testing::same_multiset(finite_of(k), {1.0, 2.0}, 1e-6));
  EXPECT_EQ(k.structure.right_indices.size(), 1u);
  EXPECT_EQ(k.structure.left_indices.size(), 1u);
  EXPECT_EQ(testing::check_klf(M, N), "");
}

TEST(KroneckerLikeForm, LeftAndRightBlocksTogether) {
  // blkdiag([1 -λ], [1; -λ], 3 - λ), then scrambled
  Matrix A = Matrix::Zero(4, 4), E = Matrix::Zero(4, 4);
  A(0, 0) = 1;
  E(0, 1) = 1;
  A(1, 2) = 1;
  E(2, 2) = 1;
  A(3, 3) = 3;
  E(3, 3) = 1;
  RandomSystems gen(3);
  const Matrix Q = gen.orthogonal(4), Z = gen.orthogonal(4);
  const KlfResult k = kronecker_like_form(Q * A * Z, Q * E * Z);
  EXPECT_EQ(k.structure.right_indices, std::vector<Index>{1});
  EXPECT_EQ(k.structure.left_indices, std::vector<Index>{1});
  EXPECT_TRUE(testing::same_multiset(finite_of(k), {3.0}, 1e-10));
  EXPECT_EQ(testing::check_klf(Q * A * Z, Q * E * Z), "");
}

TEST(KroneckerLikeForm, ShapeMismatch) {
  EXPECT_THROW(kronecker_like_form(Matrix::Zero(2, 3), Matrix::Zero(3, 2)), InputError);
}

TEST(Classify, ContinuousStability) {
  const RegionPartition r = RegionPartition::stability(TimeDomain::continuous);
  EXPECT_EQ(classify_eigenvalue(-1.0, 1.0, r), EigenClass::good);
  EXPECT_EQ(classify_eigenvalue(1.0, 1.0, r), EigenClass::bad);
}

// The closed unit disc is the good set, so the boundary counts as good.
TEST(Classify, DiscreteUnitCircleIsGood) {
  const RegionPartition r = RegionPartition::stability(TimeDomain::discrete);
  EXPECT_EQ(classify_eigenvalue(Complex(0.6, 0.8), 1.0, r), EigenClass::good);
  EXPECT_EQ(classify_eigenvalue(1.01, 1.0, r), EigenClass::bad);
  EXPECT_EQ(classify_eigenvalue(1.0, 0.0, r), EigenClass::bad);
}

TEST(Classify, InfiniteWithMinimalBasisRegion) {
  const RegionPartition r = RegionPartition::none(TimeDomain::continuous);
  EXPECT_EQ(classify_eigenvalue(1.0, 0.0, r), EigenClass::good);
  EXPECT_EQ(classify_eigenvalue(5.0, 1.0, r), EigenClass::good);
}

TEST(Classify, BoundaryStrip) {
  ToleranceConfig tol;
  tol.boundary_offset = 1e-3;
  const RegionPartition r = RegionPartition::stability(TimeDomain::continuous);
  EXPECT_EQ(classify_eigenvalue(Complex(1e-4, 2.0), 1.0, r, tol), EigenClass::boundary);
  EXPECT_EQ(classify_eigenvalue(Complex(-0.1, 2.0), 1.0, r, tol), EigenClass::good);
  EXPECT_THROW(classify_eigenvalue(0.0, 0.0, r), InputError);
}

TEST(Classify, CustomRegionMustBeSymmetric) {
  RegionPartition r;
  r.bad = BadRegion::custom;
  r.custom_bad = [](Complex z) { return z.imag() > 0; };
  EXPECT_THROW(classify_finite(Complex(0, 1), r, {}), InputError);
}

TEST(SpecialKlf, ConstantFullColumnRank) {
  Matrix D(3, 2);
  D << 1, 0, 0, 1, 1, 1;
  const DescriptorSystem g = static_gain(D, TimeDomain::continuous);
  const SpecialKlf s = special_klf(g, RegionPartition::stability(g.ts));
  EXPECT_EQ(s.n_rg, 0);
  EXPECT_EQ(s.n_bl, 0);
  EXPECT_EQ(s.r, 2);
}

TEST(SpecialKlf, Example1BadRegion) {
  const DescriptorSystem g = example1();
  const SpecialKlf s = special_klf(g, RegionPartition::stability(g.ts));
  EXPECT_EQ(s.n_bl, 3);
  EXPECT_EQ(s.r, 2);
  EXPECT_TRUE(testing::same_multiset(s.bad_zeros, {1.0, 2.0}, 1e-6));
  // the unstable zeros live in the bl block system
  const DescriptorSystem bl = make_dss(s.A_bl, s.E_bl, s.B_bl, s.C_bl, s.D_bl, g.ts);
  EXPECT_TRUE(testing::same_multiset(zeros(bl).finite, {1.0, 2.0}, 1e-6));
  EXPECT_EQ(testing::check_special_klf(g, s), "");
}

TEST(SpecialKlf, Example1MinimalBasisRegion) {
  const DescriptorSystem g = example1();
  const SpecialKlf s = special_klf(g, RegionPartition::none(g.ts));
  EXPECT_EQ(s.n_bl, 1);
  EXPECT_EQ(s.r, 2);
  EXPECT_EQ(testing::check_special_klf(g, s), "");
}

TEST(SpecialKlf, DomainMismatch) {
  EXPECT_THROW(special_klf(example1(), RegionPartition::stability(TimeDomain::discrete)),
               InputError);
}

// Full column rank of the bl block pencil at points of the good region.
Index bl_block_rank(const SpecialKlf& s, Complex z) {
  const Index nb = s.n_bl, r = s.r, p = s.C_bl.rows();
  CMatrix P(nb + p, nb + r);
  P << s.A_bl.cast<Complex>() - z * s.E_bl.cast<Complex>(), s.B_bl.cast<Complex>(),
      s.C_bl.cast<Complex>(), s.D_bl.cast<Complex>();
  return complex_rank(P, 1e-10);
}

TEST(SpecialKlf, RandomSystemsInvariants) {
  RandomSystems gen(77);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 3.0), ph(-3.1, 3.1);
  for (int i = 0; i < 100; ++i) {
    const DescriptorSystem g = gen.any(8);
    const RegionPartition reg = RegionPartition::stability(g.ts);
    SpecialKlf s;
    ASSERT_NO_THROW(s = special_klf(g, reg)) << "system " << i;
    EXPECT_EQ(testing::check_special_klf(g, s), "") << "system " << i;
    EXPECT_EQ(s.r, normal_rank(g, i)) << "system " << i;
    for (int k = 0; k < 5; ++k) {
      // a point strictly inside the good region
      const Complex z = g.ts == TimeDomain::continuous
                            ? Complex(-u(rng), 3.0 * ph(rng))
                            : std::polar(u(rng) / 3.2, ph(rng));
      EXPECT_EQ(bl_block_rank(s, z), s.n_bl + s.r) << "system " << i << " point " << z;
    }
  }
}

TEST(SpecialKlf, RangeRealizationHasNoRemovableStructure) {
  RandomSystems gen(91);
  for (int i = 0; i < 20; ++i) {
    const DescriptorSystem g = i == 0 ? example1() : gen.any(6);
    RangeOptions o;
    o.zeros = ZerosPolicy::none;
    const RangeResult rr = range_basis(g, RegionPartition::stability(g.ts), o);
    const SpecialKlf again = special_klf(rr.R, RegionPartition::none(g.ts));
    EXPECT_EQ(again.n_rg, 0) << "system " << i;
    EXPECT_EQ(again.r, rr.sklf.r);
  }
}

TEST(KlfInvariants, RandomPencils) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomSystems gen(5000 + seed);
    const DescriptorSystem g = gen.any(8);
    auto [M, N] = system_pencil(g);
    EXPECT_EQ(testing::check_klf(M, N), "") << "seed " << seed;
  }
}

}  // namespace
}  // namespace ratfact
