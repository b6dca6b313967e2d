#include "pch.hpp"

namespace ratfact {
namespace {

using testing::example1;
using testing::example2;
using testing::RandomSystems;

DescriptorSystem first_order() {
  return make_dss(Matrix::Constant(1, 1, -1.0), Matrix::Identity(1, 1),
                  Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                  TimeDomain::continuous);
}

double max_diff(const DescriptorSystem& a, const std::function<CMatrix(Complex)>& ref,
                std::uint64_t seed = 3) {
  double worst = 0.0;
  for (const Complex& z : sample_points(a, 10, seed)) {
    const CMatrix r = ref(z);
    worst = std::max(worst, (evaluate(a, z) - r).norm() / std::max(1.0, r.norm()));
  }
  return worst;
}

TEST(MakeDss, FirstOrder) {
  const DescriptorSystem g = first_order();
  EXPECT_EQ(g.n(), 1);
  EXPECT_NEAR(evaluate(g, 1.0)(0, 0).real(), 0.5, 1e-15);
}

TEST(MakeDss, DimensionMismatch) {
  EXPECT_THROW(make_dss(Matrix::Zero(2, 2), std::nullopt, Matrix::Zero(3, 1),
                        Matrix::Zero(1, 2), Matrix::Zero(1, 1), TimeDomain::continuous),
               InputError);
}

TEST(MakeDss, Example2HasSingularE) {
  const DescriptorSystem g = example2();
  EXPECT_EQ(g.n(), 4);
  EXPECT_FALSE(g.e_identity);
  EXPECT_EQ(numerical_rank(g.E, 1e-12), 2);
}

TEST(Evaluate, Example1AtZero) {
  Matrix expected(3, 3);
  expected << -0.5, 0, 0.5,
               0, -2, -2,
              -0.5, -1, -0.5;
  const CMatrix v = evaluate(example1(), 0.0);
  EXPECT_LT((v.real() - expected).norm(), 1e-14);
  EXPECT_LT(v.imag().norm(), 1e-14);
}

TEST(Evaluate, Example2AtTwo) {
  Matrix expected(3, 3);
  expected << 7, 24, 6,
              2, 7, 2,
              4, 14, 4;
  EXPECT_LT((evaluate(example2(), 2.0).real() - expected).norm(), 1e-13);
}

TEST(Evaluate, ZeroInputGivesD) {
  DescriptorSystem g = example1();
  g.B.setZero();
  EXPECT_EQ(evaluate(g, Complex(0.3, 0.7)), g.D.cast<Complex>());
}

TEST(Evaluate, PoleRaisesEvaluationError) {
  EXPECT_THROW(evaluate(first_order(), -1.0), EvaluationError);
}

TEST(Conjugate, FirstOrderAtTwo) {
  EXPECT_NEAR(evaluate(conjugate(first_order()), 2.0)(0, 0).real(), -1.0, 1e-14);
}

TEST(Conjugate, ConstantIsTransposed) {
  Matrix D(2, 3);
  D << 1, 2, 3, 4, 5, 6;
  for (TimeDomain ts : {TimeDomain::continuous, TimeDomain::discrete}) {
    const DescriptorSystem c = conjugate(static_gain(D, ts));
    EXPECT_EQ(c.p(), 3);
    EXPECT_LT((evaluate(c, 0.7).real() - D.transpose()).norm(), 1e-14);
  }
}

TEST(Conjugate, EvaluationEquality) {
  for (const DescriptorSystem& g : {example1(), example2()}) {
    const bool cont = g.ts == TimeDomain::continuous;
    const double d = max_diff(conjugate(g), [&](Complex z) {
      return CMatrix(evaluate(g, cont ? -z : 1.0 / z).transpose());
    });
    EXPECT_LT(d, 1e-8);
  }
}

TEST(Conjugate, Example2InnerFactor) {
  const FactorizationResult io = inner_outer(example2());
  const DescriptorSystem rc = conjugate(io.left);
  for (const Complex& z : frequency_grid(TimeDomain::discrete, 32)) {
    const CMatrix e = evaluate(rc, z) * evaluate(io.left, z) - CMatrix::Identity(2, 2);
    EXPECT_LT(e.norm(), 1e-8);
  }
}

TEST(Interconnections, SeriesWithIdentity) {
  const DescriptorSystem g = example1();
  EXPECT_LT(max_diff(series(g, identity_system(3, g.ts)),
                     [&](Complex z) { return evaluate(g, z); }),
            1e-8);
}

TEST(Interconnections, StackForCoprimeFactorization) {
  const DescriptorSystem g = example1();
  const DescriptorSystem s = stack_vertical(g, identity_system(3, g.ts));
  EXPECT_EQ(s.p(), 6);
  EXPECT_LT(max_diff(s, [&](Complex z) {
              CMatrix v(6, 3);
              v << evaluate(g, z), CMatrix::Identity(3, 3);
              return v;
            }),
            1e-8);
}

TEST(Interconnections, TransposeAtOnePlusI) {
  const DescriptorSystem g = example1();
  const Complex z(1.0, 1.0);
  EXPECT_LT((evaluate(transpose(g), z) - evaluate(g, z).transpose()).norm(), 1e-13);
}

TEST(Interconnections, RandomEvaluationEquality) {
  RandomSystems gen(11);
  for (int i = 0; i < 20; ++i) {
    const TimeDomain ts = gen.domain();
    const Index p = gen.uniform(1, 3), k = gen.uniform(1, 3), m = gen.uniform(1, 3);
    const DescriptorSystem a = gen.improper(gen.uniform(0, 3), 2, p, k, ts);
    const DescriptorSystem b = gen.proper(gen.uniform(0, 3), k, m, ts);
    const DescriptorSystem c = gen.proper(gen.uniform(0, 3), p, k, ts);
    EXPECT_LT(max_diff(series(a, b), [&](Complex z) {
                return CMatrix(evaluate(a, z) * evaluate(b, z));
              }),
              1e-8);
    EXPECT_LT(max_diff(stack_horizontal(a, c), [&](Complex z) {
                CMatrix v(p, 2 * k);
                v << evaluate(a, z), evaluate(c, z);
                return v;
              }),
              1e-8);
  }
}

TEST(Interconnections, MismatchedDomains) {
  const DescriptorSystem a = example1();
  DescriptorSystem b = a;
  b.ts = TimeDomain::discrete;
  EXPECT_THROW(series(a, b), InputError);
  EXPECT_THROW(series(a, static_gain(Matrix::Zero(2, 2), a.ts)), InputError);
}

TEST(IrreducibleRealization, MinimalSisoUnchanged) {
  EXPECT_EQ(irreducible_realization(first_order()).n(), 1);
}

TEST(IrreducibleRealization, PaddedExample1) {
  const DescriptorSystem g = example1();
  Matrix A = Matrix::Zero(5, 5), B = Matrix::Zero(5, 3), C = Matrix::Zero(3, 5);
  A.topLeftCorner(4, 4) = g.A;
  A(4, 4) = -3;  // unreachable stable state
  A(0, 4) = 1;
  B.topRows(4) = g.B;
  C.leftCols(4) = g.C;
  C(1, 4) = 2;
  const DescriptorSystem padded = make_dss(A, std::nullopt, B, C, g.D, g.ts);
  const DescriptorSystem r = irreducible_realization(padded);
  EXPECT_EQ(r.n(), 4);
  EXPECT_LT(max_diff(r, [&](Complex z) { return evaluate(g, z); }), 1e-8);
}

TEST(IrreducibleRealization, Example2KeepsOrderFour) {
  const DescriptorSystem r = irreducible_realization(example2());
  EXPECT_EQ(r.n(), 4);
  // the extra state is a non-dynamic mode
  EXPECT_EQ(minimal_realization(example2()).n(), 3);
}

TEST(NormalRank, Examples) {
  EXPECT_EQ(normal_rank(example1()), 2);
  EXPECT_EQ(normal_rank(example2()), 2);
  EXPECT_EQ(normal_rank(static_gain(Matrix::Identity(3, 3), TimeDomain::continuous)), 3);
}

TEST(NormalRank, TransposeInvariant) {
  RandomSystems gen(21);
  for (int i = 0; i < 30; ++i) {
    const DescriptorSystem g = gen.any(6);
    EXPECT_EQ(normal_rank(g, i), normal_rank(transpose(g), i));
  }
}

TEST(PolesZeros, Example1) {
  const EigenvalueList p = poles(example1()), z = zeros(example1());
  EXPECT_TRUE(testing::same_multiset(p.finite, {-1.0, -1.0, -2.0, -2.0}, 1e-6));
  EXPECT_EQ(p.infinite_count(), 0);
  EXPECT_TRUE(testing::same_multiset(z.finite, {1.0, 2.0}, 1e-6));
  EXPECT_EQ(z.infinite_count(), 1);
}

TEST(PolesZeros, Example2) {
  const EigenvalueList p = poles(example2()), z = zeros(example2());
  EXPECT_TRUE(p.finite.empty());
  EXPECT_EQ(p.infinite_count(), 2);
  EXPECT_TRUE(testing::same_multiset(z.finite, {1.0}, 1e-6));
  EXPECT_EQ(z.infinite_count(), 0);
  EXPECT_EQ(mcmillan_degree(example2()), 2);
}

TEST(PolesZeros, StaticGain) {
  const DescriptorSystem d = static_gain(Matrix::Identity(2, 2), TimeDomain::discrete);
  EXPECT_EQ(poles(d).total(), 0);
  EXPECT_EQ(zeros(d).total(), 0);
  EXPECT_EQ(mcmillan_degree(d), 0);
}

TEST(PolesZeros, InvariantUnderSimilarity) {
  RandomSystems gen(31);
  for (int i = 0; i < 20; ++i) {
    const DescriptorSystem g = irreducible_realization(gen.any(6));
    const Matrix Q = gen.orthogonal(g.n()), Z = gen.orthogonal(g.n());
    const DescriptorSystem h =
        make_dss(Q * g.A * Z, Matrix(Q * g.E * Z), Q * g.B, g.C * Z, g.D, g.ts);
    const EigenvalueList pg = poles(g), ph = poles(h), zg = zeros(g), zh = zeros(h);
    EXPECT_TRUE(testing::same_multiset(ph.finite, pg.finite, 1e-6)) << "system " << i;
    EXPECT_TRUE(testing::same_multiset(zh.finite, zg.finite, 1e-6)) << "system " << i;
    EXPECT_EQ(ph.infinite_count(), pg.infinite_count());
    EXPECT_EQ(zh.infinite_count(), zg.infinite_count());
  }
}

}  // namespace
}  // namespace ratfact
