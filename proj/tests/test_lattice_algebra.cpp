#include <gtest/gtest.h>

#include <cmath>

#include "ncsoliton/lattice_algebra.hpp"
#include "support.hpp"

using namespace ncsoliton;
using ncsoliton::testing::kTheta;
using ncsoliton::testing::random_element;
using ncsoliton::testing::random_positive;

namespace {

// c(z, w) = exp(-2πi x η), straight from the composition M_ω T_x M_η T_y.
Complex oracle_cocycle(double x, double eta) { return std::exp(Complex(0.0, -2.0 * kPi * x * eta)); }

// Product by the definition, with the embedding written out by hand. B elements act on the
// right, so their cocycle is the conjugate one.
AlgebraElement oracle_product(const AlgebraElement& a, const AlgebraElement& b) {
  const bool dual = a.lattice().side() == Side::Dual;
  const double theta = a.lattice().theta();
  const int R = std::max(a.radius(), b.radius());
  AlgebraElement out(a.lattice(), R);
  for (int m1 = -a.radius(); m1 <= a.radius(); ++m1) {
    for (int n1 = -a.radius(); n1 <= a.radius(); ++n1) {
      for (int m2 = -b.radius(); m2 <= b.radius(); ++m2) {
        for (int n2 = -b.radius(); n2 <= b.radius(); ++n2) {
          const int m = m1 + m2;
          const int n = n1 + n2;
          if (std::abs(m) > R || std::abs(n) > R) continue;
          const Complex c = dual ? std::conj(oracle_cocycle(m1, n2 / theta))
                                 : oracle_cocycle(m1 * theta, n2);
          out.set(m, n, out(m, n) + a(m1, n1) * b(m2, n2) * c);
        }
      }
    }
  }
  return out;
}

class BothSides : public ::testing::TestWithParam<Side> {
 protected:
  LatticeSpec lattice() const { return LatticeSpec(kTheta, GetParam()); }
};

}  // namespace

TEST(Lattice, PointsAndCovolume) {
  const LatticeSpec a(kTheta, Side::Primal);
  const LatticeSpec b(kTheta, Side::Dual);
  EXPECT_DOUBLE_EQ(a.point(2, -1).x, 2 * kTheta);
  EXPECT_DOUBLE_EQ(a.point(2, -1).omega, -1.0);
  EXPECT_DOUBLE_EQ(b.point(2, -1).x, 2.0);
  EXPECT_DOUBLE_EQ(b.point(2, -1).omega, -1.0 / kTheta);
  EXPECT_DOUBLE_EQ(a.vol(), kTheta);
  EXPECT_DOUBLE_EQ(b.vol(), 1.0 / kTheta);
  EXPECT_EQ(a.dual(), b);
  EXPECT_THROW(LatticeSpec(1.0, Side::Primal), AlgebraError);
  EXPECT_THROW(LatticeSpec(0.0, Side::Dual), AlgebraError);
}

TEST(Lattice, CocycleMatchesFormulaAndIsACocycle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point z{u(rng), u(rng)}, w{u(rng), u(rng)}, v{u(rng), u(rng)};
    EXPECT_LT(std::abs(cocycle(z, w) - oracle_cocycle(z.x, w.omega)), 1e-14);
    const Point zw{z.x + w.x, z.omega + w.omega}, wv{w.x + v.x, w.omega + v.omega};
    const Complex lhs = cocycle(z, w) * cocycle(zw, v);
    const Complex rhs = cocycle(z, wv) * cocycle(w, v);
    // arguments up to 36 in the exponent, so a few ulps of 2π·36
    EXPECT_LT(std::abs(lhs - rhs), 1e-13);
  }
  const LatticeSpec a(kTheta, Side::Primal);
  for (int m = -3; m <= 3; ++m) {
    for (int n = -3; n <= 3; ++n) {
      const Complex lhs = a.cocycle(m, n, 1, -2) * a.cocycle(m + 1, n - 2, -2, 1);
      const Complex rhs = a.cocycle(m, n, -1, -1) * a.cocycle(1, -2, -2, 1);
      EXPECT_LT(std::abs(lhs - rhs), 1e-14);
    }
  }
}

TEST(Lattice, DualCocycleIsConjugate) {
  const LatticeSpec b(kTheta, Side::Dual);
  EXPECT_LT(std::abs(b.cocycle(1, 0, 0, 1) - std::conj(oracle_cocycle(1.0, 1.0 / kTheta))), 1e-15);
  EXPECT_LT(std::abs(b.cocycle(0, 1, 1, 0) - 1.0), 1e-15);
}

TEST_P(BothSides, ProductMatchesDefinition) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const AlgebraElement a = random_element(lattice(), 3, rng);
    const AlgebraElement b = random_element(lattice(), 4, rng);
    EXPECT_LT(l1_distance(a * b, oracle_product(a, b)), 1e-12);
  }
}

TEST_P(BothSides, ProductMatchesLeftRegularMatrix) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const AlgebraElement a = random_element(lattice(), 2, rng);
    const AlgebraElement b = random_element(lattice(), 2, rng);
    // the box of radius 4 holds the whole product
    const Eigen::VectorXcd lhs = left_regular_matrix(a, 4) * to_vector(b, 4);
    const AlgebraElement ab = a.resized(4) * b.resized(4);
    EXPECT_LT((lhs - to_vector(ab, 4)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST_P(BothSides, AssociativeWithUnit) {
  std::mt19937_64 rng(13);
  const AlgebraElement a = random_element(lattice(), 2, rng).resized(8);
  const AlgebraElement b = random_element(lattice(), 2, rng).resized(8);
  const AlgebraElement c = random_element(lattice(), 2, rng).resized(8);
  EXPECT_LT(l1_distance((a * b) * c, a * (b * c)), 1e-12);
  const AlgebraElement one = AlgebraElement::identity(lattice(), 8);
  EXPECT_LT(l1_distance(one * a, a), 1e-15);
  EXPECT_LT(l1_distance(a * one, a), 1e-15);
}

TEST_P(BothSides, InvolutionIsTheMatrixAdjoint) {
  std::mt19937_64 rng(14);
  const AlgebraElement a = random_element(lattice(), 3, rng);
  const Eigen::MatrixXcd m = left_regular_matrix(a, 5);
  const Eigen::MatrixXcd ms = left_regular_matrix(involution(a), 5);
  EXPECT_LT((ms - m.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST_P(BothSides, InvolutionReversesProducts) {
  std::mt19937_64 rng(15);
  const AlgebraElement a = random_element(lattice(), 2, rng).resized(4);
  const AlgebraElement b = random_element(lattice(), 2, rng).resized(4);
  EXPECT_LT(l1_distance(involution(a * b), involution(b) * involution(a)), 1e-13);
  EXPECT_LT(l1_distance(involution(involution(a)), a), 1e-15);
}

TEST_P(BothSides, TraceIsCentral) {
  std::mt19937_64 rng(16);
  const AlgebraElement a = random_element(lattice(), 2, rng).resized(4);
  const AlgebraElement b = random_element(lattice(), 2, rng).resized(4);
  EXPECT_LT(std::abs(trace(a * b) - trace(b * a)), 1e-13);
  EXPECT_GT(trace(involution(a) * a).real(), 0.0);
}

TEST_P(BothSides, DerivationsObeyLeibniz) {
  std::mt19937_64 rng(17);
  const AlgebraElement a = random_element(lattice(), 2, rng).resized(4);
  const AlgebraElement b = random_element(lattice(), 2, rng).resized(4);
  for (Direction dir : {Direction::One, Direction::Two}) {
    const AlgebraElement lhs = derive(a * b, dir);
    const AlgebraElement rhs = derive(a, dir) * b + a * derive(b, dir);
    EXPECT_LT(l1_distance(lhs, rhs), 1e-11);
    // derivations commute with the involution
    EXPECT_LT(l1_distance(derive(involution(a), dir), involution(derive(a, dir))), 1e-12);
  }
}

TEST_P(BothSides, DerivationOnMonomials) {
  const double kappa = lattice().derivation_scale();
  const AlgebraElement u = AlgebraElement::monomial(lattice(), 3, 2, -3);
  EXPECT_LT(std::abs(derive(u, Direction::One)(2, -3) - kappa * 2.0 * kPi * kI * 2.0), 1e-13);
  EXPECT_LT(std::abs(derive(u, Direction::Two)(2, -3) - kappa * 2.0 * kPi * kI * -3.0), 1e-13);
  const AlgebraElement lap = laplacian(u);
  EXPECT_LT(std::abs(lap(2, -3) + kappa * kappa * 4.0 * kPi * kPi * 13.0), 1e-10);
  EXPECT_LT(l1_distance(d_bar(u), derive(u, Direction::One) + kI * derive(u, Direction::Two)), 1e-15);
  EXPECT_LT(l1_distance(d(u), derive(u, Direction::One) - kI * derive(u, Direction::Two)), 1e-15);
}

INSTANTIATE_TEST_SUITE_P(Sides, BothSides, ::testing::Values(Side::Primal, Side::Dual),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Algebra, RejectsMixedLattices) {
  const AlgebraElement a = AlgebraElement::identity(LatticeSpec(kTheta, Side::Primal), 1);
  const AlgebraElement b = AlgebraElement::identity(LatticeSpec(kTheta, Side::Dual), 1);
  EXPECT_THROW(a * b, AlgebraError);
  EXPECT_THROW(l1_distance(a, b), AlgebraError);
  const AlgebraElement c = AlgebraElement::identity(LatticeSpec(0.3, Side::Primal), 1);
  EXPECT_THROW(a + c, AlgebraError);
}

TEST(Algebra, ResizeTracksDroppedMass) {
  AlgebraElement a(LatticeSpec(kTheta, Side::Primal), 3);
  a.set(0, 0, 1.0);
  a.set(3, -1, Complex(0.0, 2.0));
  const AlgebraElement s = a.resized(2);
  EXPECT_DOUBLE_EQ(s.tail_norm(), 2.0);
  EXPECT_DOUBLE_EQ(s.l1_norm(), 1.0);
  EXPECT_TRUE(s.truncation_warning());
  EXPECT_EQ(a(5, 5), Complex(0.0));
  EXPECT_THROW(a.set(4, 0, 1.0), AlgebraError);
}

TEST(Algebra, SobolevNorm) {
  AlgebraElement a(LatticeSpec(kTheta, Side::Primal), 2);
  a.set(1, 1, Complex(3.0, 4.0));
  const double weight = 1.0 + kTheta * kTheta + 1.0;
  EXPECT_NEAR(s_norm(a, 0.0), 5.0, 1e-15);
  EXPECT_NEAR(s_norm(a, 2.0), 5.0 * weight, 1e-13);
  EXPECT_THROW(s_norm(a, -1.0), AlgebraError);
}

TEST(Algebra, GeneratorMonomials) {
  // U1 U2 = c((θ,0),(0,1)) π(θ,1)
  const LatticeSpec lattice(kTheta, Side::Primal);
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(3, 3);
  coeffs(2, 2) = 1.0;
  const AlgebraElement u = AlgebraElement::from_generator_monomials(lattice, 1, coeffs);
  const AlgebraElement u1 = AlgebraElement::monomial(lattice, 1, 1, 0);
  const AlgebraElement u2 = AlgebraElement::monomial(lattice, 1, 0, 1);
  EXPECT_LT(l1_distance(u, u1 * u2), 1e-15);
  EXPECT_LT(std::abs(u(1, 1) - oracle_cocycle(kTheta, 1.0)), 1e-15);
}

TEST(Spectrum, UnitaryPerturbation) {
  // 1 + t(U1 + U1*) has spectrum [1 - 2t, 1 + 2t] for irrational θ
  const LatticeSpec lattice(kTheta, Side::Primal);
  AlgebraElement a = AlgebraElement::identity(lattice, 2);
  a.set(1, 0, 0.25);
  a.set(-1, 0, 0.25);
  const SpectralBounds sb = spectral_bounds(a, 2);
  EXPECT_NEAR(sb.lower, 0.5, 1e-4);
  EXPECT_NEAR(sb.upper, 1.5, 1e-4);
  EXPECT_GE(sb.lower, 0.5 - 1e-12);
  EXPECT_LE(sb.upper, 1.5 + 1e-12);
}

TEST(Spectrum, RequiresSelfAdjoint) {
  const LatticeSpec lattice(kTheta, Side::Primal);
  const AlgebraElement u = AlgebraElement::monomial(lattice, 1, 1, 0);
  EXPECT_FALSE(is_self_adjoint(u));
  EXPECT_THROW(spectral_bounds(u, 1), AlgebraError);
}

TEST(Functional, InverseOfPositiveElements) {
  std::mt19937_64 rng(21);
  for (Side side : {Side::Primal, Side::Dual}) {
    const LatticeSpec lattice(kTheta, side);
    const AlgebraElement a = random_positive(lattice, 3, rng).resized(20);
    const AlgebraElement y = inverse(a, 1e-12);
    const AlgebraElement one = AlgebraElement::identity(lattice, 20);
    EXPECT_LT(l1_distance(a * y, one), 1e-12);
    EXPECT_LT(l1_distance(y * a, one), 1e-12);
  }
}

TEST(Functional, InverseSquareRoot) {
  std::mt19937_64 rng(22);
  for (Side side : {Side::Primal, Side::Dual}) {
    const LatticeSpec lattice(kTheta, side);
    const AlgebraElement a = random_positive(lattice, 3, rng).resized(20);
    const AlgebraElement y = inv_sqrt(a, 1e-11);
    EXPECT_TRUE(is_self_adjoint(y, 1e-12));
    EXPECT_LT(l1_distance(y * y * a, AlgebraElement::identity(lattice, 20)), 1e-11);
    // the square root commutes with a
    EXPECT_LT(l1_distance(y * a, a * y), 1e-11);
  }
}

TEST(Functional, RejectsNonPositive) {
  const LatticeSpec lattice(kTheta, Side::Dual);
  AlgebraElement a = AlgebraElement::identity(lattice, 2);
  a.set(1, 0, 0.75);
  a.set(-1, 0, 0.75);
  EXPECT_THROW(inverse(a), NotPositiveError);
  EXPECT_THROW(inv_sqrt(a), NotPositiveError);
  EXPECT_THROW(inv_sqrt(-1.0 * AlgebraElement::identity(lattice, 2)), NotPositiveError);
}

TEST(Functional, GeneralInverseOfUnitaryCombination) {
  const LatticeSpec lattice(kTheta, Side::Dual);
  AlgebraElement u = AlgebraElement::monomial(lattice, 12, 1, 0, 4.0);
  u.set(0, 1, Complex(0.0, 0.5));
  const AlgebraElement v = general_inverse(u, 1e-10);
  EXPECT_LT(l1_distance(u * v, AlgebraElement::identity(lattice, 12)), 1e-10);
}
