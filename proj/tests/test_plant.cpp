#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "crane/plant.hpp"

using namespace crane;

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

ChainParams default_chain() { return ChainParams{}; }

EePosition rotate_z(const EePosition& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

}  // namespace

TEST_CASE("forward kinematics identities") {
  ChainParams p = default_chain();

  EePosition home = forward_kinematics({0, 0, 0, 0}, p);
  CHECK(home.x == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(std::abs(home.y) < 1e-12);
  CHECK(home.z == doctest::Approx(0.5).epsilon(1e-12));

  EePosition yawed = forward_kinematics({kPi / 2, 0, 0, 0}, p);
  CHECK(std::abs(yawed.x) < 1e-12);
  CHECK(yawed.y == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(yawed.z == doctest::Approx(0.5).epsilon(1e-12));

  EePosition folded = forward_kinematics({0, kPi / 2, -kPi / 2, 0}, p);
  CHECK(folded.x == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(std::abs(folded.y) < 1e-12);
  CHECK(folded.z == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("forward kinematics rejects non-finite joints") {
  ChainParams p = default_chain();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(forward_kinematics({nan, 0, 0, 0}, p), std::domain_error);
  CHECK_THROWS_AS(forward_kinematics({0, 0, inf, 0}, p), std::domain_error);
}

TEST_CASE("forward kinematics yaw equivariance") {
  ChainParams p = default_chain();
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    JointVector q = sample_random_config(rng, p);
    double delta = rng.uniform(-1.5, 1.5);
    JointVector q2 = q;
    q2.j1 += delta;
    EePosition direct = forward_kinematics(q2, p);
    EePosition rotated = rotate_z(forward_kinematics(q, p), delta);
    CHECK(std::abs(direct.x - rotated.x) < 1e-12);
    CHECK(std::abs(direct.y - rotated.y) < 1e-12);
    CHECK(std::abs(direct.z - rotated.z) < 1e-12);
  }
}

TEST_CASE("cylinder geometry construction enforces the pivot triangle") {
  CHECK_NOTHROW(CylinderGeometry(0.30, 0.35, -1.0, 1.0, 0.28, 0.60));
  // l_min at or below |a-b|
  CHECK_THROWS_AS(CylinderGeometry(0.30, 0.35, 0.0, 1.0, 0.04, 0.60),
                  std::invalid_argument);
  // l_max at or above a+b
  CHECK_THROWS_AS(CylinderGeometry(0.30, 0.35, 0.0, 1.0, 0.28, 0.65),
                  std::invalid_argument);
  // inverted stroke
  CHECK_THROWS_AS(CylinderGeometry(0.30, 0.35, 0.0, 1.0, 0.60, 0.28),
                  std::invalid_argument);
  CHECK_THROWS_AS(CylinderGeometry(-0.3, 0.35, 0.0, 1.0, 0.28, 0.60),
                  std::invalid_argument);
  CHECK_THROWS_AS(CylinderGeometry(0.30, 0.35, 0.0, 0.5, 0.28, 0.60),
                  std::invalid_argument);
}

TEST_CASE("default linkages cover the joint limits with margin") {
  ChainParams p = default_chain();
  CylinderGeometry g2 = default_joint2_cylinder();
  CylinderGeometry g3 = default_joint3_cylinder();
  const double m2 = 0.05 * p.limits.j2.range();
  const double m3 = 0.05 * p.limits.j3.range();
  CHECK(g2.covers({p.limits.j2.lo - m2, p.limits.j2.hi + m2}));
  CHECK(g3.covers({p.limits.j3.lo - m3, p.limits.j3.hi + m3}));
}

TEST_CASE("cylinder_to_joint known values") {
  CylinderGeometry g2 = default_joint2_cylinder();
  // right triangle: l = sqrt(a^2 + b^2) gives offset + sign * pi/2
  CHECK(cylinder_to_joint(std::sqrt(g2.a * g2.a + g2.b * g2.b), g2) ==
        doctest::Approx(-1.0 + kPi / 2).epsilon(1e-12));
  // frozen high-precision evaluation at mid-stroke l = 0.44
  CHECK(cylinder_to_joint(0.44, g2) ==
        doctest::Approx(0.48067438178030136).epsilon(1e-14));
  // stroke endpoints map to the induced range endpoints
  Interval r2 = g2.induced_joint_range();
  CHECK(cylinder_to_joint(g2.l_min, g2) == doctest::Approx(r2.lo).epsilon(1e-15));
  CHECK(cylinder_to_joint(g2.l_max, g2) == doctest::Approx(r2.hi).epsilon(1e-15));

  CylinderGeometry g3 = default_joint3_cylinder();
  CHECK(cylinder_to_joint(std::sqrt(g3.a * g3.a + g3.b * g3.b), g3) ==
        doctest::Approx(0.2 - kPi / 2).epsilon(1e-12));
  // sign = -1: min length gives the top of the induced range
  Interval r3 = g3.induced_joint_range();
  CHECK(cylinder_to_joint(g3.l_min, g3) == doctest::Approx(r3.hi).epsilon(1e-15));
  CHECK(cylinder_to_joint(g3.l_max, g3) == doctest::Approx(r3.lo).epsilon(1e-15));

  CHECK_THROWS_AS(cylinder_to_joint(g2.l_min - 1e-6, g2), std::out_of_range);
  CHECK_THROWS_AS(cylinder_to_joint(g2.l_max + 1e-6, g2), std::out_of_range);
}

TEST_CASE("cylinder_to_joint is strictly monotone over the stroke") {
  for (const CylinderGeometry& g :
       {default_joint2_cylinder(), default_joint3_cylinder()}) {
    const int n = 1000;
    double prev = cylinder_to_joint(g.l_min, g);
    for (int i = 1; i < n; ++i) {
      double l = g.l_min + (g.l_max - g.l_min) * double(i) / (n - 1);
      double theta = cylinder_to_joint(l, g);
      if (g.sign > 0)
        CHECK(theta > prev);
      else
        CHECK(theta < prev);
      prev = theta;
    }
  }
}

TEST_CASE("joint_to_cylinder inverts cylinder_to_joint") {
  for (const CylinderGeometry& g :
       {default_joint2_cylinder(), default_joint3_cylinder()}) {
    CHECK(joint_to_cylinder(g.offset + g.sign * kPi / 2, g) ==
          doctest::Approx(std::sqrt(g.a * g.a + g.b * g.b)).epsilon(1e-12));

    const int n = 1000;
    double worst_l = 0.0, worst_theta = 0.0;
    for (int i = 0; i < n; ++i) {
      double l = g.l_min + (g.l_max - g.l_min) * double(i) / (n - 1);
      worst_l = std::max(worst_l,
                         std::abs(joint_to_cylinder(cylinder_to_joint(l, g), g) - l));
    }
    Interval r = g.induced_joint_range();
    for (int i = 0; i < n; ++i) {
      double theta = r.lo + r.range() * double(i) / (n - 1);
      worst_theta = std::max(
          worst_theta,
          std::abs(cylinder_to_joint(joint_to_cylinder(theta, g), g) - theta));
    }
    CHECK(worst_l < 1e-9);
    CHECK(worst_theta < 1e-9);

    CHECK_THROWS_AS(joint_to_cylinder(r.lo - 1e-3, g), std::domain_error);
    CHECK_THROWS_AS(joint_to_cylinder(r.hi + 1e-3, g), std::domain_error);
  }
}

TEST_CASE("sample_random_config is seeded and uniform over the limit box") {
  ChainParams p = default_chain();
  Rng a(42), b(42);
  JointVector qa = sample_random_config(a, p);
  JointVector qb = sample_random_config(b, p);
  CHECK(qa.j1 == qb.j1);
  CHECK(qa.j2 == qb.j2);
  CHECK(qa.j3 == qb.j3);
  CHECK(qa.d4 == qb.d4);

  Rng rng(123);
  const int n = 10000;
  double sums[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    JointVector q = sample_random_config(rng, p);
    CHECK(within_limits(q, p).all());
    sums[0] += q.j1;
    sums[1] += q.j2;
    sums[2] += q.j3;
    sums[3] += q.d4;
  }
  const Interval* iv[4] = {&p.limits.j1, &p.limits.j2, &p.limits.j3,
                           &p.limits.d4};
  for (int k = 0; k < 4; ++k) {
    double mid = 0.5 * (iv[k]->lo + iv[k]->hi);
    double se = iv[k]->range() / std::sqrt(12.0) / std::sqrt(double(n));
    CHECK(std::abs(sums[k] / n - mid) < 3.0 * se);
  }
}

TEST_CASE("within_limits gives independent per-joint verdicts") {
  ChainParams p = default_chain();

  LimitVerdicts ok = within_limits({0, 0, -1.0, 0}, p);
  CHECK(ok.all());
  CHECK(ok.violation_count() == 0);

  LimitVerdicts v = within_limits({0, 1.3, -1.0, 0}, p);
  CHECK_FALSE(v.j2);
  CHECK(v.j1);
  CHECK(v.j3);
  CHECK(v.d4);
  CHECK(v.violation_count() == 1);

  // closed interval: the boundary itself is within limits
  CHECK(within_limits({0, 1.2, -1.0, 0}, p).all());
  CHECK(within_limits({-2.0, 0.0, -2.2, 0.4}, p).all());
  CHECK(within_limits({2.0, 1.2, -0.3, 0.0}, p).all());
}

TEST_CASE("chain params validation") {
  ChainParams p = default_chain();
  CHECK_NOTHROW(p.validate());
  ChainParams bad = p;
  bad.l2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.limits.j3 = {-0.3, -2.2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
