#include "crane/plant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crane {
namespace {

bool finite(const JointVector& q) {
  return std::isfinite(q.j1) && std::isfinite(q.j2) && std::isfinite(q.j3) &&
         std::isfinite(q.d4);
}

// Opening angle of the pivot triangle at cylinder length l, in (0, pi).
double triangle_angle(double l, const CylinderGeometry& g) {
  return std::acos((g.a * g.a + g.b * g.b - l * l) / (2.0 * g.a * g.b));
}

}  // namespace

void ChainParams::validate() const {
  if (!(h0 > 0.0 && l2 > 0.0 && l3 > 0.0 && d4_max > 0.0))
    throw std::invalid_argument("chain params: lengths must be positive");
  for (const Interval* iv : {&limits.j1, &limits.j2, &limits.j3, &limits.d4})
    if (!(iv->lo < iv->hi))
      throw std::invalid_argument("chain params: empty joint limit interval");
}

ChainParams chain_params_from_config(const Config& cfg) {
  ChainParams p;
  p.h0 = cfg.get_double("plant.h0");
  p.l2 = cfg.get_double("plant.l2");
  p.l3 = cfg.get_double("plant.l3");
  p.d4_max = cfg.get_double("plant.d4max");
  p.limits.j1 = {cfg.get_double("plant.j1_lo"), cfg.get_double("plant.j1_hi")};
  p.limits.j2 = {cfg.get_double("plant.j2_lo"), cfg.get_double("plant.j2_hi")};
  p.limits.j3 = {cfg.get_double("plant.j3_lo"), cfg.get_double("plant.j3_hi")};
  p.limits.d4 = {cfg.get_double("plant.d4_lo"), p.d4_max};
  p.validate();
  return p;
}

CylinderGeometry::CylinderGeometry(double a_, double b_, double offset_,
                                   double sign_, double l_min_, double l_max_)
    : a(a_), b(b_), offset(offset_), sign(sign_), l_min(l_min_), l_max(l_max_) {
  if (!(a > 0.0 && b > 0.0))
    throw std::invalid_argument("cylinder geometry: anchors must be positive");
  if (sign != 1.0 && sign != -1.0)
    throw std::invalid_argument("cylinder geometry: sign must be +1 or -1");
  if (!(std::abs(a - b) < l_min && l_min <= l_max && l_max < a + b))
    throw std::invalid_argument(
        "cylinder geometry: stroke violates the triangle inequality "
        "(need |a-b| < l_min <= l_max < a+b)");
}

Interval CylinderGeometry::induced_joint_range() const {
  double at_min = offset + sign * triangle_angle(l_min, *this);
  double at_max = offset + sign * triangle_angle(l_max, *this);
  return sign > 0 ? Interval{at_min, at_max} : Interval{at_max, at_min};
}

bool CylinderGeometry::covers(const Interval& joint_interval) const {
  Interval r = induced_joint_range();
  return r.lo <= joint_interval.lo && joint_interval.hi <= r.hi;
}

CylinderGeometry default_joint2_cylinder() {
  return CylinderGeometry(0.30, 0.35, -1.0, 1.0, 0.28, 0.60);
}

CylinderGeometry default_joint3_cylinder() {
  return CylinderGeometry(0.25, 0.30, 0.2, -1.0, 0.10, 0.53);
}

CylinderGeometry cylinder_from_config(const Config& cfg, int joint) {
  if (joint != 2 && joint != 3)
    throw std::invalid_argument("cylinder_from_config: joint must be 2 or 3");
  std::string ns = joint == 2 ? "cyl2." : "cyl3.";
  return CylinderGeometry(
      cfg.get_double(ns + "a"), cfg.get_double(ns + "b"),
      cfg.get_double(ns + "offset"), cfg.get_double(ns + "sign"),
      cfg.get_double(ns + "l_min"), cfg.get_double(ns + "l_max"));
}

EePosition forward_kinematics(const JointVector& q, const ChainParams& p) {
  if (!finite(q))
    throw std::domain_error("forward_kinematics: non-finite joint vector");
  double r = p.l2 * std::cos(q.j2) + (p.l3 + q.d4) * std::cos(q.j2 + q.j3);
  double z = p.h0 + p.l2 * std::sin(q.j2) + (p.l3 + q.d4) * std::sin(q.j2 + q.j3);
  return {r * std::cos(q.j1), r * std::sin(q.j1), z};
}

double cylinder_to_joint(double cyl_len, const CylinderGeometry& g) {
  // Tiny slack so round-tripping a stroke endpoint does not trip the gate.
  constexpr double kEps = 1e-12;
  if (!(cyl_len >= g.l_min - kEps && cyl_len <= g.l_max + kEps))
    throw std::out_of_range("cylinder_to_joint: length " +
                            std::to_string(cyl_len) + " outside stroke [" +
                            std::to_string(g.l_min) + ", " +
                            std::to_string(g.l_max) + "]");
  return g.offset + g.sign * triangle_angle(cyl_len, g);
}

double joint_to_cylinder(double joint_angle, const CylinderGeometry& g) {
  // Tiny slack so round-tripping an endpoint does not trip the range check.
  constexpr double kEps = 1e-12;
  Interval r = g.induced_joint_range();
  if (!(joint_angle >= r.lo - kEps && joint_angle <= r.hi + kEps))
    throw std::domain_error("joint_to_cylinder: angle " +
                            std::to_string(joint_angle) +
                            " outside induced joint range [" +
                            std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                            "]");
  double phi = g.sign * (joint_angle - g.offset);
  return std::sqrt(g.a * g.a + g.b * g.b - 2.0 * g.a * g.b * std::cos(phi));
}

JointVector sample_random_config(Rng& rng, const ChainParams& p) {
  JointVector q;
  q.j1 = rng.uniform(p.limits.j1.lo, p.limits.j1.hi);
  q.j2 = rng.uniform(p.limits.j2.lo, p.limits.j2.hi);
  q.j3 = rng.uniform(p.limits.j3.lo, p.limits.j3.hi);
  q.d4 = rng.uniform(p.limits.d4.lo, p.limits.d4.hi);
  return q;
}

LimitVerdicts within_limits(const JointVector& q, const ChainParams& p) {
  return {p.limits.j1.contains(q.j1), p.limits.j2.contains(q.j2),
          p.limits.j3.contains(q.j3), p.limits.d4.contains(q.d4)};
}

}  // namespace crane
