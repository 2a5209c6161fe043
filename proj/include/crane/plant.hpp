#pragma once

#include "crane/config.hpp"
#include "crane/rng.hpp"

namespace crane {

// Joint configuration of the 3-revolute + 1-prismatic chain.
// j1: base yaw, j2: boom pitch, j3: arm pitch relative to the boom (all
// radians); d4: telescope extension in meters.
struct JointVector {
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double d4 = 0.0;
};

// End-effector position in the world frame, base at the origin, meters.
struct EePosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double range() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }  // closed
};

struct JointLimits {
  Interval j1{-2.0, 2.0};
  Interval j2{0.0, 1.2};
  Interval j3{-2.2, -0.3};
  Interval d4{0.0, 0.4};
};

// Link dimensions and joint limits of the manipulator.
struct ChainParams {
  double h0 = 0.5;      // boom pivot height above the base
  double l2 = 0.8;      // boom length
  double l3 = 0.6;      // arm length
  double d4_max = 0.4;  // telescope stroke
  JointLimits limits;

  double reach_radius() const { return l2 + l3 + d4_max; }

  // Throws std::invalid_argument on non-positive lengths or empty limit
  // intervals.
  void validate() const;
};

ChainParams chain_params_from_config(const Config& cfg);

// Pivot triangle of a hydraulic cylinder driving a revolute joint: the joint
// angle follows from the cylinder length by the law of cosines,
//   theta(l) = offset + sign * arccos((a^2 + b^2 - l^2) / (2ab)).
// Construction enforces |a - b| < l_min <= l_max < a + b so the arccos
// argument stays strictly inside (-1, 1) over the whole stroke.
struct CylinderGeometry {
  CylinderGeometry(double a, double b, double offset, double sign,
                   double l_min, double l_max);

  double a;
  double b;
  double offset;
  double sign;  // +1: extension increases the angle, -1: decreases
  double l_min;
  double l_max;

  // Joint angles swept over the stroke, as a closed interval.
  Interval induced_joint_range() const;

  // True when the stroke sweeps every angle in `joint_interval`.
  bool covers(const Interval& joint_interval) const;
};

// Canonical linkages for joints 2 and 3. Distinct proportions and opposite
// sign give the two joints differently shaped length-angle curves.
CylinderGeometry default_joint2_cylinder();
CylinderGeometry default_joint3_cylinder();
CylinderGeometry cylinder_from_config(const Config& cfg, int joint);

// Per-joint joint-limit verdicts (closed intervals: the boundary counts as
// within limits).
struct LimitVerdicts {
  bool j1 = true;
  bool j2 = true;
  bool j3 = true;
  bool d4 = true;
  bool all() const { return j1 && j2 && j3 && d4; }
  int violation_count() const {
    return int(!j1) + int(!j2) + int(!j3) + int(!d4);
  }
};

// Analytic forward kinematics. Total on finite inputs; limits are not
// required. Throws std::domain_error on non-finite input.
EePosition forward_kinematics(const JointVector& q, const ChainParams& p);

// Cylinder length -> joint angle. Strictly monotone on [l_min, l_max].
// Throws std::out_of_range when l is outside the stroke.
double cylinder_to_joint(double cyl_len, const CylinderGeometry& g);

// Joint angle -> cylinder length; exact inverse of cylinder_to_joint.
// Throws std::domain_error when theta is outside the induced joint range.
double joint_to_cylinder(double joint_angle, const CylinderGeometry& g);

// Uniform sample over the limit box; draws components in order j1, j2, j3,
// d4 (one uniform each).
JointVector sample_random_config(Rng& rng, const ChainParams& p);

LimitVerdicts within_limits(const JointVector& q, const ChainParams& p);

}  // namespace crane
