#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "crane/plant.hpp"
#include "crane/rng.hpp"

namespace crane {

// One tick of an emulated manual-operation log: measured cylinder length and
// joint angle at 100 Hz, plus the commanded rod velocity (signed, + extend).
struct ActuatorSample {
  double t = 0.0;            // seconds
  double cyl_len = 0.0;      // meters
  double joint_angle = 0.0;  // radians
  double cyl_vel = 0.0;      // meters / second
};

// One random-configuration record: joints set, end-effector measured.
struct FkSample {
  JointVector q;
  EePosition ee;
};

// Gaussian measurement noise. Defaults follow the sensor suite: a draw-wire
// transducer on the cylinders, an angle pickup on the joints, and
// motion-capture jitter on the end-effector.
struct NoiseModel {
  double sigma_cyl = 2e-7;     // meters
  double sigma_angle = 0.004;  // radians
  double sigma_pos = 0.002;    // meters

  static NoiseModel zero() { return {0.0, 0.0, 0.0}; }
};

NoiseModel noise_from_config(const Config& cfg);

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Full-stroke sweeps alternating extend/retract, one constant velocity per
// sweep drawn uniformly from [0.01, 0.10] m/s, sampled at 100 Hz. Per sample
// the draws are: sweep velocity once per sweep, then cylinder noise and angle
// noise per tick.
std::vector<ActuatorSample> generate_actuator_log(const CylinderGeometry& g,
                                                  int n_sweeps,
                                                  const NoiseModel& noise,
                                                  Rng& rng);

// n independent configurations uniform over the limit box, end-effector from
// the analytic chain plus per-axis position noise (x, y, z draw order).
std::vector<FkSample> generate_fk_dataset(const ChainParams& p, int n,
                                          const NoiseModel& noise, Rng& rng);

// CSV persistence. Headers are fixed; floats are printed with 17 significant
// digits so read(write(x)) reproduces every value exactly.
void write_actuator_csv(const std::filesystem::path& path,
                        std::span<const ActuatorSample> samples);
std::vector<ActuatorSample> read_actuator_csv(const std::filesystem::path& path);

void write_fk_csv(const std::filesystem::path& path,
                  std::span<const FkSample> samples);
std::vector<FkSample> read_fk_csv(const std::filesystem::path& path);

namespace io {
// Shortest representation that parses back to the identical double.
std::string format_double(double v);
}  // namespace io

}  // namespace crane
