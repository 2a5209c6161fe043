#include "crane/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace crane {
namespace {

constexpr double kSampleDt = 0.01;  // 100 Hz
constexpr double kSweepVelLo = 0.01;
constexpr double kSweepVelHi = 0.10;

const char* kActuatorHeader = "t,cyl_len,joint_angle,cyl_vel";
const char* kFkHeader = "j1,j2,j3,d4,x,y,z";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_field(const std::string& field, const std::string& file,
                   int line) {
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0')
    throw ParseError(file, line, "not a number: '" + field + "'");
  return v;
}

// Common CSV reading loop: header check plus fixed column count per row.
template <typename RowFn>
void read_rows(const std::filesystem::path& path, const char* header,
               std::size_t n_cols, RowFn&& row_fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw ParseError(path.string(), 1,
                     "expected header '" + std::string(header) + "', got '" +
                         line + "'");
  int lineno = 1;
  std::vector<double> values(n_cols);
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != n_cols)
      throw ParseError(path.string(), lineno,
                       "expected " + std::to_string(n_cols) +
                           " columns, got " + std::to_string(fields.size()));
    for (std::size_t i = 0; i < n_cols; ++i)
      values[i] = parse_field(fields[i], path.string(), lineno);
    row_fn(values);
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' endings everywhere
  if (!out) throw IoError("cannot write file: " + path.string());
  return out;
}

}  // namespace

namespace io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace io

NoiseModel noise_from_config(const Config& cfg) {
  return {cfg.get_double("noise.sigma_cyl"), cfg.get_double("noise.sigma_angle"),
          cfg.get_double("noise.sigma_pos")};
}

std::vector<ActuatorSample> generate_actuator_log(const CylinderGeometry& g,
                                                  int n_sweeps,
                                                  const NoiseModel& noise,
                                                  Rng& rng) {
  if (n_sweeps < 1)
    throw std::invalid_argument("generate_actuator_log: n_sweeps must be >= 1");
  std::vector<ActuatorSample> log;
  double l = g.l_min;
  double dir = 1.0;
  double t = 0.0;
  for (int sweep = 0; sweep < n_sweeps; ++sweep) {
    double vel = rng.uniform(kSweepVelLo, kSweepVelHi);
    double target = dir > 0 ? g.l_max : g.l_min;
    while (l != target) {
      l += dir * vel * kSampleDt;
      l = dir > 0 ? std::min(l, target) : std::max(l, target);
      ActuatorSample s;
      s.t = t;
      double measured = l + rng.normal(0.0, noise.sigma_cyl);
      s.cyl_len = std::clamp(measured, g.l_min, g.l_max);
      s.joint_angle = cylinder_to_joint(l, g) + rng.normal(0.0, noise.sigma_angle);
      s.cyl_vel = dir * vel;
      log.push_back(s);
      t += kSampleDt;
    }
    dir = -dir;
  }
  return log;
}

std::vector<FkSample> generate_fk_dataset(const ChainParams& p, int n,
                                          const NoiseModel& noise, Rng& rng) {
  if (n < 1)
    throw std::invalid_argument("generate_fk_dataset: n must be >= 1");
  std::vector<FkSample> data;
  data.reserve(n);
  for (int i = 0; i < n; ++i) {
    FkSample s;
    s.q = sample_random_config(rng, p);
    s.ee = forward_kinematics(s.q, p);
    s.ee.x += rng.normal(0.0, noise.sigma_pos);
    s.ee.y += rng.normal(0.0, noise.sigma_pos);
    s.ee.z += rng.normal(0.0, noise.sigma_pos);
    data.push_back(s);
  }
  return data;
}

void write_actuator_csv(const std::filesystem::path& path,
                        std::span<const ActuatorSample> samples) {
  auto out = open_for_write(path);
  out << kActuatorHeader << '\n';
  for (const auto& s : samples)
    out << io::format_double(s.t) << ',' << io::format_double(s.cyl_len) << ','
        << io::format_double(s.joint_angle) << ','
        << io::format_double(s.cyl_vel) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ActuatorSample> read_actuator_csv(
    const std::filesystem::path& path) {
  std::vector<ActuatorSample> samples;
  read_rows(path, kActuatorHeader, 4, [&](const std::vector<double>& v) {
    samples.push_back({v[0], v[1], v[2], v[3]});
  });
  return samples;
}

void write_fk_csv(const std::filesystem::path& path,
                  std::span<const FkSample> samples) {
  auto out = open_for_write(path);
  out << kFkHeader << '\n';
  for (const auto& s : samples)
    out << io::format_double(s.q.j1) << ',' << io::format_double(s.q.j2) << ','
        << io::format_double(s.q.j3) << ',' << io::format_double(s.q.d4) << ','
        << io::format_double(s.ee.x) << ',' << io::format_double(s.ee.y) << ','
        << io::format_double(s.ee.z) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<FkSample> read_fk_csv(const std::filesystem::path& path) {
  std::vector<FkSample> samples;
  read_rows(path, kFkHeader, 7, [&](const std::vector<double>& v) {
    samples.push_back({{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
  });
  return samples;
}

}  // namespace crane
