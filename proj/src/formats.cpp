#include "fpvio/io/formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fpvio/core/geometry.hpp"

namespace fpvio {
namespace io {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

[[noreturn]] void parse_fail(const std::string& path, int line) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": malformed row");
}

}  // namespace

void write_tum(const std::string& path, const Trajectory& trajectory) {
  std::ofstream out = open_out(path);
  char buf[256];
  for (const auto& [t, pose] : trajectory.samples) {
    std::snprintf(buf, sizeof(buf), "%.9f %.12g %.12g %.12g %.12g %.12g %.12g %.12g\n", t,
                  pose.p.x(), pose.p.y(), pose.p.z(), pose.q.x, pose.q.y, pose.q.z,
                  pose.q.w);
    out << buf;
  }
}

Trajectory read_tum(const std::string& path) {
  std::ifstream in = open_in(path);
  Trajectory out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double t, px, py, pz, qx, qy, qz, qw;
    if (!(ss >> t >> px >> py >> pz >> qx >> qy >> qz >> qw)) parse_fail(path, line_no);
    Pose pose;
    pose.p = Vec3(px, py, pz);
    pose.q = quat_normalize(Quat(qw, qx, qy, qz));
    out.samples.push_back({t, pose});
  }
  return out;
}

void write_imu_csv(const std::string& path, const std::vector<ImuSample>& samples) {
  std::ofstream out = open_out(path);
  char buf[256];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t,
                  s.omega_meas.x(), s.omega_meas.y(), s.omega_meas.z(), s.accel_meas.x(),
                  s.accel_meas.y(), s.accel_meas.z());
    out << buf;
  }
}

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<ImuSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    ImuSample s;
    double v[7];
    char c;
    std::istringstream ss(line);
    if (!(ss >> v[0])) parse_fail(path, line_no);
    for (int i = 1; i < 7; ++i)
      if (!(ss >> c >> v[i]) || c != ',') parse_fail(path, line_no);
    s.t = v[0];
    s.omega_meas = Vec3(v[1], v[2], v[3]);
    s.accel_meas = Vec3(v[4], v[5], v[6]);
    out.push_back(s);
  }
  return out;
}

void write_scene_json(const std::string& path, const Scene& scene) {
  nlohmann::json j;
  j["landmarks"] = nlohmann::json::array();
  for (const Vec3& lm : scene.landmarks)
    j["landmarks"].push_back({lm.x(), lm.y(), lm.z()});
  j["segments"] = nlohmann::json::array();
  for (const auto& [a, b] : scene.segments)
    j["segments"].push_back({{a.x(), a.y(), a.z()}, {b.x(), b.y(), b.z()}});
  open_out(path) << j.dump(1, '\t') << "\n";
}

Scene read_scene_json(const std::string& path) {
  nlohmann::json j;
  open_in(path) >> j;
  Scene out;
  for (const auto& lm : j.at("landmarks"))
    out.landmarks.push_back(Vec3(lm.at(0), lm.at(1), lm.at(2)));
  for (const auto& seg : j.at("segments"))
    out.segments.push_back({Vec3(seg.at(0).at(0), seg.at(0).at(1), seg.at(0).at(2)),
                            Vec3(seg.at(1).at(0), seg.at(1).at(1), seg.at(1).at(2))});
  return out;
}

void write_events_csv(const std::string& path,
                      const std::vector<std::pair<double, CornerEvent>>& events) {
  std::ofstream out = open_out(path);
  char buf[128];
  for (const auto& [t, e] : events) {
    std::snprintf(buf, sizeof(buf), "%.9f,%d,%d\n", t, e.x, e.y);
    out << buf;
  }
}

void write_pbm(const std::string& path, const Bitplane256& plane) {
  std::ofstream out = open_out(path);
  out << "P4\n256 256\n";
  for (int y = 0; y < 256; ++y) {
    for (int xb = 0; xb < 32; ++xb) {
      unsigned char byte = 0;
      for (int b = 0; b < 8; ++b)
        if (plane.get(xb * 8 + b, y)) byte |= 0x80 >> b;  // MSB first
      out.put(static_cast<char>(byte));
    }
  }
}

Bitplane256 read_pbm(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string magic;
  int w = 0, h = 0;
  in >> magic >> w >> h;
  if (magic != "P4" || w != 256 || h != 256)
    throw std::runtime_error(path + ": unsupported PBM header");
  in.get();  // single whitespace after the header
  Bitplane256 plane;
  for (int y = 0; y < 256; ++y) {
    for (int xb = 0; xb < 32; ++xb) {
      const int byte = in.get();
      if (byte < 0) throw std::runtime_error(path + ": truncated PBM");
      for (int b = 0; b < 8; ++b)
        if (byte & (0x80 >> b)) plane.set(xb * 8 + b, y);
    }
  }
  return plane;
}

void write_vo_csv(const std::string& path,
                  const std::vector<std::pair<VoPose, PoseCovariance>>& rows) {
  std::ofstream out = open_out(path);
  char buf[64];
  for (const auto& [pose, cov] : rows) {
    std::snprintf(buf, sizeof(buf), "%.9f", pose.t);
    out << buf;
    const double vals[7] = {pose.p.x(), pose.p.y(), pose.p.z(), pose.q.w,
                            pose.q.x,   pose.q.y,   pose.q.z};
    for (const double v : vals) {
      std::snprintf(buf, sizeof(buf), ",%.12g", v);
      out << buf;
    }
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) {
        std::snprintf(buf, sizeof(buf), ",%.12g", cov(r, c));
        out << buf;
      }
    out << "\n";
  }
}

}  // namespace io
}  // namespace fpvio
