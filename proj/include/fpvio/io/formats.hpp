#pragma once

#include <string>
#include <vector>

#include "fpvio/eval/ate.hpp"
#include "fpvio/fpsp/bitplane.hpp"
#include "fpvio/imu/types.hpp"
#include "fpvio/sim/scene.hpp"
#include "fpvio/vo/types.hpp"

namespace fpvio {
namespace io {

/// TUM trajectory rows: `t px py pz qx qy qz qw` (scalar-last on disk).
void write_tum(const std::string& path, const Trajectory& trajectory);
Trajectory read_tum(const std::string& path);

/// IMU stream rows: `t,wx,wy,wz,ax,ay,az` at >= 9 significant digits.
void write_imu_csv(const std::string& path, const std::vector<ImuSample>& samples);
std::vector<ImuSample> read_imu_csv(const std::string& path);

/// Scene JSON: {"landmarks": [[x,y,z],...], "segments": [[[..],[..]],...]}.
void write_scene_json(const std::string& path, const Scene& scene);
Scene read_scene_json(const std::string& path);

/// Corner-event rows `t,x,y`.
void write_events_csv(const std::string& path,
                      const std::vector<std::pair<double, CornerEvent>>& events);

/// PBM (P4) dump of one bitplane.
void write_pbm(const std::string& path, const Bitplane256& plane);
Bitplane256 read_pbm(const std::string& path);

/// VO output rows: `t,px,py,pz,qw,qx,qy,qz,c00..c55` (pose + row-major 6x6).
void write_vo_csv(const std::string& path,
                  const std::vector<std::pair<VoPose, PoseCovariance>>& rows);

}  // namespace io
}  // namespace fpvio
