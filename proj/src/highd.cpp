#include "cspf/highd.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cspf/csv.hpp"
#include "cspf/trajectory.hpp"

namespace cspf {

LaneGeometry RecordingMeta::canonical_lanes(TravelDirection direction) const {
  const auto& ys =
      direction == TravelDirection::leftward ? upper_lane_ys : lower_lane_ys;
  std::vector<double> lines = ys;
  if (direction == TravelDirection::leftward) {
    for (double& y : lines) y = -y;
  }
  std::sort(lines.begin(), lines.end());
  LaneGeometry geo;
  if (lines.size() >= 2) {
    geo.boundary_ys = {lines.front(), lines.back()};
    geo.marker_ys.assign(lines.begin() + 1, lines.end() - 1);
  } else {
    geo.marker_ys = lines;
  }
  return geo;
}

std::vector<VehicleState> Dataset::frame_states(int frame) const {
  std::vector<VehicleState> out;
  for (const auto& [id, track] : tracks) {
    const auto it = std::lower_bound(
        track.begin(), track.end(), frame,
        [](const VehicleState& s, int f) { return s.frame < f; });
    if (it != track.end() && it->frame == frame) out.push_back(*it);
  }
  return out;
}

std::vector<int> Dataset::frame_range() const {
  std::set<int> frames;
  for (const auto& [id, track] : tracks) {
    for (const auto& s : track) frames.insert(s.frame);
  }
  return {frames.begin(), frames.end()};
}

namespace {

double parse_field(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    throw DataError("bad numeric value '" + s + "' in " + context);
  }
}

std::vector<double> parse_semicolon_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t pos = s.find(';', start);
    if (pos == std::string::npos) pos = s.size();
    const std::string item = s.substr(start, pos - start);
    if (!item.empty()) out.push_back(parse_field(item, "lane markings"));
    start = pos + 1;
  }
  return out;
}

std::string join_semicolon(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

RecordingMeta parse_meta(const std::string& meta_path) {
  const CsvTable table = read_csv(meta_path);
  if (table.rows.empty()) {
    throw SchemaError("recording meta has no data row: " + meta_path);
  }
  std::size_t id_col, rate_col, upper_col, lower_col;
  try {
    id_col = table.column("id");
    rate_col = table.column("frameRate");
    upper_col = table.column("upperLaneMarkings");
    lower_col = table.column("lowerLaneMarkings");
  } catch (const std::runtime_error& e) {
    throw SchemaError(e.what());
  }
  const auto& row = table.rows.front();
  RecordingMeta meta;
  meta.recording_id = static_cast<int>(parse_field(row[id_col], "meta id"));
  meta.frame_rate = parse_field(row[rate_col], "meta frameRate");
  if (!(meta.frame_rate > 0.0)) throw DataError("frameRate must be positive");
  meta.upper_lane_ys = parse_semicolon_list(row[upper_col]);
  meta.lower_lane_ys = parse_semicolon_list(row[lower_col]);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "segmentLength" && i < row.size()) {
      meta.segment_length = parse_field(row[i], "meta segmentLength");
    }
  }
  return meta;
}

constexpr const char* kTrackColumns[] = {
    "frame", "id",        "x",         "y",         "width",        "height",
    "xVelocity", "yVelocity", "xAcceleration", "yAcceleration", "laneId"};

}  // namespace

Dataset parse_recording(const std::string& tracks_path, const std::string& meta_path) {
  Dataset ds;
  ds.meta = parse_meta(meta_path);

  const CsvTable table = read_csv(tracks_path);
  std::map<std::string, std::size_t> col;
  for (const char* name : kTrackColumns) {
    try {
      col[name] = table.column(name);
    } catch (const std::runtime_error& e) {
      throw SchemaError(e.what());
    }
  }

  // Source-frame states grouped per vehicle, in file order.
  std::map<int, std::vector<VehicleState>> raw;
  for (const auto& row : table.rows) {
    VehicleState s;
    s.frame = static_cast<int>(parse_field(row[col["frame"]], "frame"));
    s.vehicle_id = static_cast<int>(parse_field(row[col["id"]], "id"));
    s.length = parse_field(row[col["width"]], "width");
    s.width = parse_field(row[col["height"]], "height");
    // highD stores the box's upper-left corner.
    s.x = parse_field(row[col["x"]], "x") + 0.5 * s.length;
    s.y = parse_field(row[col["y"]], "y") + 0.5 * s.width;
    s.vx = parse_field(row[col["xVelocity"]], "xVelocity");
    s.vy = parse_field(row[col["yVelocity"]], "yVelocity");
    s.ax = parse_field(row[col["xAcceleration"]], "xAcceleration");
    s.ay = parse_field(row[col["yAcceleration"]], "yAcceleration");
    s.lane_id = static_cast<int>(parse_field(row[col["laneId"]], "laneId"));
    s.t = s.frame / ds.meta.frame_rate;
    if (!(s.length > 0.0) || !(s.width > 0.0)) {
      throw DataError("non-positive vehicle dimensions for id " +
                      std::to_string(s.vehicle_id));
    }
    raw[s.vehicle_id].push_back(s);
  }

  for (auto& [id, track] : raw) {
    for (std::size_t i = 1; i < track.size(); ++i) {
      if (track[i].frame <= track[i - 1].frame) {
        throw DataError("non-monotone frames for vehicle " + std::to_string(id));
      }
    }
    double mean_vx = 0.0;
    for (const auto& s : track) mean_vx += s.vx;
    mean_vx /= static_cast<double>(track.size());
    const TravelDirection dir =
        mean_vx < 0.0 ? TravelDirection::leftward : TravelDirection::rightward;
    ds.source_direction[id] = dir;
    ds.tracks[id] = normalize_track(track, dir);
    bool changed = false;
    for (std::size_t i = 1; i < track.size(); ++i) {
      changed = changed || track[i].lane_id != track[i - 1].lane_id;
    }
    ds.lane_changes[id] = changed;
  }
  return ds;
}

void write_recording(const Dataset& dataset, const std::string& tracks_path,
                     const std::string& meta_path) {
  CsvTable meta;
  meta.header = {"id", "frameRate", "upperLaneMarkings", "lowerLaneMarkings",
                 "segmentLength"};
  meta.rows.push_back({std::to_string(dataset.meta.recording_id),
                       format_double(dataset.meta.frame_rate),
                       join_semicolon(dataset.meta.upper_lane_ys),
                       join_semicolon(dataset.meta.lower_lane_ys),
                       format_double(dataset.meta.segment_length)});
  write_csv(meta_path, meta);

  CsvTable tracks;
  tracks.header.assign(std::begin(kTrackColumns), std::end(kTrackColumns));
  for (const auto& [id, track] : dataset.tracks) {
    const TravelDirection dir = dataset.source_direction.count(id)
                                    ? dataset.source_direction.at(id)
                                    : TravelDirection::rightward;
    const double sign = dir == TravelDirection::leftward ? -1.0 : 1.0;
    for (const auto& s : track) {
      const double cx = sign * s.x;
      const double cy = sign * s.y;
      tracks.rows.push_back({std::to_string(s.frame), std::to_string(s.vehicle_id),
                             format_double(cx - 0.5 * s.length),
                             format_double(cy - 0.5 * s.width),
                             format_double(s.length), format_double(s.width),
                             format_double(sign * s.vx), format_double(sign * s.vy),
                             format_double(sign * s.ax), format_double(sign * s.ay),
                             std::to_string(s.lane_id)});
    }
  }
  write_csv(tracks_path, tracks);
}

}  // namespace cspf
