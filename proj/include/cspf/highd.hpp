#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cspf/types.hpp"

namespace cspf {

// Input file does not match the expected schema (e.g. a missing column).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input file is schema-valid but contains inconsistent data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Recording-level metadata. Lane marker and boundary positions are stored in
// the source frame per carriageway; canonical_lanes() maps them into the
// canonical coordinates of tracks driving that direction. The first and last
// lane line of a carriageway are its road boundaries; interior lines are
// lane markers.
struct RecordingMeta {
  int recording_id = 0;
  double frame_rate = 25.0;  // Hz
  std::vector<double> upper_lane_ys;  // leftward carriageway, source frame
  std::vector<double> lower_lane_ys;  // rightward carriageway, source frame
  double segment_length = 420.0;  // m

  LaneGeometry canonical_lanes(TravelDirection direction) const;
};

// A parsed recording: per-vehicle tracks in canonical coordinates, plus the
// original driving direction needed to write the source schema back out.
struct Dataset {
  RecordingMeta meta;
  std::map<int, std::vector<VehicleState>> tracks;
  std::map<int, bool> lane_changes;  // true iff lane_id changes within track
  std::map<int, TravelDirection> source_direction;

  // All states of one frame, ordered by vehicle id.
  std::vector<VehicleState> frame_states(int frame) const;
  std::vector<int> frame_range() const;  // sorted distinct frame indices
};

// Parses a tracks CSV (columns: frame, id, x, y, width, height, xVelocity,
// yVelocity, xAcceleration, yAcceleration, laneId; x/y are the box's
// upper-left corner, width the longitudinal extent) plus a recording-meta
// CSV (columns: id, frameRate, upperLaneMarkings, lowerLaneMarkings and
// optional segmentLength; lane markings are semicolon-separated y values).
// Corner coordinates become centers, both carriageways are normalized to the
// canonical frame. Throws SchemaError for missing columns and DataError for
// non-monotone frames.
Dataset parse_recording(const std::string& tracks_path, const std::string& meta_path);

// Writes a Dataset back to the source schema (inverse of parse_recording).
void write_recording(const Dataset& dataset, const std::string& tracks_path,
                     const std::string& meta_path);

}  // namespace cspf
