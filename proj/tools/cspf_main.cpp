// Command-line front end: fixture synthesis, S-field calibration, per-vehicle
// risk assessment, behavior-response studies, and field rasterization.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cspf/analysis.hpp"
#include "cspf/calibration.hpp"
#include "cspf/csv.hpp"
#include "cspf/fixtures.hpp"
#include "cspf/highd.hpp"
#include "cspf/params_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<cspf::Dataset> load_datasets(const std::string& input_dir) {
  std::vector<std::string> track_files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 11 && name.ends_with("_tracks.csv")) {
      track_files.push_back(entry.path().string());
    }
  }
  std::sort(track_files.begin(), track_files.end());
  if (track_files.empty()) {
    throw std::runtime_error("no *_tracks.csv files under " + input_dir);
  }
  std::vector<cspf::Dataset> datasets;
  for (const auto& tracks : track_files) {
    std::string meta = tracks;
    meta.replace(meta.size() - std::string("tracks.csv").size(),
                 std::string::npos, "recordingMeta.csv");
    datasets.push_back(cspf::parse_recording(tracks, meta));
  }
  return datasets;
}

std::vector<double> parse_threshold_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(',', start);
    if (pos == std::string::npos) pos = text.size();
    out.push_back(std::stod(text.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::pair<double, double> parse_extent(const std::string& text) {
  const std::size_t pos = text.find('x');
  if (pos == std::string::npos) {
    throw std::runtime_error("extent must look like 100x20");
  }
  return {std::stod(text.substr(0, pos)), std::stod(text.substr(pos + 1))};
}

void write_bin_report(const std::string& path,
                      const std::vector<cspf::BinResult>& bins) {
  cspf::CsvTable table;
  table.header = {"velocity",   "n_samples",     "n_vehicles", "sufficient",
                  "n_iterations", "n_converged", "draws_per_iteration",
                  "gamma_x",    "std_gamma_x",   "beta_x",     "std_beta_x",
                  "gamma_y",    "std_gamma_y",   "beta_y",     "std_beta_y"};
  for (const auto& b : bins) {
    table.rows.push_back({std::to_string(b.velocity), std::to_string(b.n_samples),
                          std::to_string(b.n_vehicles),
                          b.sufficient ? "1" : "0", std::to_string(b.n_iterations),
                          std::to_string(b.n_converged),
                          std::to_string(b.draws_per_iteration),
                          cspf::format_double(b.gamma_x),
                          cspf::format_double(b.std_gamma_x),
                          cspf::format_double(b.beta_x),
                          cspf::format_double(b.std_beta_x),
                          cspf::format_double(b.gamma_y),
                          cspf::format_double(b.std_gamma_y),
                          cspf::format_double(b.beta_y),
                          cspf::format_double(b.std_beta_y)});
  }
  cspf::write_csv(path, table);
}

void write_timeline(const std::string& path, const cspf::RiskTimeline& timeline) {
  cspf::CsvTable table;
  table.header = {"frame",  "t",      "s_risk", "o_risk", "ttci",
                  "top_pair_id", "pair_s", "pair_o", "t_m", "d_m"};
  for (const auto& p : timeline.points) {
    const cspf::PairRisk* top = nullptr;
    for (const auto& pair : p.per_pair) {
      if (top == nullptr ||
          std::max(pair.r_o, pair.r_s) > std::max(top->r_o, top->r_s)) {
        top = &pair;
      }
    }
    std::vector<std::string> row{std::to_string(p.frame), cspf::format_double(p.t),
                                 cspf::format_double(p.aggregated_s),
                                 cspf::format_double(p.aggregated_o),
                                 cspf::format_double(p.ttci)};
    if (top != nullptr) {
      row.push_back(std::to_string(top->neighbor_id));
      row.push_back(cspf::format_double(top->r_s));
      row.push_back(cspf::format_double(top->r_o));
      row.push_back(cspf::format_double(top->t_m));
      row.push_back(cspf::format_double(top->d_m));
    } else {
      row.insert(row.end(), {"-1", "0", "0", "inf", "inf"});
    }
    table.rows.push_back(std::move(row));
  }
  cspf::write_csv(path, table);
}

json distribution_to_json(const cspf::ResponseDistribution& d,
                          const std::string& direction) {
  json out;
  out["threshold"] = d.threshold;
  out["direction"] = direction;
  out["n"] = d.values.size();
  out["excluded_lane_changers"] = d.excluded_lane_changers;
  double mean = 0.0;
  for (double v : d.values) mean += v;
  mean = d.values.empty() ? 0.0 : mean / static_cast<double>(d.values.size());
  double var = 0.0;
  for (double v : d.values) var += (v - mean) * (v - mean);
  var = d.values.size() > 1 ? var / static_cast<double>(d.values.size() - 1) : 0.0;
  out["mean"] = mean;
  out["stdev"] = std::sqrt(var);
  out["values"] = d.values;

  json hist;
  hist["bin_edges"] = json::array();
  hist["counts"] = json::array();
  if (!d.values.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(d.values.begin(), d.values.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    constexpr int kBins = 30;
    std::vector<int> counts(kBins, 0);
    for (double v : d.values) {
      int idx = static_cast<int>((v - lo) / (hi - lo) * kBins);
      idx = std::clamp(idx, 0, kBins - 1);
      ++counts[static_cast<std::size_t>(idx)];
    }
    for (int i = 0; i <= kBins; ++i) {
      hist["bin_edges"].push_back(lo + (hi - lo) * i / kBins);
    }
    hist["counts"] = counts;
  }
  out["histogram"] = hist;
  return out;
}

int run_synth(const std::string& spec_path, std::uint64_t seed,
              const std::string& out_dir, const std::string& name) {
  const cspf::FixtureSpec spec = cspf::FixtureSpec::from_file(spec_path);
  const cspf::Dataset ds = cspf::synthesize_fixture(spec, seed);
  fs::create_directories(out_dir);
  const std::string base = (fs::path(out_dir) / name).string();
  cspf::write_recording(ds, base + "_tracks.csv", base + "_recordingMeta.csv");
  std::cout << "wrote " << base << "_tracks.csv (" << ds.tracks.size()
            << " tracks)\n";
  return 0;
}

int run_calibrate(const std::string& input_dir, const std::string& out_path,
                  std::string report_path, const cspf::CalibrationOptions& options) {
  const auto datasets = load_datasets(input_dir);
  const cspf::CalibrationOutcome outcome = cspf::run_calibration(datasets, options);

  cspf::FieldParams params;
  params.s_field = outcome.params;
  cspf::save_params(params, out_path);

  if (report_path.empty()) {
    report_path = (fs::path(out_path).parent_path() /
                   (fs::path(out_path).stem().string() + "_bins.csv"))
                      .string();
  }
  write_bin_report(report_path, outcome.bins);

  int sufficient = 0;
  for (const auto& b : outcome.bins) sufficient += b.sufficient;
  std::cout << "calibrated from " << outcome.n_samples << " samples, "
            << outcome.bins.size() << " velocity bins (" << sufficient
            << " sufficient)\n"
            << "params -> " << out_path << "\nreport -> " << report_path << "\n";
  return 0;
}

int run_assess(const std::string& input_dir, const std::string& params_path,
               int vehicle, const std::string& out_path) {
  const auto datasets = load_datasets(input_dir);
  const cspf::FieldParams params = cspf::load_params(params_path);
  for (const auto& ds : datasets) {
    if (ds.tracks.count(vehicle)) {
      write_timeline(out_path,
                     cspf::risk_timeline(ds, vehicle, params.s_field, params.o_field));
      std::cout << "timeline -> " << out_path << "\n";
      return 0;
    }
  }
  throw std::runtime_error("vehicle " + std::to_string(vehicle) +
                           " not found in any recording");
}

int run_analyze(const std::string& input_dir, const std::string& params_path,
                const std::string& study, const std::string& thresholds_text,
                double lag, bool include_lane_changers, const std::string& out_path) {
  const auto datasets = load_datasets(input_dir);
  const cspf::FieldParams params = cspf::load_params(params_path);
  const std::vector<double> thresholds = parse_threshold_list(thresholds_text);
  const bool exclude = !include_lane_changers;

  json doc;
  doc["study"] = study;
  doc["lag_s"] = lag;
  doc["thresholds"] = thresholds;
  doc["distributions"] = json::array();

  using Dir = cspf::ResponseDirection;
  const cspf::RiskKind kind =
      study == "lateral-s" ? cspf::RiskKind::s : cspf::RiskKind::o;
  std::vector<std::pair<Dir, std::string>> directions;
  if (study == "braking") {
    directions = {{Dir::longitudinal, "longitudinal"}};
  } else if (study == "lateral-o" || study == "lateral-s") {
    directions = {{Dir::lateral_left, "lateral_left"},
                  {Dir::lateral_right, "lateral_right"}};
  } else {
    throw std::runtime_error("unknown study '" + study + "'");
  }

  for (const auto& [dir, dir_name] : directions) {
    std::vector<cspf::ResponseDistribution> merged(thresholds.size());
    for (const auto& ds : datasets) {
      const auto dists = cspf::behavior_response(ds, params.s_field, params.o_field,
                                                 kind, dir, thresholds, lag, exclude);
      for (std::size_t k = 0; k < dists.size(); ++k) {
        merged[k].threshold = dists[k].threshold;
        merged[k].lag = dists[k].lag;
        merged[k].excluded_lane_changers += dists[k].excluded_lane_changers;
        merged[k].values.insert(merged[k].values.end(), dists[k].values.begin(),
                                dists[k].values.end());
      }
    }
    for (const auto& d : merged) {
      doc["distributions"].push_back(distribution_to_json(d, dir_name));
    }
  }

  std::ofstream out(out_path);
  out << doc.dump(2) << "\n";
  std::cout << "study -> " << out_path << "\n";
  return 0;
}

int run_render(const std::string& field, double velocity, const std::string& other_text,
               const std::string& extent_text, double resolution,
               const std::string& params_path, double ego_length, double ego_width,
               const std::string& out_path) {
  cspf::FieldParams params;
  if (!params_path.empty()) params = cspf::load_params(params_path);

  cspf::VehicleState ego;
  ego.vehicle_id = 1;
  ego.vx = velocity;
  ego.length = ego_length;
  ego.width = ego_width;

  std::optional<cspf::VehicleState> other;
  if (!other_text.empty()) {
    const std::vector<double> v = parse_threshold_list(other_text);
    if (v.size() != 5) {
      throw std::runtime_error("--other expects x,y,vx,vy,w");
    }
    cspf::VehicleState o;
    o.vehicle_id = 2;
    o.x = v[0];
    o.y = v[1];
    o.vx = v[2];
    o.vy = v[3];
    o.width = v[4];
    o.length = 4.5;
    other = o;
  }

  const auto [ex, ey] = parse_extent(extent_text);
  const cspf::FieldGrid grid = cspf::rasterize_field(
      ego, field == "o" ? cspf::FieldKind::o : cspf::FieldKind::s, params, other, ex,
      ey, resolution);

  cspf::CsvTable table;
  table.header = {"x", "y", "risk"};
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      table.rows.push_back({cspf::format_double(grid.cell_x(ix)),
                            cspf::format_double(grid.cell_y(iy)),
                            cspf::format_double(grid.at(ix, iy))});
    }
  }
  cspf::write_csv(out_path, table);
  std::cout << "grid " << grid.nx << "x" << grid.ny << " -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite safety potential field toolkit"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic recording");
  std::string synth_spec, synth_out = ".", synth_name = "01";
  std::uint64_t synth_seed = 0;
  synth->add_option("--spec", synth_spec, "fixture spec JSON")->required();
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--name", synth_name, "recording name prefix");

  auto* calibrate = app.add_subcommand("calibrate", "Infer S-field parameters");
  std::string cal_input, cal_out = "params.json", cal_report;
  cspf::CalibrationOptions cal_options;
  calibrate->add_option("--input", cal_input, "directory of recordings")->required();
  calibrate->add_option("--out", cal_out, "output parameter file");
  calibrate->add_option("--report", cal_report, "per-bin report CSV");
  calibrate->add_option("--seed", cal_options.seed, "bootstrap seed");
  calibrate->add_option("--min-samples", cal_options.min_samples,
                        "minimum samples per bin");
  calibrate->add_option("--min-vehicles", cal_options.min_vehicles,
                        "minimum distinct vehicles per bin");
  calibrate->add_option("--window", cal_options.window, "perception window [m]");
  calibrate->add_option("--lane-span", cal_options.lane_span, "perception lane span");

  auto* assess = app.add_subcommand("assess", "Per-vehicle risk timeline");
  std::string as_input, as_params, as_out = "timeline.csv";
  int as_vehicle = 0;
  assess->add_option("--input", as_input, "directory of recordings")->required();
  assess->add_option("--params", as_params, "parameter file")->required();
  assess->add_option("--vehicle", as_vehicle, "vehicle id")->required();
  assess->add_option("--out", as_out, "output CSV");

  auto* analyze = app.add_subcommand("analyze", "Behavior-response study");
  std::string an_input, an_params, an_study, an_thresholds = "0.3,0.5,0.7";
  std::string an_out = "hist.json";
  double an_lag = 1.0;
  bool an_include = false;
  analyze->add_option("--input", an_input, "directory of recordings")->required();
  analyze->add_option("--params", an_params, "parameter file")->required();
  analyze->add_option("--study", an_study, "braking | lateral-o | lateral-s")
      ->required();
  analyze->add_option("--thresholds", an_thresholds, "ascending threshold list");
  analyze->add_option("--lag", an_lag, "response window [s]");
  analyze->add_flag("--include-lane-changers", an_include,
                    "keep lane-changing vehicles in the distributions");
  analyze->add_option("--out", an_out, "output JSON");

  auto* render = app.add_subcommand("render-field", "Rasterize a field to CSV");
  std::string rf_field = "s", rf_other, rf_extent = "100x20", rf_params;
  std::string rf_out = "grid.csv";
  double rf_velocity = 25.0, rf_res = 0.25, rf_len = 4.5, rf_width = 2.0;
  render->add_option("--field", rf_field, "s | o")->required();
  render->add_option("--velocity", rf_velocity, "ego speed [m/s]")->required();
  render->add_option("--other", rf_other, "influencing vehicle x,y,vx,vy,w");
  render->add_option("--extent", rf_extent, "grid extent WxH [m]");
  render->add_option("--res", rf_res, "cell size [m]");
  render->add_option("--params", rf_params, "parameter file (defaults built in)");
  render->add_option("--ego-length", rf_len, "ego length [m]");
  render->add_option("--ego-width", rf_width, "ego width [m]");
  render->add_option("--out", rf_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return run_synth(synth_spec, synth_seed, synth_out, synth_name);
    }
    if (calibrate->parsed()) {
      return run_calibrate(cal_input, cal_out, cal_report, cal_options);
    }
    if (assess->parsed()) {
      return run_assess(as_input, as_params, as_vehicle, as_out);
    }
    if (analyze->parsed()) {
      return run_analyze(an_input, an_params, an_study, an_thresholds, an_lag,
                         an_include, an_out);
    }
    if (render->parsed()) {
      return run_render(rf_field, rf_velocity, rf_other, rf_extent, rf_res, rf_params,
                        rf_len, rf_width, rf_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
