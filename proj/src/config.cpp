#include "gcloam/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gcloam/errors.hpp"

namespace gcloam {

SensorConfig RunConfig::sensorConfig() const {
  SensorConfig cfg;
  if (sensor_model == "hdl64") {
    cfg = SensorConfig::hdl64();
  } else if (sensor_model.rfind("uniform:", 0) == 0) {
    int channels = 0;
    double lo = 0.0, hi = 0.0;
    char c1, c2, c3;
    std::istringstream is(sensor_model.substr(7));
    is >> c1 >> channels >> c2 >> lo >> c3 >> hi;
    if (!is || channels < 1) throw ConfigError("bad sensor model: " + sensor_model);
    cfg = SensorConfig::uniform(channels, lo, hi);
  } else if (sensor_model.rfind("table:", 0) == 0) {
    std::istringstream is(sensor_model.substr(6));
    std::string field;
    while (std::getline(is, field, ',')) {
      double elevation;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), elevation);
      if (res.ec != std::errc()) throw ConfigError("bad sensor table entry: " + field);
      cfg.beam_elevations_deg.push_back(elevation);
    }
    if (cfg.beam_elevations_deg.empty()) throw ConfigError("empty sensor table");
  } else {
    throw ConfigError("unknown sensor model: " + sensor_model);
  }
  cfg.elevation_tolerance_deg = elevation_tolerance_deg;
  cfg.min_range = min_range;
  cfg.max_range = max_range;
  return cfg;
}

SelectionParams RunConfig::selectionParams() const {
  SelectionParams p = features;
  if (conspicuous_features) {
    // Conventional extreme-first selection: no skipping at either end.
    p.skip_sharpest = 0;
    p.skip_flattest = 0;
  }
  return p;
}

OdometryParams RunConfig::odometryParams() const {
  OdometryParams p;
  p.matching.sigma = sigma_odometry;
  p.matching.vote_threshold = eta;
  p.matching.filter_fraction = filter_fraction;
  p.matching.max_match_distance = max_match_dist_odometry;
  p.matching.sectors = odometry_sectors;
  p.weights.top_fraction = lambda_frac;
  p.weights.scale = alpha;
  p.outer_passes = outer_passes;
  p.solver.max_iterations = odometry_lm_iterations;
  p.cross_channel_window = cross_channel_window;
  p.anchor_search_cap = anchor_search_cap;
  p.use_graph_filter = graph_filter;
  p.use_weighting = weighting;
  p.threads = threads;
  return p;
}

MappingParams RunConfig::mappingParams() const {
  MappingParams p;
  p.matching.sigma = sigma_mapping;
  p.matching.vote_threshold = eta;
  p.matching.filter_fraction = filter_fraction;
  p.matching.max_match_distance = max_match_dist_mapping;
  p.sector_target = mapping_sector_target;
  p.neighborhood_size = neighborhood_size;
  p.max_neighbor_distance = max_neighbor_dist;
  p.edge_voxel = edge_voxel;
  p.planar_voxel = planar_voxel;
  p.active_radius = active_radius;
  p.solver.max_iterations = mapping_lm_iterations;
  p.use_graph_filter = graph_filter;
  p.threads = threads;
  return p;
}

void RunConfig::validate() const {
  const auto fraction = [](double v, const char* name) {
    if (v < 0.0 || v > 1.0) throw ConfigError(std::string(name) + " must be in [0,1]");
  };
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
  };

  fraction(filter_fraction, "matching.x");
  fraction(lambda_frac, "odometry.lambda_frac");
  if (eta <= 0.0 || eta > 1.0) throw ConfigError("matching.eta must be in (0,1]");

  positive(min_range, "sensor.min_range");
  positive(max_range, "sensor.max_range");
  positive(features.sigma_disjoint, "features.sigma_disjoint");
  positive(sigma_odometry, "matching.sigma_odometry");
  positive(sigma_mapping, "matching.sigma_mapping");
  positive(max_match_dist_odometry, "matching.max_match_dist_odometry");
  positive(max_match_dist_mapping, "matching.max_match_dist_mapping");
  positive(alpha, "odometry.alpha");
  positive(anchor_search_cap, "odometry.anchor_search_cap");
  positive(edge_voxel, "mapping.edge_voxel");
  positive(planar_voxel, "mapping.planar_voxel");
  positive(active_radius, "mapping.active_radius");
  positive(max_neighbor_dist, "mapping.max_neighbor_dist");
  positive(frame_period, "run.frame_period");

  if (max_range <= min_range) throw ConfigError("sensor.max_range must exceed min_range");
  if (features.subregions < 1) throw ConfigError("features.subregions must be >= 1");
  if (features.half_window < 1) throw ConfigError("features.half_window must be >= 1");
  if (odometry_sectors < 1) throw ConfigError("matching.odometry_sectors must be >= 1");
  if (mapping_sector_target < 1) throw ConfigError("matching.mapping_sector_target must be >= 1");
  if (neighborhood_size < 2) throw ConfigError("mapping.neighborhood_size must be >= 2");
  if (threads < 1) throw ConfigError("run.threads must be >= 1");
}

namespace {

bool parseBool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}

double parseDouble(const std::string& v, const std::string& key) {
  double out;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("bad number for " + key + ": " + v);
  }
  return out;
}

int parseInt(const std::string& v, const std::string& key) {
  int out;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("bad integer for " + key + ": " + v);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.dataset_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.dataset_dir = v; }},
      {"run.output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"run.live_trajectory", [](RunConfig& c, const std::string&, const std::string& v) { c.live_trajectory = v; }},
      {"run.max_frames", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_frames = parseInt(v, k); }},
      {"run.threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = parseInt(v, k); }},
      {"run.frame_period", [](RunConfig& c, const std::string& k, const std::string& v) { c.frame_period = parseDouble(v, k); }},
      {"run.graph_filter", [](RunConfig& c, const std::string& k, const std::string& v) { c.graph_filter = parseBool(v, k); }},
      {"run.weighting", [](RunConfig& c, const std::string& k, const std::string& v) { c.weighting = parseBool(v, k); }},
      {"run.conspicuous_features", [](RunConfig& c, const std::string& k, const std::string& v) { c.conspicuous_features = parseBool(v, k); }},

      {"sensor.model", [](RunConfig& c, const std::string&, const std::string& v) { c.sensor_model = v; }},
      {"sensor.elevation_tolerance_deg", [](RunConfig& c, const std::string& k, const std::string& v) { c.elevation_tolerance_deg = parseDouble(v, k); }},
      {"sensor.min_range", [](RunConfig& c, const std::string& k, const std::string& v) { c.min_range = parseDouble(v, k); }},
      {"sensor.max_range", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_range = parseDouble(v, k); }},

      {"features.sigma_disjoint", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.sigma_disjoint = parseDouble(v, k); }},
      {"features.half_window", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.half_window = parseInt(v, k); }},
      {"features.r_t", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.smoothness_threshold = parseDouble(v, k); }},
      {"features.subregions", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.subregions = parseInt(v, k); }},
      {"features.m", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.edges_per_subregion = parseInt(v, k); }},
      {"features.n", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.planars_per_subregion = parseInt(v, k); }},
      {"features.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.skip_sharpest = parseInt(v, k); }},
      {"features.l", [](RunConfig& c, const std::string& k, const std::string& v) { c.features.skip_flattest = parseInt(v, k); }},

      {"matching.eta", [](RunConfig& c, const std::string& k, const std::string& v) { c.eta = parseDouble(v, k); }},
      {"matching.x", [](RunConfig& c, const std::string& k, const std::string& v) { c.filter_fraction = parseDouble(v, k); }},
      {"matching.sigma_odometry", [](RunConfig& c, const std::string& k, const std::string& v) { c.sigma_odometry = parseDouble(v, k); }},
      {"matching.sigma_mapping", [](RunConfig& c, const std::string& k, const std::string& v) { c.sigma_mapping = parseDouble(v, k); }},
      {"matching.max_match_dist_odometry", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_match_dist_odometry = parseDouble(v, k); }},
      {"matching.max_match_dist_mapping", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_match_dist_mapping = parseDouble(v, k); }},
      {"matching.odometry_sectors", [](RunConfig& c, const std::string& k, const std::string& v) { c.odometry_sectors = parseInt(v, k); }},
      {"matching.mapping_sector_target", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_sector_target = parseInt(v, k); }},

      {"odometry.lambda_frac", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda_frac = parseDouble(v, k); }},
      {"odometry.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.alpha = parseDouble(v, k); }},
      {"odometry.outer_passes", [](RunConfig& c, const std::string& k, const std::string& v) { c.outer_passes = parseInt(v, k); }},
      {"odometry.max_lm_iterations", [](RunConfig& c, const std::string& k, const std::string& v) { c.odometry_lm_iterations = parseInt(v, k); }},
      {"odometry.cross_channel_window", [](RunConfig& c, const std::string& k, const std::string& v) { c.cross_channel_window = parseInt(v, k); }},
      {"odometry.anchor_search_cap", [](RunConfig& c, const std::string& k, const std::string& v) { c.anchor_search_cap = parseDouble(v, k); }},

      {"mapping.enabled", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_enabled = parseBool(v, k); }},
      {"mapping.edge_voxel", [](RunConfig& c, const std::string& k, const std::string& v) { c.edge_voxel = parseDouble(v, k); }},
      {"mapping.planar_voxel", [](RunConfig& c, const std::string& k, const std::string& v) { c.planar_voxel = parseDouble(v, k); }},
      {"mapping.active_radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.active_radius = parseDouble(v, k); }},
      {"mapping.max_neighbor_dist", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_neighbor_dist = parseDouble(v, k); }},
      {"mapping.max_lm_iterations", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_lm_iterations = parseInt(v, k); }},
      {"mapping.neighborhood_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.neighborhood_size = parseInt(v, k); }},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

void setKey(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key: " + key);
  it->second(cfg, key, value);
}

}  // namespace

RunConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  RunConfig cfg;
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at " + path + ":" + std::to_string(line_number));
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    setKey(cfg, section.empty() ? key : section + "." + key, value);
  }
  return cfg;
}

void applyOverride(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: " + assignment);
  setKey(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string dumpConfig(const RunConfig& cfg) {
  std::ostringstream os;
  os << "run.dataset_dir = " << cfg.dataset_dir << '\n'
     << "run.output_dir = " << cfg.output_dir << '\n'
     << "run.live_trajectory = " << cfg.live_trajectory << '\n'
     << "run.max_frames = " << cfg.max_frames << '\n'
     << "run.threads = " << cfg.threads << '\n'
     << "run.frame_period = " << cfg.frame_period << '\n'
     << "run.graph_filter = " << (cfg.graph_filter ? "true" : "false") << '\n'
     << "run.weighting = " << (cfg.weighting ? "true" : "false") << '\n'
     << "run.conspicuous_features = " << (cfg.conspicuous_features ? "true" : "false") << '\n'
     << "sensor.model = " << cfg.sensor_model << '\n'
     << "sensor.elevation_tolerance_deg = " << cfg.elevation_tolerance_deg << '\n'
     << "sensor.min_range = " << cfg.min_range << '\n'
     << "sensor.max_range = " << cfg.max_range << '\n'
     << "features.sigma_disjoint = " << cfg.features.sigma_disjoint << '\n'
     << "features.half_window = " << cfg.features.half_window << '\n'
     << "features.r_t = " << cfg.features.smoothness_threshold << '\n'
     << "features.subregions = " << cfg.features.subregions << '\n'
     << "features.m = " << cfg.features.edges_per_subregion << '\n'
     << "features.n = " << cfg.features.planars_per_subregion << '\n'
     << "features.k = " << cfg.features.skip_sharpest << '\n'
     << "features.l = " << cfg.features.skip_flattest << '\n'
     << "matching.eta = " << cfg.eta << '\n'
     << "matching.x = " << cfg.filter_fraction << '\n'
     << "matching.sigma_odometry = " << cfg.sigma_odometry << '\n'
     << "matching.sigma_mapping = " << cfg.sigma_mapping << '\n'
     << "matching.max_match_dist_odometry = " << cfg.max_match_dist_odometry << '\n'
     << "matching.max_match_dist_mapping = " << cfg.max_match_dist_mapping << '\n'
     << "matching.odometry_sectors = " << cfg.odometry_sectors << '\n'
     << "matching.mapping_sector_target = " << cfg.mapping_sector_target << '\n'
     << "odometry.lambda_frac = " << cfg.lambda_frac << '\n'
     << "odometry.alpha = " << cfg.alpha << '\n'
     << "odometry.outer_passes = " << cfg.outer_passes << '\n'
     << "odometry.max_lm_iterations = " << cfg.odometry_lm_iterations << '\n'
     << "odometry.cross_channel_window = " << cfg.cross_channel_window << '\n'
     << "odometry.anchor_search_cap = " << cfg.anchor_search_cap << '\n'
     << "mapping.enabled = " << (cfg.mapping_enabled ? "true" : "false") << '\n'
     << "mapping.edge_voxel = " << cfg.edge_voxel << '\n'
     << "mapping.planar_voxel = " << cfg.planar_voxel << '\n'
     << "mapping.active_radius = " << cfg.active_radius << '\n'
     << "mapping.max_neighbor_dist = " << cfg.max_neighbor_dist << '\n'
     << "mapping.max_lm_iterations = " << cfg.mapping_lm_iterations << '\n'
     << "mapping.neighborhood_size = " << cfg.neighborhood_size << '\n';
  return os.str();
}

}  // namespace gcloam
