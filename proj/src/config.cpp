/*
 * Copyright 2026 The isac-t2u Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "isac/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace isac {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (seps.find(ch) != std::string::npos) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::Parse, "bad value for '" + key + "': '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F conv) {
  std::vector<T> out;
  for (const auto& item : split(v, ",")) out.push_back(conv(key, item));
  if (out.empty()) bad_value(key, v);
  return out;
}

std::array<std::size_t, 2> to_pair(const std::string& key, const std::string& v) {
  auto items = to_list<std::size_t>(key, v, to_size);
  if (items.size() == 1) return {items[0], items[0]};
  if (items.size() == 2) return {items[0], items[1]};
  bad_value(key, v);
}

VehicleSpec parse_vehicle(const std::string& v) {
  VehicleSpec spec;
  bool have_id = false;
  double heading = 0.0;  // rad
  for (const auto& tok : split(v, " \t,")) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) bad_value("vehicle", tok);
    std::string k = tok.substr(0, eq), x = tok.substr(eq + 1);
    auto& tr = spec.trajectory;
    if (k == "id") {
      spec.id = static_cast<int>(to_u64("vehicle.id", x));
      have_id = true;
    } else if (k == "class") {
      spec.cls = parse_vehicle_class(x);
    } else if (k == "kind") {
      tr.kind = parse_trajectory_kind(x);
    } else if (k == "speed") {
      tr.speed = to_double("vehicle.speed", x);
    } else if (k == "x") {
      tr.start.x = to_double("vehicle.x", x);
    } else if (k == "y") {
      tr.start.y = to_double("vehicle.y", x);
    } else if (k == "heading_deg") {
      heading = to_double("vehicle.heading_deg", x) * kPi / 180.0;
    } else if (k == "heading") {
      heading = to_double("vehicle.heading", x);
    } else if (k == "radius") {
      tr.turn_radius = to_double("vehicle.radius", x);
    } else if (k == "straight") {
      tr.straight_length = to_double("vehicle.straight", x);
    } else if (k == "turn") {
      if (x != "left" && x != "right") bad_value("vehicle.turn", x);
      tr.turn_left = x == "left";
    } else if (k == "ve") {
      spec.is_ve = to_bool("vehicle.ve", x);
    } else {
      fail(ErrorCode::Parse, "unknown vehicle field '" + k + "'");
    }
  }
  if (!have_id) fail(ErrorCode::Parse, "vehicle entry needs id=");
  spec.trajectory.heading = heading;
  return spec;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_array(const ArrayGeometry& a) {
  return std::to_string(a.n_h) + "x" + std::to_string(a.n_v);
}

ArrayGeometry parse_array(const std::string& text) {
  auto x = text.find('x');
  if (x == std::string::npos) bad_value("array", text);
  ArrayGeometry a;
  a.n_h = to_size("array", trim(text.substr(0, x)));
  a.n_v = to_size("array", trim(text.substr(x + 1)));
  if (a.n_h == 0 || a.n_v == 0) bad_value("array", text);
  return a;
}

void apply_option(ExperimentConfig& c, const std::string& key, const std::string& v) {
  auto& wf = c.waveform;
  auto& det = c.detector;
  if (key == "scene") c.scene = parse_scene_kind(v);
  else if (key == "frames") c.frames = to_size(key, v);
  else if (key == "trials") c.trials = to_size(key, v);
  else if (key == "runs") c.runs = to_size(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "dt_s") c.dt_s = to_double(key, v);
  else if (key == "n_ve") c.n_ve = to_size(key, v);
  else if (key == "n_clutter") c.n_clutter = to_size(key, v);
  else if (key == "vehicle") c.vehicles.push_back(parse_vehicle(v));
  else if (key == "array_sizes") {
    c.array_sizes.clear();
    for (const auto& item : split(v, ",")) c.array_sizes.push_back(parse_array(item));
    if (c.array_sizes.empty()) bad_value(key, v);
  } else if (key == "snr_grid_db") c.snr_grid_db = to_list<double>(key, v, to_double);
  else if (key == "clutter_grid") c.clutter_grid = to_list<std::size_t>(key, v, to_size);
  else if (key == "ve_grid") c.ve_grid = to_list<std::size_t>(key, v, to_size);
  else if (key == "matrix_array") c.matrix_array = parse_array(v);
  else if (key == "bs_array") c.bs_array = parse_array(v);
  else if (key == "comm_snr_db") c.comm_snr_db = to_double(key, v);
  else if (key == "label_snr_db") c.label_snr_db = to_double(key, v);
  else if (key == "ve_array") c.ve_array = parse_array(v);
  else if (key == "paths") {
    if (v == "los") c.channel.paths = PathModel::LosOnly;
    else if (v == "los+ground") c.channel.paths = PathModel::LosGroundBounce;
    else bad_value(key, v);
  } else if (key == "los_share") c.channel.los_share = to_double(key, v);
  else if (key == "f0_hz") wf.f0 = c.channel.f0 = to_double(key, v);
  else if (key == "bs_hz") wf.bs = to_double(key, v);
  else if (key == "tc_s") wf.tc = to_double(key, v);
  else if (key == "tp_s") wf.tp = to_double(key, v);
  else if (key == "amplitude") wf.amplitude = to_double(key, v);
  else if (key == "chirp_convention") wf.convention = parse_chirp_convention(v);
  else if (key == "fs_hz") c.fs_hz = to_double(key, v);
  else if (key == "n_az") c.n_az = to_size(key, v);
  else if (key == "n_el") c.n_el = to_size(key, v);
  else if (key == "oversample") c.oversample = to_size(key, v);
  else if (key == "taper") c.taper = parse_taper(v);
  else if (key == "radar_height_m") c.radar_height_m = to_double(key, v);
  else if (key == "radar_tilt_deg") c.radar_tilt_deg = to_double(key, v);
  else if (key == "radar_snr_db") c.radar_snr_db = to_double(key, v);
  else if (key == "n_range") c.n_range = to_size(key, v);
  else if (key == "n_angle") c.n_angle = to_size(key, v);
  else if (key == "range_min_m") c.range_min_m = to_double(key, v);
  else if (key == "range_max_m") c.range_max_m = to_double(key, v);
  else if (key == "angle_span_deg") c.angle_span_deg = to_double(key, v);
  else if (key == "cfar_guard") det.cfar.guard = to_pair(key, v);
  else if (key == "cfar_train") det.cfar.train = to_pair(key, v);
  else if (key == "cfar_pfa") det.cfar.pfa = to_double(key, v);
  else if (key == "cfar_min_cells") det.cfar.min_cells = to_size(key, v);
  else if (key == "cfar_floor") det.cfar.floor = to_double(key, v);
  else if (key == "cfar_dynamic_range_db") det.cfar.dynamic_range_db = to_double(key, v);
  else if (key == "cfar_floor_db") {
    double db = to_double(key, v);
    det.cfar.floor = std::pow(10.0, db / 20.0);
  } else if (key == "link_m") c.link_m = to_double(key, v);
  else if (key == "kappa") det.head.kappa = to_double(key, v);
  else if (key == "target_height_m") det.head.target_height = to_double(key, v);
  else if (key == "gamma_class") det.gamma_class = to_double(key, v);
  else if (key == "nms_iou") det.nms_iou = to_double(key, v);
  else if (key == "power_floor_db") c.bbox.power_floor_db = to_double(key, v);
  else if (key == "distance_cap_m") c.bbox.distance_cap_m = to_double(key, v);
  else if (key == "cost") c.cost = parse_cost_kind(v);
  else if (key == "exclude_undetected") c.exclude_undetected = to_bool(key, v);
  else if (key == "gate") {
    if (v == "none") c.gate.reset();
    else c.gate = to_double(key, v);
  } else fail(ErrorCode::Parse, "unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Parse, "line " + std::to_string(n) + ": expected key = value");
    try {
      apply_option(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(n) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::Io, "cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidArgument, what);
  };
  need(frames >= 1, "frames must be >= 1");
  need(trials >= 1, "trials must be >= 1");
  need(runs >= 1, "runs must be >= 1");
  need(dt_s > 0.0, "dt_s must be > 0");
  need(!array_sizes.empty(), "array_sizes must not be empty");
  need(!snr_grid_db.empty(), "snr_grid_db must not be empty");
  need(!clutter_grid.empty(), "clutter_grid must not be empty");
  need(!ve_grid.empty(), "ve_grid must not be empty");
  for (double s : snr_grid_db) need(s >= -55.0 && s <= -10.0, "SNR grid must lie in [-55, -10] dB");
  for (std::size_t v : ve_grid) need(v >= 1 && v <= 4, "ve_grid entries must be in 1..4");
  need(n_ve <= 4, "n_ve must be <= 4");
  need(n_range >= 2 && n_angle >= 2, "image grid needs >= 2 cells per axis");
  need(range_min_m > 0.0 && range_max_m > range_min_m, "range span must be positive");
  need(angle_span_deg > 0.0 && angle_span_deg < 180.0, "angle span must be in (0, 180) deg");
  need(n_az >= 1 && n_el >= 1 && oversample >= 1, "radar array and oversample must be >= 1");
  need(link_m > 0.0, "link_m must be > 0");
  need(detector.nms_iou > 0.0 && detector.nms_iou < 1.0, "nms_iou must be in (0, 1)");
  need(detector.gamma_class >= 0.0 && detector.gamma_class <= 1.0, "gamma_class must be in [0, 1]");
  waveform.validate();
  detector.cfar.validate();
  for (const auto& a : array_sizes) a.validate();
  ve_array.validate();
  matrix_array.validate();
  bs_array.validate();
  samples_per_chirp(waveform, fs_hz);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto join = [](const auto& xs, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
    return s;
  };
  auto dnum = [](double v) { return num(v); };
  auto unum = [](std::size_t v) { return std::to_string(v); };
  kv("scene", std::string(to_string(scene)));
  kv("frames", unum(frames));
  kv("trials", unum(trials));
  kv("runs", unum(runs));
  kv("dt_s", num(dt_s));
  kv("n_ve", unum(n_ve));
  kv("n_clutter", unum(n_clutter));
  for (const auto& v : vehicles) {
    const auto& t = v.trajectory;
    kv("vehicle", "id=" + std::to_string(v.id) + " class=" + std::string(to_string(v.cls)) +
                      " kind=" + std::string(to_string(t.kind)) + " speed=" + num(t.speed) +
                      " x=" + num(t.start.x) + " y=" + num(t.start.y) +
                      " heading=" + num(t.heading) + " radius=" + num(t.turn_radius) +
                      " straight=" + num(t.straight_length) +
                      " turn=" + (t.turn_left ? "left" : "right") + " ve=" + (v.is_ve ? "1" : "0"));
  }
  kv("array_sizes", join(array_sizes, format_array));
  kv("snr_grid_db", join(snr_grid_db, dnum));
  kv("clutter_grid", join(clutter_grid, unum));
  kv("ve_grid", join(ve_grid, unum));
  kv("matrix_array", format_array(matrix_array));
  kv("bs_array", format_array(bs_array));
  kv("comm_snr_db", num(comm_snr_db));
  kv("label_snr_db", num(label_snr_db));
  kv("ve_array", format_array(ve_array));
  kv("paths", channel.paths == PathModel::LosOnly ? "los" : "los+ground");
  kv("los_share", num(channel.los_share));
  kv("f0_hz", num(waveform.f0));
  kv("bs_hz", num(waveform.bs));
  kv("tc_s", num(waveform.tc));
  kv("tp_s", num(waveform.tp));
  kv("amplitude", num(waveform.amplitude));
  kv("chirp_convention", std::string(to_string(waveform.convention)));
  kv("fs_hz", num(fs_hz));
  kv("n_az", unum(n_az));
  kv("n_el", unum(n_el));
  kv("oversample", unum(oversample));
  kv("taper", std::string(to_string(taper)));
  kv("radar_height_m", num(radar_height_m));
  kv("radar_tilt_deg", num(radar_tilt_deg));
  kv("radar_snr_db", num(radar_snr_db));
  kv("n_range", unum(n_range));
  kv("n_angle", unum(n_angle));
  kv("range_min_m", num(range_min_m));
  kv("range_max_m", num(range_max_m));
  kv("angle_span_deg", num(angle_span_deg));
  const auto& cf = detector.cfar;
  kv("cfar_guard", unum(cf.guard[0]) + "," + unum(cf.guard[1]));
  kv("cfar_train", unum(cf.train[0]) + "," + unum(cf.train[1]));
  kv("cfar_pfa", num(cf.pfa));
  kv("cfar_floor", num(cf.floor));
  kv("cfar_dynamic_range_db", num(cf.dynamic_range_db));
  kv("cfar_min_cells", unum(cf.min_cells));
  kv("link_m", num(link_m));
  kv("kappa", num(detector.head.kappa));
  kv("target_height_m", num(detector.head.target_height));
  kv("gamma_class", num(detector.gamma_class));
  kv("nms_iou", num(detector.nms_iou));
  kv("power_floor_db", num(bbox.power_floor_db));
  kv("distance_cap_m", num(bbox.distance_cap_m));
  kv("cost", std::string(to_string(cost)));
  kv("exclude_undetected", exclude_undetected ? "true" : "false");
  kv("gate", gate ? num(*gate) : "none");
  return os.str();
}

std::string ExperimentConfig::spec_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace isac
