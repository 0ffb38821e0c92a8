// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The echosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "echosim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "echosim/error.hpp"
#include "echosim/io.hpp"

namespace echosim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config_error, msg); }

json to_json_node(const toml::node& node, const std::string& where) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (auto&& [k, v] : *t) j[std::string(k.str())] = to_json_node(v, where + "." + std::string(k.str()));
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (auto&& v : *a) j.push_back(to_json_node(v, where));
    return j;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  fail(where + ": unsupported TOML value type");
}

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(section + " must be a table");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(section + ": unknown key '" + it.key() + "'");
}

template <typename T>
T value(const json& obj, const std::string& section, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    const json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(section + "." + key + " must be a boolean");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) fail(section + "." + key + " must be a number");
      if constexpr (std::is_integral_v<T>)
        if (!v.is_number_integer()) fail(section + "." + key + " must be an integer");
    } else {
      if (!v.is_string()) fail(section + "." + key + " must be a string");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    fail(section + "." + key + ": " + e.what());
  }
}

Vec3 vec3(const json& obj, const std::string& section, const char* key, const Vec3& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
    fail(section + "." + key + " must be a list of 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal().string();
}

MaterialConfig parse_material(const json& j, const std::string& section) {
  check_keys(j, section, {"alpha_min_deg", "alpha_max_deg", "k_min", "k_max", "kappa_scale"});
  MaterialConfig m;
  m.alpha_min_deg = value(j, section, "alpha_min_deg", m.alpha_min_deg);
  m.alpha_max_deg = value(j, section, "alpha_max_deg", m.alpha_max_deg);
  m.k_min = value(j, section, "k_min", m.k_min);
  m.k_max = value(j, section, "k_max", m.k_max);
  m.kappa_scale = value(j, section, "kappa_scale", m.kappa_scale);
  return m;
}

json primitive_defaults(const json& p, const std::string& section) {
  if (!p.is_object() || !p.contains("type") || !p["type"].is_string()) fail(section + ".type must be a string");
  const std::string type = p["type"];
  json out = {{"type", type}};
  if (type == "sphere") {
    check_keys(p, section, {"type", "radius", "subdivisions"});
    out["radius"] = value(p, section, "radius", 0.05);
    out["subdivisions"] = value(p, section, "subdivisions", 4);
  } else if (type == "plate" || type == "grid") {
    check_keys(p, section, {"type", "size", "divisions"});
    out["size"] = value(p, section, "size", 1.0);
    out["divisions"] = value(p, section, "divisions", 1);
  } else if (type == "box") {
    check_keys(p, section, {"type", "extent"});
    out["extent"] = vec_json(vec3(p, section, "extent", Vec3::Ones()));
  } else if (type == "cylinder") {
    check_keys(p, section, {"type", "radius", "height", "segments", "rings"});
    out["radius"] = value(p, section, "radius", 0.05);
    out["height"] = value(p, section, "height", 0.2);
    out["segments"] = value(p, section, "segments", 64);
    out["rings"] = value(p, section, "rings", 16);
  } else {
    fail(section + ": unknown primitive '" + type + "'");
  }
  return out;
}

ObjectConfig parse_object(const json& j, const std::string& section, const std::filesystem::path& base) {
  check_keys(j, section,
             {"path", "primitive", "scale", "position", "rotation_deg", "merge_tolerance", "material", "objects"});
  ObjectConfig o;
  if (j.contains("path") == j.contains("primitive")) fail(section + ": give exactly one of 'path' or 'primitive'");
  o.path = resolve(value<std::string>(j, section, "path", ""), base);
  if (j.contains("primitive")) o.primitive = primitive_defaults(j["primitive"], section + ".primitive");
  o.scale = value(j, section, "scale", o.scale);
  if (!(o.scale > 0.0)) fail(section + ".scale must be positive");
  o.position = vec3(j, section, "position", o.position);
  o.rotation_deg = vec3(j, section, "rotation_deg", o.rotation_deg);
  o.merge_tolerance = value(j, section, "merge_tolerance", o.merge_tolerance);
  if (j.contains("material")) o.material = parse_material(j["material"], section + ".material");
  return o;
}

json object_json(const ObjectConfig& o) {
  json j;
  if (!o.path.empty()) j["path"] = o.path;
  else j["primitive"] = o.primitive;
  j["scale"] = o.scale;
  j["position"] = vec_json(o.position);
  j["rotation_deg"] = vec_json(o.rotation_deg);
  j["merge_tolerance"] = o.merge_tolerance;
  j["material"] = {{"alpha_min_deg", o.material.alpha_min_deg},
                   {"alpha_max_deg", o.material.alpha_max_deg},
                   {"k_min", o.material.k_min},
                   {"k_max", o.material.k_max},
                   {"kappa_scale", o.material.kappa_scale}};
  return j;
}

EarConfig parse_ear(const json& j, const std::string& section, const std::string& default_group,
                    const std::filesystem::path& base) {
  EarConfig e;
  e.group = default_group;
  if (j.is_null()) return e;
  check_keys(j, section,
             {"group", "bank", "target_csv", "pattern", "exponent", "axis", "taps", "lambda", "lambda_mode",
              "directions", "frequencies"});
  e.group = value(j, section, "group", e.group);
  const int sources = j.contains("bank") + j.contains("target_csv") + j.contains("pattern");
  if (sources > 1) fail(section + ": give at most one of 'bank', 'target_csv', 'pattern'");
  if (j.contains("bank")) {
    e.source = EarSource::bank_file;
    e.bank = resolve(value<std::string>(j, section, "bank", ""), base);
  } else if (j.contains("target_csv")) {
    e.source = EarSource::target_csv;
    e.target_csv = resolve(value<std::string>(j, section, "target_csv", ""), base);
  } else if (j.contains("pattern")) {
    e.source = EarSource::pattern;
    try {
      e.pattern.kind = pattern_kind_from_string(value<std::string>(j, section, "pattern", "omni"));
    } catch (const Error& err) {
      fail(section + ": " + err.what());
    }
  }
  e.pattern.exponent = value(j, section, "exponent", e.pattern.exponent);
  e.pattern.axis = vec3(j, section, "axis", e.pattern.axis);
  if (!(e.pattern.axis.norm() > 0.0)) fail(section + ".axis must be non-zero");
  e.taps = value(j, section, "taps", e.taps);
  e.lambda = value(j, section, "lambda", e.lambda);
  const std::string mode = value<std::string>(j, section, "lambda_mode", "trace_normalized");
  if (mode == "trace_normalized") e.lambda_mode = Regularization::trace_normalized;
  else if (mode == "absolute") e.lambda_mode = Regularization::absolute;
  else fail(section + ".lambda_mode must be 'trace_normalized' or 'absolute'");
  e.directions = value(j, section, "directions", e.directions);
  if (j.contains("frequencies")) {
    if (!j["frequencies"].is_array()) fail(section + ".frequencies must be a list");
    for (const auto& f : j["frequencies"]) {
      if (!f.is_number()) fail(section + ".frequencies must hold numbers");
      e.frequencies.push_back(f.get<double>());
    }
  }
  if (e.taps < 1) fail(section + ".taps must be >= 1");
  if (e.directions < 1) fail(section + ".directions must be >= 1");
  if (!(e.lambda >= 0.0)) fail(section + ".lambda must be >= 0");
  return e;
}

json ear_json(const EarConfig& e) {
  json j = {{"group", e.group}};
  switch (e.source) {
    case EarSource::selection: return j;
    case EarSource::bank_file: j["bank"] = e.bank; return j;
    case EarSource::target_csv: j["target_csv"] = e.target_csv; break;
    case EarSource::pattern:
      j["pattern"] = to_string(e.pattern.kind);
      j["exponent"] = e.pattern.exponent;
      j["axis"] = vec_json(e.pattern.axis);
      break;
  }
  j["taps"] = e.taps;
  j["lambda"] = e.lambda;
  j["lambda_mode"] = e.lambda_mode == Regularization::absolute ? "absolute" : "trace_normalized";
  j["directions"] = e.directions;
  j["frequencies"] = e.frequencies;
  return j;
}

std::string to_string(NormalMode m) { return m == NormalMode::geometric ? "geometric" : "interpolated"; }

}  // namespace

MaterialParams MaterialConfig::to_params(double speed_of_sound) const {
  MaterialParams m;
  m.alpha_min = deg2rad(alpha_min_deg);
  m.alpha_max = deg2rad(alpha_max_deg);
  m.k_min = k_min;
  m.k_max = k_max;
  m.kappa_scale = kappa_scale;
  m.speed_of_sound = speed_of_sound;
  return m;
}

RawMesh ObjectConfig::load() const {
  RawMesh raw;
  if (!path.empty()) {
    raw = load_stl(path);
  } else {
    const std::string type = primitive.at("type");
    if (type == "sphere") {
      raw = primitives::icosphere(primitive.at("radius").get<double>(), primitive.at("subdivisions").get<int>());
    } else if (type == "plate") {
      raw = primitives::plate(primitive.at("size").get<double>(), primitive.at("divisions").get<int>());
    } else if (type == "grid") {
      raw = primitives::grid(primitive.at("size").get<double>(), primitive.at("divisions").get<int>());
    } else if (type == "box") {
      const auto& e = primitive.at("extent");
      raw = primitives::box(Vec3(e[0].get<double>(), e[1].get<double>(), e[2].get<double>()));
    } else {
      raw = primitives::cylinder(primitive.at("radius").get<double>(), primitive.at("height").get<double>(),
                                 primitive.at("segments").get<int>(), primitive.at("rings").get<int>());
    }
  }
  return scale == 1.0 ? raw : scaled(raw, scale);
}

Pose ObjectConfig::pose() const {
  return make_pose(position, Vec3(deg2rad(rotation_deg.x()), deg2rad(rotation_deg.y()), deg2rad(rotation_deg.z())));
}

Pose SimulationConfig::sensor_pose() const {
  return make_pose(sensor_position, Vec3(deg2rad(sensor_rotation_deg.x()), deg2rad(sensor_rotation_deg.y()),
                                         deg2rad(sensor_rotation_deg.z())));
}

json parse_toml(const std::string& text, const std::string& source) {
  try {
    const toml::table table = toml::parse(text, source);
    return to_json_node(table, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    fail(msg.str());
  }
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  if (path.extension() == ".toml") {
    doc = parse_toml(buf.str(), path.string());
  } else {
    try {
      doc = json::parse(buf.str());
    } catch (const json::exception& e) {
      fail(path.string() + ": " + e.what());
    }
  }
  return parse_config(doc, std::filesystem::absolute(path).parent_path());
}

SimulationConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config", {"mesh", "sensor", "params", "ertf", "call", "output", "scan"});
  SimulationConfig c;

  // params first: other sections depend on the speed of sound.
  const json params = doc.value("params", json::object());
  check_keys(params, "params",
             {"speed_of_sound", "sample_rate", "ir_length", "n_rays", "max_bounces", "n_diffraction_points",
              "specular_gain", "diffraction_gain", "seed", "workers", "band", "band_transition",
              "brdf_frequency_count", "normalize_by_ray_count", "diffraction_threshold", "reflection_normals",
              "self_intersection_offset"});
  SimParams& p = c.params;
  p.speed_of_sound = value(params, "params", "speed_of_sound", p.speed_of_sound);
  p.sample_rate = value(params, "params", "sample_rate", p.sample_rate);
  p.ir_length = value(params, "params", "ir_length", p.ir_length);
  p.n_rays = value(params, "params", "n_rays", p.n_rays);
  p.max_bounces = value(params, "params", "max_bounces", p.max_bounces);
  p.n_diffraction_points = value(params, "params", "n_diffraction_points", p.n_diffraction_points);
  p.specular_gain = value(params, "params", "specular_gain", p.specular_gain);
  p.diffraction_gain = value(params, "params", "diffraction_gain", p.diffraction_gain);
  if (params.contains("seed")) {
    if (!params["seed"].is_number_integer()) fail("params.seed must be an integer");
    p.seed = params["seed"].get<std::uint64_t>();
  }
  const int workers = value(params, "params", "workers", 1);
  if (workers < 1) fail("params.workers must be >= 1");
  p.workers = static_cast<unsigned>(workers);
  if (params.contains("band")) {
    const json& b = params["band"];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      fail("params.band must be [low, high]");
    p.band = Band{b[0].get<double>(), b[1].get<double>(), value(params, "params", "band_transition", 5e3)};
  } else if (params.contains("band_transition")) {
    fail("params.band_transition needs params.band");
  }
  p.brdf_frequency_count = value(params, "params", "brdf_frequency_count", p.brdf_frequency_count);
  p.normalize_by_ray_count = value(params, "params", "normalize_by_ray_count", p.normalize_by_ray_count);
  if (params.contains("diffraction_threshold"))
    p.diffraction_threshold = value(params, "params", "diffraction_threshold", 0.0);
  const std::string normals = value<std::string>(params, "params", "reflection_normals", "geometric");
  if (normals == "geometric") p.reflection_normals = NormalMode::geometric;
  else if (normals == "interpolated") p.reflection_normals = NormalMode::interpolated;
  else fail("params.reflection_normals must be 'geometric' or 'interpolated'");
  p.self_intersection_offset = value(params, "params", "self_intersection_offset", p.self_intersection_offset);
  try {
    p.validate();
  } catch (const Error& e) {
    fail(std::string("params: ") + e.what());
  }

  if (!doc.contains("mesh")) fail("config needs a [mesh] section");
  const json& mesh = doc["mesh"];
  if (mesh.is_object() && mesh.contains("objects")) {
    if (mesh.size() != 1) fail("mesh: 'objects' cannot be combined with other keys");
    if (!mesh["objects"].is_array() || mesh["objects"].empty()) fail("mesh.objects must be a non-empty list");
    int k = 0;
    for (const auto& o : mesh["objects"])
      c.objects.push_back(parse_object(o, "mesh.objects[" + std::to_string(k++) + "]", base_dir));
  } else {
    c.objects.push_back(parse_object(mesh, "mesh", base_dir));
  }
  for (const auto& o : c.objects) {
    if (!o.path.empty() && !std::filesystem::exists(o.path)) fail("mesh file not found: " + o.path);
    try {
      o.material.to_params(p.speed_of_sound).validate();
    } catch (const Error& e) {
      fail(std::string("mesh.material: ") + e.what());
    }
  }

  const json sensor = doc.value("sensor", json::object());
  check_keys(sensor, "sensor", {"emitter", "receivers", "groups", "position", "rotation_deg"});
  c.sensor.emitter = vec3(sensor, "sensor", "emitter", Vec3::Zero());
  if (sensor.contains("receivers")) {
    const json& r = sensor["receivers"];
    if (!r.is_array() || r.empty()) fail("sensor.receivers must be a non-empty list of [x, y, z]");
    c.sensor.receivers.resize(static_cast<Eigen::Index>(r.size()), 3);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const json row = {{"p", r[i]}};
      c.sensor.receivers.row(static_cast<Eigen::Index>(i)) = vec3(row, "sensor.receivers", "p", Vec3::Zero());
    }
  } else {
    c.sensor.receivers = c.sensor.emitter.transpose();
  }
  if (sensor.contains("groups")) {
    if (!sensor["groups"].is_array()) fail("sensor.groups must be a list of strings");
    for (const auto& g : sensor["groups"]) {
      if (!g.is_string()) fail("sensor.groups must be a list of strings");
      c.sensor.groups.push_back(g.get<std::string>());
    }
  }
  c.sensor_position = vec3(sensor, "sensor", "position", Vec3::Zero());
  c.sensor_rotation_deg = vec3(sensor, "sensor", "rotation_deg", Vec3::Zero());
  try {
    c.sensor.validate();
  } catch (const Error& e) {
    fail(std::string("sensor: ") + e.what());
  }

  const json ertf = doc.value("ertf", json::object());
  check_keys(ertf, "ertf", {"left", "right"});
  const bool grouped = !c.sensor.groups.empty();
  c.left = parse_ear(ertf.value("left", json()), "ertf.left", grouped ? "left" : "", base_dir);
  c.right = parse_ear(ertf.value("right", json()), "ertf.right", grouped ? "right" : "", base_dir);
  for (const EarConfig* e : {&c.left, &c.right}) {
    if (e->source == EarSource::bank_file && !std::filesystem::exists(e->bank))
      fail("filter bank not found: " + e->bank);
    if (e->source == EarSource::target_csv && !std::filesystem::exists(e->target_csv))
      fail("target file not found: " + e->target_csv);
    if (!e->group.empty() && c.sensor.group_members(e->group).empty())
      fail("no receiver belongs to group '" + e->group + "'");
  }

  if (doc.contains("call")) {
    const json& call = doc["call"];
    check_keys(call, "call", {"kind", "f_start", "f_end", "duration", "window"});
    c.call.enabled = true;
    try {
      c.call.kind = call_kind_from_string(value<std::string>(call, "call", "kind", "hyperbolic_fm"));
      c.call.window = window_from_string(value<std::string>(call, "call", "window", "hann"));
    } catch (const Error& e) {
      fail(std::string("call: ") + e.what());
    }
    c.call.f_start = value(call, "call", "f_start", c.call.f_start);
    c.call.f_end = value(call, "call", "f_end", c.call.f_end);
    c.call.duration = value(call, "call", "duration", c.call.duration);
  }

  const json output = doc.value("output", json::object());
  check_keys(output, "output", {"directory", "wav", "csv", "normalize_peak"});
  c.output.directory = resolve(value(output, "output", "directory", c.output.directory), base_dir);
  c.output.wav = value(output, "output", "wav", c.output.wav);
  c.output.csv = value(output, "output", "csv", c.output.csv);
  c.output.normalize_peak = value(output, "output", "normalize_peak", c.output.normalize_peak);

  const json scan = doc.value("scan", json::object());
  check_keys(scan, "scan", {"axis", "start_deg", "end_deg", "step_deg", "points", "radius", "reference"});
  c.scan.axis = vec3(scan, "scan", "axis", c.scan.axis);
  c.scan.start_deg = value(scan, "scan", "start_deg", c.scan.start_deg);
  c.scan.end_deg = value(scan, "scan", "end_deg", c.scan.end_deg);
  c.scan.step_deg = value(scan, "scan", "step_deg", c.scan.step_deg);
  c.scan.points = value(scan, "scan", "points", c.scan.points);
  c.scan.radius = value(scan, "scan", "radius", c.scan.radius);
  c.scan.reference = value(scan, "scan", "reference", c.scan.reference);
  return c;
}

json to_json(const SimulationConfig& c) {
  json j;
  if (c.objects.size() == 1) {
    j["mesh"] = object_json(c.objects.front());
  } else {
    j["mesh"]["objects"] = json::array();
    for (const auto& o : c.objects) j["mesh"]["objects"].push_back(object_json(o));
  }
  json receivers = json::array();
  for (Eigen::Index i = 0; i < c.sensor.receivers.rows(); ++i)
    receivers.push_back(vec_json(c.sensor.receivers.row(i).transpose()));
  j["sensor"] = {{"emitter", vec_json(c.sensor.emitter)},
                 {"receivers", receivers},
                 {"groups", c.sensor.groups},
                 {"position", vec_json(c.sensor_position)},
                 {"rotation_deg", vec_json(c.sensor_rotation_deg)}};
  const SimParams& p = c.params;
  json params = {{"speed_of_sound", p.speed_of_sound},
                 {"sample_rate", p.sample_rate},
                 {"ir_length", p.ir_length},
                 {"n_rays", p.n_rays},
                 {"max_bounces", p.max_bounces},
                 {"n_diffraction_points", p.n_diffraction_points},
                 {"specular_gain", p.specular_gain},
                 {"diffraction_gain", p.diffraction_gain},
                 {"seed", p.seed},
                 {"workers", p.workers},
                 {"brdf_frequency_count", p.brdf_frequency_count},
                 {"normalize_by_ray_count", p.normalize_by_ray_count},
                 {"reflection_normals", to_string(p.reflection_normals)},
                 {"self_intersection_offset", p.self_intersection_offset}};
  if (p.band) {
    params["band"] = json::array({p.band->low, p.band->high});
    params["band_transition"] = p.band->transition;
  }
  if (p.diffraction_threshold) params["diffraction_threshold"] = *p.diffraction_threshold;
  j["params"] = params;
  j["ertf"] = {{"left", ear_json(c.left)}, {"right", ear_json(c.right)}};
  if (c.call.enabled)
    j["call"] = {{"kind", to_string(c.call.kind)},
                 {"f_start", c.call.f_start},
                 {"f_end", c.call.f_end},
                 {"duration", c.call.duration},
                 {"window", to_string(c.call.window)}};
  j["output"] = {{"directory", c.output.directory},
                 {"wav", c.output.wav},
                 {"csv", c.output.csv},
                 {"normalize_peak", c.output.normalize_peak}};
  j["scan"] = {{"axis", vec_json(c.scan.axis)},         {"start_deg", c.scan.start_deg},
               {"end_deg", c.scan.end_deg},             {"step_deg", c.scan.step_deg},
               {"points", c.scan.points},               {"radius", c.scan.radius},
               {"reference", c.scan.reference}};
  return j;
}

std::string config_hash(const SimulationConfig& config) {
  json j = to_json(config);
  j["params"].erase("workers");
  j["output"].erase("directory");
  return fnv1a_hex(j.dump());
}

std::vector<PreparedObject> prepare_objects(const SimulationConfig& config) {
  std::vector<PreparedObject> out;
  for (const auto& o : config.objects)
    out.push_back(prepare_object(o.load(), o.material.to_params(config.params.speed_of_sound), o.pose(),
                                 config.params.workers, o.merge_tolerance));
  return out;
}

namespace {

SensorArray sub_array(const SensorArray& array, const std::vector<int>& members) {
  SensorArray sub;
  sub.emitter = array.emitter;
  sub.receivers.resize(static_cast<Eigen::Index>(members.size()), 3);
  for (std::size_t k = 0; k < members.size(); ++k)
    sub.receivers.row(static_cast<Eigen::Index>(k)) = array.receivers.row(members[k]);
  return sub;
}

std::vector<int> ear_members(const EarConfig& ear, const SensorArray& array) {
  if (ear.group.empty()) {
    std::vector<int> all(static_cast<std::size_t>(array.receivers.rows()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
  }
  return array.group_members(ear.group);
}

Eigen::VectorXd fit_frequencies(const EarConfig& ear, const SimParams& params) {
  if (!ear.frequencies.empty()) return Eigen::Map<const Eigen::VectorXd>(ear.frequencies.data(), ear.frequencies.size());
  const Band b = params.effective_band();
  std::vector<double> f;
  for (int k = 0; k <= ear.taps / 2; ++k) {
    const double fk = k * params.sample_rate / ear.taps;
    if (fk >= b.low && fk <= b.high) f.push_back(fk);
  }
  if (f.empty()) fail("no filter frequency bin falls inside the band; raise taps or widen the band");
  return Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace

FitResult fit_ear(const EarConfig& ear, const SimulationConfig& config) {
  const std::vector<int> members = ear_members(ear, config.sensor);
  const SensorArray sub = sub_array(config.sensor, members);
  DirectivityTarget target;
  if (ear.source == EarSource::target_csv) {
    target = load_target_csv(ear.target_csv);
  } else {
    target = make_target(ear.pattern, partition_sphere_directions(ear.directions, true),
                         fit_frequencies(ear, config.params));
  }
  FitOptions options;
  options.taps = ear.taps;
  options.lambda = ear.lambda;
  options.mode = ear.lambda_mode;
  options.sample_rate = config.params.sample_rate;
  options.speed_of_sound = config.params.speed_of_sound;
  options.workers = config.params.workers;
  FitResult fit = fit_fir_bank(target, sub, options);
  // Expand to the full array; receivers outside the group get zero taps.
  Eigen::MatrixXd taps = Eigen::MatrixXd::Zero(config.sensor.receivers.rows(), fit.bank.length());
  for (std::size_t k = 0; k < members.size(); ++k) taps.row(members[k]) = fit.bank.taps.row(static_cast<Eigen::Index>(k));
  fit.bank.taps = taps;
  return fit;
}

PreparedEars prepare_ears(const SimulationConfig& config) {
  PreparedEars out;
  auto build = [&](const EarConfig& ear, ErtfFilterBank& bank, std::optional<AnalyticPattern>& pattern,
                   FitResult& fit) {
    switch (ear.source) {
      case EarSource::selection:
        bank = selection_bank(config.sensor.receivers.rows(), ear_members(ear, config.sensor),
                              config.params.sample_rate);
        break;
      case EarSource::bank_file:
        bank = load_filter_bank(ear.bank);
        if (bank.receiver_count() != config.sensor.receivers.rows())
          throw Error(ErrorCode::channel_mismatch, ear.bank + ": bank has " + std::to_string(bank.receiver_count()) +
                                                       " channels, sensor has " +
                                                       std::to_string(config.sensor.receivers.rows()));
        if (bank.sample_rate != config.params.sample_rate)
          throw Error(ErrorCode::rate_mismatch, ear.bank + ": bank sample rate differs from params.sample_rate");
        break;
      case EarSource::pattern:
        pattern = ear.pattern;
        [[fallthrough]];
      case EarSource::target_csv:
        fit = fit_ear(ear, config);
        bank = fit.bank;
        if (ear.source == EarSource::pattern && out.pattern_frequencies.size() == 0)
          out.pattern_frequencies = fit_frequencies(ear, config.params);
        break;
    }
  };
  build(config.left, out.banks.left, out.left_pattern, out.left_fit);
  build(config.right, out.banks.right, out.right_pattern, out.right_fit);
  return out;
}

std::optional<EmittedCall> make_call(const SimulationConfig& config) {
  if (!config.call.enabled) return std::nullopt;
  return synthesize_call(config.call.kind, config.call.f_start, config.call.f_end, config.call.duration,
                         config.params.sample_rate, config.call.window);
}

ScanSetup make_scan_setup(const SimulationConfig& config) {
  ScanSetup s;
  s.objects = prepare_objects(config);
  s.array = config.sensor;
  s.sensor_pose = config.sensor_pose();
  s.params = config.params;
  PreparedEars ears = prepare_ears(config);
  s.ears = ears.banks;
  s.left_pattern = ears.left_pattern;
  s.right_pattern = ears.right_pattern;
  s.pattern_frequencies = ears.pattern_frequencies;
  s.reference = config.scan.reference;
  return s;
}

}  // namespace echosim
