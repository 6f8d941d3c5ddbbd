#include "oam/config_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string_view>

#include <json.hpp>

namespace oam {

using nlohmann::json;

namespace {

const char* const kPipelineNames[] = {"estimate", "precoder-dump", "ber", "se",
                                      "ee", "channel-dump", "complexity"};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown key \"" + key + "\"");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing key \"" + key + "\"");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, where + "." + key);
}

long long integer(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9.0e15) return static_cast<long long>(x);
  }
  fail(where, "expected an integer");
}

int int_or(const json& obj, const std::string& key, int fallback, const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : static_cast<int>(integer(*it, where + "." + key));
}

bool bool_or(const json& obj, const std::string& key, bool fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) fail(where + "." + key, "expected true or false");
  return it->get<bool>();
}

// Reads "<base>_deg" or "<base>_rad"; exactly one may be present.
double angle(const json& obj, const std::string& base, const std::string& where, std::optional<double> fallback) {
  auto d = obj.find(base + "_deg");
  auto r = obj.find(base + "_rad");
  if (d != obj.end() && r != obj.end()) fail(where, "both " + base + "_deg and " + base + "_rad given");
  if (d != obj.end()) return deg2rad(number(*d, where + "." + base + "_deg"));
  if (r != obj.end()) return number(*r, where + "." + base + "_rad");
  if (!fallback) fail(where, "missing key \"" + base + "_deg\"");
  return *fallback;
}

void put_angle(json& obj, const std::string& base, double rad) {
  const double deg = rad2deg(rad);
  if (deg2rad(deg) == rad)
    obj[base + "_deg"] = deg;
  else
    obj[base + "_rad"] = rad;
}

double radius(const json& v, double wavelength, const std::string& where) {
  check_keys(v, where, {"radius", "unit", "element_count", "initial_angle_deg", "initial_angle_rad"});
  const double value = number(require(v, "radius", where), where + ".radius");
  const json& unit = require(v, "unit", where);
  if (!unit.is_string()) fail(where + ".unit", "expected \"m\" or \"lambda\"");
  const auto u = unit.get<std::string>();
  if (u == "m") return value;
  if (u == "lambda") return value * wavelength;
  fail(where + ".unit", "expected \"m\" or \"lambda\", got \"" + u + "\"");
}

UccaGeometry parse_array(const json& v, double wavelength, const std::string& where) {
  check_keys(v, where, {"element_count", "initial_angle_deg", "initial_angle_rad", "rings"});
  const int count = int_or(v, "element_count", 0, where);
  const double init = angle(v, "initial_angle", where, 0.0);
  const json& rings = require(v, "rings", where);
  if (!rings.is_array() || rings.empty()) fail(where + ".rings", "expected a non-empty list");
  UccaGeometry g;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    const std::string at = where + ".rings[" + std::to_string(i) + "]";
    UcaGeometry ring;
    ring.radius = radius(rings[i], wavelength, at);
    ring.element_count = int_or(rings[i], "element_count", count, at);
    ring.initial_angle = angle(rings[i], "initial_angle", at, init);
    if (ring.element_count <= 0) fail(at, "element_count must be positive");
    g.rings.push_back(ring);
  }
  return g;
}

json array_json(const UccaGeometry& g) {
  json rings = json::array();
  for (const auto& r : g.rings) {
    json ring{{"radius", r.radius}, {"unit", "m"}, {"element_count", r.element_count}};
    put_angle(ring, "initial_angle", r.initial_angle);
    rings.push_back(ring);
  }
  return json{{"rings", rings}};
}

std::vector<int> parse_modes(const json& v, const std::string& where) {
  if (v.is_array()) {
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(static_cast<int>(integer(v[i], where + "[" + std::to_string(i) + "]")));
    if (out.empty()) fail(where, "mode list is empty");
    return out;
  }
  const auto n = integer(v, where);
  if (n <= 0) fail(where, "mode count must be positive");
  return contiguous_modes(static_cast<int>(n));
}

json modes_json(const std::vector<int>& modes) {
  if (!modes.empty() && modes == contiguous_modes(static_cast<int>(modes.size())))
    return static_cast<int>(modes.size());
  return modes;
}

template <class T>
std::vector<T> parse_list(const json& obj, const std::string& key, const std::string& where) {
  std::vector<T> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  const std::string at = where + "." + key;
  if (!it->is_array() || it->empty()) fail(at, "expected a non-empty list");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string item = at + "[" + std::to_string(i) + "]";
    if constexpr (std::is_same_v<T, int>)
      out.push_back(static_cast<int>(integer((*it)[i], item)));
    else
      out.push_back(number((*it)[i], item));
  }
  return out;
}

SystemConfig scenario_from_json(const json& s) {
  const std::string where = "scenario";
  check_keys(s, where,
             {"carriers", "tx", "users", "modes", "beta", "snr_db", "power", "coherence_symbols",
              "training_symbols", "far_field_factor", "elevation_estimation"});
  SystemConfig c;

  const json& car = require(s, "carriers", where);
  check_keys(car, "scenario.carriers", {"base_frequency_hz", "spacing_hz", "data_count", "training_count"});
  const double f = number(require(car, "base_frequency_hz", "scenario.carriers"), "scenario.carriers.base_frequency_hz");
  const double df = number(require(car, "spacing_hz", "scenario.carriers"), "scenario.carriers.spacing_hz");
  const int w = static_cast<int>(integer(require(car, "data_count", "scenario.carriers"), "scenario.carriers.data_count"));
  const int wt = int_or(car, "training_count", w, "scenario.carriers");
  if (f <= 0 || df <= 0) fail("scenario.carriers", "frequencies must be positive");
  if (w <= 0 || wt <= 0) fail("scenario.carriers", "carrier counts must be positive");
  c.carriers = build_carrier_grid(f, df, w, wt);
  const double lambda = kSpeedOfLight / f;

  c.tx = parse_array(require(s, "tx", where), lambda, "scenario.tx");

  const json& users = require(s, "users", where);
  if (!users.is_array() || users.empty()) fail("scenario.users", "expected a non-empty list");
  for (std::size_t p = 0; p < users.size(); ++p) {
    const std::string at = "scenario.users[" + std::to_string(p) + "]";
    check_keys(users[p], at,
               {"rx", "range_m", "elevation_deg", "elevation_rad", "azimuth_deg", "azimuth_rad"});
    UserConfig u;
    u.array = parse_array(require(users[p], "rx", at), lambda, at + ".rx");
    u.placement.range = number(require(users[p], "range_m", at), at + ".range_m");
    u.placement.elevation = angle(users[p], "elevation", at, std::nullopt);
    u.placement.azimuth = angle(users[p], "azimuth", at, std::nullopt);
    c.users.push_back(u);
  }

  const json& modes = require(s, "modes", where);
  check_keys(modes, "scenario.modes", {"data", "training"});
  c.modes.data_modes = parse_modes(require(modes, "data", "scenario.modes"), "scenario.modes.data");
  c.modes.training_modes = modes.contains("training")
                               ? parse_modes(modes.at("training"), "scenario.modes.training")
                               : c.modes.data_modes;

  c.beta = number_or(s, "beta", c.beta, where);
  c.noise.snr_db = number_or(s, "snr_db", c.noise.snr_db, where);
  if (auto it = s.find("power"); it != s.end()) {
    const std::string at = "scenario.power";
    check_keys(*it, at, {"pa_efficiency", "baseband_w", "rf_chain_w", "lna_w", "transmit_w", "bandwidth_hz"});
    c.power.pa_efficiency = number_or(*it, "pa_efficiency", c.power.pa_efficiency, at);
    c.power.p_bb = number_or(*it, "baseband_w", c.power.p_bb, at);
    c.power.p_rf = number_or(*it, "rf_chain_w", c.power.p_rf, at);
    c.power.p_lna = number_or(*it, "lna_w", c.power.p_lna, at);
    c.power.p_t = number_or(*it, "transmit_w", c.power.p_t, at);
    c.power.bandwidth = number_or(*it, "bandwidth_hz", c.power.bandwidth, at);
  }
  c.coherence_symbols = int_or(s, "coherence_symbols", c.coherence_symbols, where);
  c.training_symbols = int_or(s, "training_symbols", c.training_symbols, where);
  c.far_field_factor = number_or(s, "far_field_factor", c.far_field_factor, where);
  c.elevation_estimation = bool_or(s, "elevation_estimation", c.elevation_estimation, where);
  return c;
}

json scenario_json(const SystemConfig& c) {
  json s;
  s["carriers"] = {{"base_frequency_hz", c.carriers.base_frequency},
                   {"spacing_hz", c.carriers.spacing},
                   {"data_count", c.carriers.data_count},
                   {"training_count", c.carriers.training_count}};
  s["tx"] = array_json(c.tx);
  json users = json::array();
  for (const auto& u : c.users) {
    json j{{"rx", array_json(u.array)}, {"range_m", u.placement.range}};
    put_angle(j, "elevation", u.placement.elevation);
    put_angle(j, "azimuth", u.placement.azimuth);
    users.push_back(j);
  }
  s["users"] = users;
  s["modes"] = {{"data", modes_json(c.modes.data_modes)}, {"training", modes_json(c.modes.training_modes)}};
  s["beta"] = c.beta;
  s["snr_db"] = c.noise.snr_db;
  s["power"] = {{"pa_efficiency", c.power.pa_efficiency}, {"baseband_w", c.power.p_bb},
                {"rf_chain_w", c.power.p_rf},             {"lna_w", c.power.p_lna},
                {"transmit_w", c.power.p_t},              {"bandwidth_hz", c.power.bandwidth}};
  s["coherence_symbols"] = c.coherence_symbols;
  s["training_symbols"] = c.training_symbols;
  s["far_field_factor"] = c.far_field_factor;
  s["elevation_estimation"] = c.elevation_estimation;
  return s;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

void check_version(const json& root) {
  const json& v = require(root, "schema_version", "config");
  if (integer(v, "config.schema_version") != kConfigSchemaVersion)
    fail("config.schema_version", "unsupported version " + v.dump());
}

EstimationOptions estimation_from_json(const json& e) {
  const std::string at = "estimation";
  check_keys(e, at,
             {"refine", "zero_pad", "min_range_separation_m", "outlier_factor", "max_elevation_deg",
              "max_elevation_rad", "grid_oversampling"});
  EstimationOptions o;
  o.refine = bool_or(e, "refine", o.refine, at);
  o.spectrum.zero_pad = int_or(e, "zero_pad", o.spectrum.zero_pad, at);
  o.spectrum.min_range_separation = number_or(e, "min_range_separation_m", o.spectrum.min_range_separation, at);
  o.outlier_factor = number_or(e, "outlier_factor", o.outlier_factor, at);
  o.max_elevation = angle(e, "max_elevation", at, o.max_elevation);
  o.grid_oversampling = number_or(e, "grid_oversampling", o.grid_oversampling, at);
  if (o.spectrum.zero_pad < 1) fail(at + ".zero_pad", "must be at least 1");
  if (o.grid_oversampling <= 0) fail(at + ".grid_oversampling", "must be positive");
  if (!(o.spectrum.min_range_separation >= 0)) fail(at + ".min_range_separation_m", "must be non-negative");
  return o;
}

json estimation_json(const EstimationOptions& o) {
  json e{{"refine", o.refine},
         {"zero_pad", o.spectrum.zero_pad},
         {"min_range_separation_m", o.spectrum.min_range_separation},
         {"outlier_factor", o.outlier_factor},
         {"grid_oversampling", o.grid_oversampling}};
  put_angle(e, "max_elevation", o.max_elevation);
  return e;
}

}  // namespace

std::string to_string(Pipeline p) { return kPipelineNames[static_cast<int>(p)]; }

Pipeline parse_pipeline(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (name == kPipelineNames[i]) return static_cast<Pipeline>(i);
  throw ParseError("unknown pipeline \"" + name + "\"");
}

SystemConfig parse_config(const std::string& json_text) {
  const json root = parse_text(json_text);
  check_keys(root, "config", {"schema_version", "scenario", "experiment", "estimation"});
  check_version(root);
  return scenario_from_json(require(root, "scenario", "config"));
}

std::string serialize_config(const SystemConfig& config) {
  json root{{"schema_version", kConfigSchemaVersion}, {"scenario", scenario_json(config)}};
  return root.dump(2) + "\n";
}

ExperimentSpec parse_experiment(const std::string& json_text) {
  const json root = parse_text(json_text);
  check_keys(root, "config", {"schema_version", "scenario", "experiment", "estimation"});
  check_version(root);
  ExperimentSpec spec;
  spec.scenario = scenario_from_json(require(root, "scenario", "config"));
  if (auto it = root.find("estimation"); it != root.end()) spec.estimation = estimation_from_json(*it);
  auto it = root.find("experiment");
  if (it == root.end()) return spec;

  const json& e = *it;
  const std::string at = "experiment";
  check_keys(e, at, {"name", "pipeline", "sweep", "trials", "seed", "exact_channel", "ee_reference"});
  if (auto n = e.find("name"); n != e.end()) {
    if (!n->is_string()) fail(at + ".name", "expected a string");
    spec.name = n->get<std::string>();
  }
  if (auto p = e.find("pipeline"); p != e.end()) {
    if (!p->is_string()) fail(at + ".pipeline", "expected a string");
    spec.pipeline = parse_pipeline(p->get<std::string>());
  }
  spec.trials = int_or(e, "trials", spec.trials, at);
  if (spec.trials < 1) fail(at + ".trials", "must be at least 1");
  if (auto s = e.find("seed"); s != e.end()) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      fail(at + ".seed", "expected a non-negative integer");
    spec.seed = s->get<std::uint64_t>();
  }
  spec.exact_channel = bool_or(e, "exact_channel", spec.exact_channel, at);
  if (auto s = e.find("sweep"); s != e.end()) {
    const std::string sw = at + ".sweep";
    check_keys(*s, sw,
               {"snr_db", "data_modes", "training_modes", "training_carriers", "transmit_power_w",
                "rx_elements", "rings"});
    spec.sweep.snr_db = parse_list<double>(*s, "snr_db", sw);
    spec.sweep.data_modes = parse_list<int>(*s, "data_modes", sw);
    spec.sweep.training_modes = parse_list<int>(*s, "training_modes", sw);
    spec.sweep.training_carriers = parse_list<int>(*s, "training_carriers", sw);
    spec.sweep.transmit_power = parse_list<double>(*s, "transmit_power_w", sw);
    spec.sweep.rx_elements = parse_list<int>(*s, "rx_elements", sw);
    spec.sweep.rings = parse_list<int>(*s, "rings", sw);
    for (int v : spec.sweep.data_modes) if (v < 1) fail(sw + ".data_modes", "must be positive");
    for (int v : spec.sweep.training_modes) if (v < 1) fail(sw + ".training_modes", "must be positive");
    for (int v : spec.sweep.training_carriers) if (v < 1) fail(sw + ".training_carriers", "must be positive");
    for (double v : spec.sweep.transmit_power) if (v <= 0) fail(sw + ".transmit_power_w", "must be positive");
    for (int v : spec.sweep.rx_elements) if (v < 1) fail(sw + ".rx_elements", "must be positive");
    for (int v : spec.sweep.rings) if (v < 1) fail(sw + ".rings", "must be positive");
  }
  if (auto r = e.find("ee_reference"); r != e.end()) {
    const std::string rr = at + ".ee_reference";
    check_keys(*r, rr, {"snr_db", "transmit_power_w"});
    spec.ee_reference_snr_db = number_or(*r, "snr_db", spec.ee_reference_snr_db, rr);
    spec.ee_reference_power = number_or(*r, "transmit_power_w", spec.ee_reference_power, rr);
    if (spec.ee_reference_power <= 0) fail(rr + ".transmit_power_w", "must be positive");
  }
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentSpec spec = parse_experiment(ss.str());
  if (spec.name.empty()) {
    auto slash = path.find_last_of('/');
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) stem.resize(dot);
    spec.name = stem;
  }
  return spec;
}

std::string serialize_experiment(const ExperimentSpec& spec) {
  json sweep = json::object();
  if (!spec.sweep.snr_db.empty()) sweep["snr_db"] = spec.sweep.snr_db;
  if (!spec.sweep.data_modes.empty()) sweep["data_modes"] = spec.sweep.data_modes;
  if (!spec.sweep.training_modes.empty()) sweep["training_modes"] = spec.sweep.training_modes;
  if (!spec.sweep.training_carriers.empty()) sweep["training_carriers"] = spec.sweep.training_carriers;
  if (!spec.sweep.transmit_power.empty()) sweep["transmit_power_w"] = spec.sweep.transmit_power;
  if (!spec.sweep.rx_elements.empty()) sweep["rx_elements"] = spec.sweep.rx_elements;
  if (!spec.sweep.rings.empty()) sweep["rings"] = spec.sweep.rings;
  json e{{"name", spec.name},
         {"pipeline", to_string(spec.pipeline)},
         {"trials", spec.trials},
         {"seed", spec.seed},
         {"exact_channel", spec.exact_channel},
         {"sweep", sweep},
         {"ee_reference", {{"snr_db", spec.ee_reference_snr_db}, {"transmit_power_w", spec.ee_reference_power}}}};
  json root{{"schema_version", kConfigSchemaVersion},
            {"scenario", scenario_json(spec.scenario)},
            {"estimation", estimation_json(spec.estimation)},
            {"experiment", e}};
  return root.dump(2) + "\n";
}

std::uint64_t config_hash(const SystemConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct ArrayPlan {
  int rings = 1;
  int data_carriers = 64;
  int training_carriers = 64;
  int data_modes = 20;
  int training_modes = 20;
  int rx_elements = 21;
};

// Three users on 9 GHz, 1.48 MHz spacing, transmit rings at 30 lambda steps
// and receive rings at 15 lambda steps.
SystemConfig base_scenario(const ArrayPlan& plan) {
  const double f = 9e9;
  const double lambda = kSpeedOfLight / f;
  const int users = 3;
  SystemConfig c;
  for (int r = 1; r <= plan.rings; ++r)
    c.tx.rings.push_back(UcaGeometry{30.0 * r * lambda, users * plan.rx_elements, 0.0});
  const double range[3] = {12.0, 24.0, 36.0};
  const double elevation[3] = {18.0, 10.0, 2.0};
  const double azimuth[3] = {2.0, 10.0, 18.0};
  for (int p = 0; p < users; ++p) {
    UserConfig u;
    for (int r = 1; r <= plan.rings; ++r)
      u.array.rings.push_back(UcaGeometry{15.0 * r * lambda, plan.rx_elements, 0.0});
    u.placement = {range[p], deg2rad(elevation[p]), deg2rad(azimuth[p])};
    c.users.push_back(u);
  }
  c.carriers = build_carrier_grid(f, 1.48e6, plan.data_carriers, plan.training_carriers);
  c.modes.data_modes = contiguous_modes(plan.data_modes);
  c.modes.training_modes = contiguous_modes(plan.training_modes);
  c.coherence_symbols = 512;
  c.power = PowerModel{0.35, 0.2, 0.25, 0.02, 1.0, 190e6};
  return c;
}

std::vector<double> snr_range(double lo, double hi, double step) {
  std::vector<double> out;
  for (double s = lo; s <= hi + 1e-9; s += step) out.push_back(s);
  return out;
}

std::vector<double> power_range() {
  std::vector<double> out;
  for (int k = -12; k <= 4; ++k) out.push_back(std::pow(10.0, k / 4.0));
  return out;
}

ExperimentSpec make(const std::string& name, Pipeline pipeline, const ArrayPlan& plan) {
  ExperimentSpec s;
  s.name = name;
  s.pipeline = pipeline;
  s.scenario = base_scenario(plan);
  return s;
}

struct PresetEntry {
  const char* name;
  const char* description;
  ExperimentSpec (*build)();
};

const PresetEntry kPresets[] = {
    {"fig7", "3-user 9 GHz UCA estimation at 20 dB, U=U~=20, W=W~=64",
     [] {
       auto s = make("fig7", Pipeline::estimate, {});
       s.sweep.snr_db = {20.0};
       return s;
     }},
    {"fig8", "estimation NMSE vs SNR 0..30 dB for U~ in {12,16,20}, W~=64",
     [] {
       auto s = make("fig8", Pipeline::estimate, {});
       s.sweep.snr_db = snr_range(0, 30, 5);
       s.sweep.training_modes = {12, 16, 20};
       s.trials = 10;
       return s;
     }},
    {"fig9", "estimation NMSE vs U~ at SNR=15 dB, W~=64",
     [] {
       auto s = make("fig9", Pipeline::estimate, {});
       s.sweep.snr_db = {15.0};
       s.sweep.training_modes = {8, 10, 12, 14, 16, 18, 20};
       s.trials = 10;
       return s;
     }},
    {"fig10", "estimation NMSE vs W~ at SNR=15 dB, U~=20",
     [] {
       auto s = make("fig10", Pipeline::estimate, {});
       s.sweep.snr_db = {15.0};
       s.sweep.training_carriers = {16, 24, 32, 40, 48, 56, 64};
       s.trials = 10;
       return s;
     }},
    {"fig11", "BER vs SNR for U in {20,16} data modes and U~ in {20,16} training modes",
     [] {
       auto s = make("fig11", Pipeline::ber, {});
       s.sweep.snr_db = snr_range(0, 25, 5);
       s.sweep.data_modes = {20, 16};
       s.sweep.training_modes = {20, 16};
       s.trials = 131;
       return s;
     }},
    {"fig12", "UCA SE vs SNR, T_c=512, W=128, W~=64, U and U~ in {16,20}, identity and ideal curves",
     [] {
       ArrayPlan plan;
       plan.data_carriers = 128;
       auto s = make("fig12", Pipeline::se, plan);
       s.sweep.snr_db = snr_range(0, 30, 5);
       s.sweep.data_modes = {16, 20};
       s.sweep.training_modes = {16, 20};
       return s;
     }},
    {"fig13", "UCCA SE vs SNR with 4 rings, M=21, P=3, T_c=512, W=128, W~=64, ZF MU-MIMO baseline",
     [] {
       ArrayPlan plan;
       plan.rings = 4;
       plan.data_carriers = 128;
       auto s = make("fig13", Pipeline::se, plan);
       s.sweep.snr_db = snr_range(0, 30, 5);
       return s;
     }},
    {"fig14a", "UCA EE vs transmit power, B=190 MHz, W=128, rho=0.35, U and U~ in {16,20}",
     [] {
       ArrayPlan plan;
       plan.data_carriers = 128;
       auto s = make("fig14a", Pipeline::ee, plan);
       s.sweep.transmit_power = power_range();
       s.sweep.data_modes = {16, 20};
       s.sweep.training_modes = {16, 20};
       return s;
     }},
    {"fig14b", "UCCA EE vs transmit power with 4 rings against ZF MU-MIMO, B=190 MHz, rho=0.35",
     [] {
       ArrayPlan plan;
       plan.rings = 4;
       plan.data_carriers = 128;
       auto s = make("fig14b", Pipeline::ee, plan);
       s.sweep.transmit_power = power_range();
       return s;
     }},
    {"table1", "operation counts, W=128, W~=64, U=U~=30, P=3, 4 rings, M=32, swept over M and rings",
     [] {
       ArrayPlan plan;
       plan.rings = 4;
       plan.data_carriers = 128;
       plan.data_modes = 30;
       plan.training_modes = 30;
       plan.rx_elements = 32;
       auto s = make("table1", Pipeline::complexity, plan);
       s.sweep.rx_elements = {8, 16, 24, 32, 40, 48, 56, 64};
       s.sweep.rings = {1, 2, 3, 4};
       return s;
     }},
};

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& p : kPresets) out.push_back({p.name, p.description});
  return out;
}

ExperimentSpec preset(const std::string& name) {
  for (const auto& p : kPresets)
    if (name == p.name) return p.build();
  throw ParseError("unknown preset \"" + name + "\"");
}

}  // namespace oam
