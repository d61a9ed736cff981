#include "mpemba/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace mpemba {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at '" + path + "': " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required key");
  return *it;
}

double get_number(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const std::string& path, const char* key, double dflt) {
  auto it = obj.find(key);
  if (it == obj.end()) return dflt;
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

int get_int_or(const json& obj, const std::string& path, const char* key, int dflt) {
  auto it = obj.find(key);
  if (it == obj.end()) return dflt;
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  return it->get<int>();
}

std::string get_string_or(const json& obj, const std::string& path, const char* key,
                          const std::string& dflt) {
  auto it = obj.find(key);
  if (it == obj.end()) return dflt;
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

std::vector<double> get_vector(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : v) {
    if (!item.is_number()) fail(path + "." + key, "expected an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

RiverProfile parse_river(const json& block, const std::string& path) {
  check_keys(block, path, {"family", "params"});
  const json& fam = require(block, path, "family");
  if (!fam.is_string()) fail(path + ".family", "expected a string");
  const std::string name = fam.get<std::string>();
  const json empty = json::object();
  const json& params = block.contains("params") ? block["params"] : empty;
  const std::string ppath = path + ".params";
  if (name == "polynomial") {
    check_keys(params, ppath, {"coeffs"});
    return PolynomialProfile{get_vector(params, ppath, "coeffs")};
  }
  if (name == "quartic-double-well") {
    check_keys(params, ppath, {"h", "w"});
    return QuarticDoubleWell{get_number(params, ppath, "h"), get_number_or(params, ppath, "w", 1.0)};
  }
  if (name == "tabulated") {
    check_keys(params, ppath, {"ys", "values"});
    return TabulatedProfile{get_vector(params, ppath, "ys"), get_vector(params, ppath, "values")};
  }
  fail(path + ".family", "unknown river profile family '" + name + "'");
}

CurvatureProfile parse_curvature(const json& block, const std::string& path) {
  check_keys(block, path, {"family", "params"});
  const json& fam = require(block, path, "family");
  if (!fam.is_string()) fail(path + ".family", "expected a string");
  const std::string name = fam.get<std::string>();
  const json empty = json::object();
  const json& params = block.contains("params") ? block["params"] : empty;
  const std::string ppath = path + ".params";
  if (name == "constant") {
    check_keys(params, ppath, {"a0"});
    return ConstantCurvature{get_number(params, ppath, "a0")};
  }
  if (name == "exponential") {
    check_keys(params, ppath, {"a0", "beta"});
    return ExponentialCurvature{get_number(params, ppath, "a0"), get_number(params, ppath, "beta")};
  }
  if (name == "polynomial") {
    check_keys(params, ppath, {"coeffs"});
    return PolynomialCurvature{get_vector(params, ppath, "coeffs")};
  }
  if (name == "tabulated") {
    check_keys(params, ppath, {"ys", "values"});
    return TabulatedCurvature{get_vector(params, ppath, "ys"), get_vector(params, ppath, "values")};
  }
  fail(path + ".family", "unknown curvature family '" + name + "'");
}

LandscapeSpec parse_landscape(const json& block, const std::string& path) {
  if (block.contains("preset")) {
    check_keys(block, path, {"preset"});
    const json& p = block["preset"];
    if (!p.is_string()) fail(path + ".preset", "expected a string");
    return make_preset(p.get<std::string>());
  }
  check_keys(block, path, {"c", "a", "domain"});
  LandscapeSpec spec;
  spec.c = parse_river(require(block, path, "c"), path + ".c");
  spec.a = parse_curvature(require(block, path, "a"), path + ".a");
  const std::vector<double> domain = get_vector(block, path, "domain");
  if (domain.size() != 2 || !(domain[0] < domain[1])) {
    fail(path + ".domain", "expected [y_min, y_max] with y_min < y_max");
  }
  spec.y_min = domain[0];
  spec.y_max = domain[1];
  return spec;
}

TimeConvention parse_convention(const json& obj, const std::string& path) {
  const std::string s = get_string_or(obj, path, "time_convention", "rescaled");
  if (s == "rescaled") return TimeConvention::kRescaled;
  if (s == "unscaled") return TimeConvention::kUnscaled;
  fail(path + ".time_convention", "expected 'rescaled' or 'unscaled'");
}

SimBlock parse_sim(const json& block, const std::string& path) {
  check_keys(block, path,
             {"n_particles", "dt", "t_end", "seed", "time_convention", "histogram_bins", "init",
              "x_max", "n_instants", "n_workers", "n_batches", "engine", "protocol", "eta_h",
              "eta_l"});
  SimBlock sim;
  sim.cfg.n_particles = get_int_or(block, path, "n_particles", sim.cfg.n_particles);
  sim.cfg.dt = get_number_or(block, path, "dt", sim.cfg.dt);
  sim.cfg.t_end = get_number_or(block, path, "t_end", sim.cfg.t_end);
  if (block.contains("seed")) {
    if (!block["seed"].is_number_unsigned() && !block["seed"].is_number_integer()) {
      fail(path + ".seed", "expected an integer");
    }
    sim.cfg.seed = block["seed"].get<uint64_t>();
  }
  sim.cfg.time_convention = parse_convention(block, path);
  sim.cfg.histogram_bins = get_int_or(block, path, "histogram_bins", sim.cfg.histogram_bins);
  sim.cfg.x_max = get_number_or(block, path, "x_max", sim.cfg.x_max);
  sim.cfg.n_instants = get_int_or(block, path, "n_instants", sim.cfg.n_instants);
  sim.cfg.n_workers = get_int_or(block, path, "n_workers", sim.cfg.n_workers);
  sim.cfg.n_batches = get_int_or(block, path, "n_batches", sim.cfg.n_batches);

  if (block.contains("init")) {
    const json& init = block["init"];
    const std::string ipath = path + ".init";
    check_keys(init, ipath, {"kind", "x0", "y0", "eta"});
    const std::string kind = get_string_or(init, ipath, "kind", "stationary");
    if (kind == "point") {
      sim.cfg.init = InitKind::kPoint;
      sim.cfg.init_x = get_number_or(init, ipath, "x0", 0.0);
      sim.cfg.init_y = get_number_or(init, ipath, "y0", 0.0);
    } else if (kind == "stationary") {
      sim.cfg.init = InitKind::kStationary;
      sim.cfg.init_eta = get_number(init, ipath, "eta");
    } else {
      fail(ipath + ".kind", "expected 'point' or 'stationary'");
    }
  }

  const std::string engine = get_string_or(block, path, "engine", "1d");
  if (engine == "1d") {
    sim.engine = MpembaExperimentOptions::Engine::kEffective1d;
  } else if (engine == "2d") {
    sim.engine = MpembaExperimentOptions::Engine::kFull2d;
  } else {
    fail(path + ".engine", "expected '1d' or '2d'");
  }

  if (block.contains("protocol")) {
    const json& proto = block["protocol"];
    const std::string qpath = path + ".protocol";
    check_keys(proto, qpath, {"type", "eta", "eta_start", "t_q"});
    sim.protocol_type = get_string_or(proto, qpath, "type", "constant");
    if (sim.protocol_type == "constant") {
      sim.protocol_eta = get_number(proto, qpath, "eta");
    } else if (sim.protocol_type == "quench") {
      sim.quench_eta_start = get_number(proto, qpath, "eta_start");
      sim.protocol_eta = get_number(proto, qpath, "eta");
      sim.quench_t = get_number(proto, qpath, "t_q");
    } else {
      fail(qpath + ".type", "expected 'constant' or 'quench'");
    }
  }
  sim.eta_h = get_number_or(block, path, "eta_h", 0.0);
  sim.eta_l = get_number_or(block, path, "eta_l", 0.0);
  return sim;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config error at '': expected a JSON object");
  check_keys(root, "", {"landscape", "grid", "eta_b", "scan", "schedule", "sim", "output"});

  ExperimentConfig cfg;
  cfg.landscape = parse_landscape(require(root, "", "landscape"), "landscape");
  if (root.contains("grid")) {
    const json& grid = root["grid"];
    check_keys(grid, "grid", {"n_points"});
    cfg.grid_points = get_int_or(grid, "grid", "n_points", cfg.grid_points);
    if (cfg.grid_points < 16) fail("grid.n_points", "must be >= 16");
  }
  cfg.eta_b = get_number(root, "", "eta_b");
  if (!(cfg.eta_b > 0.0)) fail("eta_b", "must be > 0");

  if (root.contains("scan")) {
    const json& scan = root["scan"];
    check_keys(scan, "scan", {"eta_min", "eta_max", "n_samples"});
    ScanBlock sb;
    sb.eta_min = get_number(scan, "scan", "eta_min");
    sb.eta_max = get_number(scan, "scan", "eta_max");
    sb.n_samples = get_int_or(scan, "scan", "n_samples", sb.n_samples);
    if (!(sb.eta_min > cfg.eta_b)) {
      fail("scan.eta_min", "must exceed eta_b (the scan range sits above the bath rate)");
    }
    if (!(sb.eta_max > sb.eta_min)) fail("scan.eta_max", "must exceed scan.eta_min");
    cfg.scan = sb;
  }

  if (root.contains("schedule")) {
    const json& sch = root["schedule"];
    check_keys(sch, "schedule",
               {"a", "k", "eta_star", "warmup", "r_low", "r_high", "horizon", "n_check",
                "steps_per_unit_time"});
    ScheduleBlock sb;
    sb.a = get_number_or(sch, "schedule", "a", sb.a);
    sb.k = get_number_or(sch, "schedule", "k", sb.k);
    sb.eta_star = get_number_or(sch, "schedule", "eta_star", sb.eta_star);
    sb.warmup = get_number_or(sch, "schedule", "warmup", sb.warmup);
    sb.r_low = get_number_or(sch, "schedule", "r_low", sb.r_low);
    sb.r_high = get_number_or(sch, "schedule", "r_high", sb.r_high);
    sb.horizon = get_number_or(sch, "schedule", "horizon", sb.horizon);
    sb.n_check = get_int_or(sch, "schedule", "n_check", sb.n_check);
    sb.steps_per_unit_time =
        get_number_or(sch, "schedule", "steps_per_unit_time", sb.steps_per_unit_time);
    cfg.schedule = sb;
  }

  if (root.contains("sim")) {
    cfg.sim = parse_sim(root["sim"], "sim");
  }

  if (root.contains("output")) {
    const json& out = root["output"];
    check_keys(out, "output", {"directory", "formats"});
    cfg.output.directory = get_string_or(out, "output", "directory", cfg.output.directory);
    if (out.contains("formats")) {
      if (!out["formats"].is_array()) fail("output.formats", "expected an array of strings");
      cfg.output.csv = cfg.output.json = cfg.output.svg = false;
      for (const auto& f : out["formats"]) {
        if (!f.is_string()) fail("output.formats", "expected an array of strings");
        const std::string s = f.get<std::string>();
        if (s == "csv") {
          cfg.output.csv = true;
        } else if (s == "json") {
          cfg.output.json = true;
        } else if (s == "svg") {
          cfg.output.svg = true;
        } else {
          fail("output.formats", "unknown format '" + s + "'");
        }
      }
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace mpemba
