// SPDX-License-Identifier: Apache-2.0
#include "mecp/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mecp {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + path + key + "'");
    }
  }
}

double get_number(const json& j, const std::string& path, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw ConfigError("'" + path + key + "' must be a number");
  return j[key].get<double>();
}

unsigned get_unsigned(const json& j, const std::string& path, const char* key,
                      unsigned dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_unsigned()) {
    throw ConfigError("'" + path + key + "' must be a nonnegative integer");
  }
  return j[key].get<unsigned>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_boolean()) throw ConfigError("'" + path + key + "' must be a boolean");
  return j[key].get<bool>();
}

MobilityModel mobility_model_from_string(const std::string& s) {
  if (s == "static") return MobilityModel::static_model;
  if (s == "constant_velocity") return MobilityModel::constant_velocity;
  if (s == "random_waypoint") return MobilityModel::random_waypoint;
  throw ConfigError("'mobility.model' must be static|constant_velocity|random_waypoint");
}

const char* mobility_model_to_string(MobilityModel m) {
  switch (m) {
    case MobilityModel::static_model: return "static";
    case MobilityModel::constant_velocity: return "constant_velocity";
    case MobilityModel::random_waypoint: return "random_waypoint";
  }
  return "random_waypoint";
}

CostMode cost_mode_from_string(const std::string& s) {
  if (s == "inverse_degree") return CostMode::inverse_degree;
  if (s == "degree") return CostMode::degree;
  if (s == "ccf") return CostMode::ccf;
  throw ConfigError("'protocol.cost_mode' must be inverse_degree|degree|ccf");
}

const char* cost_mode_to_string(CostMode m) {
  switch (m) {
    case CostMode::inverse_degree: return "inverse_degree";
    case CostMode::degree: return "degree";
    case CostMode::ccf: return "ccf";
  }
  return "inverse_degree";
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed scenario document: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario document must be a JSON object");

  reject_unknown_keys(j, "", {"node_count", "world", "sink", "mobility", "power_table",
                              "energy", "protocol", "schedule", "rounds", "p_loss",
                              "data_bits", "control_bits", "guards_enabled", "failures",
                              "crash_ch_frame", "seeds", "output_dir", "trace"});

  ScenarioConfig cfg;
  SimParams& p = cfg.params;
  p.node_count = get_unsigned(j, "", "node_count", 100);

  if (j.contains("world")) {
    const json& w = j["world"];
    reject_unknown_keys(w, "world.", {"width", "height"});
    p.world_w = get_number(w, "world.", "width", 200.0);
    p.world_h = get_number(w, "world.", "height", 200.0);
  }
  p.mobility.world_w = p.world_w;
  p.mobility.world_h = p.world_h;

  if (j.contains("sink")) {
    const json& s = j["sink"];
    reject_unknown_keys(s, "sink.", {"x", "y"});
    p.sink = {get_number(s, "sink.", "x", p.world_w / 2.0),
              get_number(s, "sink.", "y", p.world_h / 2.0)};
  } else {
    p.sink = {p.world_w / 2.0, p.world_h / 2.0};
  }

  if (j.contains("mobility")) {
    const json& m = j["mobility"];
    reject_unknown_keys(m, "mobility.",
                        {"model", "v_min", "v_max", "pause_time", "sense_noise_std"});
    if (m.contains("model")) {
      if (!m["model"].is_string()) throw ConfigError("'mobility.model' must be a string");
      p.mobility.model = mobility_model_from_string(m["model"].get<std::string>());
    }
    p.mobility.v_min = get_number(m, "mobility.", "v_min", 0.0);
    p.mobility.v_max = get_number(m, "mobility.", "v_max", 5.0);
    p.mobility.pause_time = get_number(m, "mobility.", "pause_time", 0.0);
    p.sense_noise_std = get_number(m, "mobility.", "sense_noise_std", 0.0);
  }

  if (j.contains("power_table")) {
    const json& t = j["power_table"];
    reject_unknown_keys(t, "power_table.",
                        {"levels", "intra_max_level", "inter_min_level"});
    if (t.contains("levels")) {
      if (!t["levels"].is_array() || t["levels"].empty()) {
        throw ConfigError("'power_table.levels' must be a nonempty array");
      }
      p.table.levels.clear();
      for (const auto& lvl : t["levels"]) {
        reject_unknown_keys(lvl, "power_table.levels[].", {"power_mw", "range_m"});
        if (!lvl.contains("power_mw") || !lvl.contains("range_m")) {
          throw ConfigError("'power_table.levels[]' needs power_mw and range_m");
        }
        p.table.levels.push_back(
            {lvl["power_mw"].get<double>(), lvl["range_m"].get<double>()});
      }
    }
    p.table.intra_max_level =
        get_unsigned(t, "power_table.", "intra_max_level",
                     static_cast<unsigned>(p.table.intra_max_level));
    p.table.inter_min_level =
        get_unsigned(t, "power_table.", "inter_min_level",
                     static_cast<unsigned>(p.table.inter_min_level));
  }

  if (j.contains("energy")) {
    const json& e = j["energy"];
    reject_unknown_keys(e, "energy.",
                        {"e_max_j", "e_elec_j_per_bit", "eps_amp_j_per_bit_m2",
                         "idle_j_per_round"});
    p.energy.e_max = get_number(e, "energy.", "e_max_j", 2.0);
    p.energy.e_elec = get_number(e, "energy.", "e_elec_j_per_bit", 50e-9);
    p.energy.eps_amp = get_number(e, "energy.", "eps_amp_j_per_bit_m2", 100e-12);
    p.energy.idle_per_round = get_number(e, "energy.", "idle_j_per_round", 0.0);
  }
  p.protocol.e_max = p.energy.e_max;

  if (j.contains("protocol")) {
    const json& pr = j["protocol"];
    reject_unknown_keys(pr, "protocol.",
                        {"k_fraction", "p_min", "cost_mode", "heed_mode", "va_threshold",
                         "ach_enabled"});
    p.protocol.k_fraction = get_number(pr, "protocol.", "k_fraction", 0.1);
    p.protocol.p_min = get_number(pr, "protocol.", "p_min", 1.0 / 1024.0);
    if (pr.contains("cost_mode")) {
      if (!pr["cost_mode"].is_string()) {
        throw ConfigError("'protocol.cost_mode' must be a string");
      }
      p.protocol.cost_mode = cost_mode_from_string(pr["cost_mode"].get<std::string>());
    }
    p.protocol.heed_mode = get_bool(pr, "protocol.", "heed_mode", false);
    p.protocol.va_threshold = get_number(pr, "protocol.", "va_threshold", 1.0);
    p.protocol.ach_enabled = get_bool(pr, "protocol.", "ach_enabled", true);
  }

  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    reject_unknown_keys(s, "schedule.",
                        {"t_cluster_s", "t_p_s", "frames_per_round", "ack_timeout_s"});
    p.schedule.t_cluster = get_number(s, "schedule.", "t_cluster_s", 1.0);
    p.schedule.t_p = get_number(s, "schedule.", "t_p_s", 10.0);
    p.schedule.frames_per_round = get_unsigned(s, "schedule.", "frames_per_round", 10);
    p.schedule.ack_timeout = get_number(s, "schedule.", "ack_timeout_s", 1.0);
  }

  p.rounds = get_unsigned(j, "", "rounds", 20);
  p.p_loss = get_number(j, "", "p_loss", 0.0);
  p.data_bits = get_unsigned(j, "", "data_bits", 2000);
  p.control_bits = get_unsigned(j, "", "control_bits", 200);
  p.guards_enabled = get_bool(j, "", "guards_enabled", true);

  if (j.contains("failures")) {
    if (!j["failures"].is_array()) throw ConfigError("'failures' must be an array");
    for (const auto& f : j["failures"]) {
      reject_unknown_keys(f, "failures[].", {"node", "time_s", "mode"});
      if (!f.contains("node") || !f.contains("time_s")) {
        throw ConfigError("'failures[]' needs node and time_s");
      }
      FailureInjection inj;
      inj.node = f["node"].get<NodeId>();
      inj.time = f["time_s"].get<double>();
      const std::string mode = f.value("mode", std::string("crash"));
      if (mode == "crash") {
        inj.mode = FailureMode::crash;
      } else if (mode == "drain") {
        inj.mode = FailureMode::drain;
      } else {
        throw ConfigError("'failures[].mode' must be crash|drain");
      }
      p.injections.push_back(inj);
    }
  }

  if (j.contains("crash_ch_frame")) {
    p.crash_ch_frame = get_unsigned(j, "", "crash_ch_frame", 0);
  }

  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty()) {
      throw ConfigError("'seeds' must be a nonempty array");
    }
    cfg.seeds.clear();
    for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  cfg.trace_enabled = get_bool(j, "", "trace", true);

  validate_scenario(cfg);
  return cfg;
}

void validate_scenario(const ScenarioConfig& cfg) {
  const SimParams& p = cfg.params;
  if (p.node_count == 0) throw ConfigError("'node_count' must be positive");
  if (p.world_w <= 0.0 || p.world_h <= 0.0) throw ConfigError("'world' dimensions must be positive");
  if (p.protocol.k_fraction <= 0.0 || p.protocol.k_fraction > 1.0) {
    throw ConfigError("'protocol.k_fraction' out of range (0,1]");
  }
  if (p.protocol.p_min <= 0.0 || p.protocol.p_min > 1.0) {
    throw ConfigError("'protocol.p_min' out of range (0,1]");
  }
  if (p.protocol.p_min > p.protocol.k_fraction) {
    throw ConfigError("'protocol.p_min' must not exceed k_fraction");
  }
  if (p.protocol.va_threshold <= 0.0) throw ConfigError("'protocol.va_threshold' must be positive");
  if (p.mobility.v_min < 0.0 || p.mobility.v_min > p.mobility.v_max) {
    throw ConfigError("'mobility': need 0 <= v_min <= v_max");
  }
  if (p.sense_noise_std < 0.0) throw ConfigError("'mobility.sense_noise_std' must be >= 0");
  try {
    p.table.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("'power_table': ") + e.what());
  }
  if (p.energy.e_max <= 0.0) throw ConfigError("'energy.e_max_j' must be positive");
  if (p.schedule.t_cluster <= 0.0 || p.schedule.t_p <= 0.0 ||
      p.schedule.ack_timeout <= 0.0 || p.schedule.frames_per_round == 0) {
    throw ConfigError("'schedule' values must be positive");
  }
  if (p.p_loss < 0.0 || p.p_loss > 1.0) throw ConfigError("'p_loss' out of range [0,1]");
  if (p.data_bits == 0 || p.control_bits == 0) throw ConfigError("packet sizes must be positive");
  if (p.crash_ch_frame && *p.crash_ch_frame >= p.schedule.frames_per_round) {
    throw ConfigError("'crash_ch_frame' must be below frames_per_round");
  }
  for (const auto& inj : p.injections) {
    if (inj.node >= p.node_count) throw ConfigError("'failures[].node' out of range");
    if (inj.time < 0.0) throw ConfigError("'failures[].time_s' must be >= 0");
  }
  if (cfg.seeds.empty()) throw ConfigError("'seeds' must be nonempty");
}

std::string emit_scenario(const ScenarioConfig& cfg) {
  const SimParams& p = cfg.params;
  json j;
  j["node_count"] = p.node_count;
  j["world"] = {{"width", p.world_w}, {"height", p.world_h}};
  j["sink"] = {{"x", p.sink.x}, {"y", p.sink.y}};
  j["mobility"] = {{"model", mobility_model_to_string(p.mobility.model)},
                   {"v_min", p.mobility.v_min},
                   {"v_max", p.mobility.v_max},
                   {"pause_time", p.mobility.pause_time},
                   {"sense_noise_std", p.sense_noise_std}};
  json levels = json::array();
  for (const auto& lvl : p.table.levels) {
    levels.push_back({{"power_mw", lvl.power_mw}, {"range_m", lvl.range_m}});
  }
  j["power_table"] = {{"levels", levels},
                      {"intra_max_level", p.table.intra_max_level},
                      {"inter_min_level", p.table.inter_min_level}};
  j["energy"] = {{"e_max_j", p.energy.e_max},
                 {"e_elec_j_per_bit", p.energy.e_elec},
                 {"eps_amp_j_per_bit_m2", p.energy.eps_amp},
                 {"idle_j_per_round", p.energy.idle_per_round}};
  j["protocol"] = {{"k_fraction", p.protocol.k_fraction},
                   {"p_min", p.protocol.p_min},
                   {"cost_mode", cost_mode_to_string(p.protocol.cost_mode)},
                   {"heed_mode", p.protocol.heed_mode},
                   {"va_threshold", p.protocol.va_threshold},
                   {"ach_enabled", p.protocol.ach_enabled}};
  j["schedule"] = {{"t_cluster_s", p.schedule.t_cluster},
                   {"t_p_s", p.schedule.t_p},
                   {"frames_per_round", p.schedule.frames_per_round},
                   {"ack_timeout_s", p.schedule.ack_timeout}};
  j["rounds"] = p.rounds;
  j["p_loss"] = p.p_loss;
  j["data_bits"] = p.data_bits;
  j["control_bits"] = p.control_bits;
  j["guards_enabled"] = p.guards_enabled;
  json failures = json::array();
  for (const auto& inj : p.injections) {
    failures.push_back({{"node", inj.node},
                        {"time_s", inj.time},
                        {"mode", inj.mode == FailureMode::crash ? "crash" : "drain"}});
  }
  j["failures"] = failures;
  if (p.crash_ch_frame) j["crash_ch_frame"] = *p.crash_ch_frame;
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  j["trace"] = cfg.trace_enabled;
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace mecp
