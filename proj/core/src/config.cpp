#include "qswitch/config.hpp"

#include <charconv>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qswitch/error.hpp"

namespace qswitch {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Spectrum: return "spectrum";
    case Experiment::Evolve: return "evolve";
    case Experiment::Shape: return "shape";
    case Experiment::Qudit: return "qudit";
    case Experiment::Scan: return "scan";
    case Experiment::Capture: return "capture";
  }
  return "?";
}

std::string to_string(ScanKind k) {
  switch (k) {
    case ScanKind::Confinement: return "confinement";
    case ScanKind::LeakageMap: return "leakage_map";
    case ScanKind::Dissipation: return "dissipation";
    case ScanKind::Passive: return "passive";
  }
  return "?";
}

namespace {

struct Entry {
  std::string value;
  int line;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

double to_number(const std::string& text, int line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    parse_fail(line, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(v)) parse_fail(line, "value must be finite");
  return v;
}

int to_int(const std::string& text, int line) {
  int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    parse_fail(line, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& text, int line) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_number(trim(item), line));
  if (text.back() == ',') parse_fail(line, "trailing comma in list");
  return out;
}

bool to_bool(const std::string& text, int line) {
  if (text == "true") return true;
  if (text == "false") return false;
  parse_fail(line, "expected true or false, got '" + text + "'");
}

template <class E>
E to_enum(const std::string& text, int line, const std::map<std::string, E>& names) {
  const auto it = names.find(text);
  if (it == names.end()) {
    std::string allowed;
    for (const auto& [k, v] : names) allowed += (allowed.empty() ? "" : ", ") + k;
    parse_fail(line, "'" + text + "' is not one of: " + allowed);
  }
  return it->second;
}

Knob to_knob(const std::string& text, int line) {
  return to_enum<Knob>(text, line, {{"Delta_q", Knob::DeltaQ}, {"Delta_s", Knob::DeltaS}});
}

// Keys whose values are rates or detunings; scaled by 1/kappa_sq_hz in
// physical-unit mode.
const std::set<std::string>& frequency_keys() {
  static const std::set<std::string> keys{
      "g_s",          "g_q",          "kappa_sq",     "kappa_wq",    "delta_q",
      "Delta_s",      "Delta_q",      "kappa_s",      "kappa_q",     "gamma_s",
      "gamma_q",      "Omega_s",      "delta_s_i",    "spectrum_min", "spectrum_max",
      "sweep_values", "scan_values",  "scan_Delta_q", "scan_delta_q"};
  return keys;
}

using Setter = std::function<void(RunConfig&, const std::string&, int, double scale)>;

const std::map<std::string, Setter>& setters() {
  auto number = [](double RunConfig::*field) {
    return [field](RunConfig& c, const std::string& v, int line, double scale) {
      c.*field = to_number(v, line) * scale;
    };
  };
  auto scenario = [](double ScenarioParams::*field) {
    return [field](RunConfig& c, const std::string& v, int line, double scale) {
      c.scenario.*field = to_number(v, line) * scale;
    };
  };
  auto scenario_list = [](std::vector<double> ScenarioParams::*field) {
    return [field](RunConfig& c, const std::string& v, int line, double scale) {
      auto list = to_list(v, line);
      for (auto& x : list) x *= scale;
      c.scenario.*field = std::move(list);
    };
  };
  auto list = [](std::vector<double> RunConfig::*field) {
    return [field](RunConfig& c, const std::string& v, int line, double scale) {
      auto values = to_list(v, line);
      for (auto& x : values) x *= scale;
      c.*field = std::move(values);
    };
  };
  auto integrator = [](double IntegratorSettings::*field) {
    return [field](RunConfig& c, const std::string& v, int line, double) {
      c.integrator.*field = to_number(v, line);
    };
  };
  auto timing = [](double QuditTiming::*field) {
    return [field](RunConfig& c, const std::string& v, int line, double) {
      c.qudit.*field = to_number(v, line);
    };
  };

  static const std::map<std::string, Setter> table{
      {"experiment",
       [](RunConfig& c, const std::string& v, int line, double) {
         c.experiment = to_enum<Experiment>(v, line,
                                            {{"spectrum", Experiment::Spectrum},
                                             {"evolve", Experiment::Evolve},
                                             {"shape", Experiment::Shape},
                                             {"qudit", Experiment::Qudit},
                                             {"scan", Experiment::Scan},
                                             {"capture", Experiment::Capture}});
       }},
      {"name", [](RunConfig& c, const std::string& v, int line, double) {
         if (v.empty() || v.find_first_of("/\\") != std::string::npos) {
           parse_fail(line, "name must be a plain file stem");
         }
         c.name = v;
       }},
      {"g_s", scenario(&ScenarioParams::g_s)},
      {"g_q", scenario(&ScenarioParams::g_q)},
      {"kappa_sq", scenario(&ScenarioParams::kappa_sq)},
      {"kappa_wq", scenario(&ScenarioParams::kappa_wq)},
      {"delta_q", scenario(&ScenarioParams::delta_q)},
      {"Delta_s", scenario(&ScenarioParams::Delta_s)},
      {"Delta_q", scenario(&ScenarioParams::Delta_q)},
      {"kappa_s", scenario(&ScenarioParams::kappa_s)},
      {"kappa_q", scenario(&ScenarioParams::kappa_q)},
      {"gamma_s", scenario(&ScenarioParams::gamma_s)},
      {"gamma_q", scenario(&ScenarioParams::gamma_q)},
      {"levels_s", [](RunConfig& c, const std::string& v, int line, double) {
         c.scenario.levels_s = to_int(v, line);
       }},
      {"Omega_s", scenario_list(&ScenarioParams::Omega_s)},
      {"delta_s_i", scenario_list(&ScenarioParams::delta_s_i)},

      {"integrator", [](RunConfig& c, const std::string& v, int line, double) {
         c.integrator.method = to_enum<IntegratorSettings::Method>(
             v, line,
             {{"rk4", IntegratorSettings::Method::RK4},
              {"dopri5", IntegratorSettings::Method::DormandPrince}});
       }},
      {"t_end", integrator(&IntegratorSettings::t_end)},
      {"dt", integrator(&IntegratorSettings::dt)},
      {"rel_tol", integrator(&IntegratorSettings::rel_tol)},
      {"abs_tol", integrator(&IntegratorSettings::abs_tol)},
      {"sample_interval", integrator(&IntegratorSettings::sample_interval)},

      {"spectrum_knob", [](RunConfig& c, const std::string& v, int line, double) {
         c.spectrum_knob = to_knob(v, line);
       }},
      {"spectrum_min", number(&RunConfig::spectrum_min)},
      {"spectrum_max", number(&RunConfig::spectrum_max)},
      {"spectrum_points", [](RunConfig& c, const std::string& v, int line, double) {
         c.spectrum_points = to_int(v, line);
       }},

      {"sweep_knob", [](RunConfig& c, const std::string& v, int line, double) {
         c.sweep_knob = to_knob(v, line);
       }},
      {"sweep_times", list(&RunConfig::sweep_times)},
      {"sweep_values", list(&RunConfig::sweep_values)},
      {"initial", [](RunConfig& c, const std::string& v, int line, double) {
         c.initial = to_enum<InitialState>(v, line,
                                           {{"storage_branch", InitialState::StorageBranch},
                                            {"photon_s", InitialState::PhotonS},
                                            {"ground", InitialState::Ground}});
       }},
      {"initial_branch", [](RunConfig& c, const std::string& v, int line, double) {
         c.initial_branch = to_int(v, line);
       }},

      {"sweep_T", number(&RunConfig::sweep_T)},
      {"sweep_endpoint_fraction", number(&RunConfig::sweep_endpoint_fraction)},
      {"hold_max", number(&RunConfig::hold_max)},
      {"reconstruct", [](RunConfig& c, const std::string& v, int line, double) {
         c.reconstruct = to_bool(v, line);
       }},
      {"reconstruct_iterations", [](RunConfig& c, const std::string& v, int line, double) {
         c.reconstruction.iterations = to_int(v, line);
       }},
      {"reconstruct_width", [](RunConfig& c, const std::string& v, int line, double) {
         c.reconstruction.target_width = to_number(v, line);
       }},
      {"reconstruct_width_factor", [](RunConfig& c, const std::string& v, int line, double) {
         c.reconstruction.width_factor = to_number(v, line);
       }},

      {"qudit_coefficients", list(&RunConfig::qudit_coefficients)},
      {"qudit_hold_off", timing(&QuditTiming::hold_off)},
      {"qudit_leg", timing(&QuditTiming::leg)},
      {"qudit_overshoot", timing(&QuditTiming::overshoot)},
      {"qudit_hold_end", timing(&QuditTiming::hold_end)},
      {"qudit_transit", timing(&QuditTiming::transit)},
      {"qudit_switch_branch", [](RunConfig& c, const std::string& v, int line, double) {
         c.qudit.switch_branch = to_enum<DressedBranch>(
             v, line, {{"plus", DressedBranch::Plus}, {"minus", DressedBranch::Minus}});
       }},
      {"qudit_threshold", number(&RunConfig::qudit_threshold)},

      {"scan_kind", [](RunConfig& c, const std::string& v, int line, double) {
         c.scan_kind = to_enum<ScanKind>(v, line,
                                         {{"confinement", ScanKind::Confinement},
                                          {"leakage_map", ScanKind::LeakageMap},
                                          {"dissipation", ScanKind::Dissipation},
                                          {"passive", ScanKind::Passive}});
       }},
      {"scan_channel", [](RunConfig& c, const std::string& v, int line, double) {
         static const std::set<std::string> channels{"kappa_s", "gamma_s", "kappa_q", "gamma_q"};
         if (!channels.count(v)) parse_fail(line, "unknown decay channel '" + v + "'");
         c.scan_channel = v;
       }},
      {"scan_values", list(&RunConfig::scan_values)},
      {"scan_Delta_q", list(&RunConfig::scan_Delta_q)},
      {"scan_delta_q", list(&RunConfig::scan_delta_q)},
      {"scan_t_max", number(&RunConfig::scan_t_max)},

      {"capture_drive", [](RunConfig& c, const std::string& v, int line, double) {
         c.capture_drive = to_enum<CaptureDrive>(
             v, line, {{"mirrored", CaptureDrive::Mirrored}, {"gaussian", CaptureDrive::Gaussian}});
       }},
      {"capture_width_factor", number(&RunConfig::capture_width_factor)},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> main;
  std::map<std::string, Entry> physical;
  bool in_physical = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body == "[physical_units]") {
        in_physical = true;
        continue;
      }
      parse_fail(line, "unknown section " + body);
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) parse_fail(line, "expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty()) parse_fail(line, "missing key");
    auto& target = in_physical ? physical : main;
    if (in_physical && key != "kappa_sq_hz") {
      throw Error(ErrorCode::UnknownKey,
                  "line " + std::to_string(line) + ": '" + key + "' in [physical_units]");
    }
    if (!in_physical && !setters().count(key)) {
      throw Error(ErrorCode::UnknownKey, "line " + std::to_string(line) + ": '" + key + "'");
    }
    if (!target.emplace(key, Entry{value, line}).second) {
      parse_fail(line, "duplicate key '" + key + "'");
    }
  }

  double scale = 1.0;
  const bool physical_units = physical.count("kappa_sq_hz") > 0;
  if (physical_units) {
    const auto& e = physical.at("kappa_sq_hz");
    const double hz = to_number(e.value, e.line);
    if (!(hz > 0.0)) {
      throw Error(ErrorCode::NonPositiveKappaSq,
                  "line " + std::to_string(e.line) + ": kappa_sq_hz must be > 0");
    }
    scale = 1.0 / hz;
  }
  if (const auto it = main.find("kappa_sq"); it != main.end()) {
    const double given = to_number(it->second.value, it->second.line) * scale;
    if (given != 1.0) {
      throw Error(ErrorCode::UnitConflict,
                  "line " + std::to_string(it->second.line) +
                      (physical_units ? ": kappa_sq disagrees with kappa_sq_hz"
                                      : ": kappa_sq is the unit and must be 1; give physical "
                                        "rates through a [physical_units] block"));
    }
  }
  if (!main.count("experiment")) throw Error(ErrorCode::ParseError, "missing key 'experiment'");

  RunConfig config;
  for (const auto& [key, entry] : main) {
    const double s = frequency_keys().count(key) ? scale : 1.0;
    setters().at(key)(config, entry.value, entry.line, s);
  }
  config.scenario.kappa_sq = 1.0;
  validate(config.scenario);
  validate(config.integrator);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  auto config = parse_config(text.str());
  if (config.name.empty()) config.name = std::filesystem::path(path).stem().string();
  return config;
}

}  // namespace qswitch
