#include "bidomain/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", field, raw));
  }
  return value;
}

int to_int(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", field, raw));
  }
  return value;
}

bool to_bool(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", field, raw));
}

std::vector<double> to_list(const std::string& raw, const std::string& field) {
  std::vector<double> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item, field));
  }
  return out;
}

std::string num(double value) { return fmt::format("{}", value); }

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define BIDOMAIN_DOUBLE(SECTION, KEY, MEMBER)                                                   \
  Field {                                                                                       \
    SECTION, KEY,                                                                               \
        [](RunConfig& c, const std::string& v, const std::string& f) { c.MEMBER = to_double(v, f); }, \
        [](const RunConfig& c) { return num(c.MEMBER); }                                        \
  }

#define BIDOMAIN_INT(SECTION, KEY, MEMBER)                                                     \
  Field {                                                                                      \
    SECTION, KEY,                                                                              \
        [](RunConfig& c, const std::string& v, const std::string& f) { c.MEMBER = to_int(v, f); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                            \
  }

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      Field{"run", "mode",
            [](RunConfig& c, const std::string& v, const std::string&) {
              c.sim.mode = parse_mode(trim(v));
            },
            [](const RunConfig& c) { return to_string(c.sim.mode); }},
      BIDOMAIN_DOUBLE("run", "t_final", t_final),
      Field{"run", "snapshot_times",
            [](RunConfig& c, const std::string& v, const std::string& f) {
              c.snapshot_times = to_list(v, f);
            },
            [](const RunConfig& c) {
              std::string out;
              for (std::size_t k = 0; k < c.snapshot_times.size(); ++k) {
                out += (k ? ", " : "") + num(c.snapshot_times[k]);
              }
              return out;
            }},
      Field{"run", "output_dir",
            [](RunConfig& c, const std::string& v, const std::string&) { c.output_dir = trim(v); },
            [](const RunConfig& c) { return c.output_dir; }},
      Field{"run", "reference_run",
            [](RunConfig& c, const std::string& v, const std::string&) {
              c.reference_run = trim(v);
            },
            [](const RunConfig& c) { return c.reference_run; }},

      BIDOMAIN_DOUBLE("model", "beta", sim.model.beta),
      BIDOMAIN_DOUBLE("model", "c_m", sim.model.c_m),
      BIDOMAIN_DOUBLE("model", "R_m", sim.model.R_m),
      BIDOMAIN_DOUBLE("model", "v_p", sim.model.v_p),
      BIDOMAIN_DOUBLE("model", "eta1", sim.model.eta1),
      BIDOMAIN_DOUBLE("model", "eta2", sim.model.eta2),
      BIDOMAIN_DOUBLE("model", "eta3", sim.model.eta3),
      BIDOMAIN_DOUBLE("model", "eta4", sim.model.eta4),
      BIDOMAIN_DOUBLE("model", "eta5", sim.model.eta5),
      BIDOMAIN_DOUBLE("model", "sigma_il", sim.model.sigma_il),
      BIDOMAIN_DOUBLE("model", "sigma_it", sim.model.sigma_it),
      BIDOMAIN_DOUBLE("model", "sigma_el", sim.model.sigma_el),
      BIDOMAIN_DOUBLE("model", "sigma_et", sim.model.sigma_et),
      BIDOMAIN_DOUBLE("model", "fiber_angle", sim.model.fiber_angle),
      Field{"model", "reaction",
            [](RunConfig& c, const std::string& v, const std::string& f) {
              c.sim.model.reaction = to_bool(v, f);
            },
            [](const RunConfig& c) { return std::string(c.sim.model.reaction ? "true" : "false"); }},

      Field{"stimulus", "shape",
            [](RunConfig& c, const std::string& v, const std::string& f) {
              const std::string s = trim(v);
              if (s == "disc") {
                c.sim.stimulus.shape = StimulusProtocol::Shape::Disc;
              } else if (s == "rectangle") {
                c.sim.stimulus.shape = StimulusProtocol::Shape::Rectangle;
              } else {
                throw ConfigError(fmt::format("{}: expected disc or rectangle, got '{}'", f, v));
              }
            },
            [](const RunConfig& c) {
              return std::string(c.sim.stimulus.shape == StimulusProtocol::Shape::Disc ? "disc"
                                                                                         : "rectangle");
            }},
      BIDOMAIN_DOUBLE("stimulus", "center_x", sim.stimulus.center_x),
      BIDOMAIN_DOUBLE("stimulus", "center_y", sim.stimulus.center_y),
      BIDOMAIN_DOUBLE("stimulus", "radius", sim.stimulus.radius),
      BIDOMAIN_DOUBLE("stimulus", "half_width", sim.stimulus.half_width),
      BIDOMAIN_DOUBLE("stimulus", "half_height", sim.stimulus.half_height),
      BIDOMAIN_DOUBLE("stimulus", "initial_v", sim.stimulus.initial_v),
      BIDOMAIN_DOUBLE("stimulus", "initial_w", sim.stimulus.initial_w),
      BIDOMAIN_DOUBLE("stimulus", "current_amplitude", sim.stimulus.current_amplitude),
      BIDOMAIN_DOUBLE("stimulus", "current_t_on", sim.stimulus.current_t_on),
      BIDOMAIN_DOUBLE("stimulus", "current_t_off", sim.stimulus.current_t_off),

      BIDOMAIN_INT("multiresolution", "finest_level", sim.mr.finest_level),
      BIDOMAIN_INT("multiresolution", "min_level", sim.mr.min_level),
      BIDOMAIN_DOUBLE("multiresolution", "eps_ref", sim.mr.eps_ref),
      Field{"multiresolution", "tolerance_mode",
            [](RunConfig& c, const std::string& v, const std::string& f) {
              const std::string s = trim(v);
              if (s == "direct") {
                c.sim.mr.tolerance_mode = ToleranceMode::Direct;
              } else if (s == "derived") {
                c.sim.mr.tolerance_mode = ToleranceMode::Derived;
              } else {
                throw ConfigError(fmt::format("{}: expected direct or derived, got '{}'", f, v));
              }
            },
            [](const RunConfig& c) {
              return std::string(c.sim.mr.tolerance_mode == ToleranceMode::Direct ? "direct"
                                                                                    : "derived");
            }},
      BIDOMAIN_DOUBLE("multiresolution", "C", sim.mr.C),
      BIDOMAIN_DOUBLE("multiresolution", "alpha", sim.mr.alpha),
      BIDOMAIN_DOUBLE("multiresolution", "D", sim.mr.D),
      BIDOMAIN_DOUBLE("multiresolution", "gamma1", sim.mr.gamma1),
      BIDOMAIN_DOUBLE("multiresolution", "gamma2", sim.mr.gamma2),

      BIDOMAIN_DOUBLE("time", "cfl_factor", sim.cfl_factor),
      BIDOMAIN_DOUBLE("time", "dt", sim.dt_override),
      BIDOMAIN_INT("time", "remesh_interval", sim.remesh_interval),
      Field{"time", "elliptic_cadence",
            [](RunConfig& c, const std::string& v, const std::string& f) {
              const std::string s = trim(v);
              if (s == "every_fine_step") {
                c.sim.cadence = EllipticCadence::EveryFineStep;
              } else if (s == "sync_only") {
                c.sim.cadence = EllipticCadence::SyncOnly;
              } else {
                throw ConfigError(
                    fmt::format("{}: expected every_fine_step or sync_only, got '{}'", f, v));
              }
            },
            [](const RunConfig& c) {
              return std::string(c.sim.cadence == EllipticCadence::EveryFineStep ? "every_fine_step"
                                                                                   : "sync_only");
            }},

      BIDOMAIN_DOUBLE("solver", "tolerance", sim.solver.tolerance),
      BIDOMAIN_INT("solver", "max_iterations", sim.solver.max_iterations),
  };
  return fields;
}

#undef BIDOMAIN_DOUBLE
#undef BIDOMAIN_INT

const Field* lookup(const std::string& section, const std::string& key) {
  for (const Field& f : schema()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  auto wrap = [](auto&& check) {
    try {
      check();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  };
  wrap([&] { sim.model.validate(); });
  wrap([&] { sim.stimulus.validate(); });
  wrap([&] { sim.mr.validate(); });
  if (!(sim.cfl_factor > 0.0) || !std::isfinite(sim.cfl_factor)) {
    throw ConfigError(fmt::format("time.cfl_factor must be positive (got {})", sim.cfl_factor));
  }
  if (sim.dt_override < 0.0) throw ConfigError("time.dt must not be negative");
  if (sim.remesh_interval < 1) throw ConfigError("time.remesh_interval must be at least 1");
  if (!(sim.solver.tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
  if (sim.solver.max_iterations < 0) throw ConfigError("solver.max_iterations must not be negative");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw ConfigError(fmt::format("run.t_final must be positive (got {})", t_final));
  }
  for (double t : snapshot_times) {
    if (!(t >= 0.0) || t > t_final) {
      throw ConfigError(fmt::format("run.snapshot_times: {} lies outside [0, t_final]", t));
    }
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside of a section", origin, section));
    }
    for (const auto& [key, value] : body) {
      const Field* f = lookup(section, key);
      if (!f) throw ConfigError(fmt::format("{}: unknown key {}.{}", origin, section, key));
      f->set(config, value.data(), section + "." + key);
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

std::string format_config(const RunConfig& config) {
  std::string out;
  std::string current;
  for (const Field& f : schema()) {
    if (current != f.section) {
      if (!current.empty()) out += "\n";
      current = f.section;
      out += fmt::format("[{}]\n", current);
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write config file {}", path));
  out << format_config(config);
}

}  // namespace bidomain
