#include "kdb/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "kdb/amplitudes.hpp"
#include "kdb/constants.hpp"
#include "kdb/error.hpp"
#include "kdb/io.hpp"

namespace kdb {

namespace {

using json = nlohmann::json;

// Walks one JSON object, checking types and rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(fmt::format("{}: expected an object", label()));
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), at(key)); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", at(key)));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(fmt::format("{}: must be finite", at(key)));
    return d;
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", at(key)));
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", at(key)));
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string", at(key)));
    return v.get<std::string>();
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ConfigError(fmt::format("{}: must be positive", at(key)));
    return d;
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(fmt::format("{}: unknown key", at(item.key())));
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <class T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigError(fmt::format("{}: required key missing", at(key)));
    return *fallback;
  }
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

CouplingChoice parse_coupling(Section& s, bool physical) {
  CouplingChoice c;
  if (!s.has("lambda_peak")) {
    c.rule = physical ? CouplingRule::from_intensity : CouplingRule::pi_pulse;
  } else {
    const json& v = s.raw("lambda_peak");
    const std::string where = s.at("lambda_peak");
    if (v.is_number()) {
      c.rule = CouplingRule::value;
      c.value = v.get<double>();
      if (!(c.value >= 0.0)) throw ConfigError(fmt::format("{}: must be non-negative", where));
    } else if (v.is_string() && v.get<std::string>() == "pi-pulse") {
      c.rule = CouplingRule::pi_pulse;
    } else if (v.is_string() && v.get<std::string>().rfind("tune-cat:", 0) == 0) {
      c.rule = CouplingRule::tune_cat;
      const std::string tail = v.get<std::string>().substr(9);
      std::size_t used = 0;
      try {
        c.target = std::stoi(tail, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tail.size() || c.target < 1) {
        throw ConfigError(fmt::format("{}: expected tune-cat:<positive level>", where));
      }
    } else if (physical && v.is_string() && v.get<std::string>() == "from-intensity") {
      c.rule = CouplingRule::from_intensity;
    } else {
      throw ConfigError(fmt::format("{}: expected a number, \"pi-pulse\" or \"tune-cat:<n>\"", where));
    }
  }
  c.area_in_pi = s.positive("pulse_area", 1.0);
  if (c.area_in_pi != 1.0 && c.rule != CouplingRule::pi_pulse) {
    throw ConfigError(fmt::format("{}: only meaningful with lambda_peak = \"pi-pulse\"", s.at("pulse_area")));
  }
  return c;
}

ParticleSpec parse_particle(Section s) {
  const std::string kind = s.text("kind");
  ParticleSpec p;
  if (kind == "electron") {
    p = ParticleSpec::charged_particle(si::electron_mass, -si::e);
  } else if (kind == "charged") {
    const double mass = s.has("mass_u") ? s.positive("mass_u") * si::atomic_mass : s.positive("mass_kg");
    if (!s.has("charge_C")) throw ConfigError(fmt::format("{}: required for a charged particle", s.at("charge_C")));
    p.kind = ParticleKind::charged;
    p.mass = mass;
    p.charge = s.number("charge_C");
  } else if (kind == "polarizable") {
    const double mass = s.has("mass_u") ? s.positive("mass_u") * si::atomic_mass : s.positive("mass_kg");
    if (!s.has("polarizability")) {
      throw ConfigError(fmt::format("{}: required for a polarizable particle", s.at("polarizability")));
    }
    p.kind = ParticleKind::polarizable;
    p.mass = mass;
    p.polarizability = s.positive("polarizability");
  } else {
    throw ConfigError(fmt::format("{}: expected electron, charged or polarizable", s.at("kind")));
  }
  s.finish();
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

TrapSpec parse_trap(Section s) {
  TrapSpec t;
  t.lambda_tl = s.positive("lambda_m");
  t.intensity = s.positive("intensity_W_per_m2");
  t.waist_y = s.positive("waist_y_m");
  t.waist_z = s.positive("waist_z_m");
  t.tau = s.number("tau_s", 0.0);
  if (t.tau < 0.0) throw ConfigError(fmt::format("{}: must be non-negative (0 = continuous)", s.at("tau_s")));
  t.v_z = s.positive("v_z_m_per_s");
  s.finish();
  return t;
}

KDSpec parse_kd(Section s) {
  KDSpec k;
  k.intensity = s.number("intensity_W_per_m2");
  if (k.intensity < 0.0) throw ConfigError(fmt::format("{}: must be non-negative", s.at("intensity_W_per_m2")));
  k.tau = s.positive("tau_s");
  k.waist_y = s.positive("waist_y_m");
  k.waist_z = s.positive("waist_z_m");
  k.ladder_step = s.integer("ladder_step", 2);
  k.delta_p = s.number("delta_p");
  s.finish();
  try {
    k.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return k;
}

}  // namespace

double Drive1DConfig::resolved_delta_p() const {
  if (delta_p) return *delta_p;
  return find_blockade_detuning(*blockade_n, ladder_step, blockade_root);
}

std::string to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::lambda_peak: return "lambda_peak";
    case SweepParameter::delta_p: return "delta_p";
    case SweepParameter::tau_periods: return "tau_periods";
  }
  return "?";
}

std::string canonical_hash(const nlohmann::json& doc) { return content_hash(doc.dump()); }

ScenarioConfig parse_config(const nlohmann::json& doc) {
  ScenarioConfig cfg;
  Section root(doc, "");
  const std::string mode = root.text("mode", std::string("dimensionless"));
  if (mode == "dimensionless") {
    cfg.mode = ScenarioMode::dimensionless;
  } else if (mode == "physical") {
    cfg.mode = ScenarioMode::physical;
  } else {
    throw ConfigError("mode: expected dimensionless or physical");
  }
  const bool physical = cfg.mode == ScenarioMode::physical;
  cfg.dimension = root.integer("dimension", 1);
  if (cfg.dimension != 1 && cfg.dimension != 2) throw ConfigError("dimension: expected 1 or 2");
  if (physical && cfg.dimension != 1) throw ConfigError("dimension: physical mode supports the 1D drive only");

  if (physical) {
    DesignInputs in;
    if (root.has("preset")) {
      in = table_preset(root.text("preset"));
      for (const char* key : {"particle", "trap", "kd"}) {
        if (root.has(key)) throw ConfigError(fmt::format("{}: not allowed together with preset", key));
      }
    } else {
      for (const char* key : {"particle", "trap", "kd"}) {
        if (!root.has(key)) throw ConfigError(fmt::format("{}: required in physical mode", key));
      }
      in.name = "custom";
      in.particle = parse_particle(root.child("particle"));
      in.trap = parse_trap(root.child("trap"));
      in.kd = parse_kd(root.child("kd"));
    }
    if (root.has("n_max")) {
      const int n = root.integer("n_max");
      if (n < 1) throw ConfigError("n_max: must be positive");
      in.requested_n_max = n;
    }
    cfg.physical = in;
    cfg.drive.ladder_step = in.kd.ladder_step;
    cfg.drive.delta_p = in.kd.delta_p;
    cfg.drive.coupling.rule = CouplingRule::from_intensity;
    if (root.has("drive")) {
      Section d = root.child("drive");
      cfg.drive.coupling = parse_coupling(d, true);
      cfg.drive.initial_level = d.integer("initial_level", 0);
      d.finish();
    }
    if (root.has("design")) {
      Section d = root.child("design");
      cfg.policy.timescale_threshold = d.positive("timescale_threshold", 5.0);
      cfg.policy.regime_factor = d.positive("regime_factor", 10.0);
      cfg.policy.anharmonicity_factor = d.positive("anharmonicity_factor", 10.0);
      d.finish();
    }
  } else {
    for (const char* key : {"preset", "particle", "trap", "kd", "design", "n_max"}) {
      if (root.has(key)) throw ConfigError(fmt::format("{}: only allowed in physical mode", key));
    }
    if (cfg.dimension == 1) {
      if (!root.has("drive")) throw ConfigError("drive: required key missing");
      Section d = root.child("drive");
      auto& c = cfg.drive;
      c.ladder_step = d.integer("ladder_step", 2);
      if (c.ladder_step < 1) throw ConfigError("drive.ladder_step: must be at least 1");
      if (d.has("delta_p") == d.has("blockade")) {
        throw ConfigError("drive: give exactly one of delta_p or blockade");
      }
      if (d.has("delta_p")) {
        c.delta_p = d.number("delta_p");
      } else {
        Section b = d.child("blockade");
        c.blockade_n = b.integer("n_bk");
        c.blockade_root = b.integer("root", 1);
        b.finish();
        if (*c.blockade_n < 1) throw ConfigError("drive.blockade.n_bk: must be at least 1");
        if (c.blockade_root < 1) throw ConfigError("drive.blockade.root: must be at least 1");
      }
      c.coupling = parse_coupling(d, false);
      c.tau_periods = d.positive("tau_periods");
      c.initial_level = d.integer("initial_level", 0);
      if (c.initial_level < 0) throw ConfigError("drive.initial_level: must be non-negative");
      d.finish();
    } else {
      if (!root.has("drive_2d")) throw ConfigError("drive_2d: required key missing");
      if (root.has("drive")) throw ConfigError("drive: use drive_2d for dimension 2");
      Section d = root.child("drive_2d");
      auto& c = cfg.drive_2d;
      c.n_x = d.integer("n_x");
      c.n_y = d.integer("n_y");
      c.delta_px = d.number("delta_px");
      c.delta_py = d.number("delta_py");
      c.omega_ratio = d.positive("omega_ratio", 1.0);
      c.coupling = parse_coupling(d, false);
      if (c.coupling.rule == CouplingRule::tune_cat) throw ConfigError("drive_2d.lambda_peak: tune-cat is 1D only");
      c.tau_periods = d.positive("tau_periods");
      c.initial_x = d.integer("initial_x", 0);
      c.initial_y = d.integer("initial_y", 0);
      d.finish();
    }
  }

  if (root.has("simulation")) {
    Section s = root.child("simulation");
    auto& sim = cfg.simulation;
    const int truncation = s.integer("truncation", 0);
    const int truncation_y = s.integer("truncation_y", 0);
    if (truncation < 0 || truncation_y < 0) throw ConfigError("simulation.truncation: must be non-negative");
    sim.truncation = static_cast<std::size_t>(truncation);
    sim.truncation_y = static_cast<std::size_t>(truncation_y);
    const std::string carrier = s.text("carrier", std::string("full"));
    if (carrier == "full") {
      sim.carrier = CarrierMode::full;
    } else if (carrier == "rotating_wave") {
      sim.carrier = CarrierMode::rotating_wave;
    } else {
      throw ConfigError("simulation.carrier: expected full or rotating_wave");
    }
    auto& ic = sim.integrator;
    ic.rel_tol = s.positive("rel_tol", ic.rel_tol);
    ic.abs_tol = s.positive("abs_tol", ic.abs_tol);
    ic.initial_step_periods = s.positive("initial_step_periods", ic.initial_step_periods);
    ic.min_step_periods = s.positive("min_step_periods", ic.min_step_periods);
    ic.max_step_periods = s.number("max_step_periods", 0.0);
    ic.snapshot_periods = s.number("snapshot_periods", 0.0);
    if (ic.max_step_periods < 0.0 || ic.snapshot_periods < 0.0) {
      throw ConfigError("simulation: step and snapshot periods must be non-negative");
    }
    ic.tail_tol = s.positive("tail_tol", ic.tail_tol);
    ic.enforce_tail = s.boolean("enforce_tail", true);
    sim.tune_samples = s.integer("tune_samples", 64);
    if (sim.tune_samples < 3) throw ConfigError("simulation.tune_samples: must be at least 3");
    sim.tune_rel_tol = s.positive("tune_rel_tol", 1e-3);
    s.finish();
  }

  if (root.has("output")) {
    Section o = root.child("output");
    cfg.output.prefix = o.text("prefix", std::string());
    cfg.output.trajectory = o.boolean("trajectory", true);
    cfg.output.state = o.boolean("state", true);
    o.finish();
    if (cfg.output.prefix.find('/') != std::string::npos) {
      throw ConfigError("output.prefix: must be a file name stem, use --output-dir for directories");
    }
  }

  if (root.has("sweep")) {
    Section s = root.child("sweep");
    SweepConfig sw;
    const std::string parameter = s.text("parameter");
    if (parameter == "lambda_peak") {
      sw.parameter = SweepParameter::lambda_peak;
    } else if (parameter == "delta_p") {
      sw.parameter = SweepParameter::delta_p;
    } else if (parameter == "tau_periods") {
      sw.parameter = SweepParameter::tau_periods;
    } else {
      throw ConfigError("sweep.parameter: expected lambda_peak, delta_p or tau_periods");
    }
    sw.from = s.number("from");
    sw.to = s.number("to");
    sw.samples = s.integer("samples");
    sw.geometric = s.boolean("geometric", false);
    if (s.has("report_levels")) {
      const json& levels = s.raw("report_levels");
      if (!levels.is_array()) throw ConfigError("sweep.report_levels: expected an array of levels");
      for (const auto& v : levels) {
        if (!v.is_number_integer() || v.get<int>() < 0) {
          throw ConfigError("sweep.report_levels: expected non-negative integers");
        }
        sw.report_levels.push_back(v.get<int>());
      }
    }
    s.finish();
    cfg.sweep = sw;
  }

  root.finish();
  cfg.hash = canonical_hash(doc);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  ScenarioConfig cfg = parse_config(doc);
  if (cfg.output.prefix.empty()) cfg.output.prefix = std::filesystem::path(path).stem().string();
  return cfg;
}

}  // namespace kdb
