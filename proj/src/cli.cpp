#include "kdb/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "kdb/amplitudes.hpp"
#include "kdb/design.hpp"
#include "kdb/error.hpp"
#include "kdb/io.hpp"
#include "kdb/parallel.hpp"
#include "kdb/phasespace.hpp"

namespace kdb {

namespace {

using json = nlohmann::json;
using cd = std::complex<double>;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json tool_block(const std::string& hash) {
  return {{"name", kToolName}, {"version", kToolVersion}, {"config_hash", hash}};
}

std::filesystem::path output_path(const GlobalOptions& global, const std::string& name) {
  std::filesystem::create_directories(global.output_dir);
  return global.output_dir / name;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

const char* carrier_name(CarrierMode mode) { return mode == CarrierMode::full ? "full" : "rotating_wave"; }

std::string trajectory_csv(const Trajectory1D& traj, const std::string& hash) {
  std::ostringstream out;
  out << csv_comment_header(hash) << '\n' << "t/period,norm_drift";
  const std::size_t n = traj.final_state().truncation();
  for (std::size_t k = 0; k < n; ++k) out << ",P" << k;
  out << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_real(traj.times[i]) << ',' << format_real(traj.norm_drift[i]);
    for (double p : traj.snapshots[i].populations()) out << ',' << format_real(p);
    out << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory2D& traj, const std::string& hash) {
  std::ostringstream out;
  const auto& last = traj.final_state();
  out << csv_comment_header(hash) << '\n' << "t/period,norm_drift";
  for (std::size_t m = 0; m < last.nx; ++m) {
    for (std::size_t n = 0; n < last.ny; ++n) out << ",P_" << m << '_' << n;
  }
  out << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_real(traj.times[i]) << ',' << format_real(traj.norm_drift[i]);
    for (double p : traj.snapshots[i].populations()) out << ',' << format_real(p);
    out << '\n';
  }
  return out.str();
}

json amplitudes_json(const ComplexVector& amplitudes) {
  json a = json::array();
  for (const auto& z : amplitudes) a.push_back({z.real(), z.imag()});
  return a;
}

int argmax(const std::vector<double>& values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

double mean_level(const std::vector<double>& populations) {
  double s = 0.0;
  for (std::size_t n = 0; n < populations.size(); ++n) s += static_cast<double>(n) * populations[n];
  return s;
}

// Maps an exception to the documented exit code and reports it.
int report_failure(std::ostream& err, const char* command) {
  try {
    throw;
  } catch (const TruncationError& e) {
    err << fmt::format("{}: truncation tail violated: {}\n", command, e.what());
    return kExitTruncation;
  } catch (const CapacityError& e) {
    err << fmt::format("{}: {}\n", command, e.what());
    return kExitCapacity;
  } catch (const IntegrationError& e) {
    err << fmt::format("{}: integration failed: {}\n", command, e.what());
    return kExitIntegration;
  } catch (const ConvergenceError& e) {
    err << fmt::format("{}: no convergence: {}\n", command, e.what());
    return kExitIntegration;
  } catch (const NumericError& e) {
    err << fmt::format("{}: numerical failure: {}\n", command, e.what());
    return kExitIntegration;
  } catch (const ConfigError& e) {
    err << fmt::format("{}: configuration error: {}\n", command, e.what());
    return kExitUsage;
  } catch (const DomainError& e) {
    err << fmt::format("{}: invalid input: {}\n", command, e.what());
    return kExitUsage;
  } catch (const GridError& e) {
    err << fmt::format("{}: grid error: {}\n", command, e.what());
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << fmt::format("{}: malformed input: {}\n", command, e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    err << fmt::format("{}: {}\n", command, e.what());
    return kExitIntegration;
  }
}

double coupling_for(const CouplingChoice& c, double amplitude, double tau_periods, double from_intensity) {
  switch (c.rule) {
    case CouplingRule::value: return c.value;
    case CouplingRule::pi_pulse: return area_coupling(amplitude, tau_periods, c.area_in_pi);
    case CouplingRule::from_intensity: return from_intensity;
    case CouplingRule::tune_cat: break;
  }
  throw DomainError("tuned coupling has no closed form");
}

}  // namespace

Resolved1D resolve_1d(const ScenarioConfig& cfg, const SweepOverride& ov, int threads) {
  if (cfg.dimension != 1) throw ConfigError("scenario is not one-dimensional");
  const auto& d = cfg.drive;
  double delta_p = 0.0, tau = d.tau_periods, from_intensity = 0.0;
  if (cfg.physical) {
    const auto sc = scenario_to_dimensionless(cfg.physical->particle, cfg.physical->trap, cfg.physical->kd,
                                              cfg.simulation.carrier);
    delta_p = cfg.physical->kd.delta_p;
    tau = sc.scales.tau_kd_periods;
    from_intensity = sc.scales.lambda_peak_dimless;
  } else {
    delta_p = d.resolved_delta_p();
  }
  if (ov.delta_p) delta_p = *ov.delta_p;
  if (ov.tau_periods) tau = *ov.tau_periods;
  Resolved1D r;
  r.resonance = Resonance1D(d.ladder_step, delta_p);
  r.initial_level = d.initial_level;
  const int step = d.ladder_step;
  r.blockade_level = blockade_level(r.resonance, d.initial_level, d.initial_level + 100000 * step);

  if (d.coupling.rule == CouplingRule::tune_cat && !ov.lambda_peak) {
    if (d.initial_level != 0) throw ConfigError("drive.initial_level: tune-cat starts from the ground state");
    TuneControls tc;
    tc.coarse_samples = cfg.simulation.tune_samples;
    tc.rel_tol = cfg.simulation.tune_rel_tol;
    tc.truncation = cfg.simulation.truncation;
    tc.mode = cfg.simulation.carrier;
    tc.integrator = cfg.simulation.integrator;
    tc.threads = threads;
    r.tuning = tune_cat_pulse(d.coupling.target, r.resonance, tau, tc);
    r.pulse = r.tuning->pulse;
    r.truncation = r.tuning->truncation;
    return r;
  }

  double lambda = 0.0;
  if (ov.lambda_peak) {
    lambda = *ov.lambda_peak;
  } else if (d.coupling.rule == CouplingRule::tune_cat) {
    throw DomainError("tuned coupling has no closed form");
  } else {
    const double amplitude = d.coupling.rule == CouplingRule::pi_pulse
                                 ? ladder_amplitude(d.initial_level, step, r.resonance.eta())
                                 : 0.0;
    lambda = coupling_for(d.coupling, amplitude, tau, from_intensity);
  }
  r.pulse = make_pulse(r.resonance, lambda, tau, cfg.simulation.carrier);

  if (cfg.simulation.truncation > 0) {
    r.truncation = cfg.simulation.truncation;
  } else if (r.blockade_level >= 0) {
    r.truncation = default_truncation(r.blockade_level, step);
  } else {
    throw ConfigError("simulation.truncation: required because the ladder has no blockade level");
  }
  if (r.truncation <= static_cast<std::size_t>(d.initial_level)) {
    throw ConfigError("simulation.truncation: must exceed the initial level");
  }
  return r;
}

Resolved2D resolve_2d(const ScenarioConfig& cfg) {
  if (cfg.dimension != 2) throw ConfigError("scenario is not two-dimensional");
  const auto& d = cfg.drive_2d;
  Resolved2D r;
  r.resonance = Resonance2D(d.n_x, d.n_y, d.delta_px, d.delta_py);
  r.omega_ratio = d.omega_ratio;
  r.initial_x = d.initial_x;
  r.initial_y = d.initial_y;
  if (d.initial_x < 0 || d.initial_y < 0) throw ConfigError("drive_2d: initial levels must be non-negative");
  const double amplitude = d.coupling.rule == CouplingRule::pi_pulse
                               ? coupling_2d(d.initial_x, d.initial_y, d.n_x, d.n_y, r.resonance.eta_x(),
                                             r.resonance.eta_y())
                               : 0.0;
  const double lambda = coupling_for(d.coupling, amplitude, d.tau_periods, 0.0);
  r.pulse = make_pulse(r.resonance, d.omega_ratio, lambda, d.tau_periods, cfg.simulation.carrier);
  r.truncation_x = cfg.simulation.truncation > 0 ? cfg.simulation.truncation
                                                 : static_cast<std::size_t>(d.initial_x + 4 * d.n_x + 2);
  r.truncation_y = cfg.simulation.truncation_y > 0 ? cfg.simulation.truncation_y
                                                   : static_cast<std::size_t>(d.initial_y + 4 * d.n_y + 2);
  if (r.truncation_x <= static_cast<std::size_t>(d.initial_x) ||
      r.truncation_y <= static_cast<std::size_t>(d.initial_y)) {
    throw ConfigError("simulation.truncation: must exceed the initial levels");
  }
  return r;
}

double pair_fidelity(cd c_a, cd c_b) {
  const double s = std::abs(c_a) + std::abs(c_b);
  return 0.5 * s * s;
}

json summarize(const Resolved1D& sc, const Trajectory1D& traj) {
  const auto& last = traj.final_state();
  const auto pops = last.populations();
  const int n_max = argmax(pops);
  const int step = sc.resonance.ladder_step();
  json j;
  j["dimension"] = 1;
  j["ladder_step"] = step;
  j["delta_p"] = sc.resonance.delta_p();
  j["eta"] = sc.resonance.eta();
  j["lambda_peak"] = sc.pulse.lambda_peak;
  j["tau_periods"] = sc.pulse.tau_periods;
  j["carrier"] = carrier_name(sc.pulse.mode);
  j["truncation"] = last.truncation();
  j["initial_level"] = sc.initial_level;
  j["blockade_level"] = sc.blockade_level;
  if (sc.tuning) {
    j["tuning"] = {{"objective", sc.tuning->objective},
                   {"evaluations", sc.tuning->evaluations}};
  } else {
    j["tuning"] = nullptr;
  }
  j["n_max"] = n_max;
  j["width"] = ladder_fwhm(pops, n_max, step);
  j["poissonian_width"] = 2.0 * std::sqrt(static_cast<double>(n_max));
  j["mean_n"] = mean_level(pops);
  j["overlap_with_initial"] = pops[static_cast<std::size_t>(sc.initial_level)];
  j["final_norm"] = last.norm();
  j["max_norm_drift"] = traj.max_norm_drift;
  j["max_tail"] = traj.max_tail;
  j["steps"] = {{"accepted", traj.stats.accepted},
                {"rejected", traj.stats.rejected},
                {"evaluations", traj.stats.evaluations}};
  j["final_time_periods"] = traj.times.back();
  j["populations"] = pops;
  return j;
}

json summarize(const Resolved2D& sc, const Trajectory2D& traj) {
  const auto& last = traj.final_state();
  const std::size_t ix = static_cast<std::size_t>(sc.initial_x), iy = static_cast<std::size_t>(sc.initial_y);
  const std::size_t nx = static_cast<std::size_t>(sc.resonance.n_x()), ny = static_cast<std::size_t>(sc.resonance.n_y());
  auto amp = [&](std::size_t m, std::size_t n) { return m < last.nx && n < last.ny ? last.at(m, n) : cd(0.0, 0.0); };
  json j;
  j["dimension"] = 2;
  j["n_x"] = sc.resonance.n_x();
  j["n_y"] = sc.resonance.n_y();
  j["delta_px"] = sc.resonance.delta_px();
  j["delta_py"] = sc.resonance.delta_py();
  j["eta_x"] = sc.resonance.eta_x();
  j["eta_y"] = sc.resonance.eta_y();
  j["omega_ratio"] = sc.omega_ratio;
  j["lambda_peak"] = sc.pulse.lambda_peak;
  j["tau_periods"] = sc.pulse.tau_periods;
  j["carrier"] = carrier_name(sc.pulse.mode);
  j["truncation"] = {last.nx, last.ny};
  j["initial"] = {sc.initial_x, sc.initial_y};
  j["pair_fidelity"] = pair_fidelity(amp(ix, iy), amp(ix + nx, iy + ny));
  j["population_initial"] = std::norm(amp(ix, iy));
  j["population_first_step"] = std::norm(amp(ix + nx, iy + ny));
  j["population_second_step"] = std::norm(amp(ix + 2 * nx, iy + 2 * ny));
  j["relative_phase"] = std::arg(amp(ix + nx, iy + ny) * std::conj(amp(ix, iy)));
  j["final_norm"] = last.norm();
  j["max_norm_drift"] = traj.max_norm_drift;
  j["max_tail"] = traj.max_tail;
  j["steps"] = {{"accepted", traj.stats.accepted},
                {"rejected", traj.stats.rejected},
                {"evaluations", traj.stats.evaluations}};
  j["final_time_periods"] = traj.times.back();
  json pops = json::array();
  for (std::size_t m = 0; m < last.nx; ++m) {
    json row = json::array();
    for (std::size_t n = 0; n < last.ny; ++n) row.push_back(std::norm(last.at(m, n)));
    pops.push_back(row);
  }
  j["populations"] = pops;
  return j;
}

json state_json(const StateVector1D& state, const Resolved1D& sc, double time_periods, const std::string& hash) {
  return {{"tool", tool_block(hash)},
          {"dimension", 1},
          {"ladder_step", sc.resonance.ladder_step()},
          {"delta_p", sc.resonance.delta_p()},
          {"time_periods", time_periods},
          {"amplitudes", amplitudes_json(state.amplitudes)}};
}

json state_json(const StateVector2D& state, const Resolved2D& sc, double time_periods, const std::string& hash) {
  return {{"tool", tool_block(hash)},
          {"dimension", 2},
          {"n_x", sc.resonance.n_x()},
          {"n_y", sc.resonance.n_y()},
          {"delta_px", sc.resonance.delta_px()},
          {"delta_py", sc.resonance.delta_py()},
          {"time_periods", time_periods},
          {"truncation", {state.nx, state.ny}},
          {"amplitudes", amplitudes_json(state.amplitudes)}};
}

int cmd_blockade(int n_bk, int ladder_step, const std::optional<std::string>& map_path, int map_levels,
                 double map_lo, double map_hi, int map_samples, const GlobalOptions& global, std::ostream& out) {
  if (ladder_step < 1) throw DomainError("--nm must be at least 1");
  if (n_bk < 1) throw DomainError(fmt::format("no roots: the step amplitude from level {} has no nodes", n_bk));
  const auto roots = blockade_roots(n_bk, ladder_step);
  out << fmt::format("blockade roots for n_bk = {}, N_m = {} ({} found)\n", n_bk, ladder_step, roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    out << fmt::format("  root {}: delta_p = {:.9f}  eta = {:.9f}\n", k + 1, roots[k], 0.5 * (ladder_step + roots[k]));
  }
  if (map_path) {
    const json args = {{"command", "blockade"}, {"n_bk", n_bk},   {"ladder_step", ladder_step},
                       {"levels", map_levels},  {"from", map_lo}, {"to", map_hi},
                       {"samples", map_samples}};
    const auto map = amplitude_map(map_levels, map_lo, map_hi, ladder_step, map_samples, global.threads);
    std::ostringstream csv;
    csv << csv_comment_header(canonical_hash(args)) << '\n';
    write_csv(csv, map);
    const auto path = output_path(global, *map_path);
    write_file(path, csv.str());
    out << "map written to " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const GlobalOptions& global, std::ostream& out) {
  const Stopwatch clock;
  const ScenarioConfig cfg = load_config(config_path);
  const std::string& prefix = cfg.output.prefix;
  json summary;
  std::string trajectory_text, state_text;
  if (cfg.dimension == 1) {
    const Resolved1D sc = resolve_1d(cfg, {}, global.threads);
    const auto traj = integrate(StateVector1D::basis(sc.truncation, sc.initial_level), sc.resonance, sc.pulse,
                                cfg.simulation.integrator);
    summary = summarize(sc, traj);
    if (cfg.output.trajectory) trajectory_text = trajectory_csv(traj, cfg.hash);
    state_text = json_text(state_json(traj.final_state(), sc, traj.times.back(), cfg.hash));
  } else {
    const Resolved2D sc = resolve_2d(cfg);
    const auto traj = integrate(StateVector2D::basis(sc.truncation_x, sc.truncation_y, sc.initial_x, sc.initial_y),
                                sc.resonance, sc.pulse, cfg.simulation.integrator);
    summary = summarize(sc, traj);
    if (cfg.output.trajectory) trajectory_text = trajectory_csv(traj, cfg.hash);
    state_text = json_text(state_json(traj.final_state(), sc, traj.times.back(), cfg.hash));
  }
  summary["tool"] = tool_block(cfg.hash);
  if (cfg.output.trajectory) write_file(output_path(global, prefix + "_trajectory.csv"), trajectory_text);
  if (cfg.output.state) write_file(output_path(global, prefix + "_state.json"), state_text);
  write_file(output_path(global, prefix + "_summary.json"), json_text(summary));

  if (cfg.dimension == 1) {
    out << fmt::format("n_max = {}  width = {:.4g}  max norm drift = {:.3e}  max tail = {:.3e}\n",
                       summary["n_max"].get<int>(), summary["width"].get<double>(),
                       summary["max_norm_drift"].get<double>(), summary["max_tail"].get<double>());
  } else {
    out << fmt::format("pair fidelity = {:.6f}  second-step population = {:.3e}  max norm drift = {:.3e}\n",
                       summary["pair_fidelity"].get<double>(), summary["population_second_step"].get<double>(),
                       summary["max_norm_drift"].get<double>());
  }
  out << fmt::format("runtime = {:.3f} s\n", clock.seconds());
  return kExitOk;
}

int cmd_wigner(const std::string& state_path, const WignerArgs& args, const GlobalOptions& global, std::ostream& out) {
  const Stopwatch clock;
  std::ifstream in(state_path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read state file '{}'", state_path));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const json doc = json::parse(text);
  if (doc.at("dimension").get<int>() != 1) throw ConfigError("wigner: only one-dimensional states are supported");
  StateVector1D state;
  for (const auto& z : doc.at("amplitudes")) state.amplitudes.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
  if (state.amplitudes.empty()) throw ConfigError("wigner: state has no amplitudes");
  if (std::abs(state.norm() - 1.0) > 1e-6) {
    throw DomainError(fmt::format("wigner: state norm {} differs from 1", state.norm()));
  }
  const int n_top = highest_occupied(state, 1e-14);
  if (n_top > kWignerMaxLevel) {
    throw CapacityError(fmt::format("highest occupied level {} exceeds the supported Wigner scale n <= {}", n_top,
                                    kWignerMaxLevel));
  }
  // Levels below the occupancy floor carry nothing visible; drop them so synthesis stays on the Hermite path.
  for (std::size_t n = static_cast<std::size_t>(n_top) + 1; n < state.amplitudes.size(); ++n) {
    state.amplitudes[n] = 0.0;
  }
  if (!(args.spacing > 0.0)) throw DomainError("--spacing must be positive");
  const double t = args.time_periods.value_or(turning_time(state));
  const double extent = args.extent.value_or(2.0 * std::sqrt(static_cast<double>(n_top)) + 10.0);
  const RealGrid grid = RealGrid::symmetric(extent, args.spacing);
  const auto psi = synthesize(state, t, grid);
  WignerOptions options;
  options.p_extent = args.p_extent.value_or(0.0);
  options.p_spacing = args.p_spacing.value_or(0.0);
  options.threads = global.threads;
  const auto w = wigner(psi, options);
  const auto m = marginals(w);

  const json hash_input = {{"state", content_hash(text)},
                           {"time_periods", t},
                           {"spacing", args.spacing},
                           {"extent", extent},
                           {"p_extent", options.p_extent},
                           {"p_spacing", options.p_spacing}};
  const std::string hash = canonical_hash(hash_input);
  const std::string prefix =
      args.prefix.empty() ? std::filesystem::path(state_path).stem().string() : args.prefix;

  double position_integral = 0.0, momentum_integral = 0.0, position_dev = 0.0;
  for (double v : m.position) position_integral += v * w.q.spacing();
  for (double v : m.momentum) momentum_integral += v * w.p.spacing();
  const auto direct = psi.density();
  for (std::size_t i = 0; i < direct.size(); ++i) position_dev = std::max(position_dev, std::abs(direct[i] - m.position[i]));
  json momentum_dev = nullptr;
  try {
    const auto dp = synthesize_momentum(state, t, w.p).density();
    double worst = 0.0;
    for (std::size_t j = 0; j < dp.size(); ++j) worst = std::max(worst, std::abs(dp[j] - m.momentum[j]));
    momentum_dev = worst;
  } catch (const GridError&) {
  }
  std::size_t i0 = 0, j0 = 0;
  for (std::size_t i = 0; i < w.q.size(); ++i) {
    if (std::abs(w.q[i]) < std::abs(w.q[i0])) i0 = i;
  }
  for (std::size_t j = 0; j < w.p.size(); ++j) {
    if (std::abs(w.p[j]) < std::abs(w.p[j0])) j0 = j;
  }
  const json summary = {{"tool", tool_block(hash)},
                        {"source_config_hash", doc.contains("tool") ? doc["tool"].value("config_hash", "") : ""},
                        {"time_periods", t},
                        {"n_top", n_top},
                        {"q_points", w.q.size()},
                        {"p_points", w.p.size()},
                        {"w_min", w.min()},
                        {"w_max", w.max()},
                        {"w_origin", w.at(i0, j0)},
                        {"origin", {w.q[i0], w.p[j0]}},
                        {"integral", w.integral()},
                        {"max_imag_residue", w.max_imag_residue},
                        {"position_marginal_integral", position_integral},
                        {"momentum_marginal_integral", momentum_integral},
                        {"position_marginal_deviation", position_dev},
                        {"momentum_marginal_deviation", momentum_dev},
                        {"negative", w.min() < 0.0}};

  const std::string meta = json(summary["tool"]).dump();
  if (args.format == "csv" || args.format == "both") {
    std::ostringstream csv;
    write_csv(csv, w, csv_comment_header(hash));
    write_file(output_path(global, prefix + "_wigner.csv"), csv.str());
  }
  if (args.format == "binary" || args.format == "both") {
    std::ostringstream bin(std::ios::binary);
    write_binary(bin, w, meta);
    write_file(output_path(global, prefix + "_wigner.bin"), bin.str());
  }
  std::ostringstream marg;
  write_marginals_csv(marg, w, m, csv_comment_header(hash));
  write_file(output_path(global, prefix + "_marginals.csv"), marg.str());
  write_file(output_path(global, prefix + "_wigner.json"), json_text(summary));
  out << fmt::format("t = {:.6f} periods  W(origin) = {:.9f}  min W = {:.6e}  integral = {:.9f}\n", t,
                     w.at(i0, j0), w.min(), w.integral());
  out << fmt::format("runtime = {:.3f} s\n", clock.seconds());
  return kExitOk;
}

int cmd_design(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
               const GlobalOptions& global, std::ostream& out) {
  if (config_path.has_value() == preset.has_value()) throw ConfigError("design: give either a config path or --preset");
  DesignInputs inputs;
  DesignPolicy policy;
  std::string hash, prefix;
  if (preset) {
    inputs = table_preset(*preset);
    hash = canonical_hash(json{{"preset", *preset}});
    prefix = *preset;
  } else {
    const ScenarioConfig cfg = load_config(*config_path);
    if (!cfg.physical) throw ConfigError("design: the config must use physical mode");
    inputs = *cfg.physical;
    policy = cfg.policy;
    hash = cfg.hash;
    prefix = cfg.output.prefix;
  }
  json report = design_report(inputs, policy);
  report["tool"] = tool_block(hash);
  const std::string text = json_text(report);
  write_file(output_path(global, prefix + "_design.json"), text);
  out << text;
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const SweepFlags& flags, const GlobalOptions& global,
              std::ostream& out) {
  const Stopwatch clock;
  const ScenarioConfig cfg = load_config(config_path);
  if (cfg.dimension != 1) throw ConfigError("sweep: only one-dimensional scenarios are supported");
  SweepConfig sw = cfg.sweep.value_or(SweepConfig{});
  if (!cfg.sweep && !(flags.parameter && flags.from && flags.to && flags.samples)) {
    throw ConfigError("sweep: the config has no sweep block; give --parameter, --from, --to and --samples");
  }
  if (flags.parameter) {
    if (*flags.parameter == "lambda_peak") {
      sw.parameter = SweepParameter::lambda_peak;
    } else if (*flags.parameter == "delta_p") {
      sw.parameter = SweepParameter::delta_p;
    } else if (*flags.parameter == "tau_periods") {
      sw.parameter = SweepParameter::tau_periods;
    } else {
      throw ConfigError("--parameter: expected lambda_peak, delta_p or tau_periods");
    }
  }
  if (flags.from) sw.from = *flags.from;
  if (flags.to) sw.to = *flags.to;
  if (flags.samples) sw.samples = *flags.samples;
  if (sw.samples < 1 || sw.to < sw.from || (sw.samples > 1 && sw.to == sw.from)) {
    throw ConfigError(fmt::format("sweep: empty range [{}, {}] with {} samples", sw.from, sw.to, sw.samples));
  }
  if (sw.geometric && !(sw.from > 0.0)) throw ConfigError("sweep: a geometric range needs from > 0");
  const int step = cfg.drive.ladder_step;
  std::vector<int> levels = sw.report_levels;
  if (levels.empty()) {
    for (int k = 0; k <= 4; ++k) levels.push_back(cfg.drive.initial_level + k * step);
  }

  struct Row {
    double value = 0.0;
    std::string status = "ok";
    std::string message;
    json summary;
  };
  std::vector<Row> rows(static_cast<std::size_t>(sw.samples));
  for (int k = 0; k < sw.samples; ++k) {
    const double f = sw.samples == 1 ? 0.0 : static_cast<double>(k) / (sw.samples - 1);
    rows[static_cast<std::size_t>(k)].value =
        sw.geometric ? sw.from * std::pow(sw.to / sw.from, f) : sw.from + (sw.to - sw.from) * f;
  }
  parallel_for(rows.size(), global.threads, [&](std::size_t k) {
    Row& row = rows[k];
    SweepOverride ov;
    if (sw.parameter == SweepParameter::lambda_peak) ov.lambda_peak = row.value;
    if (sw.parameter == SweepParameter::delta_p) ov.delta_p = row.value;
    if (sw.parameter == SweepParameter::tau_periods) ov.tau_periods = row.value;
    std::ostringstream err;
    try {
      const Resolved1D sc = resolve_1d(cfg, ov, 1);
      const auto traj = integrate(StateVector1D::basis(sc.truncation, sc.initial_level), sc.resonance, sc.pulse,
                                  cfg.simulation.integrator);
      row.summary = summarize(sc, traj);
    } catch (...) {
      const int code = report_failure(err, "row");
      row.status = code == kExitTruncation ? "truncation" : code == kExitUsage ? "invalid" : "integration";
      row.message = err.str();
      while (!row.message.empty() && row.message.back() == '\n') row.message.pop_back();
      for (char& c : row.message) {
        if (c == ',' || c == '\n' || c == '"') c = ';';
      }
    }
  });

  std::ostringstream csv;
  csv << csv_comment_header(cfg.hash) << '\n';
  csv << "index," << to_string(sw.parameter) << ",status,lambda_peak,n_max,width,mean_n,max_norm_drift,max_tail";
  for (int level : levels) csv << ",P" << level;
  csv << ",message\n";
  int ok = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& row = rows[k];
    csv << k << ',' << format_real(row.value) << ',' << row.status;
    if (row.status == "ok") {
      ++ok;
      const auto& s = row.summary;
      csv << ',' << format_real(s["lambda_peak"].get<double>()) << ',' << s["n_max"].get<int>() << ','
          << format_real(s["width"].get<double>()) << ',' << format_real(s["mean_n"].get<double>()) << ','
          << format_real(s["max_norm_drift"].get<double>()) << ',' << format_real(s["max_tail"].get<double>());
      const auto& pops = s["populations"];
      for (int level : levels) {
        csv << ',' << (static_cast<std::size_t>(level) < pops.size() ? format_real(pops[static_cast<std::size_t>(level)].get<double>()) : "");
      }
    } else {
      csv << ",,,,,,";
      for (std::size_t i = 0; i < levels.size(); ++i) csv << ',';
    }
    csv << ',' << row.message << '\n';
  }
  const auto path = output_path(global, cfg.output.prefix + "_sweep.csv");
  write_file(path, csv.str());
  out << fmt::format("{} of {} rows succeeded; written to {}\n", ok, rows.size(), path.string());
  out << fmt::format("runtime = {:.3f} s\n", clock.seconds());
  if (ok == 0) return kExitIntegration;
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kapitza-Dirac blockade simulator and design toolkit", kToolName};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  GlobalOptions global;
  std::string output_dir = ".";
  bool seed_irrelevant = false;
  app.add_option("--threads", global.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--seed-irrelevant", seed_irrelevant, "reserved; the tool is deterministic");
  app.add_option("--output-dir", output_dir, "directory for output files");

  auto* blockade = app.add_subcommand("blockade", "list blockade detunings of a ladder level");
  int n_bk = 0, nm = 2, map_levels = 20, map_samples = 401;
  double map_lo = -2.0, map_hi = 2.0;
  std::optional<std::string> map_path;
  blockade->add_option("--n", n_bk, "blockade level")->required();
  blockade->add_option("--nm", nm, "ladder step")->required();
  blockade->add_option("--map", map_path, "write the amplitude map CSV to this file");
  blockade->add_option("--map-levels", map_levels, "levels in the map");
  blockade->add_option("--map-from", map_lo, "lowest detuning in the map");
  blockade->add_option("--map-to", map_hi, "highest detuning in the map");
  blockade->add_option("--map-samples", map_samples, "detuning samples in the map");

  auto* simulate = app.add_subcommand("simulate", "run a scenario config");
  std::string config_path;
  simulate->add_option("config", config_path, "scenario config")->required();

  auto* wigner_cmd = app.add_subcommand("wigner", "Wigner function of a saved state");
  std::string state_path;
  WignerArgs wargs;
  std::optional<double> time;
  wigner_cmd->add_option("state", state_path, "state JSON written by simulate")->required();
  wigner_cmd->add_option("--time", time, "evaluation time in trap periods (default: turning time)");
  wigner_cmd->add_option("--spacing", wargs.spacing, "position spacing in x0");
  wigner_cmd->add_option("--extent", wargs.extent, "position half-extent in x0");
  wigner_cmd->add_option("--p-extent", wargs.p_extent, "momentum half-extent in hbar k0");
  wigner_cmd->add_option("--p-spacing", wargs.p_spacing, "momentum spacing in hbar k0");
  wigner_cmd->add_option("--format", wargs.format, "csv, binary or both")
      ->check(CLI::IsMember({"csv", "binary", "both"}));
  wigner_cmd->add_option("--prefix", wargs.prefix, "output file stem");

  auto* design = app.add_subcommand("design", "design report for physical parameters");
  std::optional<std::string> design_config, preset;
  design->add_option("config", design_config, "physical-mode config");
  design->add_option("--preset", preset, "built-in parameter set")
      ->check(CLI::IsMember({"electron", "tppf84", "sio2"}));

  auto* sweep = app.add_subcommand("sweep", "scan one drive parameter");
  SweepFlags flags;
  sweep->add_option("config", config_path, "scenario config")->required();
  sweep->add_option("--parameter", flags.parameter, "lambda_peak, delta_p or tau_periods");
  sweep->add_option("--from", flags.from, "first value");
  sweep->add_option("--to", flags.to, "last value");
  sweep->add_option("--samples", flags.samples, "number of values");

  for (auto* sub : {blockade, simulate, wigner_cmd, design, sweep}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  }
  global.output_dir = output_dir;
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "blockade") return cmd_blockade(n_bk, nm, map_path, map_levels, map_lo, map_hi, map_samples, global, out);
    if (name == "simulate") return cmd_simulate(config_path, global, out);
    if (name == "wigner") {
      wargs.time_periods = time;
      return cmd_wigner(state_path, wargs, global, out);
    }
    if (name == "design") return cmd_design(design_config, preset, global, out);
    return cmd_sweep(config_path, flags, global, out);
  } catch (...) {
    return report_failure(err, name.c_str());
  }
}

}  // namespace kdb
