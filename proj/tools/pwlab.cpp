// pwlab command-line front end.
// Exit codes: 0 ok, 1 flagged results, 2 usage error, 3 computation error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pwlab.hpp"

using namespace pwlab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFlagged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCompute = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raw option text keyed by long flag name; flags override the config file.
using Raw = std::map<std::string, std::string>;

const std::vector<std::string> kKeys = {"case", "J",    "E",  "T",      "Psi",    "grid-n", "dt",  "t-end",
                                        "eps",  "seed", "out", "n",     "J-step", "flow",   "final"};

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw UsageError("--" + key + ": not a number: '" + text + "'");
  return v;
}

struct Config {
  Raw raw;

  bool has(const std::string& k) const { return raw.count(k) > 0; }
  std::string str(const std::string& k, const std::string& def) const { return has(k) ? raw.at(k) : def; }
  double num(const std::string& k, double def) const { return has(k) ? parse_number(k, raw.at(k)) : def; }
  std::optional<double> opt_num(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return parse_number(k, raw.at(k));
  }
  int integer(const std::string& k, int def) const {
    const double v = num(k, def);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError("--" + k + ": expected an integer");
    return static_cast<int>(v);
  }

  json echo(const std::string& command) const {
    json j;
    j["command"] = command;
    for (const auto& [k, v] : raw) j[k] = v;
    return j;
  }
};

Config merge(const Raw& flags, const std::string& config_path) {
  Config c;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot read config file '" + config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [k, v] : j.items()) {
      std::string key = k;
      std::replace(key.begin(), key.end(), '_', '-');
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) throw UsageError("config file: unknown key '" + k + "'");
      c.raw[key] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  for (const auto& [k, v] : flags) c.raw[k] = v;
  return c;
}

ModelCase model_of(const Config& c) {
  if (!c.has("case")) throw UsageError("--case is required");
  try {
    return ModelCase::from_name(c.raw.at("case"));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

int grid_of(const Config& c) {
  const int n = c.integer("grid-n", 256);
  if (n < 64 || n > 4096 || (n & (n - 1)) != 0) throw UsageError("--grid-n must be a power of two in [64, 4096]");
  return n;
}

/// Exactly one of (J,E) and (T,Psi).
Invariants invariants_of(const ModelCase& mc, const Config& c) {
  const bool je = c.has("J") || c.has("E");
  const bool tp = c.has("T") || c.has("Psi");
  if (je == tp) throw UsageError("give exactly one of (--J, --E) or (--T, --Psi)");
  if (je) {
    if (!c.has("J") || !c.has("E")) throw UsageError("--J and --E must be given together");
    const double J = c.num("J", 0.0);
    const std::string e = c.raw.at("E");
    Invariants inv{J, e == "auto" ? e_minus(mc, J) + 0.05 : parse_number("E", e)};
    if (!is_interior(mc, inv)) throw UsageError("(J,E) is not an interior point of the case domain");
    return inv;
  }
  if (!c.has("T") || !c.has("Psi")) throw UsageError("--T and --Psi must be given together");
  return invert_TPsi(mc, c.num("T", 0.0), c.num("Psi", 0.0));
}

std::optional<std::pair<std::string, std::string>> split_range(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) return std::nullopt;
  return std::make_pair(s.substr(0, pos), s.substr(pos + 2));
}

/// Writes through `emit` to --out, or to stdout without it. The file is
/// opened only after the payload was produced, so failures leave no file.
template <class Emit>
void write_output(const Config& c, const Emit& emit) {
  std::ostringstream buf;
  emit(buf);
  if (!c.has("out") || c.raw.at("out") == "-") {
    std::cout << buf.str();
    return;
  }
  std::ofstream out(c.raw.at("out"), std::ios::binary);
  if (!out) throw UsageError("cannot open '" + c.raw.at("out") + "' for writing");
  out << buf.str();
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

int cmd_scan(const Config& c) {
  const ModelCase mc = model_of(c);
  if (!c.has("J") || !c.has("E")) throw UsageError("scan needs --J and --E grid specs");
  std::vector<double> Js;
  if (auto r = split_range(c.raw.at("J"))) {
    const double a = parse_number("J", r->first), b = parse_number("J", r->second);
    const double step = c.num("J-step", 1.0);
    if (!(step > 0.0)) throw UsageError("--J-step must be positive");
    for (int i = 0; a + i * step <= b + 1e-12 * std::max(1.0, std::abs(b)); ++i) Js.push_back(a + i * step);
  } else {
    Js.push_back(c.num("J", 0.0));
  }
  const int n = c.integer("n", 10);
  const std::string espec = c.raw.at("E");
  std::vector<Invariants> pts;
  auto lower = [&](const std::string& s, double J) {
    if (s != "auto") return parse_number("E", s);
    try {
      return e_minus(mc, J) + 0.05;
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  };
  if (n < 1) throw UsageError("--n must be >= 1");
  for (double J : Js) {
    if (auto r = split_range(espec)) {
      const double lo = lower(r->first, J), hi = lower(r->second, J);
      if (hi < lo) continue;
      for (int i = 0; i < n; ++i) pts.push_back({J, n > 1 ? lo + (hi - lo) * i / (n - 1) : lo});
    } else {
      pts.push_back({J, lower(espec, J)});
    }
  }
  if (pts.empty()) throw UsageError("empty scan grid");
  std::vector<ScanRow> rows(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { rows[i] = scan_point(mc, pts[i]); });
  write_output(c, [&](std::ostream& os) { write_scan_csv(os, c.echo("scan"), rows); });
  int flagged = 0;
  for (const auto& r : rows) flagged += r.flagged ? 1 : 0;
  std::cerr << rows.size() << " rows, " << flagged << " flagged\n";
  return flagged ? kExitFlagged : kExitOk;
}

int cmd_profile(const Config& c) {
  const ModelCase mc = model_of(c);
  const Invariants inv = invariants_of(mc, c);
  const WaveProfile prof = shoot_profile(mc, inv, grid_of(c));
  write_output(c, [&](std::ostream& os) { write_profile_csv(os, c.echo("profile"), prof); });
  if (c.has("out")) {
    json j = profile_json(prof);
    const Functionals f = functionals(prof);
    j["functionals"] = {{"N", f.N}, {"M", f.M}, {"E", f.E}};
    j["stationarity_residual"] = stationarity_residual(prof);
    print_json(j);
  }
  return kExitOk;
}

int cmd_spectrum(const Config& c) {
  const ModelCase mc = model_of(c);
  const Invariants inv = invariants_of(mc, c);
  const int n = c.integer("n", 64);
  if (n < 16 || n > 512) throw UsageError("--n (Fourier modes) must lie in [16, 512]");
  const WaveProfile prof = shoot_profile(mc, inv, grid_of(c));
  const SpectralReport rep = spectrum_low(assemble_H(prof, n));
  write_output(c, [&](std::ostream& os) { write_spectrum_csv(os, c.echo("spectrum"), rep); });
  if (c.has("out")) {
    json j = spectral_json(rep);
    j["case"] = std::string(mc.name());
    j["J"] = inv.J;
    j["E"] = inv.E;
    j["n"] = n;
    print_json(j);
  }
  return kExitOk;
}

int cmd_evolve(const Config& c) {
  const ModelCase mc = model_of(c);
  const Invariants inv = invariants_of(mc, c);
  const int N = grid_of(c);
  const double dt = c.num("dt", 1e-3), t_end = c.num("t-end", 10.0), eps = c.num("eps", 0.0);
  const double seed = c.num("seed", 1.0);
  if (!(dt > 0.0) || dt > 1e-2) throw UsageError("--dt must lie in (0, 1e-2]");
  if (!(t_end > 0.0) || t_end > 1e4) throw UsageError("--t-end must lie in (0, 1e4]");
  if (eps < 0.0 || eps > 1e-2) throw UsageError("--eps must lie in [0, 1e-2]");
  if (seed < 0 || seed != std::floor(seed)) throw UsageError("--seed must be a nonnegative integer");
  const std::string flow = c.str("flow", "nls");
  if (flow != "nls" && flow != "gl") throw UsageError("--flow must be nls or gl");
  ProfileOptions po;
  po.escalate = false;
  const WaveProfile prof = shoot_profile(mc, inv, N, po);
  CVec Q0 = prof.Q;
  if (eps > 0.0) {
    const CVec R = random_perturbation(N, static_cast<std::uint64_t>(seed));
    for (int j = 0; j < N; ++j) Q0[j] += eps * R[j];
  }
  EvolveOptions eo;
  eo.dt = dt;
  eo.t_end = t_end;
  eo.reference = prof.Q;
  const EvolutionTrace tr =
      flow == "nls" ? evolve_nls(mc, Q0, prof.k(), prof.p(), eo) : evolve_gl(mc, Q0, prof.k(), prof.p(), eo);
  write_output(c, [&](std::ostream& os) { write_trace_csv(os, c.echo("evolve"), tr); });
  if (c.has("final")) {
    std::ofstream out(c.raw.at("final"), std::ios::binary);
    if (!out) throw UsageError("cannot open '" + c.raw.at("final") + "' for writing");
    json header = profile_json(prof);
    header["t"] = tr.times.back();
    write_samples_csv(out, c.echo("evolve"), header, tr.finalState);
  }
  double sup_rho = 0.0;
  for (double r : tr.rho) sup_rho = std::max(sup_rho, r);
  if (c.has("out")) {
    json j;
    j["flow"] = flow;
    j["sup_rho"] = sup_rho;
    if (eps > 0.0) j["max_ratio"] = sup_rho / eps;
    j["driftN"] = tr.driftN.back();
    j["driftM"] = tr.driftM.back();
    j["driftE"] = tr.driftE.back();
    j["blow_up"] = tr.blow_up;
    print_json(j);
  }
  return tr.blow_up ? kExitFlagged : kExitOk;
}

int cmd_invert(const Config& c) {
  const ModelCase mc = model_of(c);
  if (!c.has("T") || !c.has("Psi")) throw UsageError("invert needs --T and --Psi");
  if (c.has("J") || c.has("E")) throw UsageError("invert takes (--T, --Psi) only");
  const double T = c.num("T", 0.0), Psi = c.num("Psi", 0.0);
  const Invariants inv = invert_TPsi(mc, T, Psi);
  const auto back = map_to_TPsi(mc, inv);
  json j;
  j["case"] = std::string(mc.name());
  j["T"] = T;
  j["Psi"] = Psi;
  j["J"] = inv.J;
  j["E"] = inv.E;
  j["residual"] = std::hypot(back[0] - T, std::remainder(back[1] - Psi, 2.0 * kPi));
  const std::string text = j.dump(2) + "\n";
  write_output(c, [&](std::ostream& os) { os << text; });
  return kExitOk;
}

int cmd_report(const Config& c) {
  const ModelCase mc = model_of(c);
  const Invariants inv = invariants_of(mc, c);
  const int N = grid_of(c);
  const int n = c.integer("n", 64);
  const double eps = c.num("eps", 1e-3), t_end = c.num("t-end", 20.0), dt = c.num("dt", 1e-3);
  const double seed = c.num("seed", 1.0);
  if (!(eps > 0.0) || eps > 1e-2) throw UsageError("--eps must lie in (0, 1e-2]");
  if (!(dt > 0.0) || dt > 1e-2) throw UsageError("--dt must lie in (0, 1e-2]");
  if (!(t_end > 0.0) || t_end > 1e4) throw UsageError("--t-end must lie in (0, 1e4]");
  if (n < 16 || n > 512) throw UsageError("--n (Fourier modes) must lie in [16, 512]");
  if (seed < 0 || seed != std::floor(seed)) throw UsageError("--seed must be a nonnegative integer");

  json j;
  j["config"] = c.echo("report");
  j["case"] = std::string(mc.name());
  j["J"] = inv.J;
  j["E"] = inv.E;
  const DomainClass dc = domain_contains(mc, inv);
  j["domain"] = dc.region == Region::Interior ? "interior" : "not interior";
  const WaveNumbers wn = wave_numbers(mc, inv);
  j["wave_numbers"] = wave_numbers_json(wn);
  const StabilityReport sr = hessian_H(mc, inv);
  j["stability"] = stability_json(sr);
  const WaveProfile prof = shoot_profile(mc, inv, N);
  const SpectralReport rep = spectrum_low(assemble_H(prof, n));
  j["spectrum"] = spectral_json(rep);
  const StabilityExperiment ex = stability_experiment(mc, inv, eps, t_end, static_cast<std::uint64_t>(seed), N, dt);
  j["experiment"] = {{"eps", eps},       {"t_end", t_end},           {"seed", seed},
                     {"max_ratio", ex.max_ratio}, {"blow_up", ex.trace.blow_up}, {"threshold", 10.0}};
  json verdict;
  verdict["delta_positive"] = sr.delta > 0.0;
  verdict["detH_negative"] = sr.detH < 0.0;
  verdict["one_negative_eigenvalue"] = rep.n_negative == 1;
  verdict["kernel_dim_two"] = rep.kernel_dim_estimate == 2;
  verdict["orbitally_bounded"] = !ex.trace.blow_up && ex.max_ratio <= 10.0;
  j["verdict"] = verdict;
  bool all = true;
  for (const auto& [k, v] : verdict.items()) all = all && v.get<bool>();
  const std::string text = j.dump(2) + "\n";
  write_output(c, [&](std::ostream& os) { os << text; });
  return all ? kExitOk : kExitFlagged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic waves of cubic NLS: invariants, stability matrices, spectra and dynamics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Raw flags;
  std::string config_path;

  struct Spec {
    const char* name;
    const char* help;
    int (*run)(const Config&);
  };
  const Spec specs[] = {
      {"scan", "det H, Delta, det M, det K over a (J,E) grid to CSV", cmd_scan},
      {"profile", "wave profile Q on [0, 2pi) to CSV", cmd_profile},
      {"spectrum", "eigenvalues of the second variation to CSV", cmd_spectrum},
      {"evolve", "split-step evolution trace (rho and drifts) to CSV", cmd_evolve},
      {"invert", "(T, Psi) -> (J, E)", cmd_invert},
      {"report", "all checks for one (case, J, E) as JSON with a verdict", cmd_report},
  };
  std::map<std::string, std::string> store;
  for (const auto& k : kKeys) store[k];
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--case", store["case"], "defocusing | focusing-counter | focusing-coro");
    sub->add_option("--J", store["J"], "angular momentum (scan: value or a..b)");
    sub->add_option("--E", store["E"], "energy, 'auto' = E_-(J)+0.05 (scan: value or a..b)");
    sub->add_option("--T", store["T"], "period of |W|");
    sub->add_option("--Psi", store["Psi"], "renormalized phase");
    sub->add_option("--grid-n", store["grid-n"], "profile samples, power of two (default 256)");
    sub->add_option("--dt", store["dt"], "time step (default 1e-3)");
    sub->add_option("--t-end", store["t-end"], "final time");
    sub->add_option("--eps", store["eps"], "perturbation size");
    sub->add_option("--seed", store["seed"], "perturbation seed");
    sub->add_option("--out", store["out"], "output file (default stdout)");
    sub->add_option("--n", store["n"], "scan: points per J; spectrum/report: Fourier modes");
    sub->add_option("--J-step", store["J-step"], "scan: J spacing for a..b ranges (default 1)");
    sub->add_option("--flow", store["flow"], "evolve: nls | gl");
    sub->add_option("--final", store["final"], "evolve: final state CSV");
    sub->add_option("--config", config_path, "JSON config; flags override it");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  for (const auto& k : kKeys)
    if (chosen->count("--" + k) > 0) flags[k] = store[k];
  try {
    const Config c = merge(flags, config_path);
    for (const auto& s : specs)
      if (chosen->get_name() == s.name) return s.run(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const ErrorKind k = e.kind();
    const bool usage = k == ErrorKind::InvalidCase || k == ErrorKind::InvalidArgument ||
                       k == ErrorKind::OutOfRange || k == ErrorKind::OutsideImage;
    return usage ? kExitUsage : kExitCompute;
  }
  return kExitUsage;
}
