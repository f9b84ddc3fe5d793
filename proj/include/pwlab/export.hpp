#pragma once

// CSV/JSON writers. Every CSV starts with one '#' comment line carrying the
// tool version and the full configuration echo; floats use 17 significant
// digits so a reader recovers the exact double.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pwlab/dynamics.hpp"
#include "pwlab/profile.hpp"
#include "pwlab/spectral.hpp"
#include "pwlab/stability.hpp"

namespace pwlab {

inline constexpr const char* kVersion = "1.0.0";

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_header(std::ostream& os, const nlohmann::json& config) {
  os << "# pwlab " << kVersion << " config=" << config.dump() << '\n';
}

inline nlohmann::json wave_numbers_json(const WaveNumbers& wn) {
  nlohmann::json j;
  j["T"] = wn.T;
  j["Phi"] = wn.Phi ? nlohmann::json(*wn.Phi) : nlohmann::json(nullptr);
  j["Psi"] = wn.Psi;
  j["action"] = wn.action;
  j["N"] = wn.N;
  j["k"] = wn.k;
  j["ell"] = wn.ell;
  j["p"] = wn.p;
  return j;
}

inline nlohmann::json profile_json(const WaveProfile& prof) {
  nlohmann::json j = wave_numbers_json(prof.wn);
  j["case"] = std::string(prof.mc.name());
  j["J"] = prof.inv.J;
  j["E"] = prof.inv.E;
  j["gridN"] = prof.gridN;
  j["period_defect"] = prof.period_defect;
  j["conservation_error"] = prof.conservation_error;
  j["spectral_tail"] = prof.spectral_tail;
  return j;
}

/// Columns z, ReQ, ImQ, absQ; a second comment line holds the profile header.
inline void write_samples_csv(std::ostream& os, const nlohmann::json& config, const nlohmann::json& header,
                              const CVec& Q) {
  write_csv_header(os, config);
  os << "# " << header.dump() << '\n';
  os << "z,ReQ,ImQ,absQ\n";
  const int n = static_cast<int>(Q.size());
  for (int j = 0; j < n; ++j) {
    const double z = 2.0 * kPi * j / n;
    os << fmt17(z) << ',' << fmt17(Q[j].real()) << ',' << fmt17(Q[j].imag()) << ',' << fmt17(std::abs(Q[j])) << '\n';
  }
}

inline void write_profile_csv(std::ostream& os, const nlohmann::json& config, const WaveProfile& prof) {
  write_samples_csv(os, config, profile_json(prof), prof.Q);
}

inline void write_spectrum_csv(std::ostream& os, const nlohmann::json& config, const SpectralReport& rep) {
  write_csv_header(os, config);
  os << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) os << i << ',' << fmt17(rep.eigenvalues[i]) << '\n';
}

inline nlohmann::json spectral_json(const SpectralReport& rep) {
  nlohmann::json j;
  j["n_negative"] = rep.n_negative;
  j["kernel_dim_estimate"] = rep.kernel_dim_estimate;
  j["n_positive"] = rep.n_positive;
  j["tol_zero"] = rep.tol_zero;
  j["kernel_residuals"] = {{"dQ", rep.kernel_residual_dQ}, {"iQ", rep.kernel_residual_iQ}};
  j["kernel_alignment"] = rep.kernel_alignment;
  std::vector<double> low;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(5, rep.eigenvalues.size()); ++i) low.push_back(rep.eigenvalues[i]);
  j["lowest_eigenvalues"] = low;
  return j;
}

inline void write_trace_csv(std::ostream& os, const nlohmann::json& config, const EvolutionTrace& tr) {
  write_csv_header(os, config);
  os << "t,rho,driftN,driftM,driftE\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double rho = i < tr.rho.size() ? tr.rho[i] : NAN;
    os << fmt17(tr.times[i]) << ',' << fmt17(rho) << ',' << fmt17(tr.driftN[i]) << ',' << fmt17(tr.driftM[i]) << ','
       << fmt17(tr.driftE[i]) << '\n';
  }
}

inline void write_scan_csv(std::ostream& os, const nlohmann::json& config, const std::vector<ScanRow>& rows) {
  write_csv_header(os, config);
  os << "J,E,T,Phi,Psi,Delta,detM,detK,detH,flag\n";
  for (const auto& r : rows)
    os << fmt17(r.J) << ',' << fmt17(r.E) << ',' << fmt17(r.T) << ',' << fmt17(r.Phi) << ',' << fmt17(r.Psi) << ','
       << fmt17(r.delta) << ',' << fmt17(r.detM) << ',' << fmt17(r.detK) << ',' << fmt17(r.detH) << ','
       << (r.flagged ? 1 : 0) << '\n';
}

inline nlohmann::json matrix_json(const Mat2& m) {
  return nlohmann::json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
}

inline nlohmann::json stability_json(const StabilityReport& r) {
  nlohmann::json j;
  j["M"] = matrix_json(r.M);
  j["K"] = matrix_json(r.K);
  j["H"] = matrix_json(r.H);
  j["detM"] = r.detM;
  j["detK"] = r.detK;
  j["detH"] = r.detH;
  j["Delta"] = r.delta;
  j["K_method"] = r.k_method == KMethod::Analytic ? "analytic" : "finite-difference";
  return j;
}

}  // namespace pwlab
