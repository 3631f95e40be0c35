#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "subnyq/estimator.hpp"
#include "subnyq/optimizer.hpp"

namespace subnyq::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest text that round-trips: 17 significant digits.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Parses a number with an optional engineering suffix: "25M", "2u", "5k", "1e-9".
inline double parse_engineering(const std::string& text) {
  static const std::map<char, double> suffix{{'f', 1e-15}, {'p', 1e-12}, {'n', 1e-9}, {'u', 1e-6},
                                             {'m', 1e-3},  {'k', 1e3},   {'K', 1e3},  {'M', 1e6},
                                             {'G', 1e9},   {'T', 1e12}};
  std::string s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) throw Error(Errc::InvalidConfig, "empty number");
  double scale = 1.0;
  if (const auto it = suffix.find(s.back()); it != suffix.end()) {
    scale = it->second;
    s.pop_back();
  }
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    throw Error(Errc::InvalidConfig, "not a number: '" + text + "'");
  }
  if (used != s.size()) throw Error(Errc::InvalidConfig, "not a number: '" + text + "'");
  return v * scale;
}

/// Everything a run needs: system, prior, quadrature size and reference code seed.
struct RunConfig {
  SystemConfig system;
  ParameterPrior prior;
  int nodes = 15;
  std::uint64_t code_seed = 1;
  json source;  // normalized snapshot
};

inline double number_field(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_engineering(v.get<std::string>());
  throw Error(Errc::InvalidConfig, std::string("field '") + key + "' must be a number");
}

inline RunConfig parse_config(const json& j) {
  static const std::vector<std::string> known{"fs_hz",       "t0_s",     "L",        "pt",         "n0",
                                              "sigma_tau_s", "sigma_nu_hz", "mu_tau_s", "mu_nu_hz", "ghq_nodes",
                                              "code_seed"};
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "configuration must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(Errc::InvalidConfig, "unknown configuration key '" + key + "'");
    }
  }
  for (const char* key : {"fs_hz", "t0_s", "sigma_tau_s", "sigma_nu_hz"}) {
    if (!j.contains(key)) throw Error(Errc::InvalidConfig, std::string("missing required key '") + key + "'");
  }
  const auto get = [&](const char* key, double fallback) { return j.contains(key) ? number_field(j, key) : fallback; };

  const double L = get("L", 0.0);
  const double nodes = get("ghq_nodes", 15.0);
  const double seed = get("code_seed", 1.0);
  if (L != std::floor(L)) throw Error(Errc::InvalidConfig, "L must be an integer");
  if (nodes != std::floor(nodes) || nodes < 1) throw Error(Errc::InvalidConfig, "ghq_nodes must be a positive integer");
  if (seed != std::floor(seed) || seed < 0) throw Error(Errc::InvalidConfig, "code_seed must be a non-negative integer");

  RunConfig rc;
  rc.system = build_config(number_field(j, "fs_hz"), number_field(j, "t0_s"), static_cast<int>(L), get("pt", 1.0),
                           get("n0", 1.0));
  rc.prior = make_prior(number_field(j, "sigma_tau_s"), number_field(j, "sigma_nu_hz"), get("mu_tau_s", 0.0),
                        get("mu_nu_hz", 0.0));
  rc.nodes = static_cast<int>(nodes);
  rc.code_seed = static_cast<std::uint64_t>(seed);
  rc.source = {{"fs_hz", rc.system.fs},          {"t0_s", rc.system.t0},
               {"L", rc.system.L},               {"pt", rc.system.pt},
               {"n0", rc.system.n0},             {"sigma_tau_s", rc.prior.sigma_tau},
               {"sigma_nu_hz", rc.prior.sigma_nu}, {"mu_tau_s", rc.prior.mu_tau},
               {"mu_nu_hz", rc.prior.mu_nu},     {"ghq_nodes", rc.nodes},
               {"code_seed", rc.code_seed}};
  return rc;
}

inline RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot read configuration " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::Io, path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

/// CSV with columns index, re, im over harmonics -K/2 .. K/2-1.
inline std::string spectrum_csv(const CVec& x) {
  std::ostringstream os;
  os << "index,re,im\n";
  const int K = static_cast<int>(x.size());
  for (int p = 0; p < K; ++p) os << p - K / 2 << ',' << fmt(x[p].real()) << ',' << fmt(x[p].imag()) << '\n';
  return os.str();
}

inline CVec read_spectrum_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "index,re,im") throw Error(Errc::Io, path.string() + ": unexpected header");
  std::vector<cd> vals;
  int expected = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    const int idx = std::stoi(a);
    if (first) {
      expected = idx;
      first = false;
    }
    if (idx != expected++) throw Error(Errc::Io, path.string() + ": harmonic indices must be consecutive");
    vals.emplace_back(std::stod(b), std::stod(c));
  }
  CVec x(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) x[static_cast<Eigen::Index>(i)] = vals[i];
  if (x.size() > 0 && -x.size() / 2 != expected - x.size()) throw Error(Errc::Io, path.string() + ": index range mismatch");
  return x;
}

inline json fim_json(const FimResult& f) {
  return {{"j11", f.J(0, 0)}, {"j12", f.J(0, 1)}, {"j22", f.J(1, 1)}, {"kind", to_string(f.kind)}, {"nodes", f.nodes}};
}

inline json mat_json(const Mat2& J) { return {{"j11", J(0, 0)}, {"j12", J(0, 1)}, {"j22", J(1, 1)}}; }

inline json design_json(const DesignResult& d) {
  return {{"alpha", d.alpha},
          {"chi_tau_db", d.chi.tau_db},
          {"chi_nu_db", d.chi.nu_db},
          {"chi_approx_tau_db", d.chi_approx.tau_db},
          {"chi_approx_nu_db", d.chi_approx.nu_db},
          {"objective", d.objective()},
          {"initial_objective", d.initial_objective},
          {"iterations", d.iterations},
          {"converged", d.converged},
          {"restart", d.restart},
          {"degenerate", d.degenerate},
          {"efim_exact", mat_json(d.jd)},
          {"efim_approx", mat_json(d.jd_approx)}};
}

inline std::string trace_csv(const DesignResult& d) {
  std::ostringstream os;
  os << "step,half,objective\n";
  for (size_t i = 0; i < d.trace.size(); ++i) {
    os << i / 2 + 1 << ',' << (i % 2 == 0 ? "transmit" : "receive") << ',' << fmt(d.trace[i]) << '\n';
  }
  return os.str();
}

/// design.json, g.csv, h.csv and trace.csv under `dir`, optionally prefixed.
inline std::vector<fs::path> write_design(const DesignResult& d, const fs::path& dir, const std::string& prefix = "") {
  std::vector<fs::path> files{dir / (prefix + "design.json"), dir / (prefix + "g.csv"), dir / (prefix + "h.csv"),
                              dir / (prefix + "trace.csv")};
  write_text(files[0], design_json(d).dump(2) + "\n");
  write_text(files[1], spectrum_csv(d.g));
  write_text(files[2], spectrum_csv(d.h));
  write_text(files[3], trace_csv(d));
  return files;
}

inline std::string pareto_csv(const ParetoResult& p) {
  std::ostringstream os;
  os << "alpha,chi_tau_db,chi_nu_db,iterations,converged\n";
  for (const DesignResult& d : p.designs) {
    os << fmt(d.alpha) << ',' << fmt(d.chi.tau_db) << ',' << fmt(d.chi.nu_db) << ',' << d.iterations << ','
       << (d.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

/// pareto.csv, per-alpha spectra and the best design; nothing for an empty sweep.
inline std::vector<fs::path> write_pareto(const ParetoResult& p, const fs::path& dir) {
  std::vector<fs::path> files;
  if (p.designs.empty()) return files;
  files.push_back(dir / "pareto.csv");
  write_text(files.back(), pareto_csv(p));
  for (const DesignResult& d : p.designs) {
    const std::string tag = "alpha_" + fmt(d.alpha) + "_";
    for (const auto& [name, x] : {std::pair{"g.csv", &d.g}, std::pair{"h.csv", &d.h}}) {
      files.push_back(dir / (tag + name));
      write_text(files.back(), spectrum_csv(*x));
    }
  }
  const auto best = write_design(p.designs[p.best], dir, "best_");
  files.insert(files.end(), best.begin(), best.end());
  return files;
}

inline std::string report_csv(const McReport& r) {
  std::ostringstream os;
  os << "psnr_dbhz,nmse_tau,nmse_nu,bcrlb_tau_norm,bcrlb_nu_norm,failures\n";
  for (size_t i = 0; i < r.psnr_dbhz.size(); ++i) {
    os << fmt(r.psnr_dbhz[i]) << ',' << fmt(r.nmse_tau[i]) << ',' << fmt(r.nmse_nu[i]) << ',' << fmt(r.bcrlb_tau[i])
       << ',' << fmt(r.bcrlb_nu[i]) << ',' << r.failures[i] << '\n';
  }
  return os.str();
}

inline std::string ambiguity_csv(const AmbiguitySurface& s) {
  std::ostringstream os;
  os << "tau_s,nu_hz,value\n";
  for (Eigen::Index i = 0; i < s.tau.size(); ++i) {
    for (Eigen::Index j = 0; j < s.nu.size(); ++j) {
      os << fmt(s.tau[i]) << ',' << fmt(s.nu[j]) << ',' << fmt(s.values(i, j)) << '\n';
    }
  }
  return os.str();
}

}  // namespace subnyq::io
