#pragma once

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subnyq/io.hpp"

namespace subnyq::cli {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr const char* kSchema = R"(configuration (JSON object, unknown keys rejected):
  fs_hz        sampling rate             required, e.g. 25e6 or "25M"
  t0_s         signal period             required, e.g. "2u"
  sigma_tau_s  prior std of the delay    required, e.g. "1n"
  sigma_nu_hz  prior std of the Doppler  required, e.g. "5k"
  L            bandwidth factor, B = (2L+1) fs      default 0
  pt           transmit power budget                default 1
  n0           noise power spectral density         default 1
  mu_tau_s     prior mean of the delay              default 0
  mu_nu_hz     prior mean of the Doppler            default 0
  ghq_nodes    Gauss-Hermite nodes per axis         default 15
  code_seed    seed of the reference +-1 code       default 1
)";

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  double alpha = -1.0;  // negative: choose alpha* from a sweep
  int points = 21;
  int restarts = 3;
  int max_iter = 100;
  double eps = 1e-6;
  double psnr_min = 40.0;
  double psnr_max = 110.0;
  double psnr_step = 5.0;
  int trials = 2000;
  std::string which = "both";
  std::string system = "optimized";
  int grid = 101;
  double tau_span = 0.0;  // 0: default per surface
  double nu_span = 0.0;
  double psnr = 200.0;
  bool full_space = false;
};

class Session {
 public:
  Session(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
    rc_ = io::load_config(opt.config);
    ops_ = std::make_unique<FrequencyOps>(rc_.system);
    design_.nodes = rc_.nodes;
    design_.eps = opt.eps;
    design_.max_iter = opt.max_iter;
    design_.restarts = opt.restarts;
    design_.seed = opt.seed;
    design_.full_space = opt.full_space;
    start_ = std::chrono::steady_clock::now();
  }

  const FrequencyOps& ops() const { return *ops_; }
  const io::RunConfig& config() const { return rc_; }
  const DesignOptions& design_options() const { return design_; }
  io::fs::path out() const { return opt_.out; }

  const ReferenceSystem& reference() {
    if (!ref_) ref_ = std::make_unique<ReferenceSystem>(make_reference(*ops_, rc_.prior, rc_.nodes, rc_.code_seed));
    return *ref_;
  }

  /// Design at the requested alpha, or at alpha* of a sweep when none was given.
  DesignResult design() {
    if (opt_.alpha >= 0.0) return optimize_design(*ops_, opt_.alpha, rc_.prior, reference(), design_);
    ParetoResult p = pareto_sweep(*ops_, alpha_grid(opt_.points), rc_.prior, reference(), design_);
    if (p.best < 0) throw Error(Errc::SingularInformation, "every alpha of the sweep failed");
    return p.designs[p.best];
  }

  void add(const std::vector<io::fs::path>& files) { files_.insert(files_.end(), files.begin(), files.end()); }
  void add(const io::fs::path& file) { files_.push_back(file); }

  void manifest(io::json extra = io::json::object()) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::json files = io::json::array();
    for (const auto& f : files_) files.push_back(f.filename().string());
    io::json m{{"command", command_},
               {"config", rc_.source},
               {"seed", opt_.seed},
               {"versions",
                {{"subnyq", kVersion},
                 {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                               std::to_string(EIGEN_MINOR_VERSION)},
                 {"compiler", __VERSION__}}},
               {"outputs", files},
               {"wall_time_s", wall}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    io::write_text(out() / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  Options opt_;
  io::RunConfig rc_;
  std::unique_ptr<FrequencyOps> ops_;
  std::unique_ptr<ReferenceSystem> ref_;
  DesignOptions design_;
  std::vector<io::fs::path> files_;
  std::chrono::steady_clock::time_point start_;
};

inline void cmd_optimize(Session& s) {
  const DesignResult d = s.design();
  s.add(io::write_design(d, s.out()));
  s.manifest({{"alpha", d.alpha}});
}

inline void cmd_pareto(Session& s, const Options& opt) {
  const ParetoResult p =
      pareto_sweep(s.ops(), alpha_grid(opt.points), s.config().prior, s.reference(), s.design_options());
  for (const auto& f : p.failures) std::cerr << "warning: alpha " << f << '\n';
  s.add(io::write_pareto(p, s.out()));
  io::json extra{{"failures", p.failures}};
  if (p.best >= 0) extra["alpha_star"] = p.designs[p.best].alpha;
  s.manifest(extra);
}

inline void cmd_simulate(Session& s, const Options& opt) {
  const auto grid = psnr_range(opt.psnr_min, opt.psnr_max, opt.psnr_step);
  if (opt.trials < 100) throw Error(Errc::InvalidConfig, "simulate needs at least 100 trials");
  MonteCarloOptions mc;
  mc.nodes = s.config().nodes;
  const DesignResult d = s.design();
  s.add(io::write_design(d, s.out()));
  const McReport rep = monte_carlo(s.ops(), d.g, d.h, s.config().prior, grid, opt.trials, opt.seed, mc);
  io::write_text(s.out() / "report.csv", io::report_csv(rep));
  const ReferenceSystem& ref = s.reference();
  const McReport rr = monte_carlo(s.ops(), ref.g, ref.h, s.config().prior, grid, opt.trials, opt.seed, mc);
  io::write_text(s.out() / "reference_report.csv", io::report_csv(rr));
  s.add({s.out() / "report.csv", s.out() / "reference_report.csv"});
  s.manifest({{"alpha", d.alpha}, {"trials", opt.trials}});
}

inline void cmd_ambiguity(Session& s, const Options& opt) {
  if (opt.which != "classic" && opt.which != "map" && opt.which != "both") {
    throw Error(Errc::InvalidConfig, "--which must be classic, map or both");
  }
  CVec g, h;
  io::json extra{{"system", opt.system}};
  if (opt.system == "reference") {
    g = s.reference().g;
    h = s.reference().h;
  } else if (opt.system == "optimized") {
    const DesignResult d = s.design();
    s.add(io::write_design(d, s.out()));
    g = d.g;
    h = d.h;
    extra["alpha"] = d.alpha;
  } else {
    throw Error(Errc::InvalidConfig, "--system must be optimized or reference");
  }
  const auto& c = s.config().system;
  const double tau_span = opt.tau_span > 0.0 ? opt.tau_span : 2.0 * c.ts;
  const double nu_span = opt.nu_span > 0.0 ? opt.nu_span : 0.49 * c.f0;
  const Theta mu = s.config().prior.mean();
  const RVec tau = linspace(mu.tau - tau_span, mu.tau + tau_span, opt.grid);
  const RVec nu = linspace(mu.nu - nu_span, mu.nu + nu_span, opt.grid);
  if (opt.which != "map") {
    io::write_text(s.out() / "ambiguity_classic.csv", io::ambiguity_csv(classic_ambiguity(c, g, tau, nu)));
    s.add(s.out() / "ambiguity_classic.csv");
  }
  if (opt.which != "classic") {
    const double n0 = c.pt / std::pow(10.0, opt.psnr / 10.0);
    const AmbiguitySurface m = map_ambiguity(s.ops(), g, h, s.config().prior, n0, tau, nu);
    io::write_text(s.out() / "ambiguity_map.csv", io::ambiguity_csv(m));
    s.add(s.out() / "ambiguity_map.csv");
    extra["map_offset"] = m.offset;
    extra["map_scale"] = m.scale;
    extra["map_psnr_dbhz"] = opt.psnr;
  }
  s.manifest(extra);
}

inline void cmd_reference(Session& s) {
  const auto& c = s.config().system;
  const ReferenceSystem& ref = s.reference();
  io::write_text(s.out() / "rpc.csv", io::spectrum_csv(ref.g));
  io::write_text(s.out() / "lfm.csv", io::spectrum_csv(lfm_waveform(c)));
  io::write_text(s.out() / "lowpass.csv", io::spectrum_csv(ref.h));
  s.add({s.out() / "rpc.csv", s.out() / "lfm.csv", s.out() / "lowpass.csv"});
  s.manifest({{"efim_rpc", io::mat_json(ref.jd)}});
}

/// Entry point: 0 on success, 2 on usage or configuration errors, 3 on numerical failures.
inline int run(int argc, char** argv) {
  CLI::App app{"Joint transmit/receive filter design for sub-Nyquist delay-Doppler estimation"};
  app.require_subcommand(1);
  app.footer(kSchema);
  app.set_version_flag("--version", kVersion);

  Options opt;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--seed", opt.seed, "random seed (restarts, simulation)");
    sub->add_option("--restarts", opt.restarts, "optimization restarts")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", opt.max_iter, "alternation limit")->check(CLI::PositiveNumber);
    sub->add_option("--eps", opt.eps, "relative convergence threshold")->check(CLI::PositiveNumber);
    sub->add_flag("--full-space", opt.full_space, "optimize without the symmetry restriction");
    sub->footer(kSchema);
  };
  const auto alpha = [&](CLI::App* sub) {
    sub->add_option("--alpha", opt.alpha, "delay weight in [0,1]; omitted: alpha* of a sweep")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--points", opt.points, "sweep size used to find alpha*")->check(CLI::Range(1, 1001));
  };

  CLI::App* optimize = app.add_subcommand("optimize", "optimize one transceiver");
  common(optimize);
  alpha(optimize);
  CLI::App* pareto = app.add_subcommand("pareto", "sweep alpha over [0,1]");
  common(pareto);
  pareto->add_option("--points", opt.points, "number of alpha values")->check(CLI::Range(1, 1001));
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo NMSE versus pSNR");
  common(simulate);
  alpha(simulate);
  simulate->add_option("--psnr-min", opt.psnr_min, "dB-Hz");
  simulate->add_option("--psnr-max", opt.psnr_max, "dB-Hz");
  simulate->add_option("--psnr-step", opt.psnr_step, "dB");
  simulate->add_option("--trials", opt.trials, "trials per pSNR");
  CLI::App* ambiguity = app.add_subcommand("ambiguity", "classic and MAP ambiguity surfaces");
  common(ambiguity);
  alpha(ambiguity);
  ambiguity->add_option("--which", opt.which, "classic | map | both");
  ambiguity->add_option("--system", opt.system, "optimized | reference");
  ambiguity->add_option("--grid", opt.grid, "points per axis")->check(CLI::Range(2, 100000));
  ambiguity->add_option("--tau-span", opt.tau_span, "delay half-width, s (default 2 Ts)");
  ambiguity->add_option("--nu-span", opt.nu_span, "Doppler half-width, Hz (default 0.49 f0)");
  ambiguity->add_option("--psnr", opt.psnr, "pSNR of the MAP surface, dB-Hz");
  CLI::App* reference = app.add_subcommand("reference", "reference spectra (RPC, LFM, low-pass)");
  common(reference);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    Session s(name, opt);
    if (name == "optimize") cmd_optimize(s);
    else if (name == "pareto") cmd_pareto(s, opt);
    else if (name == "simulate") cmd_simulate(s, opt);
    else if (name == "ambiguity") cmd_ambiguity(s, opt);
    else cmd_reference(s);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.is_config_error()) {
      std::cerr << kSchema;
      return 2;
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace subnyq::cli
