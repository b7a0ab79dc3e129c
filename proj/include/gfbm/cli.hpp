#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfbm/analysis.hpp"
#include "gfbm/errors.hpp"
#include "gfbm/io.hpp"
#include "gfbm/kernels.hpp"
#include "gfbm/parameters.hpp"
#include "gfbm/simulation.hpp"
#include "gfbm/special_functions.hpp"

namespace gfbm::cli {

enum ExitCode : int {
  kOk = 0,
  kDomainError = 1,
  kNumericalError = 2,
  kCheckFailed = 3,
  kUsage = 64,
};

/// Names accepted by `verify --checks`.
inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"hurst", "holder", "nonstationarity", "c1",
                                              "c3",    "flil",   "llil",            "sigma"};
  return names;
}

namespace detail {

struct Options {
  double alpha = 0.0;
  double gamma = 0.0;
  std::string variant = "full";
  std::size_t paths = 1000;
  std::size_t grid_n = 16;
  double t_max = 1.0;
  std::uint64_t seed = 0;
  std::string method = "exact";
  std::string out;
  std::vector<std::string> checks;
  std::string route = "auto";
  std::string grid_file;
  std::string uniform;
  double b = 1.0;
  std::string in;
  double mesh = RiemannSpec{}.mesh;
  double truncation = 0.0;
};

inline ModelParams params_of(const Options& o) {
  return ModelParams::validate(o.alpha, o.gamma, parse_variant(o.variant));
}

inline void add_params(CLI::App* app, Options& o) {
  app->add_option("--alpha", o.alpha, "kernel exponent alpha")->required();
  app->add_option("--gamma", o.gamma, "singularity exponent gamma in [0, 1)")->required();
  app->add_option("--variant", o.variant, "full | rl")->check(CLI::IsMember({"full", "rl"}));
}

inline Grid grid_of(const Options& o) {
  if (!o.grid_file.empty()) return Grid(read_times(o.grid_file));
  if (!o.uniform.empty()) {
    const auto comma = o.uniform.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("--uniform", "expected N,T");
    const long n = std::stol(o.uniform.substr(0, comma));
    const double T = std::stod(o.uniform.substr(comma + 1));
    if (n < 1) throw OutOfDomain("grid", "N must be >= 1");
    return Grid::uniform(static_cast<std::size_t>(n), T);
  }
  return Grid::uniform(o.grid_n, o.t_max);
}

inline void emit_json(std::ostream& os, const nlohmann::json& j) { os << j.dump() << '\n'; }

inline void emit_matrix(const Options& o, const std::string& command, const ModelParams& p,
                        const std::vector<std::string>& argv, const std::vector<double>& header,
                        const Eigen::MatrixXd& m, std::ostream& out, nlohmann::json extra = {}) {
  if (o.out.empty()) {
    write_csv(out, header, m);
    return;
  }
  write_csv_file(o.out, header, m);
  RunManifest man{command, p, o.seed, kToolVersion, utc_timestamp(), {o.out}, argv};
  if (!extra.is_null()) man.extra = std::move(extra);
  write_manifest(man);
}

inline int run_kappa(const Options& o, std::ostream& out) {
  const ModelParams p = params_of(o);
  KappaResult k;
  if (o.route == "closed") {
    k = kappa_closed_form(p);
  } else if (o.route == "quad") {
    k = kappa_quadrature(p);
  } else {
    k = kappa(p);
  }
  emit_json(out, {{"kappa", k.value},
                  {"route", std::string(to_string(k.route))},
                  {"abs_error_estimate", k.abs_error_estimate},
                  {"c", normalization_c(p)},
                  {"H", p.hurst()}});
  return kOk;
}

inline int run_classify(const Options& o, std::ostream& out) {
  const RegionLabel label = classify(o.alpha, o.gamma);
  nlohmann::json j{{"regime", std::string(to_string(label.regime))}};
  if (label.regime == Regime::Invalid) {
    emit_json(out, j);
    // Re-run validation for the precise message.
    params_of(o);
    return kDomainError;
  }
  j["H"] = params_of(o).hurst();
  j["is_fbm"] = label.is_fbm;
  j["is_bm"] = label.is_bm;
  j["h_half_non_bm"] = label.h_half_non_bm;
  emit_json(out, j);
  return kOk;
}

inline int run_kernel_matrix(const Options& o, bool covariance, const std::vector<std::string>& argv,
                             std::ostream& out) {
  const ModelParams p = params_of(o);
  const KernelContext ctx = make_context(p);
  const Grid grid = grid_of(o);
  Eigen::MatrixXd m;
  if (covariance) {
    m = covariance_matrix(ctx, grid);
  } else {
    const auto n = static_cast<Eigen::Index>(grid.size());
    m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        m(i, j) = m(j, i) = phi(ctx, grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
  }
  emit_matrix(o, covariance ? "cov" : "phi", p, argv, grid.times(), m, out);
  return kOk;
}

inline int run_simulate(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  const ModelParams p = params_of(o);
  const Method method = parse_method(o.method);
  if (o.paths == 0) throw OutOfDomain("paths", "--paths must be positive");
  if (o.grid_n == 0 || !(o.t_max > 0.0)) throw OutOfDomain("grid", "--grid-n and --t-max must be positive");
  const KernelContext ctx = make_context(p);
  RiemannSpec rs;
  rs.mesh = o.mesh;
  rs.left_truncation = o.truncation;
  std::optional<PathEnsemble> ens;
  switch (method) {
    case Method::ExactFactorization:
      ens = sample_exact(ctx, Grid::uniform(o.grid_n, o.t_max), o.paths, o.seed);
      break;
    case Method::RiemannDiscretization:
      ens = sample_riemann(ctx, Grid::uniform(o.grid_n, o.t_max), rs, o.paths, o.seed);
      break;
    case Method::Derivative: {
      std::vector<double> t = Grid::uniform(o.grid_n, o.t_max).times();
      t.erase(t.begin());
      ens = sample_derivative(ctx, Grid(std::move(t)), rs, o.paths, o.seed);
      break;
    }
  }
  nlohmann::json extra{{"method", std::string(to_string(method))},
                       {"jitter", ens->jitter},
                       {"diagnostics", ens->diagnostics},
                       {"num_paths", ens->num_paths()}};
  emit_matrix(o, "simulate", p, argv, ens->grid.times(), ens->paths, out, extra);
  return kOk;
}

inline int run_estimate(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  double h_hat = 0.0;
  std::size_t n_paths = 0;
  nlohmann::json j;
  if (!o.in.empty()) {
    const CsvTable table = read_csv_file(o.in);
    h_hat = hurst_estimate(Grid(table.header), table.rows);
    n_paths = static_cast<std::size_t>(table.rows.rows());
    j["input"] = o.in;
  } else {
    const ModelParams p = params_of(o);
    const KernelContext ctx = make_context(p);
    const PathEnsemble ens = sample_exact(ctx, Grid::uniform(o.grid_n, o.t_max), o.paths, o.seed);
    h_hat = hurst_estimate(ens);
    n_paths = ens.num_paths();
    j["H"] = p.hurst();
    j["seed"] = o.seed;
  }
  j["H_hat"] = h_hat;
  j["num_paths"] = n_paths;
  if (!o.out.empty()) {
    std::ofstream(o.out, std::ios::binary) << j.dump(2) << '\n';
    ModelParams p = params_of(o);
    if (!o.in.empty()) {
      std::ifstream side(manifest_path(o.in));
      if (side) p = params_from_json(nlohmann::json::parse(side).at("params"));
    }
    RunManifest man{"estimate", p, o.seed, kToolVersion, utc_timestamp(), {o.out}, argv};
    write_manifest(man);
  }
  emit_json(out, j);
  return kOk;
}

// One report per named check; `explicit_list` makes inapplicable checks an error
// instead of a silent skip.
inline std::vector<VerificationReport> run_checks(const ModelParams& p, const std::vector<std::string>& names,
                                                  bool explicit_list, std::size_t paths, std::uint64_t seed) {
  const KernelContext ctx = make_context(p);
  std::vector<VerificationReport> reports;
  for (const auto& name : names) {
    const bool needs_positive_alpha = name == "llil" || name == "sigma";
    if (needs_positive_alpha && !(p.alpha() > 0.0) && !explicit_list) continue;
    if (name == "hurst") {
      std::vector<double> t{0.0};
      for (int k = 10; k >= 0; --k) t.push_back(std::ldexp(1.0, -k));
      gfbm::detail::Stopwatch clock;
      const PathEnsemble ens = sample_exact(ctx, Grid(t), std::max<std::size_t>(paths, 1000), seed);
      const double est = hurst_estimate(ens);
      VerificationReport r;
      r.check_name = "hurst_estimate";
      r.claim_ref = "Var X(t) = t^{2H}";
      r.measured = {est};
      r.target = p.hurst();
      r.tolerance = 0.05;
      r.passed = std::abs(est - p.hurst()) <= 0.05;
      r.seed = seed;
      r.runtime = clock.seconds();
      reports.push_back(r);
    } else if (name == "holder") {
      reports.push_back(holder_ratio_scan(ctx, 1.0, 64));
    } else if (name == "nonstationarity") {
      std::vector<double> s;
      for (int i = 1; i <= 9; ++i) s.push_back(0.1 * i);
      reports.push_back(nonstationarity_gap(ctx, 0.1, s));
    } else if (name == "c1") {
      reports.push_back(c1_scaling_check(ctx, {0.01, 0.5, 2.0, 100.0}, Grid::uniform(8, 1.0)));
    } else if (name == "c3") {
      reports.push_back(c3_decay_check(ctx, 1.0, 1.0, {1e8, 1e10, 1e12, 1e14}));
    } else if (name == "flil") {
      gfbm::detail::Stopwatch clock;
      const std::vector<double> n_values{10.0, 100.0, 1000.0};
      const PathEnsemble ens = sample_exact(ctx, scaled_union_grid(n_values, 1.0, 64), paths, seed);
      VerificationReport r = flil_boundedness_check(flil_rescaled_paths(ens, n_values, 64));
      r.seed = seed;
      r.runtime = clock.seconds();
      reports.push_back(r);
    } else if (name == "llil") {
      gfbm::detail::Stopwatch clock;
      const std::vector<double> u{std::exp(-4.0), std::exp(-16.0), std::exp(-64.0)};
      const PathEnsemble ens = sample_exact(ctx, llil_grid(u, 1.0), paths, seed);
      VerificationReport r = llil_stability_check(llil_statistic(ens, u, 1.0));
      r.seed = seed;
      r.runtime = clock.seconds();
      reports.push_back(r);
    } else if (name == "sigma") {
      gfbm::detail::Stopwatch clock;
      VerificationReport r;
      r.check_name = "sigma_composition";
      r.claim_ref = "composition LIL constant b^{H^2} H^{H/2} (H+1)^{-(H+1)/2}";
      r.tolerance = 1e-8;
      double worst = 0.0;
      for (const double b : {0.5, 1.0, 2.0}) {
        const double num = sigma_composition(ctx, b);
        r.measured.push_back(num);
        worst = std::max(worst, std::abs(num - sigma_closed_form(p.hurst(), b)));
      }
      r.details["max_abs_error"] = worst;
      r.passed = worst <= 1e-8;
      r.runtime = clock.seconds();
      reports.push_back(r);
    }
  }
  return reports;
}

inline int run_verify(const Options& o, const std::vector<std::string>& argv, std::ostream& out) {
  const ModelParams p = params_of(o);
  const bool explicit_list = !o.checks.empty();
  std::vector<std::string> names = explicit_list ? o.checks : check_names();
  for (const auto& n : names) {
    if (std::find(check_names().begin(), check_names().end(), n) == check_names().end()) {
      throw CLI::ValidationError("--checks", "unknown check \"" + n + "\"");
    }
  }
  std::vector<VerificationReport> reports = run_checks(p, names, explicit_list, o.paths, o.seed);
  std::sort(reports.begin(), reports.end(),
            [](const auto& a, const auto& b) { return a.check_name < b.check_name; });
  const nlohmann::json j = reports;
  if (o.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    std::ofstream(o.out, std::ios::binary) << j.dump(2) << '\n';
    write_manifest(RunManifest{"verify", p, o.seed, kToolVersion, utc_timestamp(), {o.out}, argv});
  }
  const bool all = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
  return all ? kOk : kCheckFailed;
}

inline int run_sigma(const Options& o, std::ostream& out) {
  const ModelParams p = params_of(o);
  const KernelContext ctx = make_context(p);
  const double s = sigma_composition(ctx, o.b);
  emit_json(out, {{"sigma", s}, {"closed_form", sigma_closed_form(p.hurst(), o.b)}, {"b", o.b}, {"H", p.hurst()}});
  return kOk;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Re-runs the argv recorded in a manifest.
inline int replay(const std::string& manifest, std::ostream& out, std::ostream& err) {
  std::ifstream is(manifest);
  if (!is) {
    err << "cannot open " << manifest << '\n';
    return kUsage;
  }
  const nlohmann::json j = nlohmann::json::parse(is);
  return dispatch(j.at("argv").get<std::vector<std::string>>(), out, err);
}

/// args[0] is the program name. Returns the process exit code.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized fractional Brownian motion toolkit", "gfbm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  detail::Options o;

  auto* kappa_cmd = app.add_subcommand("kappa", "normalization constant kappa and c");
  detail::add_params(kappa_cmd, o);
  kappa_cmd->add_option("--route", o.route, "closed | quad | auto")
      ->check(CLI::IsMember({"closed", "quad", "auto"}));

  auto* classify_cmd = app.add_subcommand("classify", "regime of (alpha, gamma)");
  classify_cmd->add_option("--alpha", o.alpha)->required();
  classify_cmd->add_option("--gamma", o.gamma)->required();

  auto add_grid = [&](CLI::App* c) {
    auto* g = c->add_option("--grid", o.grid_file, "file of times");
    auto* u = c->add_option("--uniform", o.uniform, "N,T for {0, T/N, ..., T}");
    g->excludes(u);
    c->add_option("--out", o.out, "CSV output file");
  };
  auto* cov_cmd = app.add_subcommand("cov", "covariance matrix psi on a grid (CSV)");
  detail::add_params(cov_cmd, o);
  add_grid(cov_cmd);
  auto* phi_cmd = app.add_subcommand("phi", "increment second moments phi on a grid (CSV)");
  detail::add_params(phi_cmd, o);
  add_grid(phi_cmd);

  auto add_sim = [&](CLI::App* c) {
    c->add_option("--paths", o.paths);
    c->add_option("--grid-n", o.grid_n);
    c->add_option("--t-max", o.t_max);
    c->add_option("--seed", o.seed);
  };
  auto* sim_cmd = app.add_subcommand("simulate", "sample paths (CSV, header = times)");
  detail::add_params(sim_cmd, o);
  add_sim(sim_cmd);
  sim_cmd->add_option("--method", o.method)->check(CLI::IsMember({"exact", "riemann", "derivative"}));
  sim_cmd->add_option("--out", o.out);
  sim_cmd->add_option("--mesh", o.mesh, "riemann/derivative cell width");
  sim_cmd->add_option("--truncation", o.truncation, "left truncation U (0 = automatic)");

  auto* est_cmd = app.add_subcommand("estimate", "Hurst estimate from a path CSV or a fresh exact ensemble");
  est_cmd->add_option("--in", o.in, "path CSV written by simulate");
  est_cmd->add_option("--alpha", o.alpha);
  est_cmd->add_option("--gamma", o.gamma);
  est_cmd->add_option("--variant", o.variant)->check(CLI::IsMember({"full", "rl"}));
  add_sim(est_cmd);
  est_cmd->add_option("--out", o.out);

  auto* verify_cmd = app.add_subcommand("verify", "run verification checks (JSON report)");
  detail::add_params(verify_cmd, o);
  verify_cmd->add_option("--checks", o.checks, "comma separated subset")->delimiter(',');
  verify_cmd->add_option("--paths", o.paths);
  verify_cmd->add_option("--seed", o.seed);
  verify_cmd->add_option("--out", o.out);

  auto* sigma_cmd = app.add_subcommand("sigma", "composition LIL constant sigma");
  detail::add_params(sigma_cmd, o);
  sigma_cmd->add_option("--b", o.b)->required();

  std::string manifest;
  auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", manifest)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  const std::vector<std::string> argv(args.begin(), args.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*kappa_cmd) return detail::run_kappa(o, out);
    if (*classify_cmd) return detail::run_classify(o, out);
    if (*cov_cmd) return detail::run_kernel_matrix(o, true, argv, out);
    if (*phi_cmd) return detail::run_kernel_matrix(o, false, argv, out);
    if (*sim_cmd) return detail::run_simulate(o, argv, out);
    if (*est_cmd) return detail::run_estimate(o, argv, out);
    if (*verify_cmd) return detail::run_verify(o, argv, out);
    if (*sigma_cmd) return detail::run_sigma(o, out);
    if (*replay_cmd) return replay(manifest, out, err);
  } catch (const DomainError& e) {
    err << e.what() << '\n';
    return kDomainError;
  } catch (const NumericalError& e) {
    err << e.what() << '\n';
    return kNumericalError;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

inline int dispatch(int argc, char** argv) {
  return dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace gfbm::cli
