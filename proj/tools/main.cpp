// erlq: experiment runner for entropy-regularized linear-quadratic control
// with multiplicative noise. Subcommands cover the exact solver, policy
// evaluation, both optimizers, gradient auditing and the theoretical-constant
// calculator; outputs are deterministic CSV/JSON/SVG files.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "erlq/bounds.hpp"
#include "erlq/config.hpp"
#include "erlq/errors.hpp"
#include "erlq/eval.hpp"
#include "erlq/report.hpp"
#include "erlq/rng.hpp"
#include "erlq/rollout.hpp"
#include "erlq/rpg.hpp"
#include "erlq/sbrpg.hpp"
#include "erlq/svg.hpp"

namespace {

using namespace erlq;
namespace fs = std::filesystem;

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string coefficient_mode;
  std::uint64_t seed = 0;
  int threads = 0;
  bool slack = false;
  const CLI::App* cmd = nullptr;

  bool has(const std::string& name) const {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

std::uint64_t env_seed() {
  const char* env = std::getenv("ERLQ_SEED");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw ConfigError("ERLQ_SEED must be a non-negative integer");
  return v;
}

// Seed priority: --seed flag, then the config file, then ERLQ_SEED, then 1.
ExperimentConfig resolve_config(const Flags& flags, bool preset) {
  ExperimentConfig cfg;
  if (preset) {
    cfg = reference_experiment();
  } else {
    if (flags.config_path.empty())
      throw ConfigError("missing required option -c/--config");
    cfg = load_config(flags.config_path);
  }
  if (flags.has("--seed"))
    cfg.seed = flags.seed;
  else if (!cfg.has_seed)
    cfg.seed = env_seed();
  cfg.sbrpg.seed = cfg.seed;

  if (flags.has("--out")) cfg.output.dir = flags.out_dir;
  if (flags.has("--threads")) cfg.sbrpg.threads = flags.threads;
  if (flags.has("--coefficient-mode")) {
    if (flags.coefficient_mode == "ambient-dim")
      cfg.sbrpg.coefficient_mode = CoefficientMode::kAmbientDim;
    else if (flags.coefficient_mode == "literal")
      cfg.sbrpg.coefficient_mode = CoefficientMode::kLiteral;
    else
      throw ConfigError(
          "--coefficient-mode: expected ambient-dim or literal");
  }
  return cfg;
}

fs::path out_file(const ExperimentConfig& cfg, const std::string& name) {
  std::error_code ec;
  fs::create_directories(cfg.output.dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory: " + cfg.output.dir);
  return fs::path(cfg.output.dir) / name;
}

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os << std::setprecision(10) << "[";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << "]";
  return os.str();
}

std::string fmt_mat(const Mat& m) {
  std::ostringstream os;
  os << std::setprecision(10) << "[";
  for (int i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "") << "[";
    for (int j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    os << "]";
  }
  os << "]";
  return os.str();
}

int cmd_solve(const ExperimentConfig& cfg) {
  const RiccatiSolution are =
      solve_are(cfg.system, cfg.solver.are_tol, cfg.solver.max_iter);
  std::cout << std::setprecision(12)  //
            << "p_star     = " << are.p_star << "\n"
            << "q_star     = " << are.q_star << "\n"
            << "k_star     = " << fmt_vec(are.k_star) << "\n"
            << "sigma_star = " << fmt_mat(are.sigma_star) << "\n"
            << "f_star     = " << are.f_star << "\n"
            << "residual   = " << are.residual << "\n"
            << "iterations = " << are.iterations << "\n";
  nlohmann::json doc;
  doc["meta"] = make_meta(cfg, are);
  doc["riccati"] = riccati_json(are);
  write_json_file(doc, out_file(cfg, "riccati.json").string());
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg) {
  const EvalReport report = evaluate(cfg.system, cfg.k0, cfg.sigma0);
  const RiccatiSolution are =
      solve_are(cfg.system, cfg.solver.are_tol, cfg.solver.max_iter);
  std::cout << std::setprecision(12)  //
            << "v_k  = " << report.v_k << "\n"
            << "p_k  = " << report.p_k << "\n"
            << "q    = " << report.q << "\n"
            << "f    = " << report.f << "\n"
            << "s    = " << report.s << "\n"
            << "gap  = " << report.f - are.f_star << "\n"
            << "grad_k norm     = " << report.grad_k.norm() << "\n"
            << "grad_sigma norm = " << report.grad_sigma.norm() << "\n";
  nlohmann::json doc;
  doc["meta"] = make_meta(cfg, are);
  doc["eval"] = eval_json(report);
  doc["eval"]["gap"] = report.f - are.f_star;
  write_json_file(doc, out_file(cfg, "eval.json").string());
  return 0;
}

int cmd_rpg(const ExperimentConfig& cfg) {
  const RpgRun run = run_rpg(cfg.system, cfg.k0, cfg.sigma0, cfg.rpg);
  const RunHistory history = make_history(run, cfg);
  if (cfg.output.csv)
    write_history_csv(history, out_file(cfg, "rpg.csv").string());
  if (cfg.output.svg) {
    ChartSeries gap{"gap", {}};
    for (const HistoryRow& row : history.rows)
      gap.points.emplace_back(row.iter, row.gap);
    ChartOptions opt;
    opt.title = "Exact policy gradient: optimality gap";
    opt.x_label = "iteration";
    opt.y_label = "f - f*";
    opt.log_y = true;
    write_line_chart(out_file(cfg, "rpg_gap.svg").string(), {gap}, opt);
  }
  const RpgRecord& last = run.records.back();
  std::cout << std::setprecision(10)  //
            << "iterations = " << last.iter << "\n"
            << "converged  = " << (run.converged ? "yes" : "no") << "\n"
            << "final f    = " << last.f << "\n"
            << "final gap  = " << last.gap << "\n"
            << "eta1       = " << run.eta1 << "\n"
            << "eta2       = " << run.eta2 << "\n"
            << "phi        = " << run.phi << "\n"
            << "n_theory   = " << run.theoretical_n << "\n";
  return 0;
}

void write_sbrpg_charts(const ExperimentConfig& cfg,
                        const RunHistory& history, double f_star) {
  ChartSeries cost{"f", {}};
  ChartSeries best{"f*", {}};
  ChartSeries rel{"relative gap", {}};
  ChartSeries kerr{"gain error", {}};
  ChartSeries serr{"covariance error", {}};
  for (const HistoryRow& row : history.rows) {
    cost.points.emplace_back(row.iter, row.f);
    best.points.emplace_back(row.iter, f_star);
    rel.points.emplace_back(row.iter, row.relative_gap);
    kerr.points.emplace_back(row.iter, row.k_err_sq);
    serr.points.emplace_back(row.iter, row.sigma_err_sq);
  }
  ChartOptions opt;
  opt.x_label = "iteration";

  opt.title = "Sample-based policy gradient: cost";
  opt.y_label = "f(K, Sigma)";
  opt.log_y = false;
  write_line_chart(out_file(cfg, "sbrpg_cost.svg").string(), {cost, best},
                   opt);

  opt.title = "Relative optimality gap";
  opt.y_label = "(f - f*) / f*";
  opt.log_y = true;
  write_line_chart(out_file(cfg, "sbrpg_relative_gap.svg").string(), {rel},
                   opt);

  opt.title = "Squared gain error";
  opt.y_label = "|K - K*|^2";
  write_line_chart(out_file(cfg, "sbrpg_k_err.svg").string(), {kerr}, opt);

  opt.title = "Squared covariance error";
  opt.y_label = "|Sigma - Sigma*|_F^2";
  write_line_chart(out_file(cfg, "sbrpg_sigma_err.svg").string(), {serr},
                   opt);
}

int cmd_sbrpg(const ExperimentConfig& cfg) {
  const SbrpgRun run = run_sbrpg(cfg.system, cfg.k0, cfg.sigma0, cfg.sbrpg);
  const RunHistory history = make_history(run, cfg);
  if (cfg.output.csv)
    write_history_csv(history, out_file(cfg, "sbrpg.csv").string());
  if (cfg.output.svg) write_sbrpg_charts(cfg, history, run.are.f_star);
  const HistoryRow& last = history.rows.back();
  std::cout << std::setprecision(10)  //
            << "iterations   = " << last.iter << "\n"
            << "final f      = " << last.f << "\n"
            << "f*           = " << run.are.f_star << "\n"
            << "relative gap = " << last.relative_gap << "\n"
            << "gain err^2   = " << last.k_err_sq << "\n"
            << "cov err^2    = " << last.sigma_err_sq << "\n";
  return 0;
}

// Draws admissible policies around the configured one and compares analytic
// gradients against central finite differences of the exact cost.
int cmd_gradcheck(const ExperimentConfig& cfg) {
  const SystemParams& sys = cfg.system;
  const int n = sys.n();
  const double h = cfg.gradcheck.step;
  double max_k_err = 0.0;
  double max_sigma_err = 0.0;

  std::ostringstream csv;
  csv << "index,k_rel_err,sigma_rel_err\n";
  for (int idx = 0; idx < cfg.gradcheck.samples; ++idx) {
    Rng rng(substream(cfg.seed, 0x6c, static_cast<std::uint64_t>(idx)));
    Vec k(n);
    Mat sigma(n, n);
    for (;;) {
      for (int i = 0; i < n; ++i) k(i) = rng.uniform(-0.4, 0.4);
      Mat a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 0.3 * rng.gaussian();
      sigma = a * a.transpose() + 0.05 * Mat::Identity(n, n);
      if (is_admissible(sys, {k, sigma})) break;
    }

    const Vec gk = grad_k(sys, k, sigma);
    Vec gk_fd(n);
    for (int i = 0; i < n; ++i) {
      Vec kp = k, km = k;
      kp(i) += h;
      km(i) -= h;
      gk_fd(i) = (cost_f(sys, kp, sigma) - cost_f(sys, km, sigma)) / (2 * h);
    }
    const double k_err = (gk - gk_fd).norm() / std::max(1.0, gk.norm());

    const Mat gs = grad_sigma(sys, k, sigma);
    Mat gs_fd(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Mat dir = Mat::Zero(n, n);
        dir(i, j) += 1.0;
        dir(j, i) += 1.0;  // diagonal entries get weight 2 and halve below
        const double diff = (cost_f(sys, k, sigma + h * dir) -
                             cost_f(sys, k, sigma - h * dir)) /
                            (2 * h);
        gs_fd(i, j) = diff / 2.0;
        gs_fd(j, i) = gs_fd(i, j);
      }
    }
    const double sigma_err =
        (gs - gs_fd).norm() / std::max(1.0, gs.norm());

    max_k_err = std::max(max_k_err, k_err);
    max_sigma_err = std::max(max_sigma_err, sigma_err);
    csv << idx << ',' << format_g17(k_err) << ',' << format_g17(sigma_err)
        << '\n';
  }

  const fs::path path = out_file(cfg, "gradcheck.csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << csv.str();
  std::cout << std::setprecision(6)  //
            << "samples            = " << cfg.gradcheck.samples << "\n"
            << "max k_rel_err      = " << max_k_err << "\n"
            << "max sigma_rel_err  = " << max_sigma_err << "\n";
  return 0;
}

int cmd_bounds(const ExperimentConfig& cfg, bool slack) {
  const BoundReport report =
      cfg.bounds.schedule
          ? sbrpg_schedule(cfg.system, cfg.k0, cfg.sigma0, cfg.bounds.epsilon,
                           cfg.bounds.kappa, cfg.bounds.growth_constant,
                           slack)
          : perturbation_report(cfg.system, cfg.k0, cfg.sigma0);
  const RiccatiSolution are =
      solve_are(cfg.system, cfg.solver.are_tol, cfg.solver.max_iter);
  nlohmann::json doc;
  doc["meta"] = make_meta(cfg, are);
  doc["bounds"] = bounds_json(report);
  write_json_file(doc, out_file(cfg, "bounds.json").string());
  std::cout << std::setprecision(6)  //
            << "f        = " << report.f << "\n"
            << "gap      = " << report.gap << "\n"
            << "lambda1  = " << report.lambda1 << "\n"
            << "phi      = " << report.phi << "\n";
  if (cfg.bounds.schedule) {
    std::cout << "n_rpg    = " << report.n_rpg << "\n"
              << "n_sb     = " << report.n_sb << "\n"
              << "eps1-3   = " << report.eps1 << ", " << report.eps2 << ", "
              << report.eps3 << "\n"
              << "kappa1-3 = " << report.kappa1 << ", " << report.kappa2
              << ", " << report.kappa3 << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy-regularized LQ control with multiplicative noise"};
  app.require_subcommand(1);

  Flags flags;
  const auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config)
      sub->add_option("-c,--config", flags.config_path, "config file (JSON)");
    sub->add_option("--seed", flags.seed, "seed override");
    sub->add_option("--out", flags.out_dir, "output directory override");
    return sub;
  };
  const auto add_sbrpg_flags = [&](CLI::App* sub) {
    sub->add_option("--threads", flags.threads,
                    "worker threads for rollout batches");
    sub->add_option("--coefficient-mode", flags.coefficient_mode,
                    "gradient coefficient: ambient-dim or literal");
    return sub;
  };

  CLI::App* solve =
      add_common(app.add_subcommand("solve", "solve the fixed-point equation"),
                 true);
  CLI::App* eval = add_common(
      app.add_subcommand("eval", "evaluate the configured policy"), true);
  CLI::App* rpg = add_common(
      app.add_subcommand("rpg", "run the exact-gradient optimizer"), true);
  CLI::App* sbrpg = add_sbrpg_flags(add_common(
      app.add_subcommand("sbrpg", "run the sample-based optimizer"), true));
  CLI::App* gradcheck = add_common(
      app.add_subcommand("gradcheck", "finite-difference gradient audit"),
      true);
  CLI::App* bounds = add_common(
      app.add_subcommand("bounds", "theoretical constants and schedule"),
      true);
  bounds->add_flag("--slack", flags.slack,
                   "add one unit of safety to integer bounds");
  CLI::App* paper_exp = add_sbrpg_flags(add_common(
      app.add_subcommand("paper-exp",
                         "run the bundled reference experiment end to end"),
      false));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(solve)) {
      flags.cmd = solve;
      return cmd_solve(resolve_config(flags, false));
    }
    if (app.got_subcommand(eval)) {
      flags.cmd = eval;
      return cmd_eval(resolve_config(flags, false));
    }
    if (app.got_subcommand(rpg)) {
      flags.cmd = rpg;
      return cmd_rpg(resolve_config(flags, false));
    }
    if (app.got_subcommand(sbrpg)) {
      flags.cmd = sbrpg;
      return cmd_sbrpg(resolve_config(flags, false));
    }
    if (app.got_subcommand(gradcheck)) {
      flags.cmd = gradcheck;
      return cmd_gradcheck(resolve_config(flags, false));
    }
    if (app.got_subcommand(bounds)) {
      flags.cmd = bounds;
      return cmd_bounds(resolve_config(flags, false), flags.slack);
    }
    if (app.got_subcommand(paper_exp)) {
      flags.cmd = paper_exp;
      return cmd_sbrpg(resolve_config(flags, true));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
