#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gapcert/io.hpp"

using namespace gapcert;

namespace {

void print_json(const Json& j) { std::printf("%s\n", j.dump(2).c_str()); }

Json report_json(const BoundReport& r) { return report_to_json(r); }

BoundReport wrap_value(const char* name, std::vector<std::pair<std::string, double>> inputs,
                       double value) {
  BoundReport r;
  r.name = name;
  r.inputs = std::move(inputs);
  r.value = value;
  r.valid = true;
  return r;
}

int cmd_gap(const std::string& path1, const std::string& path2, const GapOptions& opt) {
  const StateSpace p1 = parse_system(load_json_file(path1));
  const StateSpace p2 = parse_system(load_json_file(path2));
  const GapResult g = gap_metric(p1, p2, opt);
  Json j;
  j["lower"] = g.lower;
  j["upper"] = g.upper;
  j["value"] = g.value;
  j["q_order"] = g.q_order;
  j["converged"] = g.converged;
  j["stalled"] = g.stalled;
  print_json(j);
  return 0;
}

int cmd_bpc(const std::string& plant_path, const std::string& ctrl_path,
            const std::string& feedback_sign) {
  const StateSpace p = parse_system(load_json_file(plant_path));
  StateSpace c = parse_system(load_json_file(ctrl_path));
  if (feedback_sign == "neg") c = negate(c); // file holds K, loop is u = -K y + w
  Json j;
  j["bpc"] = bpc(p, c);
  j["feedback_sign"] = feedback_sign;
  print_json(j);
  return 0;
}

int cmd_hinf(const std::string& path, double tol) {
  const HinfResult r = hinf_norm_certified(parse_system(load_json_file(path)), tol);
  Json j;
  j["value"] = r.value;
  j["peak_w"] = r.peak_w;
  print_json(j);
  return 0;
}

int cmd_nrcf(const std::string& path) {
  const StateSpace p = parse_system(load_json_file(path));
  const GraphSymbol gs = nrcf(p);

  double residual = 0.0;
  const FreqEvaluator fe(gs.g);
  for (double w : gap_grid(200)) {
    const CMatrix g = fe.at(w);
    residual = std::max(
        residual, (g.adjoint() * g - CMatrix::Identity(g.cols(), g.cols())).cwiseAbs().maxCoeff());
  }

  Json j;
  j["symbol"] = system_to_json(gs.g); // [N; D] stacked, D in the last nu rows
  j["ny"] = p.C.rows();
  j["nu"] = p.B.cols();
  j["inner_residual"] = residual;
  print_json(j);
  return 0;
}

int emit_report(const BoundReport& r) {
  print_json(report_json(r));
  return r.valid ? 0 : 3;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir, long samples,
                   bool no_svg) {
  Json j = load_json_file(config_path);
  if (samples > 0) j["samples"] = samples;
  const ExperimentConfig cfg = parse_experiment(j);
  const ExperimentResult res = run_experiment(cfg);
  write_experiment_outputs(out_dir, res, !no_svg);
  print_json(summary_json(res));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"gap-metric probabilistic robustness certification"};
  app.require_subcommand(1);

  std::string sys1, sys2, feedback_sign = "neg", out_dir = ".", config_path;
  GapOptions gap_opt;
  double hinf_tol = 1e-6;
  long samples_override = 0;
  bool no_svg = false;

  CLI::App* gap = app.add_subcommand("gap", "gap metric between two systems");
  gap->add_option("system1", sys1, "first system (json)")->required();
  gap->add_option("system2", sys2, "second system (json)")->required();
  gap->add_option("--tol", gap_opt.tol, "sandwich tolerance");
  gap->add_option("--grid", gap_opt.grid_points, "frequency grid size");
  gap->add_option("--max-order", gap_opt.max_order, "compensator expansion cap");

  CLI::App* bpc_cmd = app.add_subcommand("bpc", "robust stability margin of a loop");
  bpc_cmd->add_option("plant", sys1, "plant (json)")->required();
  bpc_cmd->add_option("controller", sys2, "controller (json)")->required();
  bpc_cmd->add_option("--feedback-sign", feedback_sign, "loop convention for the controller file")
      ->check(CLI::IsMember({"neg", "pos"}));

  CLI::App* hinf = app.add_subcommand("hinf", "H-infinity norm of a stable system");
  hinf->add_option("system", sys1, "system (json)")->required();
  hinf->add_option("--tol", hinf_tol, "relative certification tolerance");

  CLI::App* nrcf_cmd = app.add_subcommand("nrcf", "normalized right coprime factorization");
  nrcf_cmd->add_option("system", sys1, "plant (json)")->required();

  CLI::App* bounds = app.add_subcommand("bounds", "closed-form certificate evaluations");
  bounds->require_subcommand(1);
  struct {
    double beta = 0.0, epsilon = 0.0, e_gap = 0.0, b = 0.0, sigma = 0.0, l = 0.0;
    double gamma = 0.0, t_bar = 0.0, b_bar = 0.0, c_gap = 0.0, gap_at_mu = 0.0;
    double eps = 0.0, offset = 0.0, eps_gap = 0.0, e_fq = 0.0, eps_q = 0.0, l_delta = 0.0;
    double mu = 0.0, s = 0.0;
    long p = 1;
  } arg;

  CLI::App* b_size = bounds->add_subcommand("scenario-size", "samples needed for a scenario claim");
  b_size->add_option("--beta", arg.beta)->required();
  b_size->add_option("--epsilon", arg.epsilon)->required();

  CLI::App* b_stab = bounds->add_subcommand("stability-lb", "stability probability lower bound");
  b_stab->add_option("--e-gap", arg.e_gap)->required();
  b_stab->add_option("--b", arg.b)->required();
  b_stab->add_option("--sigma", arg.sigma)->required();
  b_stab->add_option("--l", arg.l)->required();

  CLI::App* b_ehinf = bounds->add_subcommand("expected-hinf", "expected closed-loop norm bound");
  b_ehinf->add_option("--b-bar", arg.b_bar)->required();
  b_ehinf->add_option("--c-gap", arg.c_gap)->required();
  b_ehinf->add_option("--sigma", arg.sigma)->required();
  b_ehinf->add_option("--l", arg.l)->required();

  CLI::App* b_perf = bounds->add_subcommand("hinf-perf-lb", "performance probability lower bound");
  CLI::App* b_cert = bounds->add_subcommand("hinf-cert", "performance certificate margin");
  for (CLI::App* sub : {b_perf, b_cert}) {
    sub->add_option("--gamma", arg.gamma)->required();
    sub->add_option("--t-bar", arg.t_bar)->required();
    sub->add_option("--e-gap", arg.e_gap)->required();
    sub->add_option("--sigma", arg.sigma)->required();
    sub->add_option("--l", arg.l)->required();
  }
  b_cert->add_option("--beta", arg.beta)->required();

  CLI::App* b_tail = bounds->add_subcommand("gap-tail", "gap deviation tail bound");
  b_tail->add_option("--eps", arg.eps)->required();
  b_tail->add_option("--sigma", arg.sigma)->required();
  b_tail->add_option("--l", arg.l)->required();

  CLI::App* b_jensen = bounds->add_subcommand("jensen", "norm expectation bound");
  b_jensen->add_option("--sigma", arg.sigma)->required();
  b_jensen->add_option("--p", arg.p)->required();
  b_jensen->add_option("--offset", arg.offset);

  CLI::App* b_egap = bounds->add_subcommand("expected-gap", "expected gap upper bound");
  b_egap->add_option("--gap-at-mu", arg.gap_at_mu)->required();
  b_egap->add_option("--l", arg.l)->required();
  b_egap->add_option("--sigma", arg.sigma)->required();
  b_egap->add_option("--p", arg.p)->required();

  CLI::App* b_reqgap = bounds->add_subcommand("required-gap", "expected gap needed for a target");
  b_reqgap->add_option("--beta", arg.beta)->required();
  b_reqgap->add_option("--b", arg.b)->required();
  b_reqgap->add_option("--sigma", arg.sigma)->required();
  b_reqgap->add_option("--l", arg.l)->required();

  CLI::App* b_deveps = bounds->add_subcommand("deviation-eps", "two-sided deviation radius");
  b_deveps->add_option("--beta", arg.beta)->required();
  b_deveps->add_option("--sigma", arg.sigma)->required();
  b_deveps->add_option("--l", arg.l)->required();

  CLI::App* b_devprob = bounds->add_subcommand("deviation-prob", "margin-consumption probability");
  b_devprob->add_option("--e-gap", arg.e_gap)->required();
  b_devprob->add_option("--eps-gap", arg.eps_gap)->required();
  b_devprob->add_option("--e-fq", arg.e_fq)->required();
  b_devprob->add_option("--eps-q", arg.eps_q)->required();
  b_devprob->add_option("--b", arg.b)->required();

  CLI::App* b_invgap = bounds->add_subcommand("inv-gap-moment", "reciprocal gap moment bound");
  b_invgap->add_option("--c-gap", arg.c_gap)->required();
  b_invgap->add_option("--sigma", arg.sigma)->required();
  b_invgap->add_option("--l", arg.l)->required();

  CLI::App* b_recip = bounds->add_subcommand("recip-moment", "truncated reciprocal moment bound");
  b_recip->add_option("--mu", arg.mu)->required();
  b_recip->add_option("--s", arg.s)->required();

  CLI::App* b_cop = bounds->add_subcommand("coprime-stability-lb",
                                           "stability bound from coprime-factor deviations");
  b_cop->add_option("--b", arg.b)->required();
  b_cop->add_option("--l-delta", arg.l_delta)->required();
  b_cop->add_option("--sigma", arg.sigma)->required();

  CLI::App* exp_cmd = app.add_subcommand("experiment", "Monte-Carlo certification run");
  exp_cmd->add_option("config", config_path, "experiment config (json)")->required();
  exp_cmd->add_option("--out", out_dir, "output directory");
  exp_cmd->add_option("--samples", samples_override, "override the configured sample count");
  exp_cmd->add_flag("--no-svg", no_svg, "skip the histogram render");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gap->parsed()) return cmd_gap(sys1, sys2, gap_opt);
    if (bpc_cmd->parsed()) return cmd_bpc(sys1, sys2, feedback_sign);
    if (hinf->parsed()) return cmd_hinf(sys1, hinf_tol);
    if (nrcf_cmd->parsed()) return cmd_nrcf(sys1);
    if (exp_cmd->parsed()) return cmd_experiment(config_path, out_dir, samples_override, no_svg);

    if (b_size->parsed()) {
      const long n = scenario_sample_size(arg.beta, arg.epsilon);
      return emit_report(wrap_value("scenario_sample_size",
                                    {{"beta", arg.beta}, {"epsilon", arg.epsilon}},
                                    static_cast<double>(n)));
    }
    if (b_stab->parsed())
      return emit_report(stability_prob_lb(arg.e_gap, arg.b, arg.sigma, arg.l));
    if (b_ehinf->parsed()) {
      const double c_inv = inv_gap_moment_ub(arg.c_gap, arg.sigma, arg.l);
      BoundReport r = wrap_value("expected_hinf_ub",
                                 {{"b_bar", arg.b_bar},
                                  {"c_inv", c_inv},
                                  {"c_gap", arg.c_gap},
                                  {"sigma", arg.sigma},
                                  {"l", arg.l}},
                                 expected_hinf_ub(arg.b_bar, c_inv));
      return emit_report(r);
    }
    if (b_perf->parsed())
      return emit_report(hinf_perf_prob_lb(arg.gamma, arg.t_bar, arg.e_gap, arg.sigma, arg.l));
    if (b_cert->parsed())
      return emit_report(
          hinf_perf_certificate(arg.gamma, arg.t_bar, arg.e_gap, arg.sigma, arg.l, arg.beta));
    if (b_tail->parsed())
      return emit_report(wrap_value("gap_tail_ub",
                                    {{"eps", arg.eps}, {"sigma", arg.sigma}, {"l", arg.l}},
                                    gap_tail_ub(arg.eps, arg.sigma, arg.l)));
    if (b_jensen->parsed())
      return emit_report(wrap_value(
          "jensen_norm_ub",
          {{"sigma", arg.sigma}, {"p", static_cast<double>(arg.p)}, {"offset", arg.offset}},
          jensen_norm_ub(arg.sigma, arg.p, arg.offset)));
    if (b_egap->parsed())
      return emit_report(wrap_value("expected_gap_ub",
                                    {{"gap_at_mu", arg.gap_at_mu},
                                     {"l", arg.l},
                                     {"sigma", arg.sigma},
                                     {"p", static_cast<double>(arg.p)}},
                                    expected_gap_ub(arg.gap_at_mu, arg.l, arg.sigma, arg.p)));
    if (b_reqgap->parsed())
      return emit_report(
          wrap_value("required_expected_gap",
                     {{"beta", arg.beta}, {"b", arg.b}, {"sigma", arg.sigma}, {"l", arg.l}},
                     required_expected_gap(arg.beta, arg.b, arg.sigma, arg.l)));
    if (b_deveps->parsed())
      return emit_report(wrap_value("deviation_eps",
                                    {{"beta", arg.beta}, {"sigma", arg.sigma}, {"l", arg.l}},
                                    deviation_eps(arg.beta, arg.sigma, arg.l)));
    if (b_devprob->parsed())
      return emit_report(wrap_value("deviation_prob_ub",
                                    {{"e_gap", arg.e_gap},
                                     {"eps_gap", arg.eps_gap},
                                     {"e_fq", arg.e_fq},
                                     {"eps_q", arg.eps_q},
                                     {"b", arg.b}},
                                    deviation_prob_ub(arg.e_gap, arg.eps_gap, arg.e_fq, arg.eps_q,
                                                      arg.b)));
    if (b_invgap->parsed())
      return emit_report(wrap_value("inv_gap_moment_ub",
                                    {{"c_gap", arg.c_gap}, {"sigma", arg.sigma}, {"l", arg.l}},
                                    inv_gap_moment_ub(arg.c_gap, arg.sigma, arg.l)));
    if (b_recip->parsed())
      return emit_report(wrap_value("reciprocal_moment_ub", {{"mu", arg.mu}, {"s", arg.s}},
                                    reciprocal_moment_ub(arg.mu, arg.s)));
    if (b_cop->parsed())
      return emit_report(
          wrap_value("coprime_stability_prob_lb",
                     {{"b", arg.b}, {"l_delta", arg.l_delta}, {"sigma", arg.sigma}},
                     coprime_stability_prob_lb(arg.b, arg.l_delta, arg.sigma)));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
