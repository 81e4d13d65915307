#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"

using namespace ncst;
using namespace ncst::cli;

namespace {

void add_params(CLI::App* cmd, ParamArgs& p) {
  cmd->add_option("--xi", p.xi, "location vector, e.g. \"1,2\"");
  cmd->add_option("--omega", p.omega, "scale matrix, rows separated by ';', e.g. \"4,0;0,1\" (default identity)");
  cmd->add_option("--alpha", p.alpha, "skewness vector (default zero)");
  cmd->add_option("--r", p.r, "degrees of freedom (ncst only)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noncentral skew-t distribution: sampling, densities, fitting and experiment drivers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NCST_VERSION);

  // Global flags; subcommands fall through to these so they may appear after the verb.
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mc_draws;
  std::string out;
  std::string format;
  double truncate_percentile = Defaults::contour_truncate_percentile;
  app.add_option("--seed", seed, "random seed (required for stochastic commands)");
  app.add_option("-M,--mc-draws", mc_draws, "Monte Carlo draws for NCST likelihoods");
  app.add_option("--out", out, "output file (or directory for simstudy); stdout when omitted");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--truncate-percentile", truncate_percentile, "upper percentile of contour grids")
      ->check(CLI::Range(0.0, 100.0));

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "draw a sample and write it as CSV")->fallthrough();
  c_sample->add_option("--dist", sample.dist, "sn or ncst")->check(CLI::IsMember({"sn", "ncst"}));
  add_params(c_sample, sample.params);
  c_sample->add_option("--n", sample.n, "sample size")->required();

  DensityArgs density;
  auto* c_density = app.add_subcommand("density", "append log-densities to a CSV of points")->fallthrough();
  c_density->add_option("--dist", density.dist, "sn or ncst")->check(CLI::IsMember({"sn", "ncst"}));
  add_params(c_density, density.params);
  c_density->add_option("--points", density.points, "CSV of points, one column per dimension")->required();

  FitArgs fit;
  std::string fit_model_name;
  auto* c_fit = app.add_subcommand("fit", "fit one model family")->fallthrough();
  c_fit->add_option("--data", fit.data, "CSV data file")->required();
  c_fit->add_option("--model", fit_model_name, "MVN, SN, AZZALINI_ST or NCST")->required();
  c_fit->add_option("--report-M", fit.report_M, "draws for the reported NCST log-likelihood");
  c_fit->add_flag("--standardize", fit.standardize, "center and scale each column before fitting");
  c_fit->add_option("--grid-dir", fit.grid_dir, "write fitted-density grids here");

  FitArgs compare;
  std::vector<std::string> compare_models_arg;
  auto* c_compare = app.add_subcommand("compare", "fit several families and rank them by AIC")->fallthrough();
  c_compare->add_option("--data", compare.data, "CSV data file")->required();
  c_compare->add_option("--models", compare_models_arg, "comma-separated families (default all)")->delimiter(',');
  c_compare->add_option("--report-M", compare.report_M, "draws for the reported NCST log-likelihood");
  c_compare->add_flag("--standardize", compare.standardize, "center and scale each column before fitting");
  c_compare->add_option("--grid-dir", compare.grid_dir, "write fitted-density grids here");

  SimstudyArgs sim;
  auto* c_sim = app.add_subcommand("simstudy", "run the alpha or degrees-of-freedom sweep")->fallthrough();
  c_sim->add_option("--study", sim.study, "alpha-sweep or df-sweep")
      ->required()
      ->check(CLI::IsMember({"alpha-sweep", "df-sweep"}));
  c_sim->add_option("--n", sim.n, "sample size per setting");
  c_sim->add_option("--grid-points", sim.grid_points, "grid points per axis");

  QuadformArgs qf;
  auto* c_qf = app.add_subcommand("quadform", "analyze and validate a quadratic form T'WT")->fallthrough();
  add_params(c_qf, qf.params);
  c_qf->add_option("--w", qf.w, "weight matrix, rows separated by ';'");
  c_qf->add_option("--w-direction", qf.w_direction, "vector a giving W = aa'/|a|^2");
  c_qf->add_option("--n", qf.n, "sample size");
  c_qf->add_option("--control-lambda", qf.control_lambda, "noncentrality of the negative-control reference");

  WdbcArgs wdbc;
  auto* c_wdbc = app.add_subcommand("wdbc", "extract the three WDBC features used for model comparison")->fallthrough();
  c_wdbc->add_option("--input", wdbc.input, "WDBC data file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  RunInfo run;
  run.argv.assign(argv, argv + argc);
  try {
    if (c_sample->parsed()) {
      sample.seed = seed;
      sample.out = out;
      return cmd_sample(sample, run);
    }
    if (c_density->parsed()) {
      density.seed = seed;
      density.out = out;
      if (mc_draws) density.M = *mc_draws;
      if (!format.empty()) density.format = format;
      return cmd_density(density, run);
    }
    if (c_fit->parsed() || c_compare->parsed()) {
      const bool is_fit = c_fit->parsed();
      FitArgs& a = is_fit ? fit : compare;
      if (is_fit) {
        a.models = {fit_model_name};
        if (parse_models(a.models).size() != 1) throw CliError(kInputError, "model: give exactly one family");
      } else {
        a.models = compare_models_arg;
      }
      a.seed = seed;
      a.out = out;
      if (mc_draws) a.M = *mc_draws;
      if (!format.empty()) a.format = format;
      a.truncate_percentile = truncate_percentile;
      const auto oc = run_fits(a, is_fit ? "fit" : "compare", run);
      if (!is_fit && !out.empty()) std::cerr << table_text(oc.entries);
      for (const auto& e : oc.entries)
        if (!e.fit) std::cerr << "warning: " << family_name(e.family) << " failed: " << e.error << '\n';
      if (oc.exit_code == kNotConverged) std::cerr << "warning: optimizer did not converge; results were written\n";
      return oc.exit_code;
    }
    if (c_sim->parsed()) {
      if (out.empty()) throw CliError(kInputError, "simstudy: --out DIR is required");
      sim.seed = seed;
      sim.out = out;
      sim.truncate_percentile = truncate_percentile;
      const auto rows = run_simstudy(sim, run);
      std::cerr << "setting,margin,skewness,excess_kurtosis,percentile_95\n";
      for (const auto& r : rows)
        std::cerr << r.setting << ",T" << r.margin << ',' << r.summary.skewness << ',' << r.summary.excess_kurtosis
                  << ',' << r.summary.percentile_95 << '\n';
      return kOk;
    }
    if (c_qf->parsed()) {
      qf.seed = seed;
      qf.out = out;
      json doc;
      run_quadform(qf, &doc, run);
      if (out.empty()) std::cout << doc.dump(2) << '\n';
      return kOk;
    }
    if (c_wdbc->parsed()) {
      wdbc.out = out;
      return cmd_wdbc(wdbc, run);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  } catch (const ncst::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
