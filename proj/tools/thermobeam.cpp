#include <CLI11.hpp>

#include <iostream>

#include "thermobeam/commands.hpp"

int main(int argc, char** argv) {
  using namespace thermobeam;
  init_logging();

  CLI::App app{"Thermoelastic microbeam simulator and stability certifier"};
  app.require_subcommand(1);

  std::string config;
  CommandOptions opts;
  std::string param;
  std::vector<std::string> values;

  auto with_outputs = [&](CLI::App* sub) {
    sub->add_option("config", config, "run file")->required();
    sub->add_option("--csv", opts.csv_path, "CSV output path (overrides [output] csv)");
    sub->add_option("--report", opts.report_path, "report output path (overrides [output] report)");
  };

  auto* validate = app.add_subcommand("validate", "check every hypothesis of a run file");
  validate->add_option("config", config, "run file")->required();
  auto* simulate = app.add_subcommand("simulate", "run and certify a trajectory");
  with_outputs(simulate);
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the discrete generator");
  with_outputs(spectrum);
  auto* oracle = app.add_subcommand("oracle-check", "time-step convergence against the exact evolution");
  with_outputs(oracle);
  auto* sweep = app.add_subcommand("sweep", "decay rate over a parameter range");
  with_outputs(sweep);
  sweep->add_option("--param", param, "parameter, e.g. beta or time.dt")->required();
  sweep->add_option("--values", values, "values, comma or space separated")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_usage;
  }

  if (*validate) return cmd_validate(config, std::cout, std::cerr);
  if (*simulate) return cmd_simulate(config, opts, std::cout, std::cerr);
  if (*spectrum) return cmd_spectrum(config, opts, std::cout, std::cerr);
  if (*oracle) return cmd_oracle_check(config, opts, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(config, param, values, opts, std::cout, std::cerr);
  return exit_usage;
}
