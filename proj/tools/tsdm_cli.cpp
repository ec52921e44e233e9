#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "tsdm/commands.hpp"
#include "tsdm/errors.hpp"
#include "tsdm/output.hpp"

namespace {

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.config_file, "key = value configuration file");
  cmd->add_option("-s,--set", args.sets, "override one setting, key=value (repeatable)");
  cmd->add_option("-o,--out", args.out, "artifact directory");
}

tsdm::RunConfig load(const ConfigArgs& args) {
  tsdm::ConfigEntries entries;
  if (!args.config_file.empty())
    entries = tsdm::parse_config_text(tsdm::read_file(args.config_file));
  for (const auto& s : args.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw tsdm::ValidationError("--set expects key=value, got '" + s + "'");
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      const auto e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    entries.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (!args.out.empty()) entries.emplace_back("output_dir", args.out);
  return tsdm::make_config(entries);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic damage dynamics with a first-order Taylor series method"};
  app.set_version_flag("--version", std::string(tsdm::version_string()));
  app.require_subcommand(1);

  ConfigArgs gen_args, det_args, tsm_args, mc_args;
  auto* gen = app.add_subcommand("mesh-gen", "generate and validate the mesh");
  add_config_options(gen, gen_args);

  auto* det = app.add_subcommand("run-det", "one deterministic run at a fixed xi");
  add_config_options(det, det_args);
  std::string xi_text;
  det->add_option("--xi", xi_text, "realization of the stiffness perturbation");

  auto* tsm = app.add_subcommand("run-tsm", "orders 0 and 1 plus expectation and deviation");
  add_config_options(tsm, tsm_args);

  auto* mc = app.add_subcommand("run-mc", "Monte Carlo reference ensemble");
  add_config_options(mc, mc_args);

  auto* cmp = app.add_subcommand("compare", "compare a TSM run with an MC run");
  std::string tsm_dir, mc_dir, cmp_out = "tsdm-compare";
  double mask = 0.5;
  cmp->add_option("--tsm", tsm_dir, "run-tsm artifact directory")->required();
  cmp->add_option("--mc", mc_dir, "run-mc artifact directory")->required();
  cmp->add_option("-o,--out", cmp_out, "artifact directory");
  cmp->add_option("--mask", mask, "threshold on the expected integrity");

  auto* timing = app.add_subcommand("report-timing", "wall-time table and speedup");
  std::vector<std::string> timing_dirs;
  timing->add_option("dirs", timing_dirs, "artifact directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      tsdm::cmd_mesh_gen(load(gen_args), std::cout);
    } else if (det->parsed()) {
      if (!xi_text.empty()) det_args.sets.push_back("xi=" + xi_text);
      tsdm::cmd_run_det(load(det_args), std::cout);
    } else if (tsm->parsed()) {
      tsdm::cmd_run_tsm(load(tsm_args), std::cout);
    } else if (mc->parsed()) {
      tsdm::cmd_run_mc(load(mc_args), std::cout);
    } else if (cmp->parsed()) {
      tsdm::cmd_compare(tsm_dir, mc_dir, cmp_out, mask, std::cout);
    } else if (timing->parsed()) {
      std::vector<std::filesystem::path> dirs(timing_dirs.begin(), timing_dirs.end());
      std::cout << tsdm::timing_text(tsdm::report_timing(dirs));
    }
  } catch (...) {
    return tsdm::exit_code_for_current_exception(std::cerr);
  }
  return 0;
}
