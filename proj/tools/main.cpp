#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covgrad/harness/commands.hpp"

namespace {

struct Flags {
  std::vector<std::string> configs;
  std::uint64_t seed = 0;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* sub, Flags& flags, bool two_configs) {
  auto* config = sub->add_option("--config", flags.configs, "experiment config file")->required();
  if (two_configs) {
    config->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  } else {
    config->expected(1);
  }
  sub->add_option("--seed", flags.seed, "override the config seed");
  sub->add_option("--out", flags.out, "output directory");
  sub->add_flag("--quiet", flags.quiet, "print nothing on success");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace covgrad::harness;
  CLI::App app{"covgrad: metric-aware training, gradient checks and Bayesian evidence"};
  app.require_subcommand(1);

  Flags flags;
  std::vector<std::size_t> study_n;
  std::size_t study_seeds = 0;
  auto* train = app.add_subcommand("train", "train a model and write trajectory.csv and summary.txt");
  auto* evidence = app.add_subcommand("evidence", "Laplace evidence report");
  auto* compare = app.add_subcommand("compare", "compare the evidence of two configs (--config twice)");
  auto* gradcheck = app.add_subcommand("gradcheck", "autodiff against central finite differences");
  auto* oracle = app.add_subcommand("oracle-check", "scalar flow against its closed form");
  auto* census = app.add_subcommand("saddle-census", "Monte Carlo fraction of minima among critical points");
  for (CLI::App* sub : {train, evidence, gradcheck, oracle, census}) add_common(sub, flags, false);
  add_common(compare, flags, true);
  compare->add_option("--study-n", study_n, "selection-rate study over these sample sizes")->delimiter(',');
  compare->add_option("--study-seeds", study_seeds, "number of data seeds in the study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  CommandContext ctx;
  for (const std::string& c : flags.configs) ctx.configs.emplace_back(c);
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) ctx.seed = flags.seed;
    if (sub->count("--out") > 0) ctx.out_dir = flags.out;
  }
  ctx.quiet = flags.quiet;

  if (*train) return cmd_train(ctx);
  if (*evidence) return cmd_evidence(ctx);
  if (*compare) {
    if (!study_n.empty() || study_seeds > 0) return cmd_compare_study(ctx, study_n, study_seeds);
    return cmd_compare(ctx);
  }
  if (*gradcheck) return cmd_gradcheck(ctx);
  if (*oracle) return cmd_oracle_check(ctx);
  return cmd_saddle_census(ctx);
}
