#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace covgrad::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitDivergence = 2,
  kExitSaddle = 3,
  kExitCheckFailed = 4,
};

struct CommandContext {
  std::vector<std::filesystem::path> configs;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  bool quiet = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

/// Trains and writes <out>/trajectory.csv plus <out>/summary.txt.
int cmd_train(const CommandContext& ctx);
/// Laplace evidence report, optionally checked against quadrature.
int cmd_evidence(const CommandContext& ctx);
/// Evidence comparison of two configs on the same data.
int cmd_compare(const CommandContext& ctx);
/// Selection rate of the first config over data seeds and sample sizes.
int cmd_compare_study(const CommandContext& ctx, const std::vector<std::size_t>& ns, std::size_t seeds);
int cmd_gradcheck(const CommandContext& ctx);
/// Trains a quadratic or quartic scalar model and checks it against the
/// closed-form gradient flow.
int cmd_oracle_check(const CommandContext& ctx);
int cmd_saddle_census(const CommandContext& ctx);

}  // namespace covgrad::harness
