#ifndef SLICEQ_CLI_COMMANDS_HPP
#define SLICEQ_CLI_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>

#include "config.hpp"

namespace sliceq::cli {

/// gen-data: runs the measurement campaign, writes <out>/dataset.csv and
/// reports the planned duration and row count.
void cmd_gen_data(const RunConfig& config, const std::filesystem::path& out_dir,
                  std::ostream& log);

/// train: 70/30 split, k-fold CV over all configured kinds and KQIs;
/// writes <out>/registry.json, <out>/score_table.csv and <out>/holdout.csv
/// (the untouched test rows). Holdout R2 and security margins are
/// calibrated on the holdout and stored in the registry.
void cmd_train(const RunConfig& config, const std::filesystem::path& dataset,
               const std::filesystem::path& out_dir, std::ostream& log);

/// eval: writes per-row measured/estimated pairs for every KQI
/// (<out>/predictions.csv) and per-kind prediction latency stats over 1000
/// repetitions (<out>/latency.csv). Latency numbers are wall-clock
/// measurements, the one output excluded from byte-identical reruns.
void cmd_eval(const RunConfig& config, const std::filesystem::path& registry,
              const std::filesystem::path& dataset,
              const std::filesystem::path& out_dir, std::ostream& log);

/// negotiate: runs the concession protocol for a request file, writes the
/// negotiation log JSON.
void cmd_negotiate(const RunConfig& config,
                   const std::filesystem::path& registry,
                   const std::filesystem::path& request,
                   const std::filesystem::path& out_path, std::ostream& log);

/// dysa: replays a radio trace against targets, writes the allocation
/// timeline CSV.
void cmd_dysa(const RunConfig& config, const std::filesystem::path& registry,
              const std::filesystem::path& trace,
              const std::filesystem::path& targets,
              const std::filesystem::path& out_path, std::ostream& log);

/// Targets file: {"schema":"sliceq-targets-v1","targets":[{"kqi","op",
/// "bound"}],"margin":{"<kqi>":alpha,...}} with margin optional (default:
/// the registry's calibrated margins).
struct DysaCase {
    std::vector<dysa::KqiTarget> targets;
    std::optional<dysa::SecurityMargin> margin_override;
};
DysaCase load_targets(const std::filesystem::path& path);

}  // namespace sliceq::cli

#endif  // SLICEQ_CLI_COMMANDS_HPP
