#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "simm/csv.hpp"
#include "simm/output.hpp"

namespace simm::io {

inline constexpr int kSchemaVersion = 1;
/// Runs with more draw values than this store draws in a sibling CSV.
inline constexpr std::size_t kEmbedLimit = 1'000'000;

std::string_view library_version();

struct LoadOptions {
    std::string mixtures;
    std::string sources;
    std::optional<std::string> corrections;
    std::optional<std::string> concentrations;
    /// Optional in the file when left at the default; required when set explicitly.
    std::string group_column = "group";
    bool group_column_required = false;
};

/// Builds a validated input from parsed tables (see LoadOptions for the
/// schema). Tracers are matched by name across tables; sources by name.
SimmInput load_tables(const csv::Table& mixtures, const csv::Table& sources,
                      const csv::Table* corrections, const csv::Table* concentrations,
                      const std::string& group_column = "group", bool group_column_required = false);

SimmInput load(const LoadOptions& options);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string priors_to_json(const Priors& priors);
/// Accepts {"mu0": [...], "sigma0": [[...]] or [diag...], "a": , "b": }.
Priors priors_from_json(std::string_view text, Index n_sources);

/// Serializes a run. When `draws_csv` is non-null and the run is large, draws
/// are written to it and the JSON references `draws_file` instead.
std::string run_to_json(const PosteriorOutput& output, const std::string* draws_file = nullptr,
                        std::string* draws_csv = nullptr);
/// `base_dir` resolves a `draws_file` reference.
PosteriorOutput run_from_json(std::string_view text, const std::filesystem::path& base_dir = {});

void save_run(const PosteriorOutput& output, const std::filesystem::path& path);
PosteriorOutput load_run(const std::filesystem::path& path);

/// One line per FFVB iteration: group,iteration,lower_bound,moving_average,patience.
std::string trace_csv(const PosteriorOutput& output);

/// Long-format draws: group,draw,chain,deviance,<sources>,sd[<tracer>].
std::string draws_csv(const PosteriorOutput& output);

}  // namespace simm::io
