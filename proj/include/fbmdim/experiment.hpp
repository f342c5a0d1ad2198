#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmdim/config.hpp"
#include "fbmdim/localtime.hpp"
#include "fbmdim/sojourn.hpp"

namespace fbmdim {

/// Plain CSV table: a header row and string cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(const std::filesystem::path& file) const;
    std::string to_csv() const;
};

struct Aggregate {
    double value = 0.0;
    double stderr_value = 0.0;
};

struct ReplicaResult {
    std::uint64_t seed = 0;
    std::map<std::string, double> estimates; // NaN where an estimate is undefined
};

struct RunRecord {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    ExperimentKind experiment = ExperimentKind::theorem1;
    std::string config_hash;
    std::string config_text;
    std::vector<ReplicaResult> replicas;
    std::map<std::string, Aggregate> aggregates;
    std::map<std::string, bool> checks;
    std::map<std::string, Table> tables; // file name -> contents
    std::string started_at;
    std::string finished_at;

    const Aggregate& aggregate(const std::string& name) const;
    nlohmann::json to_json() const;
};

/// Synthesizes config.replicas paths with seeds base_seed + i, runs the
/// experiment pipeline and aggregates. Throws ConfigError for invalid
/// configs and ResourceError for paths above 2^26 samples.
RunRecord run_experiment(const ExperimentConfig& config);

/// Writes run.json and every table of the record into `dir`.
void write_artifacts(const RunRecord& record, const std::filesystem::path& dir);

/// Maximal runs of consecutive occupied cells of E_gamma over [1, 2^N), as
/// (start, end) rows.
Table figure1_intervals(const SojournRecord& record);

/// (n, cell) rows of every occupied cell.
Table occupied_cells_table(const SojournRecord& record);

/// Per-annulus hit_count and leb_approx of a sojourn record.
nlohmann::json sojourn_summary(const SojournRecord& record);

/// (x, t, L) rows of an occupation-density grid.
Table occupation_table(const LocalTimeGrid& grid);

/// Runs a figure1 config and writes figure1.csv (and run.json) to its
/// output directory; returns the path of figure1.csv.
std::filesystem::path emit_figure1(const ExperimentConfig& config);

} // namespace fbmdim
