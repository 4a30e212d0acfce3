/**
 * @file pipeline.hpp
 * @brief Staged, cached orchestration behind the command-line tool.
 *
 * Stages write into subdirectories of the output directory:
 *
 *     synthetic/  returns.csv, labels.csv
 *     correlate/  returns.csv, corr_NNNN.{json,csv}
 *     analyze/    graph_NNNN.{json,csv}, partition_NNNN.csv, summary.csv,
 *                 cooccurrence_hist.csv
 *     portfolio/  frontier.csv, frontier_aggregate.csv, es_series.csv,
 *                 es_vs_size.csv
 *
 * Each stage finishes by writing manifest.json, which records a key hashed
 * from the stage's inputs and settings. A stage whose manifest key matches
 * and whose listed files all exist is skipped. Files are written to a
 * temporary name and renamed, and nothing time-dependent is recorded, so a
 * rerun with the same inputs reproduces every byte.
 */

#pragma once

#include "netfolio/data_ingest.hpp"
#include "netfolio/key_value.hpp"
#include "netfolio/returns_correlation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace netfolio {

struct PipelineConfig {
    std::filesystem::path input;          ///< empty: use the synthetic stage output
    std::string input_kind = "prices";    ///< prices | returns
    PanelLayout layout = PanelLayout::Wide;
    double min_coverage = 0.95;
    WindowSpec window;
    int trials = 20;
    std::uint64_t seed = 1;
    std::vector<std::string> modes{"inter", "intra"};
    int m = 30;
    std::vector<int> m_grid{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
    double tail = 0.05;
    int samples = 100;
    int size_samples = 100;               ///< samples per window for ES versus size
    int q_points = 25;
    int risk_bins = 20;
    bool plot_data = false;
    unsigned threads = 0;                 ///< 0: hardware concurrency
    std::filesystem::path out = "out";
    SyntheticMarketSpec synthetic;

    /// Keys prefixed `synthetic.` configure the generator. `tail` wins over
    /// `alpha`; otherwise tail = 1 - alpha, or alpha itself when
    /// `alpha_reading = literal`.
    static PipelineConfig from_key_values(const KeyValues& kv);

    /// Throws ConfigError on out-of-range settings.
    void validate() const;

    unsigned worker_count() const;
};

/// Loads a config file (empty path: defaults) and applies `overrides` on top.
PipelineConfig load_config(const std::filesystem::path& path, const KeyValues& overrides);

enum class StageStatus { Ran, Cached };

struct StageReport {
    std::string stage;
    StageStatus status = StageStatus::Ran;
    std::vector<std::string> warnings;
};

StageReport cmd_synthetic(const PipelineConfig& cfg);
StageReport cmd_correlate(const PipelineConfig& cfg);
StageReport cmd_analyze(const PipelineConfig& cfg);
StageReport cmd_portfolio(const PipelineConfig& cfg);
std::vector<StageReport> cmd_run_all(const PipelineConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hash_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest round-trip text for a double; NaN becomes NA.
std::string format_number(double x);

}  // namespace netfolio
