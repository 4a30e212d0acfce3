#pragma once

#include "netfolio/community.hpp"
#include "netfolio/data_ingest.hpp"
#include "netfolio/pmfg.hpp"
#include "netfolio/returns_correlation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace netfolio {

enum class SelectionMode { Inter, Intra };

std::string to_string(SelectionMode mode);
SelectionMode parse_mode(const std::string& name);

struct StockSelection {
    SelectionMode mode = SelectionMode::Inter;
    std::size_t window_id = 0;
    std::vector<int> nodes;
    std::vector<std::string> tickers;
    std::vector<int> communities;  ///< source community per ticker
    int fallbacks = 0;             ///< communities without an eligible stock (inter mode)

    std::size_t size() const { return nodes.size(); }
};

/// A node is eligible when every PMFG neighbour shares its community.
std::vector<bool> inter_eligible(const PlanarGraph& g, const Partition& p);

/// One stock from each of m random communities. Throws SizeError if m > n_c.
StockSelection select_inter_community(const PlanarGraph& g, const Partition& p, int m, std::uint64_t seed);

/// m random members of a random community with at least m members.
StockSelection select_intra_community(const Partition& p, int m, std::uint64_t seed,
                                      const std::vector<std::string>& labels = {});

struct PortfolioWeights {
    Eigen::VectorXd weights;
    double risk = 0.0;             ///< w' S w
    double expected_return = 0.0;  ///< per period, R' w
    double multiplier = 0.0;       ///< budget-constraint multiplier
    double ridge = 0.0;            ///< epsilon added to the diagonal, 0 if none
};

/// Minimises w'Sw - q R'w subject to sum(w) = 1, shorting allowed.
PortfolioWeights mv_optimize(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mean, double q);

struct FrontierPoint {
    double q = 0.0;
    double risk = 0.0;
    double expected_return = 0.0;
    Eigen::VectorXd weights;
    double ridge = 0.0;
};

/// Sample returns of the selected assets inside a window: rows are periods.
Eigen::MatrixXd scenario_matrix(const ReturnPanel& returns, const Window& window, const std::vector<int>& nodes);

/// {0} plus `points` log-spaced values from 1e-3 to 1.
std::vector<double> default_q_grid(int points = 25);

/// Sorted by risk. Covariance uses the n-1 normalisation.
std::vector<FrontierPoint> efficient_frontier(const Eigen::MatrixXd& scenarios, const std::vector<double>& q_grid);
std::vector<FrontierPoint> efficient_frontier(const ReturnPanel& returns, const Window& window,
                                              const StockSelection& sel, const std::vector<double>& q_grid);

struct AggregateBin {
    double risk = 0.0;
    double mean_return = 0.0;
    double var_return = 0.0;  ///< population variance across covering samples
    int n_samples = 0;        ///< 0 when no frontier reaches this risk
};

/// Evenly spaced bins from the largest per-frontier minimum risk, which every
/// frontier reaches down to, up to the median per-frontier maximum risk.
std::vector<double> default_risk_bins(const std::vector<std::vector<FrontierPoint>>& frontiers, int n_bins = 20);

/// Throws UsageError with fewer than 2 samples or when no
/// bin lies inside any sample's risk range.
std::vector<AggregateBin> frontier_aggregate(const std::vector<std::vector<FrontierPoint>>& samples,
                                             const std::vector<double>& risk_bins);

/// Empirical ES of a profit sample at tail mass `tail` in (0, 1].
double expected_shortfall(std::span<const double> profits, double tail);

struct EsResult {
    double tail = 0.0;
    double es = 0.0;  ///< achieved ES re-evaluated on the optimal weights
    Eigen::VectorXd weights;
    int iterations = 0;
};

/// Long-only, fully invested minimum-ES weights for scenario rows.
EsResult minimize_es(const Eigen::MatrixXd& scenarios, double tail);
EsResult minimize_es(const ReturnPanel& returns, const Window& window, const StockSelection& sel, double tail);

/// Per-window inputs shared by the experiments.
struct WindowAnalysis {
    Window window;
    std::string start_date;
    const PlanarGraph* graph = nullptr;
    const Partition* partition = nullptr;
};

std::vector<WindowAnalysis> pair_windows(const std::vector<Window>& windows, const ReturnPanel& returns,
                                         const std::vector<PlanarGraph>& graphs,
                                         const std::vector<Partition>& partitions);

/// Seed for one (window, sample, mode, size) task.
std::uint64_t task_seed(std::uint64_t master, std::size_t window_id, int sample, SelectionMode mode, int m = 0);

StockSelection draw_selection(const WindowAnalysis& w, SelectionMode mode, int m, std::uint64_t seed);

/// Empty string when feasible, otherwise a short reason code.
std::string selection_infeasibility(const WindowAnalysis& w, SelectionMode mode, int m);

struct ExperimentOptions {
    int m = 30;
    double tail = 0.05;
    int samples = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct FrontierSample {
    SelectionMode mode = SelectionMode::Inter;
    std::size_t window_id = 0;
    int sample = 0;
    std::vector<FrontierPoint> points;
};

struct FrontierExperiment {
    std::vector<FrontierSample> samples;
    std::vector<double> risk_bins;
    std::vector<AggregateBin> inter;
    std::vector<AggregateBin> intra;
    std::vector<std::pair<std::size_t, std::string>> skipped;  ///< (window, "mode:reason")
};

/// Frontiers for every (window, sample, mode); aggregated per mode over all
/// windows on one shared set of risk bins.
FrontierExperiment frontier_experiment(const ReturnPanel& returns, const std::vector<WindowAnalysis>& windows,
                                       const ExperimentOptions& options, const std::vector<double>& q_grid,
                                       int n_bins = 20);

struct EsSeriesRow {
    std::size_t window_id = 0;
    std::string start_date;
    SelectionMode mode = SelectionMode::Inter;
    double mean_es = 0.0;  ///< NaN when infeasible
    int n_samples = 0;
    std::string reason;    ///< empty when feasible
};

std::vector<EsSeriesRow> es_experiment_series(const ReturnPanel& returns, const std::vector<WindowAnalysis>& windows,
                                              const ExperimentOptions& options);

struct EsSizeRow {
    int m = 0;
    SelectionMode mode = SelectionMode::Inter;
    double mean_es = 0.0;  ///< NaN when no window is feasible
    double feasible_fraction = 0.0;
};

struct EsSizeResult {
    std::vector<EsSizeRow> rows;
    int inter_ceiling = 0;  ///< largest m feasible in every window
    int intra_ceiling = 0;
};

/// options.m is ignored; `m_grid` must be ascending.
EsSizeResult es_vs_size(const ReturnPanel& returns, const std::vector<WindowAnalysis>& windows,
                        const std::vector<int>& m_grid, const ExperimentOptions& options);

}  // namespace netfolio
