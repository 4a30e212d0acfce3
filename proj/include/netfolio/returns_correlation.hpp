/**
 * @file returns_correlation.hpp
 * @brief Log returns, rolling window schedules and windowed Pearson matrices.
 *
 * Windows are half-open index ranges [k*step, k*step + width) over the return
 * series, anchored at its first element, for k = 0 .. K-1 with
 * K = floor((T - width) / step) + 1.
 */

#pragma once

#include "netfolio/data_ingest.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace netfolio {

struct WindowSpec {
    int width = 500;  ///< trading days per window
    int step = 25;    ///< shift between consecutive windows

    void validate() const;
};

struct Window {
    std::size_t id = 0;
    std::size_t start = 0;  ///< first index, inclusive
    std::size_t end = 0;    ///< last index, exclusive

    std::size_t size() const { return end - start; }
};

struct CorrelationMatrix {
    std::vector<std::string> tickers;
    std::size_t window_id = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string start_date;
    std::string end_date;
    Eigen::MatrixXd values;                ///< N x N Pearson coefficients
    Eigen::VectorXd stdev;                 ///< sample standard deviation per asset
    Eigen::VectorXd mean;                  ///< mean return per asset
    std::vector<std::size_t> degenerate;   ///< zero-variance assets
    std::vector<std::string> warnings;

    std::size_t size() const { return tickers.size(); }
};

/// r_i(t) = ln p_i(t+1) - ln p_i(t). Each return carries the date of p(t+1).
ReturnPanel log_returns(const PricePanel& panel);

/// Throws DataError naming T, width and step when T < width.
std::vector<Window> window_schedule(std::size_t length, const WindowSpec& spec);

/// Sample Pearson matrix over one window. Zero-variance assets get 0
/// off-diagonal entries, 1 on the diagonal and a warning record.
CorrelationMatrix pearson_window(const ReturnPanel& returns, const Window& window);

/// One matrix per scheduled window, in chronological order.
std::vector<CorrelationMatrix> rolling_correlations(const ReturnPanel& returns, const WindowSpec& spec,
                                                    unsigned threads = 1);

/// Throws DataError when width < N (the matrix would be singular).
void require_nonsingular(const WindowSpec& spec, std::size_t n_assets);

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& c);
nlohmann::json correlation_to_json(const CorrelationMatrix& c);
CorrelationMatrix correlation_from_json(const nlohmann::json& j);

}  // namespace netfolio
