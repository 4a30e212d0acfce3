/**
 * @file data_ingest.hpp
 * @brief Price/return panels, CSV loaders and the synthetic block market.
 *
 * Panels are stored assets x time. Dates are ISO-8601 strings (YYYY-MM-DD),
 * so lexicographic order is chronological order.
 *
 * Wide CSV:  date,TICKER1,TICKER2,...   (empty cell = missing)
 * Long CSV:  date,ticker,adj_close
 */

#pragma once

#include "netfolio/key_value.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace netfolio {

enum class PanelLayout { Wide, Long };

PanelLayout parse_layout(const std::string& name);

struct PricePanel {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;
    Eigen::MatrixXd prices;                                   ///< assets x dates
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present;  ///< assets x dates

    std::size_t n_assets() const { return tickers.size(); }
    std::size_t n_dates() const { return dates.size(); }

    /// Throws DataError on unsorted/duplicate dates, duplicate tickers,
    /// shape mismatch or a non-positive present price.
    void validate() const;
};

struct ReturnPanel {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;  ///< date on which each return is realised
    Eigen::MatrixXd returns;         ///< assets x time, log returns

    std::size_t n_assets() const { return tickers.size(); }
    std::size_t length() const { return dates.size(); }

    /// Throws DataError on shape mismatch or non-finite values.
    void validate() const;
};

/// Block-correlated Gaussian market used as a ground-truth oracle.
struct SyntheticMarketSpec {
    int n_assets = 32;
    int n_blocks = 4;
    double intra_corr = 0.6;
    double inter_corr = 0.1;
    int length = 2000;
    std::vector<double> block_means;  ///< per block; empty means all zero
    std::uint64_t seed = 1;
    double volatility = 0.01;         ///< daily standard deviation of every asset
    int shift_at = -1;                ///< time index where volatility is rescaled; <0 disables
    double shift_factor = 1.0;

    /// Throws SpecError when the invariants fail, including a non
    /// positive-definite implied correlation matrix.
    void validate() const;

    /// Contiguous balanced block label per asset.
    std::vector<int> block_labels() const;

    Eigen::MatrixXd target_correlation() const;

    static SyntheticMarketSpec from_key_values(const KeyValues& kv);
};

PricePanel read_price_panel(std::istream& in, PanelLayout layout);
PricePanel load_price_panel(const std::filesystem::path& path, PanelLayout layout);

/// Drops assets with coverage below `min_coverage`, forward-fills interior gaps
/// and trims leading dates that some retained asset cannot fill.
PricePanel align_and_filter(const PricePanel& panel, double min_coverage);

ReturnPanel generate_synthetic_market(const SyntheticMarketSpec& spec);

ReturnPanel read_return_panel(std::istream& in);
ReturnPanel load_return_panel(const std::filesystem::path& path);
void write_return_panel(std::ostream& out, const ReturnPanel& panel);

/// `count` weekday dates starting at 2000-01-03.
std::vector<std::string> business_days(std::size_t count);

bool is_iso_date(const std::string& s);

}  // namespace netfolio
