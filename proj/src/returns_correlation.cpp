#include "netfolio/returns_correlation.hpp"

#include "netfolio/error.hpp"
#include "netfolio/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace netfolio {

void WindowSpec::validate() const
{
    if (width < 2) {
        throw ConfigError(fmt::format("window width must be >= 2 (got {})", width));
    }
    if (step < 1) {
        throw ConfigError(fmt::format("window step must be >= 1 (got {})", step));
    }
}

ReturnPanel log_returns(const PricePanel& panel)
{
    const auto n = static_cast<Eigen::Index>(panel.n_assets());
    const auto t = static_cast<Eigen::Index>(panel.n_dates());
    if (!panel.present.all()) {
        throw DataError("log_returns requires a panel without missing cells");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            if (!(panel.prices(i, j) > 0.0)) {
                throw DataError(fmt::format("non-positive price for {} on {}",
                                            panel.tickers[static_cast<std::size_t>(i)],
                                            panel.dates[static_cast<std::size_t>(j)]));
            }
        }
    }
    ReturnPanel out;
    out.tickers = panel.tickers;
    if (t < 2) {
        out.returns.resize(n, 0);
        return out;
    }
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.returns.resize(n, t - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j + 1 < t; ++j) {
            out.returns(i, j) = std::log(panel.prices(i, j + 1)) - std::log(panel.prices(i, j));
        }
    }
    return out;
}

std::vector<Window> window_schedule(std::size_t length, const WindowSpec& spec)
{
    spec.validate();
    const auto width = static_cast<std::size_t>(spec.width);
    const auto step = static_cast<std::size_t>(spec.step);
    if (length < width) {
        throw DataError(fmt::format("insufficient data: T = {} < window width {} (step {})", length,
                                    spec.width, spec.step));
    }
    const std::size_t count = (length - width) / step + 1;
    std::vector<Window> windows;
    windows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        windows.push_back(Window{k, k * step, k * step + width});
    }
    return windows;
}

void require_nonsingular(const WindowSpec& spec, std::size_t n_assets)
{
    if (static_cast<std::size_t>(spec.width) < n_assets) {
        throw DataError(fmt::format("window width {} is smaller than the number of assets {}; "
                                    "the correlation matrix would be singular",
                                    spec.width, n_assets));
    }
}

CorrelationMatrix pearson_window(const ReturnPanel& returns, const Window& window)
{
    if (window.end > returns.length() || window.start >= window.end) {
        throw UsageError(fmt::format("window [{}, {}) outside series of length {}", window.start,
                                     window.end, returns.length()));
    }
    if (window.size() < 2) {
        throw UsageError("window must contain at least two observations");
    }
    const auto n = static_cast<Eigen::Index>(returns.n_assets());

    // Welford-style co-moment accumulation.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd comoment = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd delta(n);
    double count = 0.0;
    for (std::size_t t = window.start; t < window.end; ++t) {
        count += 1.0;
        const auto x = returns.returns.col(static_cast<Eigen::Index>(t));
        delta = x - mean;
        mean += delta / count;
        comoment.noalias() += delta * (x - mean).transpose();
    }

    CorrelationMatrix c;
    c.tickers = returns.tickers;
    c.window_id = window.id;
    c.start = window.start;
    c.end = window.end;
    if (!returns.dates.empty()) {
        c.start_date = returns.dates[window.start];
        c.end_date = returns.dates[window.end - 1];
    }
    c.mean = mean;
    c.stdev.resize(n);
    c.values = Eigen::MatrixXd::Identity(n, n);

    std::vector<bool> flat(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double var = comoment(i, i) / (count - 1.0);
        c.stdev(i) = var > 0.0 ? std::sqrt(var) : 0.0;
        if (!(comoment(i, i) > 0.0)) {
            flat[static_cast<std::size_t>(i)] = true;
            c.degenerate.push_back(static_cast<std::size_t>(i));
            c.warnings.push_back(fmt::format("asset {} has zero variance in window {}; correlations set to 0",
                                             returns.tickers[static_cast<std::size_t>(i)], window.id));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double rho = 0.0;
            if (!flat[static_cast<std::size_t>(i)] && !flat[static_cast<std::size_t>(j)]) {
                const double sym = 0.5 * (comoment(i, j) + comoment(j, i));
                rho = std::clamp(sym / std::sqrt(comoment(i, i) * comoment(j, j)), -1.0, 1.0);
            }
            c.values(i, j) = rho;
            c.values(j, i) = rho;
        }
    }
    return c;
}

std::vector<CorrelationMatrix> rolling_correlations(const ReturnPanel& returns, const WindowSpec& spec,
                                                    unsigned threads)
{
    const auto windows = window_schedule(returns.length(), spec);
    std::vector<CorrelationMatrix> out(windows.size());
    parallel_for(windows.size(), threads, [&](std::size_t k) { out[k] = pearson_window(returns, windows[k]); });
    return out;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& c)
{
    for (std::size_t i = 0; i < c.tickers.size(); ++i) {
        out << (i == 0 ? "" : ",") << c.tickers[i];
    }
    out << '\n';
    const auto n = static_cast<Eigen::Index>(c.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out << (j == 0 ? "" : ",") << fmt::format("{}", c.values(i, j));
        }
        out << '\n';
    }
}

nlohmann::json correlation_to_json(const CorrelationMatrix& c)
{
    const auto n = static_cast<Eigen::Index>(c.size());
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            values.push_back(c.values(i, j));
        }
    }
    nlohmann::json j;
    j["window"] = {{"id", c.window_id},
                   {"start", c.start},
                   {"end", c.end},
                   {"start_date", c.start_date},
                   {"end_date", c.end_date}};
    j["tickers"] = c.tickers;
    j["values"] = values;
    j["stdev"] = std::vector<double>(c.stdev.data(), c.stdev.data() + c.stdev.size());
    j["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
    j["degenerate"] = c.degenerate;
    j["warnings"] = c.warnings;
    return j;
}

CorrelationMatrix correlation_from_json(const nlohmann::json& j)
{
    try {
        CorrelationMatrix c;
        const auto& w = j.at("window");
        c.window_id = w.at("id").get<std::size_t>();
        c.start = w.at("start").get<std::size_t>();
        c.end = w.at("end").get<std::size_t>();
        c.start_date = w.at("start_date").get<std::string>();
        c.end_date = w.at("end_date").get<std::string>();
        c.tickers = j.at("tickers").get<std::vector<std::string>>();
        const auto n = static_cast<Eigen::Index>(c.tickers.size());
        const auto values = j.at("values").get<std::vector<double>>();
        const auto stdev = j.at("stdev").get<std::vector<double>>();
        const auto mean = j.at("mean").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != n * n || static_cast<Eigen::Index>(stdev.size()) != n
            || static_cast<Eigen::Index>(mean.size()) != n) {
            throw DataError("correlation JSON has inconsistent sizes");
        }
        c.values.resize(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index k = 0; k < n; ++k) {
                c.values(r, k) = values[static_cast<std::size_t>(r * n + k)];
            }
        }
        c.stdev = Eigen::Map<const Eigen::VectorXd>(stdev.data(), n);
        c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
        c.degenerate = j.at("degenerate").get<std::vector<std::size_t>>();
        c.warnings = j.at("warnings").get<std::vector<std::string>>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed correlation JSON: ") + e.what());
    }
}

}  // namespace netfolio
