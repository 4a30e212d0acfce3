#include "netfolio/data_ingest.hpp"

#include "netfolio/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace netfolio {

PanelLayout parse_layout(const std::string& name)
{
    if (name == "wide") {
        return PanelLayout::Wide;
    }
    if (name == "long") {
        return PanelLayout::Long;
    }
    throw ConfigError("unknown panel layout `" + name + "` (expected wide|long)");
}

bool is_iso_date(const std::string& s)
{
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return false;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 4 || i == 7) {
            continue;
        }
        if (s[i] < '0' || s[i] > '9') {
            return false;
        }
    }
    const std::chrono::year_month_day ymd{std::chrono::year(std::stoi(s.substr(0, 4))),
                                          std::chrono::month(static_cast<unsigned>(std::stoi(s.substr(5, 2)))),
                                          std::chrono::day(static_cast<unsigned>(std::stoi(s.substr(8, 2))))};
    return ymd.ok();
}

void PricePanel::validate() const
{
    const auto n = static_cast<Eigen::Index>(tickers.size());
    const auto t = static_cast<Eigen::Index>(dates.size());
    if (prices.rows() != n || prices.cols() != t || present.rows() != n || present.cols() != t) {
        throw DataError("price panel shape does not match tickers x dates");
    }
    for (std::size_t k = 1; k < dates.size(); ++k) {
        if (!(dates[k - 1] < dates[k])) {
            throw DataError("dates not strictly increasing at " + dates[k]);
        }
    }
    std::set<std::string> seen;
    for (const auto& tk : tickers) {
        if (!seen.insert(tk).second) {
            throw DataError("duplicate ticker " + tk);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            if (present(i, j) && !(prices(i, j) > 0.0 && std::isfinite(prices(i, j)))) {
                throw DataError(fmt::format("non-positive price for {} on {}", tickers[i], dates[j]));
            }
        }
    }
}

void ReturnPanel::validate() const
{
    if (returns.rows() != static_cast<Eigen::Index>(tickers.size())
        || returns.cols() != static_cast<Eigen::Index>(dates.size())) {
        throw DataError("return panel shape does not match tickers x dates");
    }
    if (!returns.allFinite()) {
        throw DataError("return panel contains non-finite values");
    }
}

namespace {

struct Cell {
    std::string date;
    std::string ticker;
    double price;
    bool present;
    std::size_t line;
};

double parse_price(const std::string& text, std::size_t line)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("not a number: `" + text + "`", line);
    }
}

PricePanel assemble(std::vector<Cell> cells, std::vector<std::string> tickers)
{
    std::set<std::string> date_set;
    for (const auto& c : cells) {
        date_set.insert(c.date);
    }
    PricePanel panel;
    panel.tickers = std::move(tickers);
    panel.dates.assign(date_set.begin(), date_set.end());

    std::map<std::string, Eigen::Index> ticker_index;
    for (std::size_t i = 0; i < panel.tickers.size(); ++i) {
        if (!ticker_index.emplace(panel.tickers[i], static_cast<Eigen::Index>(i)).second) {
            throw DataError("duplicate ticker " + panel.tickers[i]);
        }
    }
    std::map<std::string, Eigen::Index> date_index;
    for (std::size_t j = 0; j < panel.dates.size(); ++j) {
        date_index.emplace(panel.dates[j], static_cast<Eigen::Index>(j));
    }

    const auto n = static_cast<Eigen::Index>(panel.tickers.size());
    const auto t = static_cast<Eigen::Index>(panel.dates.size());
    panel.prices = Eigen::MatrixXd::Zero(n, t);
    panel.present.setConstant(n, t, false);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> filled;
    filled.setConstant(n, t, false);

    for (const auto& c : cells) {
        const auto i = ticker_index.at(c.ticker);
        const auto j = date_index.at(c.date);
        if (filled(i, j)) {
            throw DataError(fmt::format("duplicate cell ({}, {}) at line {}", c.date, c.ticker, c.line));
        }
        filled(i, j) = true;
        if (c.present) {
            if (!(c.price > 0.0) || !std::isfinite(c.price)) {
                throw DataError(fmt::format("non-positive price {} for {} on {} at line {}",
                                            c.price, c.ticker, c.date, c.line));
            }
            panel.prices(i, j) = c.price;
            panel.present(i, j) = true;
        }
    }
    panel.validate();
    return panel;
}

}  // namespace

PricePanel read_price_panel(std::istream& in, PanelLayout layout)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw ParseError("empty file", line_no);
    }
    const auto header = split(trim(line), ',');
    std::vector<Cell> cells;
    std::vector<std::string> tickers;

    if (layout == PanelLayout::Wide) {
        if (header.size() < 2 || trim(header[0]) != "date") {
            throw ParseError("wide header must be `date,TICKER1,...`", line_no);
        }
        for (std::size_t k = 1; k < header.size(); ++k) {
            auto tk = trim(header[k]);
            if (tk.empty()) {
                throw ParseError("empty ticker in header", line_no);
            }
            tickers.push_back(std::move(tk));
        }
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) {
                continue;
            }
            const auto fields = split(line, ',');
            if (fields.size() != header.size()) {
                throw ParseError(fmt::format("expected {} fields, found {}", header.size(), fields.size()),
                                 line_no);
            }
            const auto date = trim(fields[0]);
            if (!is_iso_date(date)) {
                throw ParseError("bad ISO-8601 date `" + date + "`", line_no);
            }
            for (std::size_t k = 1; k < fields.size(); ++k) {
                const auto text = trim(fields[k]);
                Cell c{date, tickers[k - 1], 0.0, !text.empty(), line_no};
                if (c.present) {
                    c.price = parse_price(text, line_no);
                }
                cells.push_back(std::move(c));
            }
        }
    } else {
        if (header.size() != 3 || trim(header[0]) != "date" || trim(header[1]) != "ticker"
            || trim(header[2]) != "adj_close") {
            throw ParseError("long header must be `date,ticker,adj_close`", line_no);
        }
        std::set<std::string> ticker_set;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) {
                continue;
            }
            const auto fields = split(line, ',');
            if (fields.size() != 3) {
                throw ParseError(fmt::format("expected 3 fields, found {}", fields.size()), line_no);
            }
            const auto date = trim(fields[0]);
            if (!is_iso_date(date)) {
                throw ParseError("bad ISO-8601 date `" + date + "`", line_no);
            }
            const auto ticker = trim(fields[1]);
            if (ticker.empty()) {
                throw ParseError("empty ticker", line_no);
            }
            const auto text = trim(fields[2]);
            Cell c{date, ticker, 0.0, !text.empty(), line_no};
            if (c.present) {
                c.price = parse_price(text, line_no);
            }
            ticker_set.insert(ticker);
            cells.push_back(std::move(c));
        }
        tickers.assign(ticker_set.begin(), ticker_set.end());
    }
    return assemble(std::move(cells), std::move(tickers));
}

PricePanel load_price_panel(const std::filesystem::path& path, PanelLayout layout)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open price file " + path.string());
    }
    return read_price_panel(in, layout);
}

PricePanel align_and_filter(const PricePanel& panel, double min_coverage)
{
    if (!(min_coverage > 0.0 && min_coverage <= 1.0)) {
        throw UsageError("min_coverage must lie in (0, 1]");
    }
    const auto t = static_cast<Eigen::Index>(panel.n_dates());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(panel.n_assets()); ++i) {
        const auto count = panel.present.row(i).count();
        if (t > 0 && static_cast<double>(count) >= min_coverage * static_cast<double>(t)) {
            keep.push_back(i);
        }
    }
    if (keep.empty()) {
        throw DataError(fmt::format("empty universe: no asset reaches coverage {}", min_coverage));
    }

    // First date at which every retained asset has an observation to carry forward.
    Eigen::Index first = 0;
    for (const auto i : keep) {
        Eigen::Index j = 0;
        while (j < t && !panel.present(i, j)) {
            ++j;
        }
        first = std::max(first, j);
    }
    if (first >= t) {
        throw DataError("empty universe: no common date range after trimming leading gaps");
    }

    PricePanel out;
    const auto n = static_cast<Eigen::Index>(keep.size());
    const auto width = t - first;
    out.dates.assign(panel.dates.begin() + first, panel.dates.end());
    out.prices.resize(n, width);
    out.present.setConstant(n, width, true);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = keep[static_cast<std::size_t>(r)];
        out.tickers.push_back(panel.tickers[static_cast<std::size_t>(i)]);
        // Start from the last observation at or before `first`.
        double last = 0.0;
        for (Eigen::Index j = 0; j <= first; ++j) {
            if (panel.present(i, j)) {
                last = panel.prices(i, j);
            }
        }
        for (Eigen::Index j = first; j < t; ++j) {
            if (panel.present(i, j)) {
                last = panel.prices(i, j);
            }
            out.prices(r, j - first) = last;
        }
    }
    return out;
}

std::vector<std::string> business_days(std::size_t count)
{
    using namespace std::chrono;
    std::vector<std::string> out;
    out.reserve(count);
    sys_days day = year{2000} / January / 3;
    while (out.size() < count) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) {
            const year_month_day ymd{day};
            out.push_back(fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                                      static_cast<unsigned>(ymd.month()),
                                      static_cast<unsigned>(ymd.day())));
        }
        day += days{1};
    }
    return out;
}

void SyntheticMarketSpec::validate() const
{
    if (n_assets < 1) {
        throw SpecError("n_assets must be >= 1");
    }
    if (n_blocks < 1 || n_blocks > n_assets) {
        throw SpecError("n_blocks must lie in [1, n_assets]");
    }
    if (!(intra_corr >= 0.0 && intra_corr < 1.0)) {
        throw SpecError("intra_corr must lie in [0, 1)");
    }
    if (n_blocks > 1 && !(inter_corr >= 0.0 && inter_corr < intra_corr)) {
        throw SpecError("inter_corr must lie in [0, intra_corr)");
    }
    if (length < 1) {
        throw SpecError("length must be >= 1");
    }
    if (!block_means.empty() && static_cast<int>(block_means.size()) != n_blocks) {
        throw SpecError(fmt::format("block_means has {} entries, expected n_blocks = {}",
                                    block_means.size(), n_blocks));
    }
    if (!(volatility > 0.0) || !(shift_factor > 0.0)) {
        throw SpecError("volatility and shift_factor must be positive");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(target_correlation());
    if (llt.info() != Eigen::Success) {
        throw SpecError("implied block correlation matrix is not positive definite");
    }
}

std::vector<int> SyntheticMarketSpec::block_labels() const
{
    std::vector<int> labels(static_cast<std::size_t>(n_assets));
    for (int i = 0; i < n_assets; ++i) {
        labels[static_cast<std::size_t>(i)] =
            static_cast<int>(static_cast<long long>(i) * n_blocks / n_assets);
    }
    return labels;
}

Eigen::MatrixXd SyntheticMarketSpec::target_correlation() const
{
    const auto labels = block_labels();
    Eigen::MatrixXd c(n_assets, n_assets);
    for (int i = 0; i < n_assets; ++i) {
        for (int j = 0; j < n_assets; ++j) {
            if (i == j) {
                c(i, j) = 1.0;
            } else if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
                c(i, j) = intra_corr;
            } else {
                c(i, j) = inter_corr;
            }
        }
    }
    return c;
}

SyntheticMarketSpec SyntheticMarketSpec::from_key_values(const KeyValues& kv)
{
    SyntheticMarketSpec spec;
    spec.n_assets = static_cast<int>(kv_int(kv, "n_assets", spec.n_assets));
    spec.n_blocks = static_cast<int>(kv_int(kv, "n_blocks", spec.n_blocks));
    spec.intra_corr = kv_double(kv, "intra_corr", spec.intra_corr);
    spec.inter_corr = kv_double(kv, "inter_corr", spec.inter_corr);
    spec.length = static_cast<int>(kv_int(kv, "length", spec.length));
    spec.block_means = kv_double_list(kv, "block_means", spec.block_means);
    spec.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", static_cast<long long>(spec.seed)));
    spec.volatility = kv_double(kv, "volatility", spec.volatility);
    spec.shift_at = static_cast<int>(kv_int(kv, "shift_at", spec.shift_at));
    spec.shift_factor = kv_double(kv, "shift_factor", spec.shift_factor);
    spec.validate();
    return spec;
}

ReturnPanel generate_synthetic_market(const SyntheticMarketSpec& spec)
{
    spec.validate();
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(spec.target_correlation()).matrixL();
    const auto labels = spec.block_labels();

    ReturnPanel panel;
    const int width = spec.n_assets >= 1000 ? 4 : 3;
    for (int i = 0; i < spec.n_assets; ++i) {
        panel.tickers.push_back(fmt::format("S{:0{}d}", i, width));
    }
    panel.dates = business_days(static_cast<std::size_t>(spec.length));
    panel.returns.resize(spec.n_assets, spec.length);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(spec.n_assets);
    for (int t = 0; t < spec.length; ++t) {
        for (int i = 0; i < spec.n_assets; ++i) {
            z(i) = normal(rng);
        }
        const Eigen::VectorXd x = chol * z;
        const double vol = (spec.shift_at >= 0 && t >= spec.shift_at) ? spec.volatility * spec.shift_factor
                                                                       : spec.volatility;
        for (int i = 0; i < spec.n_assets; ++i) {
            const auto b = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
            const double mean = spec.block_means.empty() ? 0.0 : spec.block_means[b];
            panel.returns(i, t) = mean + vol * x(i);
        }
    }
    return panel;
}

ReturnPanel read_return_panel(std::istream& in)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw ParseError("empty file", line_no);
    }
    const auto header = split(trim(line), ',');
    if (header.size() < 2 || trim(header[0]) != "date") {
        throw ParseError("return panel header must be `date,TICKER1,...`", line_no);
    }
    ReturnPanel panel;
    for (std::size_t k = 1; k < header.size(); ++k) {
        panel.tickers.push_back(trim(header[k]));
    }
    std::vector<std::vector<double>> columns;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw ParseError(fmt::format("expected {} fields, found {}", header.size(), fields.size()), line_no);
        }
        const auto date = trim(fields[0]);
        if (!is_iso_date(date)) {
            throw ParseError("bad ISO-8601 date `" + date + "`", line_no);
        }
        if (!panel.dates.empty() && !(panel.dates.back() < date)) {
            throw DataError("return panel dates not strictly increasing at " + date);
        }
        panel.dates.push_back(date);
        std::vector<double> col;
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto text = trim(fields[k]);
            if (text.empty()) {
                throw DataError(fmt::format("missing return at line {}", line_no));
            }
            col.push_back(parse_price(text, line_no));
        }
        columns.push_back(std::move(col));
    }
    panel.returns.resize(static_cast<Eigen::Index>(panel.tickers.size()),
                         static_cast<Eigen::Index>(columns.size()));
    for (std::size_t t = 0; t < columns.size(); ++t) {
        for (std::size_t i = 0; i < panel.tickers.size(); ++i) {
            panel.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = columns[t][i];
        }
    }
    panel.validate();
    return panel;
}

ReturnPanel load_return_panel(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open return file " + path.string());
    }
    return read_return_panel(in);
}

void write_return_panel(std::ostream& out, const ReturnPanel& panel)
{
    out << "date";
    for (const auto& tk : panel.tickers) {
        out << ',' << tk;
    }
    out << '\n';
    for (std::size_t t = 0; t < panel.length(); ++t) {
        out << panel.dates[t];
        for (std::size_t i = 0; i < panel.n_assets(); ++i) {
            out << ',' << fmt::format("{}", panel.returns(static_cast<Eigen::Index>(i),
                                                          static_cast<Eigen::Index>(t)));
        }
        out << '\n';
    }
}

}  // namespace netfolio
