#include "netfolio/error.hpp"
#include "netfolio/returns_correlation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace netfolio;

namespace {

PricePanel prices(const std::vector<std::vector<double>>& rows)
{
    PricePanel p;
    const auto t = rows.front().size();
    p.dates = business_days(t);
    p.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        p.tickers.push_back("A" + std::to_string(i));
        for (std::size_t j = 0; j < t; ++j) {
            p.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    p.present.setConstant(p.prices.rows(), p.prices.cols(), true);
    return p;
}

ReturnPanel panel(const std::vector<std::vector<double>>& rows)
{
    ReturnPanel r;
    const auto t = rows.front().size();
    r.dates = business_days(t);
    r.returns.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        r.tickers.push_back("A" + std::to_string(i));
        for (std::size_t j = 0; j < t; ++j) {
            r.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return r;
}

ReturnPanel random_panel(int n, int t, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1e-2);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(t)));
    for (auto& row : rows) {
        for (auto& x : row) {
            x = z(rng);
        }
    }
    return panel(rows);
}

}  // namespace

TEST_CASE("log returns of constant prices are zero; ln(e) steps are one")
{
    const auto r = log_returns(prices({{100, 100, 100}, {1.0, std::exp(1.0), std::exp(2.0)}}));
    CHECK(r.length() == 2);
    CHECK(r.returns(0, 0) == 0.0);
    CHECK(r.returns(0, 1) == 0.0);
    CHECK(r.returns(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.returns(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("log return from 100 to 110 matches a 40-digit evaluation")
{
    // ln(1.1) = 0.0953101798043248600439521232807650922206
    const auto r = log_returns(prices({{100, 110}}));
    CHECK(std::abs(r.returns(0, 0) - 0.0953101798043248600439521232807650922206) < 1e-16);
}

TEST_CASE("each return carries the date of its closing price")
{
    const auto p = prices({{1, 2, 3}});
    const auto r = log_returns(p);
    CHECK(r.dates == std::vector<std::string>{p.dates[1], p.dates[2]});
}

TEST_CASE("non-positive prices are a domain error")
{
    auto p = prices({{1, 2, 3}});
    p.prices(0, 1) = 0.0;
    CHECK_THROWS_AS(log_returns(p), DataError);
}

TEST_CASE("window counts match 142, 109 and 97")
{
    CHECK(window_schedule(4025, WindowSpec{500, 25}).size() == 142);
    CHECK(window_schedule(3000, WindowSpec{300, 25}).size() == 109);
    CHECK(window_schedule(2700, WindowSpec{300, 25}).size() == 97);
}

TEST_CASE("schedule tiles with overlap width - step and ends inside the series")
{
    for (const auto& [t, spec] : {std::pair{1000u, WindowSpec{300, 25}}, std::pair{777u, WindowSpec{50, 7}},
                                   std::pair{10u, WindowSpec{10, 3}}}) {
        const auto w = window_schedule(t, spec);
        REQUIRE_FALSE(w.empty());
        CHECK(w.front().start == 0);
        CHECK(w.back().end <= t);
        CHECK(w.size() == (t - spec.width) / spec.step + 1);
        for (std::size_t k = 0; k < w.size(); ++k) {
            CHECK(w[k].id == k);
            CHECK(w[k].size() == static_cast<std::size_t>(spec.width));
            if (k > 0) {
                CHECK(w[k - 1].end - w[k].start == static_cast<std::size_t>(spec.width - spec.step));
            }
        }
    }
}

TEST_CASE("too-short series is an insufficient-data error naming T, width and step")
{
    CHECK_THROWS_WITH_AS(window_schedule(99, WindowSpec{100, 5}), doctest::Contains("99"), DataError);
    CHECK_THROWS_AS(WindowSpec({1, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(WindowSpec({10, 0}).validate(), ConfigError);
    CHECK_THROWS_AS(require_nonsingular(WindowSpec{10, 1}, 11), DataError);
}

TEST_CASE("pearson: identity, negation and the exact rational example")
{
    const auto r = panel({{1, 2, 3, 4}, {-1, -2, -3, -4}, {1, 2, 4, 8}});
    const auto c = pearson_window(r, Window{0, 0, 4});
    CHECK(c.values(0, 0) == 1.0);
    CHECK(c.values(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    // sxy = 23/2, sxx = 5, syy = 115/4  =>  rho = sqrt(23/25)
    CHECK(std::abs(c.values(0, 2) - 0.9591663046625439083) < 1e-15);
}

TEST_CASE("pearson agrees with a two-pass long-double oracle on random data")
{
    const auto r = random_panel(6, 400, 3);
    const auto c = pearson_window(r, Window{0, 50, 350});
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            std::vector<double> a;
            std::vector<double> b;
            for (int t = 50; t < 350; ++t) {
                a.push_back(r.returns(i, t));
                b.push_back(r.returns(j, t));
            }
            CHECK(std::abs(c.values(i, j) - oracle::pearson(a, b)) < 1e-13);
        }
    }
}

TEST_CASE("single-pass accumulation survives a large common offset")
{
    // Tiny returns riding on a big level: a naive sum-of-squares formula cancels.
    auto r = random_panel(3, 500, 11);
    r.returns.array() *= 1e-2;
    r.returns.array() += 1e3;
    const auto c = pearson_window(r, Window{0, 0, 500});
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            std::vector<double> a;
            std::vector<double> b;
            for (int t = 0; t < 500; ++t) {
                a.push_back(r.returns(i, t));
                b.push_back(r.returns(j, t));
            }
            CHECK(std::abs(c.values(i, j) - oracle::pearson(a, b)) < 1e-6);
        }
    }
}

TEST_CASE("positive affine rescaling leaves correlation rows unchanged")
{
    auto r = random_panel(5, 300, 5);
    const auto before = pearson_window(r, Window{0, 0, 300});
    r.returns.row(2) = r.returns.row(2).array() * 37.5 + 0.25;
    const auto after = pearson_window(r, Window{0, 0, 300});
    CHECK((before.values - after.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("matrices are symmetric with unit diagonal and entries in [-1, 1]")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = random_panel(12, 60, seed);
        const auto c = pearson_window(r, Window{0, 0, 60});
        CHECK((c.values - c.values.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((c.values.diagonal().array() == 1.0).all());
        CHECK(c.values.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("zero-variance asset is flagged with 0 off-diagonal and a warning")
{
    const auto r = panel({{0.1, 0.1, 0.1, 0.1}, {1, 2, 3, 5}});
    const auto c = pearson_window(r, Window{0, 0, 4});
    CHECK(c.degenerate == std::vector<std::size_t>{0});
    CHECK(c.values(0, 1) == 0.0);
    CHECK(c.values(0, 0) == 1.0);
    CHECK(c.warnings.size() == 1);
}

TEST_CASE("rolling windows: T = width gives 1 matrix, T = width + step gives 2")
{
    const auto r = random_panel(3, 40, 1);
    CHECK(rolling_correlations(r, WindowSpec{40, 5}).size() == 1);
    CHECK(rolling_correlations(r, WindowSpec{35, 5}).size() == 2);
}

TEST_CASE("rolling windows are identical serially and in parallel")
{
    const auto r = random_panel(8, 300, 2);
    const auto a = rolling_correlations(r, WindowSpec{100, 20}, 1);
    const auto b = rolling_correlations(r, WindowSpec{100, 20}, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].window_id == k);
        CHECK(a[k].values == b[k].values);
    }
}

TEST_CASE("synthetic 2-block market: within-block mean beats between-block mean in every window")
{
    SyntheticMarketSpec s;
    s.n_assets = 10;
    s.n_blocks = 2;
    s.length = 1000;
    const auto labels = s.block_labels();
    for (const auto& c : rolling_correlations(generate_synthetic_market(s), WindowSpec{200, 100})) {
        double within = 0;
        double between = 0;
        int nw = 0;
        int nb = 0;
        for (int i = 0; i < 10; ++i) {
            for (int j = i + 1; j < 10; ++j) {
                if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
                    within += c.values(i, j);
                    ++nw;
                } else {
                    between += c.values(i, j);
                    ++nb;
                }
            }
        }
        CHECK(within / nw > between / nb);
    }
}

TEST_CASE("JSON round trip preserves every field")
{
    const auto r = random_panel(4, 50, 8);
    const auto c = pearson_window(r, Window{3, 10, 50});
    const auto back = correlation_from_json(correlation_to_json(c));
    CHECK(back.tickers == c.tickers);
    CHECK(back.window_id == 3);
    CHECK(back.start_date == c.start_date);
    CHECK(back.values == c.values);
    CHECK(back.stdev == c.stdev);
    std::ostringstream csv;
    write_correlation_csv(csv, c);
    CHECK(csv.str().rfind("A0,A1,A2,A3\n", 0) == 0);
}
