#include "netfolio/portfolio.hpp"

#include "netfolio/error.hpp"
#include "netfolio/parallel.hpp"
#include "netfolio/simplex.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

namespace netfolio {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<int> community_sizes(const Partition& p)
{
    std::vector<int> sizes(static_cast<std::size_t>(p.n_communities), 0);
    for (const int c : p.assignment) {
        ++sizes[static_cast<std::size_t>(c)];
    }
    return sizes;
}

int largest_community(const Partition& p)
{
    const auto sizes = community_sizes(p);
    return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

// Partial Fisher-Yates: the first k entries become a uniform k-subset.
template <typename T>
void draw_prefix(std::vector<T>& items, std::size_t k, std::mt19937_64& rng)
{
    for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
        std::swap(items[i], items[pick(rng)]);
    }
}

std::string label_of(const std::vector<std::string>& labels, int v)
{
    return labels.empty() ? std::to_string(v) : labels[static_cast<std::size_t>(v)];
}

}  // namespace

std::string to_string(SelectionMode mode)
{
    return mode == SelectionMode::Inter ? "inter" : "intra";
}

SelectionMode parse_mode(const std::string& name)
{
    if (name == "inter") {
        return SelectionMode::Inter;
    }
    if (name == "intra") {
        return SelectionMode::Intra;
    }
    throw ConfigError(fmt::format("unknown selection mode '{}' (expected inter or intra)", name));
}

std::vector<bool> inter_eligible(const PlanarGraph& g, const Partition& p)
{
    if (p.n_nodes() != g.n_nodes()) {
        throw UsageError("partition does not match graph");
    }
    std::vector<bool> ok(g.n_nodes(), true);
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        for (const int u : g.neighbors(static_cast<int>(v))) {
            if (p.assignment[static_cast<std::size_t>(u)] != p.assignment[v]) {
                ok[v] = false;
                break;
            }
        }
    }
    return ok;
}

StockSelection select_inter_community(const PlanarGraph& g, const Partition& p, int m, std::uint64_t seed)
{
    if (m < 1) {
        throw UsageError("portfolio size must be at least 1");
    }
    if (m > p.n_communities) {
        throw SizeError(fmt::format("inter-community portfolio of size {} needs at least {} communities (found {})",
                                    m, m, p.n_communities));
    }
    const auto eligible = inter_eligible(g, p);
    const auto groups = p.members();
    std::mt19937_64 rng(seed);
    std::vector<int> ids(static_cast<std::size_t>(p.n_communities));
    std::iota(ids.begin(), ids.end(), 0);
    draw_prefix(ids, static_cast<std::size_t>(m), rng);
    ids.resize(static_cast<std::size_t>(m));
    std::sort(ids.begin(), ids.end());

    StockSelection sel;
    sel.mode = SelectionMode::Inter;
    sel.window_id = p.window_id;
    for (const int c : ids) {
        const auto& group = groups[static_cast<std::size_t>(c)];
        std::vector<int> pool;
        for (const int v : group) {
            if (eligible[static_cast<std::size_t>(v)]) {
                pool.push_back(v);
            }
        }
        int chosen = -1;
        if (!pool.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            chosen = pool[pick(rng)];
        } else {
            // Least-connected stock to other communities, then most embedded.
            ++sel.fallbacks;
            auto key = [&](int v) {
                int outside = 0;
                int inside = 0;
                for (const int u : g.neighbors(v)) {
                    (p.assignment[static_cast<std::size_t>(u)] == c ? inside : outside) += 1;
                }
                return std::make_tuple(outside, -inside, g.label(v));
            };
            chosen = *std::min_element(group.begin(), group.end(),
                                       [&](int a, int b) { return key(a) < key(b); });
        }
        sel.nodes.push_back(chosen);
        sel.tickers.push_back(g.label(chosen));
        sel.communities.push_back(c);
    }
    return sel;
}

StockSelection select_intra_community(const Partition& p, int m, std::uint64_t seed,
                                      const std::vector<std::string>& labels)
{
    if (m < 1) {
        throw UsageError("portfolio size must be at least 1");
    }
    if (!labels.empty() && labels.size() != p.n_nodes()) {
        throw UsageError("label count does not match partition");
    }
    const auto groups = p.members();
    std::vector<int> large;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        if (static_cast<int>(groups[c].size()) >= m) {
            large.push_back(static_cast<int>(c));
        }
    }
    if (large.empty()) {
        throw SizeError(fmt::format("no community has {} members (largest has {})", m, largest_community(p)));
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, large.size() - 1);
    const int c = large[pick(rng)];
    auto pool = groups[static_cast<std::size_t>(c)];
    draw_prefix(pool, static_cast<std::size_t>(m), rng);
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());

    StockSelection sel;
    sel.mode = SelectionMode::Intra;
    sel.window_id = p.window_id;
    for (const int v : pool) {
        sel.nodes.push_back(v);
        sel.tickers.push_back(label_of(labels, v));
        sel.communities.push_back(c);
    }
    return sel;
}

PortfolioWeights mv_optimize(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mean, double q)
{
    const auto n = mean.size();
    if (n < 1 || cov.rows() != n || cov.cols() != n) {
        throw UsageError("covariance and mean dimensions do not agree");
    }
    if (!(q >= 0.0)) {
        throw UsageError(fmt::format("risk tolerance must be non-negative (got {})", q));
    }
    // Stationarity of the Lagrangian: 2 S w - q R - lambda 1 = 0, 1'w = 1.
    const auto solve = [&](double ridge) {
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
        kkt.topLeftCorner(n, n) = 2.0 * cov;
        kkt.topLeftCorner(n, n).diagonal().array() += 2.0 * ridge;
        kkt.block(0, n, n, 1).setOnes();
        kkt.block(n, 0, 1, n).setOnes();
        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = q * mean;
        rhs(n) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        Eigen::VectorXd x = lu.solve(rhs);
        // One refinement step; matters once a ridge makes the system stiff.
        x += lu.solve(Eigen::VectorXd(rhs - kkt * x));
        return std::make_pair(lu.rank() == n + 1, x);
    };

    PortfolioWeights out;
    auto [full_rank, sol] = solve(0.0);
    if (!full_rank) {
        const double trace = cov.trace();
        out.ridge = 1e-10 * (trace > 0.0 ? trace : 1.0) / static_cast<double>(n);
        std::tie(full_rank, sol) = solve(out.ridge);
        if (!full_rank) {
            throw NumericalError("mean-variance system stays singular after regularisation");
        }
    }
    if (!sol.allFinite()) {
        throw NumericalError("mean-variance solution is not finite");
    }
    out.weights = sol.head(n);
    // Put any rounding drift of the budget back evenly.
    out.weights.array() += (1.0 - out.weights.sum()) / static_cast<double>(n);
    out.multiplier = -sol(n);
    out.risk = out.weights.dot(cov * out.weights);
    out.expected_return = mean.dot(out.weights);
    return out;
}

Eigen::MatrixXd scenario_matrix(const ReturnPanel& returns, const Window& window, const std::vector<int>& nodes)
{
    if (window.end > returns.length() || window.start >= window.end) {
        throw UsageError("window outside the return panel");
    }
    const auto t = static_cast<Eigen::Index>(window.size());
    Eigen::MatrixXd x(t, static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] < 0 || static_cast<std::size_t>(nodes[k]) >= returns.n_assets()) {
            throw UsageError(fmt::format("asset index {} out of range", nodes[k]));
        }
        x.col(static_cast<Eigen::Index>(k)) =
            returns.returns.row(nodes[k]).segment(static_cast<Eigen::Index>(window.start), t).transpose();
    }
    return x;
}

std::vector<double> default_q_grid(int points)
{
    if (points < 2) {
        throw UsageError("q grid needs at least 2 log-spaced points");
    }
    std::vector<double> grid{0.0};
    for (int i = 0; i < points; ++i) {
        grid.push_back(std::pow(10.0, -3.0 + 3.0 * i / (points - 1)));
    }
    return grid;
}

std::vector<FrontierPoint> efficient_frontier(const Eigen::MatrixXd& scenarios, const std::vector<double>& q_grid)
{
    const auto t = scenarios.rows();
    const auto m = scenarios.cols();
    if (m < 1) {
        throw SizeError("empty selection");
    }
    if (t < m + 1) {
        throw SizeError(fmt::format("window of {} periods is too short for {} assets", t, m));
    }
    const Eigen::VectorXd mean = scenarios.colwise().mean().transpose();
    const Eigen::MatrixXd centred = scenarios.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(t - 1);

    std::vector<FrontierPoint> points;
    points.reserve(q_grid.size());
    for (const double q : q_grid) {
        const auto w = mv_optimize(cov, mean, q);
        points.push_back(FrontierPoint{q, w.risk, w.expected_return, w.weights, w.ridge});
    }
    std::stable_sort(points.begin(), points.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
        return std::tie(a.risk, a.q) < std::tie(b.risk, b.q);
    });
    return points;
}

std::vector<FrontierPoint> efficient_frontier(const ReturnPanel& returns, const Window& window,
                                              const StockSelection& sel, const std::vector<double>& q_grid)
{
    return efficient_frontier(scenario_matrix(returns, window, sel.nodes), q_grid);
}

std::vector<double> default_risk_bins(const std::vector<std::vector<FrontierPoint>>& frontiers, int n_bins)
{
    if (n_bins < 1) {
        throw UsageError("need at least one risk bin");
    }
    double lo = -std::numeric_limits<double>::infinity();
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> highs;
    for (const auto& f : frontiers) {
        if (f.empty()) {
            continue;
        }
        lo = std::max(lo, f.front().risk);
        top = std::max(top, f.back().risk);
        highs.push_back(f.back().risk);
    }
    if (highs.empty()) {
        throw UsageError("no frontier to derive risk bins from");
    }
    // Upper end: the median of the per-sample maximum risks.
    const auto mid = highs.begin() + static_cast<std::ptrdiff_t>(highs.size() / 2);
    std::nth_element(highs.begin(), mid, highs.end());
    double hi = *mid;
    if (hi <= lo) {
        hi = top;
    }
    std::vector<double> bins;
    for (int i = 0; i < n_bins; ++i) {
        bins.push_back(n_bins == 1 ? lo : lo + (hi - lo) * i / (n_bins - 1));
    }
    return bins;
}

std::vector<AggregateBin> frontier_aggregate(const std::vector<std::vector<FrontierPoint>>& samples,
                                             const std::vector<double>& risk_bins)
{
    if (samples.size() < 2) {
        throw UsageError("frontier aggregation needs at least 2 samples");
    }
    std::vector<AggregateBin> out;
    bool any = false;
    for (const double r : risk_bins) {
        std::vector<double> values;
        for (const auto& f : samples) {
            if (f.empty() || r < f.front().risk || r > f.back().risk) {
                continue;
            }
            const auto hi = std::lower_bound(f.begin(), f.end(), r,
                                             [](const FrontierPoint& p, double x) { return p.risk < x; });
            if (hi->risk == r || hi == f.begin()) {
                values.push_back(hi->expected_return);
                continue;
            }
            const auto lo = std::prev(hi);
            const double s = (r - lo->risk) / (hi->risk - lo->risk);
            values.push_back(lo->expected_return + s * (hi->expected_return - lo->expected_return));
        }
        AggregateBin bin;
        bin.risk = r;
        bin.n_samples = static_cast<int>(values.size());
        if (values.empty()) {
            bin.mean_return = nan;
            bin.var_return = nan;
        } else {
            any = true;
            const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
            double var = 0.0;
            for (const double v : values) {
                var += (v - mean) * (v - mean);
            }
            bin.mean_return = mean;
            bin.var_return = var / values.size();
        }
        out.push_back(bin);
    }
    if (!any) {
        throw UsageError("no risk bin falls inside any frontier's risk range");
    }
    return out;
}

double expected_shortfall(std::span<const double> profits, double tail)
{
    if (profits.empty()) {
        throw UsageError("expected shortfall of an empty sample");
    }
    if (!(tail > 0.0 && tail <= 1.0)) {
        throw UsageError(fmt::format("tail fraction must lie in (0, 1] (got {})", tail));
    }
    std::vector<double> x(profits.begin(), profits.end());
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    // Smallest k with k >= tail * n, forgiving representation error in the product.
    const double target = tail * n;
    auto k = static_cast<std::size_t>(std::ceil(target));
    if (k > 1 && static_cast<double>(k - 1) >= target * (1.0 - 1e-12)) {
        --k;
    }
    k = std::clamp<std::size_t>(k, 1, x.size());
    const double q = x[k - 1];
    const auto below = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), q) - x.begin());
    // Centred on the quantile, so a constant sample returns exactly -q.
    double excess = 0.0;
    for (std::size_t i = 0; i < below; ++i) {
        excess += x[i] - q;
    }
    return -q - excess / target;
}

EsResult minimize_es(const Eigen::MatrixXd& scenarios, double tail)
{
    const auto n = scenarios.rows();
    const auto m = scenarios.cols();
    if (n < 2 || m < 1) {
        throw SizeError(fmt::format("ES optimisation needs at least 2 periods and 1 asset (got {} x {})", n, m));
    }
    if (!(tail > 0.0 && tail <= 1.0)) {
        throw UsageError(fmt::format("tail fraction must lie in (0, 1] (got {})", tail));
    }
    EsResult out;
    out.tail = tail;
    const double scale = scenarios.cwiseAbs().maxCoeff();
    if (m == 1 || scale == 0.0) {
        out.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
        const Eigen::VectorXd profit = scenarios * out.weights;
        out.es = expected_shortfall(std::span<const double>(profit.data(), static_cast<std::size_t>(n)), tail);
        return out;
    }

    // ES(Xw) = max over q in {0 <= q_s <= 1/(tail n), sum q = 1} of -q'Xw, so
    // min_w ES = -max_q min_i (X'q)_i. That inner LP is solved directly and
    // the portfolio weights are read off its row duals.
    const Eigen::MatrixXd x = scenarios / scale;
    const auto cols = n + 2 + m;
    LinearProgram lp;
    lp.A = Eigen::MatrixXd::Zero(m + 1, cols);
    lp.A.topLeftCorner(m, n) = x.transpose();
    lp.A.block(0, n, m, 1).setOnes();
    lp.A.block(0, n + 1, m, 1).setConstant(-1.0);
    lp.A.block(0, n + 2, m, m).setIdentity();
    lp.A.block(m, 0, 1, n).setOnes();
    lp.b = Eigen::VectorXd::Zero(m + 1);
    lp.b(m) = 1.0;
    lp.c = Eigen::VectorXd::Zero(cols);
    lp.c(n) = -1.0;
    lp.c(n + 1) = 1.0;
    lp.upper = Eigen::VectorXd::Constant(cols, std::numeric_limits<double>::infinity());
    lp.upper.head(n).setConstant(1.0 / (tail * static_cast<double>(n)));

    const auto sol = solve_lp(lp);
    out.iterations = sol.iterations;
    if (sol.status != LpStatus::Optimal) {
        throw NumericalError(fmt::format("ES optimisation did not converge ({} assets, {} periods, {} iterations)",
                                         m, n, sol.iterations));
    }
    Eigen::VectorXd w = -sol.duals.head(m);
    if (w.minCoeff() < -1e-7) {
        throw NumericalError(fmt::format("ES optimisation produced a short position of {}", w.minCoeff()));
    }
    w = w.cwiseMax(0.0);
    w /= w.sum();
    out.weights = w;
    const Eigen::VectorXd profit = x * w;
    const double es = expected_shortfall(std::span<const double>(profit.data(), static_cast<std::size_t>(n)), tail);
    if (std::abs(es + sol.objective) > 1e-7 * (1.0 + std::abs(es))) {
        throw NumericalError(fmt::format("ES optimisation certificate mismatch: weights give {}, bound {}",
                                         es, -sol.objective));
    }
    out.es = es * scale;
    return out;
}

EsResult minimize_es(const ReturnPanel& returns, const Window& window, const StockSelection& sel, double tail)
{
    return minimize_es(scenario_matrix(returns, window, sel.nodes), tail);
}

std::vector<WindowAnalysis> pair_windows(const std::vector<Window>& windows, const ReturnPanel& returns,
                                         const std::vector<PlanarGraph>& graphs,
                                         const std::vector<Partition>& partitions)
{
    if (windows.size() != graphs.size() || windows.size() != partitions.size()) {
        throw UsageError(fmt::format("{} windows, {} graphs and {} partitions do not line up", windows.size(),
                                     graphs.size(), partitions.size()));
    }
    std::vector<WindowAnalysis> out;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        if (graphs[k].n_nodes() != returns.n_assets() || partitions[k].n_nodes() != returns.n_assets()) {
            throw UsageError(fmt::format("window {} covers a different asset set", windows[k].id));
        }
        if (windows[k].end > returns.length()) {
            throw UsageError(fmt::format("window {} runs past the return panel", windows[k].id));
        }
        out.push_back(WindowAnalysis{windows[k], returns.dates[windows[k].start], &graphs[k], &partitions[k]});
    }
    return out;
}

std::uint64_t task_seed(std::uint64_t master, std::size_t window_id, int sample, SelectionMode mode, int m)
{
    std::uint64_t h = splitmix(master);
    h = splitmix(h ^ static_cast<std::uint64_t>(window_id));
    h = splitmix(h ^ static_cast<std::uint64_t>(sample));
    h = splitmix(h ^ (mode == SelectionMode::Inter ? 1ULL : 2ULL));
    return splitmix(h ^ static_cast<std::uint64_t>(m));
}

std::string selection_infeasibility(const WindowAnalysis& w, SelectionMode mode, int m)
{
    if (mode == SelectionMode::Inter && m > w.partition->n_communities) {
        return "too_few_communities";
    }
    if (mode == SelectionMode::Intra && m > largest_community(*w.partition)) {
        return "community_too_small";
    }
    return {};
}

StockSelection draw_selection(const WindowAnalysis& w, SelectionMode mode, int m, std::uint64_t seed)
{
    auto sel = mode == SelectionMode::Inter ? select_inter_community(*w.graph, *w.partition, m, seed)
                                            : select_intra_community(*w.partition, m, seed, w.graph->labels());
    sel.window_id = w.window.id;
    return sel;
}

namespace {

constexpr SelectionMode modes[] = {SelectionMode::Inter, SelectionMode::Intra};

// Mean optimised ES over `samples` draws, or NaN with a reason.
std::pair<double, std::string> window_mean_es(const ReturnPanel& returns, const WindowAnalysis& w,
                                              SelectionMode mode, int m, const ExperimentOptions& opt,
                                              int seed_m)
{
    auto reason = selection_infeasibility(w, mode, m);
    if (!reason.empty()) {
        return {nan, reason};
    }
    double total = 0.0;
    for (int s = 0; s < opt.samples; ++s) {
        const auto sel = draw_selection(w, mode, m, task_seed(opt.seed, w.window.id, s, mode, seed_m));
        total += minimize_es(returns, w.window, sel, opt.tail).es;
    }
    return {total / opt.samples, {}};
}

void check_options(const ExperimentOptions& opt)
{
    if (opt.samples < 1) {
        throw UsageError("samples per window must be at least 1");
    }
    if (!(opt.tail > 0.0 && opt.tail <= 1.0)) {
        throw UsageError(fmt::format("tail fraction must lie in (0, 1] (got {})", opt.tail));
    }
}

}  // namespace

FrontierExperiment frontier_experiment(const ReturnPanel& returns, const std::vector<WindowAnalysis>& windows,
                                       const ExperimentOptions& options, const std::vector<double>& q_grid,
                                       int n_bins)
{
    check_options(options);
    FrontierExperiment out;
    const auto per_window = static_cast<std::size_t>(options.samples) * 2;
    std::vector<FrontierSample> slots(windows.size() * per_window);
    std::vector<char> filled(slots.size(), 0);
    parallel_for(slots.size(), options.threads, [&](std::size_t k) {
        const auto& w = windows[k / per_window];
        const auto mode = modes[(k % per_window) / static_cast<std::size_t>(options.samples)];
        const int sample = static_cast<int>(k % static_cast<std::size_t>(options.samples));
        if (!selection_infeasibility(w, mode, options.m).empty()) {
            return;
        }
        const auto sel = draw_selection(w, mode, options.m, task_seed(options.seed, w.window.id, sample, mode));
        slots[k] = FrontierSample{mode, w.window.id, sample, efficient_frontier(returns, w.window, sel, q_grid)};
        filled[k] = 1;
    });
    for (const auto& w : windows) {
        for (const auto mode : modes) {
            const auto reason = selection_infeasibility(w, mode, options.m);
            if (!reason.empty()) {
                out.skipped.emplace_back(w.window.id, to_string(mode) + ":" + reason);
            }
        }
    }
    std::vector<std::vector<FrontierPoint>> all;
    std::vector<std::vector<FrontierPoint>> inter;
    std::vector<std::vector<FrontierPoint>> intra;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (!filled[k]) {
            continue;
        }
        all.push_back(slots[k].points);
        (slots[k].mode == SelectionMode::Inter ? inter : intra).push_back(slots[k].points);
        out.samples.push_back(std::move(slots[k]));
    }
    if (all.empty()) {
        return out;
    }
    out.risk_bins = default_risk_bins(all, n_bins);
    if (inter.size() >= 2) {
        out.inter = frontier_aggregate(inter, out.risk_bins);
    }
    if (intra.size() >= 2) {
        out.intra = frontier_aggregate(intra, out.risk_bins);
    }
    return out;
}

std::vector<EsSeriesRow> es_experiment_series(const ReturnPanel& returns, const std::vector<WindowAnalysis>& windows,
                                              const ExperimentOptions& options)
{
    check_options(options);
    std::vector<EsSeriesRow> rows(windows.size() * 2);
    parallel_for(rows.size(), options.threads, [&](std::size_t k) {
        const auto& w = windows[k / 2];
        const auto mode = modes[k % 2];
        const auto [mean, reason] = window_mean_es(returns, w, mode, options.m, options, 0);
        rows[k] = EsSeriesRow{w.window.id, w.start_date, mode, mean, reason.empty() ? options.samples : 0, reason};
    });
    return rows;
}

EsSizeResult es_vs_size(const ReturnPanel& returns, const std::vector<WindowAnalysis>& windows,
                        const std::vector<int>& m_grid, const ExperimentOptions& options)
{
    check_options(options);
    if (!std::is_sorted(m_grid.begin(), m_grid.end()) || m_grid.empty() || m_grid.front() < 1) {
        throw UsageError("portfolio size grid must be non-empty, positive and ascending");
    }
    if (windows.empty()) {
        throw UsageError("ES-versus-size needs at least one window");
    }
    EsSizeResult out;
    out.inter_ceiling = std::numeric_limits<int>::max();
    out.intra_ceiling = std::numeric_limits<int>::max();
    for (const auto& w : windows) {
        out.inter_ceiling = std::min(out.inter_ceiling, w.partition->n_communities);
        out.intra_ceiling = std::min(out.intra_ceiling, largest_community(*w.partition));
    }

    const auto cells = m_grid.size() * 2;
    std::vector<double> per_window(cells * windows.size(), nan);
    parallel_for(per_window.size(), options.threads, [&](std::size_t k) {
        const auto cell = k / windows.size();
        const int m = m_grid[cell / 2];
        per_window[k] = window_mean_es(returns, windows[k % windows.size()], modes[cell % 2], m, options, m).first;
    });
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double total = 0.0;
        int feasible = 0;
        for (std::size_t wi = 0; wi < windows.size(); ++wi) {
            const double v = per_window[cell * windows.size() + wi];
            if (!std::isnan(v)) {
                total += v;
                ++feasible;
            }
        }
        out.rows.push_back(EsSizeRow{m_grid[cell / 2], modes[cell % 2], feasible > 0 ? total / feasible : nan,
                                     static_cast<double>(feasible) / static_cast<double>(windows.size())});
    }
    return out;
}

}  // namespace netfolio
