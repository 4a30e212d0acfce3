#include "netfolio/community.hpp"

#include "netfolio/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace netfolio {

namespace {

double plogp(double p)
{
    return p > 0.0 ? p * std::log2(p) : 0.0;
}

constexpr double kMinImprovement = 1e-10;

/// One level of the search: nodes are original vertices or merged modules.
struct Level {
    std::vector<double> flow;
    std::vector<double> exit;  ///< flow leaving the node towards other nodes
    std::vector<std::vector<std::pair<int, double>>> adj;

    std::size_t size() const { return flow.size(); }
};

Level base_level(const FlowModel& model)
{
    Level level;
    const auto n = model.node_flow.size();
    level.flow = model.node_flow;
    level.exit.assign(n, 0.0);
    level.adj.assign(n, {});
    for (const auto& e : model.edges) {
        level.adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.weight);
        level.adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.weight);
        level.exit[static_cast<std::size_t>(e.u)] += e.weight;
        level.exit[static_cast<std::size_t>(e.v)] += e.weight;
    }
    return level;
}

/// Module bookkeeping for greedy node moves on one level.
class ModuleState {
public:
    ModuleState(const Level& level, const std::vector<int>& initial)
        : level_(level), module_(initial)
    {
        const auto n = level.size();
        exit_.assign(n, 0.0);
        flow_.assign(n, 0.0);
        members_.assign(n, 0);
        for (std::size_t v = 0; v < n; ++v) {
            const auto m = static_cast<std::size_t>(module_[v]);
            flow_[m] += level.flow[v];
            ++members_[m];
            for (const auto& [w, f] : level.adj[v]) {
                if (module_[static_cast<std::size_t>(w)] != module_[v]) {
                    exit_[m] += f;
                }
            }
        }
        for (std::size_t m = n; m-- > 0;) {
            if (members_[m] == 0) {
                free_.push_back(static_cast<int>(m));
            }
        }
        resum();
        scratch_.assign(n, 0.0);
        mark_.assign(n, 0);
    }

    void resum() { sum_exit_ = std::accumulate(exit_.begin(), exit_.end(), 0.0); }

    /// Greedy sweeps in random order. Returns the number of moves made.
    int sweep(std::mt19937_64& rng, int max_sweeps)
    {
        const auto n = level_.size();
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        int total_moves = 0;
        for (int s = 0; s < max_sweeps; ++s) {
            std::shuffle(order.begin(), order.end(), rng);
            int moves = 0;
            for (const int v : order) {
                if (try_move(v)) {
                    ++moves;
                }
            }
            resum();
            total_moves += moves;
            if (moves == 0) {
                break;
            }
        }
        return total_moves;
    }

    const std::vector<int>& modules() const { return module_; }

private:
    double delta(int v, int a, int b, double out_a, double out_b) const
    {
        const auto vv = static_cast<std::size_t>(v);
        const double e = level_.exit[vv];
        const double p = level_.flow[vv];
        const double qa = exit_[static_cast<std::size_t>(a)];
        const double qb = exit_[static_cast<std::size_t>(b)];
        const double pa = flow_[static_cast<std::size_t>(a)];
        const double pb = flow_[static_cast<std::size_t>(b)];
        const double qa2 = std::max(0.0, qa - e + 2.0 * out_a);
        const double qb2 = std::max(0.0, qb + e - 2.0 * out_b);
        const double pa2 = std::max(0.0, pa - p);
        const double pb2 = pb + p;
        const double sum2 = std::max(0.0, sum_exit_ - qa - qb + qa2 + qb2);
        return plogp(sum2) - plogp(sum_exit_) - 2.0 * (plogp(qa2) + plogp(qb2) - plogp(qa) - plogp(qb))
               + plogp(qa2 + pa2) + plogp(qb2 + pb2) - plogp(qa + pa) - plogp(qb + pb);
    }

    bool try_move(int v)
    {
        const auto vv = static_cast<std::size_t>(v);
        const int a = module_[vv];
        touched_.clear();
        for (const auto& [w, f] : level_.adj[vv]) {
            const int m = module_[static_cast<std::size_t>(w)];
            if (!mark_[static_cast<std::size_t>(m)]) {
                mark_[static_cast<std::size_t>(m)] = 1;
                touched_.push_back(m);
            }
            scratch_[static_cast<std::size_t>(m)] += f;
        }
        const double out_a = scratch_[static_cast<std::size_t>(a)];

        int best = a;
        double best_delta = -kMinImprovement;
        // Deterministic candidate order: ascending module id.
        std::sort(touched_.begin(), touched_.end());
        for (const int b : touched_) {
            if (b == a) {
                continue;
            }
            const double d = delta(v, a, b, out_a, scratch_[static_cast<std::size_t>(b)]);
            if (d < best_delta) {
                best_delta = d;
                best = b;
            }
        }
        if (members_[static_cast<std::size_t>(a)] > 1 && !free_.empty()) {
            const int b = free_.back();
            const double d = delta(v, a, b, out_a, 0.0);
            if (d < best_delta) {
                best_delta = d;
                best = b;
            }
        }
        const double out_b = best == a ? 0.0 : scratch_[static_cast<std::size_t>(best)];
        for (const int m : touched_) {
            scratch_[static_cast<std::size_t>(m)] = 0.0;
            mark_[static_cast<std::size_t>(m)] = 0;
        }
        if (best == a) {
            return false;
        }
        apply(v, a, best, out_a, out_b);
        return true;
    }

    void apply(int v, int a, int b, double out_a, double out_b)
    {
        const auto vv = static_cast<std::size_t>(v);
        const auto ia = static_cast<std::size_t>(a);
        const auto ib = static_cast<std::size_t>(b);
        const double e = level_.exit[vv];
        const double p = level_.flow[vv];
        if (!free_.empty() && free_.back() == b) {
            free_.pop_back();
        }
        const double qa2 = std::max(0.0, exit_[ia] - e + 2.0 * out_a);
        const double qb2 = std::max(0.0, exit_[ib] + e - 2.0 * out_b);
        sum_exit_ += (qa2 - exit_[ia]) + (qb2 - exit_[ib]);
        exit_[ia] = qa2;
        exit_[ib] = qb2;
        flow_[ia] = std::max(0.0, flow_[ia] - p);
        flow_[ib] += p;
        --members_[ia];
        ++members_[ib];
        if (members_[ia] == 0) {
            exit_[ia] = 0.0;
            flow_[ia] = 0.0;
            free_.push_back(a);
        }
        module_[vv] = b;
    }

    const Level& level_;
    std::vector<int> module_;
    std::vector<double> exit_;
    std::vector<double> flow_;
    std::vector<int> members_;
    std::vector<int> free_;
    std::vector<double> scratch_;
    std::vector<char> mark_;
    std::vector<int> touched_;
    double sum_exit_ = 0.0;
};

Level aggregate(const Level& level, const std::vector<int>& modules, std::size_t n_modules)
{
    Level next;
    next.flow.assign(n_modules, 0.0);
    next.exit.assign(n_modules, 0.0);
    next.adj.assign(n_modules, {});
    std::vector<std::map<int, double>> links(n_modules);
    for (std::size_t v = 0; v < level.size(); ++v) {
        const auto a = static_cast<std::size_t>(modules[v]);
        next.flow[a] += level.flow[v];
        for (const auto& [w, f] : level.adj[v]) {
            const int b = modules[static_cast<std::size_t>(w)];
            if (b != static_cast<int>(a)) {
                links[a][b] += f;
            }
        }
    }
    for (std::size_t a = 0; a < n_modules; ++a) {
        for (const auto& [b, f] : links[a]) {
            next.adj[a].emplace_back(b, f);
            next.exit[a] += f;
        }
    }
    return next;
}

/// Multi-level greedy search starting from `initial` (one id per original node).
std::vector<int> core_search(const Level& base, std::vector<int> initial, std::mt19937_64& rng,
                             int max_sweeps)
{
    std::vector<int> node_module = canonical_labels(initial);
    Level level = base;
    std::vector<int> level_modules = node_module;
    bool first = true;
    while (true) {
        ModuleState state(level, level_modules);
        const int moves = state.sweep(rng, max_sweeps);
        const auto compact = canonical_labels(state.modules());
        const auto n_modules = static_cast<std::size_t>(
            compact.empty() ? 0 : *std::max_element(compact.begin(), compact.end()) + 1);
        if (first) {
            node_module = compact;
        } else {
            for (auto& m : node_module) {
                m = compact[static_cast<std::size_t>(m)];
            }
        }
        if ((moves == 0 && !first) || n_modules == level.size() || n_modules <= 1) {
            break;
        }
        level = aggregate(level, compact, n_modules);
        level_modules.resize(level.size());
        std::iota(level_modules.begin(), level_modules.end(), 0);
        first = false;
    }
    return node_module;
}

}  // namespace

std::vector<int> canonical_labels(const std::vector<int>& labels)
{
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (const int l : labels) {
        const auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

Partition Partition::from_labels(const std::vector<int>& labels)
{
    Partition p;
    p.assignment = canonical_labels(labels);
    p.n_communities = p.assignment.empty()
                          ? 0
                          : *std::max_element(p.assignment.begin(), p.assignment.end()) + 1;
    return p;
}

void Partition::validate() const
{
    std::vector<bool> seen(assignment.size(), false);
    int max_id = -1;
    for (const int c : assignment) {
        if (c < 0 || c >= static_cast<int>(assignment.size())) {
            throw UsageError("community id out of range");
        }
        seen[static_cast<std::size_t>(c)] = true;
        max_id = std::max(max_id, c);
    }
    for (int c = 0; c <= max_id; ++c) {
        if (!seen[static_cast<std::size_t>(c)]) {
            throw UsageError("community ids are not contiguous");
        }
    }
    if (max_id + 1 != n_communities) {
        throw UsageError("n_communities does not match the assignment");
    }
}

std::vector<std::vector<int>> Partition::members() const
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_communities));
    for (std::size_t v = 0; v < assignment.size(); ++v) {
        out[static_cast<std::size_t>(assignment[v])].push_back(static_cast<int>(v));
    }
    return out;
}

FlowModel flow_model(const PlanarGraph& g, bool allow_disconnected)
{
    if (!allow_disconnected && g.n_nodes() > 1 && !g.is_connected()) {
        throw UsageError("map equation requires a connected graph");
    }
    FlowModel model;
    const auto n = g.n_nodes();
    model.node_flow.assign(n, 0.0);
    if (n == 0) {
        return model;
    }
    double min_weight = std::numeric_limits<double>::infinity();
    for (const auto& e : g.edges()) {
        min_weight = std::min(min_weight, e.weight);
    }
    if (g.n_edges() > 0) {
        model.weight_shift = std::max(0.0, -min_weight);
    }
    double total = 0.0;
    for (const auto& e : g.edges()) {
        total += e.weight + model.weight_shift;
    }
    const bool unit = !(total > 0.0);
    if (unit) {
        total = static_cast<double>(g.n_edges());
    }
    if (total > 0.0) {
        for (const auto& e : g.edges()) {
            const double w = unit ? 1.0 : e.weight + model.weight_shift;
            const double f = w / (2.0 * total);
            model.edges.push_back(WeightedEdge{e.u, e.v, f});
            model.node_flow[static_cast<std::size_t>(e.u)] += f;
            model.node_flow[static_cast<std::size_t>(e.v)] += f;
        }
    } else {
        model.node_flow[0] = 1.0;  // single isolated node
    }
    return model;
}

double map_equation(const FlowModel& flow, const std::vector<int>& assignment)
{
    const auto n = flow.node_flow.size();
    if (assignment.size() != n) {
        throw UsageError("partition does not cover every node");
    }
    const auto labels = canonical_labels(assignment);
    const auto k = static_cast<std::size_t>(labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1);
    std::vector<double> exit(k, 0.0);
    std::vector<double> visit(k, 0.0);
    double node_entropy = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        visit[static_cast<std::size_t>(labels[v])] += flow.node_flow[v];
        node_entropy += plogp(flow.node_flow[v]);
    }
    for (const auto& e : flow.edges) {
        const int a = labels[static_cast<std::size_t>(e.u)];
        const int b = labels[static_cast<std::size_t>(e.v)];
        if (a != b) {
            exit[static_cast<std::size_t>(a)] += e.weight;
            exit[static_cast<std::size_t>(b)] += e.weight;
        }
    }
    double total_exit = 0.0;
    double exit_terms = 0.0;
    double module_terms = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        total_exit += exit[c];
        exit_terms += plogp(exit[c]);
        module_terms += plogp(exit[c] + visit[c]);
    }
    return plogp(total_exit) - 2.0 * exit_terms - node_entropy + module_terms;
}

double map_equation(const PlanarGraph& g, const std::vector<int>& assignment)
{
    return map_equation(flow_model(g), assignment);
}

double map_equation(const PlanarGraph& g, const Partition& p)
{
    return map_equation(g, p.assignment);
}

Partition detect_communities(const PlanarGraph& g, const DetectOptions& options)
{
    if (g.n_nodes() == 0) {
        throw UsageError("cannot detect communities on an empty graph");
    }
    if (options.trials < 1) {
        throw UsageError("trials must be >= 1");
    }
    const auto model = flow_model(g);
    const Level base = base_level(model);
    const auto n = g.n_nodes();

    std::vector<int> best(n, 0);
    double best_length = map_equation(model, best);

    for (int trial = 0; trial < options.trials; ++trial) {
        std::seed_seq seq{options.seed, static_cast<std::uint64_t>(trial)};
        std::mt19937_64 rng(seq);
        std::vector<int> singletons(n);
        std::iota(singletons.begin(), singletons.end(), 0);
        auto current = core_search(base, singletons, rng, options.max_sweeps);
        double length = map_equation(model, current);
        // Refinement: release single nodes from the aggregated solution.
        while (true) {
            auto refined = core_search(base, current, rng, options.max_sweeps);
            const double refined_length = map_equation(model, refined);
            if (refined_length < length - kMinImprovement) {
                current = std::move(refined);
                length = refined_length;
            } else {
                break;
            }
        }
        if (length < best_length - kMinImprovement) {
            best = current;
            best_length = length;
        }
    }

    auto p = Partition::from_labels(best);
    p.window_id = g.window_id;
    p.codelength = best_length;
    p.weight_shift = model.weight_shift;
    p.modularity = g.n_edges() > 0 ? modularity(g, p.assignment) : 0.0;
    return p;
}

Partition detect_communities(const PlanarGraph& g, int trials, std::uint64_t seed)
{
    DetectOptions options;
    options.trials = trials;
    options.seed = seed;
    return detect_communities(g, options);
}

}  // namespace netfolio
