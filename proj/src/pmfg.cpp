#include "netfolio/pmfg.hpp"

#include "netfolio/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <tuple>

namespace netfolio {

PlanarGraph::PlanarGraph(std::size_t n_nodes, std::vector<std::string> labels)
    : labels_(std::move(labels)), adjacency_(n_nodes), component_(n_nodes)
{
    if (labels_.empty()) {
        for (std::size_t i = 0; i < n_nodes; ++i) {
            labels_.push_back(std::to_string(i));
        }
    }
    if (labels_.size() != n_nodes) {
        throw UsageError("label count does not match node count");
    }
    std::iota(component_.begin(), component_.end(), 0);
}

bool PlanarGraph::has_edge(int u, int v) const
{
    const auto& nu = neighbors(u);
    return std::find(nu.begin(), nu.end(), v) != nu.end();
}

int PlanarGraph::find(int v) const
{
    auto k = static_cast<std::size_t>(v);
    while (component_[k] != static_cast<int>(k)) {
        component_[k] = component_[static_cast<std::size_t>(component_[k])];
        k = static_cast<std::size_t>(component_[k]);
    }
    return static_cast<int>(k);
}

bool PlanarGraph::connected(int u, int v) const
{
    return find(u) == find(v);
}

bool PlanarGraph::is_connected() const
{
    for (std::size_t v = 1; v < n_nodes(); ++v) {
        if (!connected(0, static_cast<int>(v))) {
            return false;
        }
    }
    return true;
}

std::vector<NodePair> PlanarGraph::node_pairs() const
{
    std::vector<NodePair> pairs;
    pairs.reserve(edges_.size());
    for (const auto& e : edges_) {
        pairs.emplace_back(e.u, e.v);
    }
    return pairs;
}

void PlanarGraph::add_edge(int u, int v, double weight)
{
    const auto n = static_cast<int>(n_nodes());
    if (u < 0 || v < 0 || u >= n || v >= n) {
        throw UsageError(fmt::format("edge ({}, {}) out of range for {} nodes", u, v, n));
    }
    if (u == v) {
        throw UsageError(fmt::format("self-loop at node {}", u));
    }
    if (has_edge(u, v)) {
        throw UsageError(fmt::format("edge ({}, {}) already present", u, v));
    }
    adjacency_[static_cast<std::size_t>(u)].push_back(v);
    adjacency_[static_cast<std::size_t>(v)].push_back(u);
    edges_.push_back(WeightedEdge{u, v, weight});
    component_[static_cast<std::size_t>(find(u))] = find(v);
}

bool is_planar(const PlanarGraph& g)
{
    const auto pairs = g.node_pairs();
    return is_planar(g.n_nodes(), pairs);
}

InsertResult planarity_preserving_insert(PlanarGraph& g, int u, int v, double weight)
{
    const auto n = static_cast<int>(g.n_nodes());
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
        throw UsageError(fmt::format("invalid edge ({}, {})", u, v));
    }
    if (g.has_edge(u, v)) {
        throw UsageError(fmt::format("edge ({}, {}) already present", u, v));
    }
    // Bridging two components cannot create a Kuratowski subgraph.
    if (!g.connected(u, v)) {
        g.add_edge(u, v, weight);
        return InsertResult::Accepted;
    }
    auto pairs = g.node_pairs();
    pairs.emplace_back(u, v);
    if (!is_planar(g.n_nodes(), pairs)) {
        return InsertResult::Rejected;
    }
    g.add_edge(u, v, weight);
    return InsertResult::Accepted;
}

std::vector<WeightedEdge> ordered_candidates(const Eigen::MatrixXd& weights,
                                             const std::vector<std::string>& labels)
{
    const auto n = weights.rows();
    if (weights.cols() != n || static_cast<Eigen::Index>(labels.size()) != n) {
        throw UsageError("weight matrix must be square and match the label count");
    }
    std::vector<WeightedEdge> cand;
    cand.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            cand.push_back(WeightedEdge{static_cast<int>(i), static_cast<int>(j), weights(i, j)});
        }
    }
    const auto key = [&](const WeightedEdge& e) {
        const auto& a = labels[static_cast<std::size_t>(e.u)];
        const auto& b = labels[static_cast<std::size_t>(e.v)];
        return std::minmax(a, b);
    };
    std::sort(cand.begin(), cand.end(), [&](const WeightedEdge& x, const WeightedEdge& y) {
        if (x.weight != y.weight) {
            return x.weight > y.weight;
        }
        const auto kx = key(x);
        const auto ky = key(y);
        return std::tie(kx.first, kx.second) < std::tie(ky.first, ky.second);
    });
    return cand;
}

PlanarGraph build_pmfg(const Eigen::MatrixXd& weights, const std::vector<std::string>& labels)
{
    const auto n = static_cast<std::size_t>(weights.rows());
    if (n < 3) {
        throw SizeError(fmt::format("PMFG needs at least 3 nodes (got {})", n));
    }
    if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw UsageError("weight matrix must be symmetric");
    }
    PlanarGraph g(n, labels);
    const std::size_t budget = 3 * (n - 2);
    for (const auto& e : ordered_candidates(weights, labels)) {
        if (g.n_edges() == budget) {
            break;
        }
        planarity_preserving_insert(g, e.u, e.v, e.weight);
    }
    return g;
}

PlanarGraph build_pmfg(const CorrelationMatrix& c)
{
    auto g = build_pmfg(c.values, c.tickers);
    g.window_id = c.window_id;
    g.start_date = c.start_date;
    g.end_date = c.end_date;
    return g;
}

std::vector<WeightedEdge> maximum_spanning_tree(const Eigen::MatrixXd& weights,
                                                const std::vector<std::string>& labels)
{
    const auto n = static_cast<std::size_t>(weights.rows());
    if (n < 2) {
        throw SizeError("spanning tree needs at least 2 nodes");
    }
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    std::vector<WeightedEdge> tree;
    for (const auto& e : ordered_candidates(weights, labels)) {
        const int a = find(e.u);
        const int b = find(e.v);
        if (a != b) {
            parent[static_cast<std::size_t>(a)] = b;
            tree.push_back(e);
            if (tree.size() + 1 == n) {
                break;
            }
        }
    }
    return tree;
}

std::vector<WeightedEdge> maximum_spanning_tree(const CorrelationMatrix& c)
{
    return maximum_spanning_tree(c.values, c.tickers);
}

void write_edge_list_csv(std::ostream& out, const PlanarGraph& g)
{
    out << "u,v,weight\n";
    for (const auto& e : g.edges()) {
        out << g.label(e.u) << ',' << g.label(e.v) << ',' << fmt::format("{}", e.weight) << '\n';
    }
}

nlohmann::json graph_to_json(const PlanarGraph& g)
{
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) {
        edges.push_back({{"u", e.u}, {"v", e.v}, {"weight", e.weight}});
    }
    nlohmann::json j;
    j["window"] = {{"id", g.window_id}, {"start_date", g.start_date}, {"end_date", g.end_date}};
    j["nodes"] = g.labels();
    j["edges"] = edges;
    return j;
}

PlanarGraph graph_from_json(const nlohmann::json& j)
{
    try {
        auto labels = j.at("nodes").get<std::vector<std::string>>();
        PlanarGraph g(labels.size(), labels);
        for (const auto& e : j.at("edges")) {
            g.add_edge(e.at("u").get<int>(), e.at("v").get<int>(), e.at("weight").get<double>());
        }
        const auto& w = j.at("window");
        g.window_id = w.at("id").get<std::size_t>();
        g.start_date = w.at("start_date").get<std::string>();
        g.end_date = w.at("end_date").get<std::string>();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed graph JSON: ") + e.what());
    }
}

}  // namespace netfolio
