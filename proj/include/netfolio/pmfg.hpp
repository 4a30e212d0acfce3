/**
 * @file pmfg.hpp
 * @brief Planar Maximally Filtered Graph construction.
 *
 * Candidate edges are taken in descending correlation order and kept only
 * when the graph stays planar. Construction ends at 3(N-2) edges, the size of
 * a maximal planar graph. Equal weights are ordered by the pair
 * (min label, max label) compared lexicographically.
 */

#pragma once

#include "netfolio/planarity.hpp"
#include "netfolio/returns_correlation.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace netfolio {

struct WeightedEdge {
    int u = 0;
    int v = 0;
    double weight = 0.0;

    friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Simple undirected weighted graph whose edges are only ever added.
class PlanarGraph {
public:
    PlanarGraph() = default;
    explicit PlanarGraph(std::size_t n_nodes, std::vector<std::string> labels = {});

    std::size_t n_nodes() const { return adjacency_.size(); }
    std::size_t n_edges() const { return edges_.size(); }
    const std::vector<WeightedEdge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adjacency_.at(static_cast<std::size_t>(v)); }
    std::size_t degree(int v) const { return neighbors(v).size(); }
    bool has_edge(int u, int v) const;
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int v) const { return labels_.at(static_cast<std::size_t>(v)); }

    /// True when u and v are already joined by some path.
    bool connected(int u, int v) const;
    bool is_connected() const;

    std::vector<NodePair> node_pairs() const;

    /// Appends an edge without any planarity check. Throws UsageError on loops,
    /// duplicates or out-of-range endpoints.
    void add_edge(int u, int v, double weight);

    std::size_t window_id = 0;
    std::string start_date;
    std::string end_date;

private:
    int find(int v) const;

    std::vector<std::string> labels_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<WeightedEdge> edges_;
    mutable std::vector<int> component_;
};

enum class InsertResult { Accepted, Rejected };

/// Adds (u, v) iff the graph remains planar; leaves it untouched otherwise.
InsertResult planarity_preserving_insert(PlanarGraph& g, int u, int v, double weight);

/// Every node pair i < j ordered by descending weight, ties by label pair.
std::vector<WeightedEdge> ordered_candidates(const Eigen::MatrixXd& weights,
                                             const std::vector<std::string>& labels);

PlanarGraph build_pmfg(const Eigen::MatrixXd& weights, const std::vector<std::string>& labels);
PlanarGraph build_pmfg(const CorrelationMatrix& c);

/// Kruskal on the same ordering as build_pmfg.
std::vector<WeightedEdge> maximum_spanning_tree(const Eigen::MatrixXd& weights,
                                                const std::vector<std::string>& labels);
std::vector<WeightedEdge> maximum_spanning_tree(const CorrelationMatrix& c);

bool is_planar(const PlanarGraph& g);

void write_edge_list_csv(std::ostream& out, const PlanarGraph& g);
nlohmann::json graph_to_json(const PlanarGraph& g);
PlanarGraph graph_from_json(const nlohmann::json& j);

}  // namespace netfolio
