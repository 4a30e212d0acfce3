/**
 * @file community.hpp
 * @brief Map-equation community detection, modularity and window statistics.
 *
 * The two-level map equation measures the per-step description length of a
 * random walk on the graph when node names are reused across modules:
 *
 *     L(M) = q H(Q) + sum_c p_c H(P_c)
 *
 * where q is the total module exit rate, H(Q) the entropy of module exits,
 * p_c = q_c + (visit rate of module c) and H(P_c) the entropy of the module
 * codebook (exit plus member visits). Visit rates come from the stationary
 * distribution of a walk with transition probabilities proportional to edge
 * weight, i.e. node strength over twice the total weight.
 *
 * Negative correlations cannot act as transition weights, so every weight is
 * shifted by max(0, -min weight) before computing rates. The shift is
 * reported in Partition::weight_shift.
 */

#pragma once

#include "netfolio/pmfg.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace netfolio {

struct Partition {
    std::size_t window_id = 0;
    std::vector<int> assignment;  ///< node -> community id in 0..n_communities-1
    int n_communities = 0;
    double codelength = 0.0;      ///< bits per step
    double modularity = 0.0;
    double weight_shift = 0.0;

    std::size_t n_nodes() const { return assignment.size(); }

    /// Relabels ids to 0..k-1 in order of first appearance.
    static Partition from_labels(const std::vector<int>& labels);

    /// Throws UsageError when ids are not contiguous from 0.
    void validate() const;

    std::vector<std::vector<int>> members() const;
};

/// Relabels arbitrary ids to contiguous ids in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);

/// Random-walk rates derived from a graph.
struct FlowModel {
    std::vector<double> node_flow;  ///< stationary visit rate per node
    std::vector<WeightedEdge> edges;  ///< weight = flow along the edge in one direction
    double weight_shift = 0.0;
};

/// Throws UsageError on a disconnected graph unless `allow_disconnected`.
FlowModel flow_model(const PlanarGraph& g, bool allow_disconnected = false);

/// Codelength in bits of `assignment` (any integer ids) on g.
double map_equation(const PlanarGraph& g, const std::vector<int>& assignment);
double map_equation(const FlowModel& flow, const std::vector<int>& assignment);
double map_equation(const PlanarGraph& g, const Partition& p);

struct DetectOptions {
    int trials = 20;
    std::uint64_t seed = 1;
    int max_sweeps = 200;  ///< node-move sweeps per level before giving up
};

/// Best-of-`trials` greedy map-equation minimisation: repeated node moves
/// with aggregation of modules into super-nodes, followed by single-node
/// refinement from the aggregated solution until no improvement remains.
Partition detect_communities(const PlanarGraph& g, const DetectOptions& options);
Partition detect_communities(const PlanarGraph& g, int trials, std::uint64_t seed);

/// Newman modularity on the unweighted adjacency (a_vw in {0,1}).
double modularity(const PlanarGraph& g, const std::vector<int>& assignment);
double modularity(const PlanarGraph& g, const Partition& p);

struct CountSeries {
    std::vector<std::size_t> window_ids;
    std::vector<int> counts;
    double mean = 0.0;
};

CountSeries community_count_series(const std::vector<Partition>& partitions);

/// Same-community counts for every unordered node pair across K windows.
class CooccurrenceTable {
public:
    CooccurrenceTable(std::size_t n_nodes, std::size_t n_windows);

    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_windows() const { return n_windows_; }
    int count(std::size_t i, std::size_t j) const;
    void increment(std::size_t i, std::size_t j);

    /// frequency[t] = number of pairs that share a community in exactly t windows.
    std::vector<long long> histogram() const;
    long long never_together() const { return histogram().front(); }
    long long always_together() const { return histogram().back(); }

private:
    std::size_t index(std::size_t i, std::size_t j) const;

    std::size_t n_nodes_;
    std::size_t n_windows_;
    std::vector<int> counts_;
};

/// Throws UsageError on an empty list or mismatched node sets.
CooccurrenceTable cooccurrence(const std::vector<Partition>& partitions);

/// Mutual information normalised by the arithmetic mean of the entropies.
double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b);

void write_partition_csv(std::ostream& out, const PlanarGraph& g, const Partition& p);
void write_histogram_csv(std::ostream& out, const std::vector<long long>& histogram);

}  // namespace netfolio
