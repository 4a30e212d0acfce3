#include "netfolio/community.hpp"

#include "netfolio/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace netfolio {

double modularity(const PlanarGraph& g, const std::vector<int>& assignment)
{
    if (assignment.size() != g.n_nodes()) {
        throw UsageError("partition does not cover every node");
    }
    const auto m = static_cast<double>(g.n_edges());
    if (g.n_edges() == 0) {
        throw UsageError("modularity is undefined on a graph without edges");
    }
    const auto labels = canonical_labels(assignment);
    const auto k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()) + 1);
    std::vector<double> internal(k, 0.0);
    std::vector<double> degree_sum(k, 0.0);
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        degree_sum[static_cast<std::size_t>(labels[v])] += static_cast<double>(g.degree(static_cast<int>(v)));
    }
    for (const auto& e : g.edges()) {
        if (labels[static_cast<std::size_t>(e.u)] == labels[static_cast<std::size_t>(e.v)]) {
            internal[static_cast<std::size_t>(labels[static_cast<std::size_t>(e.u)])] += 1.0;
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double share = degree_sum[c] / (2.0 * m);
        q += internal[c] / m - share * share;
    }
    return q;
}

double modularity(const PlanarGraph& g, const Partition& p)
{
    return modularity(g, p.assignment);
}

CountSeries community_count_series(const std::vector<Partition>& partitions)
{
    if (partitions.empty()) {
        throw UsageError("community count series needs at least one partition");
    }
    CountSeries s;
    double total = 0.0;
    for (const auto& p : partitions) {
        s.window_ids.push_back(p.window_id);
        s.counts.push_back(p.n_communities);
        total += p.n_communities;
    }
    s.mean = total / static_cast<double>(partitions.size());
    return s;
}

CooccurrenceTable::CooccurrenceTable(std::size_t n_nodes, std::size_t n_windows)
    : n_nodes_(n_nodes), n_windows_(n_windows), counts_(n_nodes * (n_nodes > 0 ? n_nodes - 1 : 0) / 2, 0)
{
}

std::size_t CooccurrenceTable::index(std::size_t i, std::size_t j) const
{
    if (i == j || i >= n_nodes_ || j >= n_nodes_) {
        throw UsageError("co-occurrence index out of range");
    }
    if (i > j) {
        std::swap(i, j);
    }
    // Row-major upper triangle without the diagonal.
    return i * (2 * n_nodes_ - i - 1) / 2 + (j - i - 1);
}

int CooccurrenceTable::count(std::size_t i, std::size_t j) const
{
    return counts_[index(i, j)];
}

void CooccurrenceTable::increment(std::size_t i, std::size_t j)
{
    ++counts_[index(i, j)];
}

std::vector<long long> CooccurrenceTable::histogram() const
{
    std::vector<long long> freq(n_windows_ + 1, 0);
    for (const int c : counts_) {
        ++freq[static_cast<std::size_t>(c)];
    }
    return freq;
}

CooccurrenceTable cooccurrence(const std::vector<Partition>& partitions)
{
    if (partitions.empty()) {
        throw UsageError("co-occurrence needs at least one partition");
    }
    const auto n = partitions.front().n_nodes();
    for (const auto& p : partitions) {
        if (p.n_nodes() != n) {
            throw UsageError(fmt::format("partitions cover different node sets ({} vs {} nodes)", n, p.n_nodes()));
        }
    }
    CooccurrenceTable table(n, partitions.size());
    for (const auto& p : partitions) {
        for (const auto& group : p.members()) {
            for (std::size_t a = 0; a < group.size(); ++a) {
                for (std::size_t b = a + 1; b < group.size(); ++b) {
                    table.increment(static_cast<std::size_t>(group[a]), static_cast<std::size_t>(group[b]));
                }
            }
        }
    }
    return table;
}

double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size() || a.empty()) {
        throw UsageError("NMI needs two labelings of the same non-empty node set");
    }
    const auto n = static_cast<double>(a.size());
    std::map<int, double> pa;
    std::map<int, double> pb;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        joint[{a[i], b[i]}] += 1.0;
    }
    const auto entropy = [&](const std::map<int, double>& counts) {
        double h = 0.0;
        for (const auto& [label, c] : counts) {
            const double p = c / n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(pa);
    const double hb = entropy(pb);
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        const double pij = c / n;
        mi += pij * std::log(pij / ((pa[key.first] / n) * (pb[key.second] / n)));
    }
    if (ha + hb <= 0.0) {
        return 1.0;
    }
    return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

void write_partition_csv(std::ostream& out, const PlanarGraph& g, const Partition& p)
{
    if (p.n_nodes() != g.n_nodes()) {
        throw UsageError("partition does not match graph");
    }
    out << "ticker,community\n";
    for (std::size_t v = 0; v < p.n_nodes(); ++v) {
        out << g.label(static_cast<int>(v)) << ',' << p.assignment[v] << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const std::vector<long long>& histogram)
{
    out << "count,frequency\n";
    for (std::size_t t = 0; t < histogram.size(); ++t) {
        out << t << ',' << histogram[t] << '\n';
    }
}

}  // namespace netfolio
