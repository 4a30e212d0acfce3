#include "netfolio/planarity.hpp"

#include "netfolio/error.hpp"

#include <algorithm>
#include <set>
#include <vector>

namespace netfolio {

namespace {

constexpr int kNone = -1;

struct Interval {
    int low = kNone;
    int high = kNone;

    bool empty() const { return low == kNone && high == kNone; }
};

struct ConflictPair {
    Interval left;
    Interval right;
    long serial = 0;  // identity; re-pushed pairs keep their serial

    void swap() { std::swap(left, right); }
};

class LrPlanarity {
public:
    LrPlanarity(std::size_t n, std::span<const NodePair> edges) : n_(static_cast<int>(n))
    {
        std::set<NodePair> seen;
        for (const auto& [a, b] : edges) {
            if (a < 0 || b < 0 || a >= n_ || b >= n_) {
                throw UsageError("edge endpoint out of range");
            }
            if (a == b) {
                continue;
            }
            if (seen.insert({std::min(a, b), std::max(a, b)}).second) {
                end_a_.push_back(a);
                end_b_.push_back(b);
            }
        }
        const auto m = end_a_.size();
        adj_.assign(n, {});
        for (std::size_t e = 0; e < m; ++e) {
            adj_[static_cast<std::size_t>(end_a_[e])].push_back(static_cast<int>(e));
            adj_[static_cast<std::size_t>(end_b_[e])].push_back(static_cast<int>(e));
        }
        height_.assign(n, kNone);
        parent_edge_.assign(n, kNone);
        out_.assign(n, {});
        oriented_.assign(m, false);
        target_.assign(m, kNone);
        lowpt_.assign(m, 0);
        lowpt2_.assign(m, 0);
        nesting_.assign(m, 0);
        ref_.assign(m, kNone);
        lowpt_edge_.assign(m, kNone);
        stack_bottom_.assign(m, 0);
    }

    bool run()
    {
        const auto m = end_a_.size();
        if (n_ > 2 && m > 3 * static_cast<std::size_t>(n_) - 6) {
            return false;
        }
        std::vector<int> roots;
        for (int v = 0; v < n_; ++v) {
            if (height_[static_cast<std::size_t>(v)] == kNone) {
                height_[static_cast<std::size_t>(v)] = 0;
                roots.push_back(v);
                orient(v);
            }
        }
        for (auto& edges : out_) {
            std::stable_sort(edges.begin(), edges.end(), [&](int x, int y) {
                return nesting_[static_cast<std::size_t>(x)] < nesting_[static_cast<std::size_t>(y)];
            });
        }
        for (const int r : roots) {
            if (!test(r)) {
                return false;
            }
        }
        return true;
    }

private:
    int other(int e, int v) const
    {
        const auto k = static_cast<std::size_t>(e);
        return end_a_[k] == v ? end_b_[k] : end_a_[k];
    }

    int& lowpt(int e) { return lowpt_[static_cast<std::size_t>(e)]; }
    int& lowpt2(int e) { return lowpt2_[static_cast<std::size_t>(e)]; }
    int& ref(int e) { return ref_[static_cast<std::size_t>(e)]; }
    int height(int v) const { return height_[static_cast<std::size_t>(v)]; }

    void orient(int v)
    {
        const int e = parent_edge_[static_cast<std::size_t>(v)];
        for (const int id : adj_[static_cast<std::size_t>(v)]) {
            if (oriented_[static_cast<std::size_t>(id)]) {
                continue;
            }
            oriented_[static_cast<std::size_t>(id)] = true;
            const int w = other(id, v);
            target_[static_cast<std::size_t>(id)] = w;
            out_[static_cast<std::size_t>(v)].push_back(id);
            lowpt(id) = height(v);
            lowpt2(id) = height(v);
            if (height(w) == kNone) {
                parent_edge_[static_cast<std::size_t>(w)] = id;
                height_[static_cast<std::size_t>(w)] = height(v) + 1;
                orient(w);
            } else {
                lowpt(id) = height(w);
            }
            nesting_[static_cast<std::size_t>(id)] = 2 * lowpt(id) + (lowpt2(id) < height(v) ? 1 : 0);
            if (e != kNone) {
                if (lowpt(id) < lowpt(e)) {
                    lowpt2(e) = std::min(lowpt(e), lowpt2(id));
                    lowpt(e) = lowpt(id);
                } else if (lowpt(id) > lowpt(e)) {
                    lowpt2(e) = std::min(lowpt2(e), lowpt(id));
                } else {
                    lowpt2(e) = std::min(lowpt2(e), lowpt2(id));
                }
            }
        }
    }

    long top_serial() const { return stack_.empty() ? 0 : stack_.back().serial; }

    void push_new(ConflictPair p)
    {
        p.serial = ++serial_;
        stack_.push_back(p);
    }

    ConflictPair pop()
    {
        auto p = stack_.back();
        stack_.pop_back();
        return p;
    }

    bool conflicting(const Interval& i, int b) { return !i.empty() && lowpt(i.high) > lowpt(b); }

    int lowest(const ConflictPair& p)
    {
        if (p.left.empty()) {
            return lowpt(p.right.low);
        }
        if (p.right.empty()) {
            return lowpt(p.left.low);
        }
        return std::min(lowpt(p.left.low), lowpt(p.right.low));
    }

    bool test(int v)
    {
        const int e = parent_edge_[static_cast<std::size_t>(v)];
        const auto& edges = out_[static_cast<std::size_t>(v)];
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const int ei = edges[k];
            const int w = target_[static_cast<std::size_t>(ei)];
            stack_bottom_[static_cast<std::size_t>(ei)] = top_serial();
            if (ei == parent_edge_[static_cast<std::size_t>(w)]) {
                if (!test(w)) {
                    return false;
                }
            } else {
                lowpt_edge_[static_cast<std::size_t>(ei)] = ei;
                push_new(ConflictPair{Interval{}, Interval{ei, ei}});
            }
            if (lowpt(ei) < height(v)) {
                if (k == 0) {
                    lowpt_edge_[static_cast<std::size_t>(e)] = lowpt_edge_[static_cast<std::size_t>(ei)];
                } else if (!add_constraints(ei, e)) {
                    return false;
                }
            }
        }
        if (e != kNone) {
            remove_back_edges(e);
        }
        return true;
    }

    bool add_constraints(int ei, int e)
    {
        ConflictPair p;
        do {
            auto q = pop();
            if (!q.left.empty()) {
                q.swap();
            }
            if (!q.left.empty()) {
                return false;
            }
            if (lowpt(q.right.low) > lowpt(e)) {
                if (p.right.empty()) {
                    p.right = q.right;
                } else {
                    ref(p.right.low) = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                ref(q.right.low) = lowpt_edge_[static_cast<std::size_t>(e)];
            }
        } while (top_serial() != stack_bottom_[static_cast<std::size_t>(ei)]);

        while (!stack_.empty()
               && (conflicting(stack_.back().left, ei) || conflicting(stack_.back().right, ei))) {
            auto q = pop();
            if (conflicting(q.right, ei)) {
                q.swap();
            }
            if (conflicting(q.right, ei)) {
                return false;
            }
            if (p.right.low != kNone) {
                ref(p.right.low) = q.right.high;
            }
            if (q.right.low != kNone) {
                p.right.low = q.right.low;
            }
            if (p.left.empty()) {
                p.left = q.left;
            } else {
                ref(p.left.low) = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if (!(p.left.empty() && p.right.empty())) {
            push_new(p);
        }
        return true;
    }

    void remove_back_edges(int e)
    {
        const int u = other(e, target_[static_cast<std::size_t>(e)]);
        while (!stack_.empty() && lowest(stack_.back()) == height(u)) {
            pop();
        }
        if (!stack_.empty()) {
            auto p = pop();
            while (p.left.high != kNone && target_[static_cast<std::size_t>(p.left.high)] == u) {
                p.left.high = ref(p.left.high);
            }
            if (p.left.high == kNone && p.left.low != kNone) {
                ref(p.left.low) = p.right.low;
                p.left.low = kNone;
            }
            while (p.right.high != kNone && target_[static_cast<std::size_t>(p.right.high)] == u) {
                p.right.high = ref(p.right.high);
            }
            if (p.right.high == kNone && p.right.low != kNone) {
                ref(p.right.low) = p.left.low;
                p.right.low = kNone;
            }
            stack_.push_back(p);
        }
        if (lowpt(e) < height(u)) {
            const int hl = stack_.back().left.high;
            const int hr = stack_.back().right.high;
            if (hl != kNone && (hr == kNone || lowpt(hl) > lowpt(hr))) {
                ref(e) = hl;
            } else {
                ref(e) = hr;
            }
        }
    }

    int n_;
    std::vector<int> end_a_;
    std::vector<int> end_b_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> height_;
    std::vector<int> parent_edge_;
    std::vector<std::vector<int>> out_;
    std::vector<bool> oriented_;
    std::vector<int> target_;
    std::vector<int> lowpt_;
    std::vector<int> lowpt2_;
    std::vector<int> nesting_;
    std::vector<int> ref_;
    std::vector<int> lowpt_edge_;
    std::vector<long> stack_bottom_;
    std::vector<ConflictPair> stack_;
    long serial_ = 0;
};

}  // namespace

bool is_planar(std::size_t n_nodes, std::span<const NodePair> edges)
{
    LrPlanarity lr(n_nodes, edges);
    return lr.run();
}

}  // namespace netfolio
