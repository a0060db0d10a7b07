#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

// Network simplex for the dense transportation problem
//
//   minimize   sum_{ij} flow_ij * cost_ij
//   subject to sum_j flow_ij = supply_i,  sum_i flow_ij = demand_j,  flow >= 0,
//
// on the complete bipartite graph (LEMON-style spanning-tree simplex with a
// block-search pivot rule). Supplies and demands are real; the pivot
// tolerance is scaled by the magnitude of the potentials involved.
namespace mfg::transport {

enum class Status { success, unbalanced, max_iter, infeasible };

struct Result {
    Status status = Status::infeasible;
    double cost = 0.0;
    // Basic flows retrievable arc by arc; arc id = i * n_demand + j.
    std::vector<std::int64_t> plan_arcs;
    std::vector<double> plan_flows;
};

class TransportSimplex {
public:
    explicit TransportSimplex(std::uint64_t max_iterations = 0)
        : max_iterations_(max_iterations) {}

    // costs is row-major n_supply x n_demand. Supplies and demands must each
    // sum to the same total (within tolerance).
    Result solve(const std::vector<double>& supplies, const std::vector<double>& demands,
                 const std::vector<double>& costs) {
        n0_ = static_cast<Node>(supplies.size());
        n1_ = static_cast<Node>(demands.size());
        node_count_ = n0_ + n1_;
        arc_count_ = static_cast<Arc>(n0_) * static_cast<Arc>(n1_);

        Result result;
        const Arc all_arcs = arc_count_ + node_count_;
        const Node all_nodes = node_count_ + 1; // artificial root appended

        cost_.assign(all_arcs, 0.0);
        std::copy(costs.begin(), costs.end(), cost_.begin());
        flow_.assign(all_arcs, 0.0);
        state_.assign(all_arcs, kLower);
        source_.resize(all_arcs);
        target_.resize(all_arcs);
        for (Arc a = 0; a < arc_count_; ++a) {
            source_[a] = static_cast<Node>(a / n1_);
            target_[a] = static_cast<Node>(a % n1_) + n0_;
        }

        supply_.assign(all_nodes, 0.0);
        double total = 0.0;
        double scale = 0.0;
        for (Node i = 0; i < n0_; ++i) {
            supply_[i] = supplies[i];
            total += supplies[i];
            scale = std::max(scale, std::abs(supplies[i]));
        }
        for (Node j = 0; j < n1_; ++j) {
            supply_[n0_ + j] = -demands[j];
            total -= demands[j];
            scale = std::max(scale, std::abs(demands[j]));
        }
        if (std::abs(total) > 1e-9 * std::max(1.0, scale) * node_count_) {
            result.status = Status::unbalanced;
            return result;
        }

        potential_.assign(all_nodes, 0.0);
        parent_.assign(all_nodes, 0);
        pred_arc_.assign(all_nodes, 0);
        thread_.assign(all_nodes, 0);
        rev_thread_.assign(all_nodes, 0);
        succ_count_.assign(all_nodes, 0);
        last_succ_.assign(all_nodes, 0);
        forward_.assign(all_nodes, 0);

        // Artificial root holds the residual of the EQ constraints.
        const Node root = node_count_;
        parent_[root] = -1;
        pred_arc_[root] = -1;
        thread_[root] = 0;
        rev_thread_[0] = root;
        succ_count_[root] = node_count_ + 1;
        last_succ_[root] = root - 1;
        supply_[root] = 0.0;
        potential_[root] = 0.0;

        double max_cost = 0.0;
        for (Arc a = 0; a < arc_count_; ++a) max_cost = std::max(max_cost, std::abs(cost_[a]));
        const double art_cost = (max_cost + 1.0) * node_count_;

        for (Node u = 0; u < node_count_; ++u) {
            const Arc e = arc_count_ + u;
            parent_[u] = root;
            pred_arc_[u] = e;
            thread_[u] = u + 1;
            rev_thread_[u + 1] = u;
            succ_count_[u] = 1;
            last_succ_[u] = u;
            state_[e] = kTree;
            if (supply_[u] >= 0.0) {
                forward_[u] = 1;
                potential_[u] = 0.0;
                source_[e] = u;
                target_[e] = root;
                flow_[e] = supply_[u];
                cost_[e] = 0.0;
            } else {
                forward_[u] = 0;
                potential_[u] = art_cost;
                source_[e] = root;
                target_[e] = u;
                flow_[e] = -supply_[u];
                cost_[e] = art_cost;
            }
        }

        next_arc_ = 0;
        block_size_ = std::max<Arc>(static_cast<Arc>(std::sqrt(static_cast<double>(arc_count_))), 16);

        const std::uint64_t iter_cap =
            max_iterations_ ? max_iterations_
                            : 64ull * static_cast<std::uint64_t>(node_count_) * node_count_ + 4096;
        std::uint64_t iterations = 0;
        while (find_entering_arc()) {
            if (iterations++ >= iter_cap) {
                result.status = Status::max_iter;
                return result;
            }
            find_join_node();
            const bool change = find_leaving_arc();
            apply_flow_change(change);
            if (change) {
                update_tree();
                update_potentials();
            }
        }

        // All artificial flow must have drained away.
        for (Arc e = arc_count_; e < all_arcs; ++e) {
            if (std::abs(flow_[e]) > 1e-9 * std::max(1.0, scale)) {
                result.status = Status::infeasible;
                return result;
            }
        }

        result.status = Status::success;
        result.cost = 0.0;
        for (Arc a = 0; a < arc_count_; ++a) {
            if (flow_[a] != 0.0) {
                result.cost += flow_[a] * cost_[a];
                result.plan_arcs.push_back(a);
                result.plan_flows.push_back(flow_[a]);
            }
        }
        return result;
    }

private:
    using Node = std::int32_t;
    using Arc = std::int64_t;

    static constexpr char kLower = 1;
    static constexpr char kTree = 0;
    static constexpr char kUpper = -1;

    std::uint64_t max_iterations_;
    Node n0_ = 0, n1_ = 0, node_count_ = 0;
    Arc arc_count_ = 0;

    std::vector<double> cost_, flow_, supply_, potential_;
    std::vector<char> state_, forward_;
    std::vector<Node> source_, target_, parent_, thread_, rev_thread_, succ_count_, last_succ_;
    std::vector<Arc> pred_arc_;
    std::vector<Node> stem_scratch_;

    Arc next_arc_ = 0, block_size_ = 0, entering_ = 0;
    Node join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0;
    double delta_ = 0.0;

    double reduced_cost(Arc e) const {
        return state_[e] * (cost_[e] + potential_[source_[e]] - potential_[target_[e]]);
    }

    bool admissible(Arc e, double c) const {
        const double ref = std::max({std::abs(potential_[source_[e]]),
                                     std::abs(potential_[target_[e]]), std::abs(cost_[e]), 1.0});
        return c < -1e-13 * ref;
    }

    bool find_entering_arc() {
        double best = 0.0;
        Arc e = next_arc_;
        Arc since_check = block_size_;
        bool found = false;
        for (Arc scanned = 0; scanned < arc_count_; ++scanned, ++e) {
            if (e == arc_count_) e = 0;
            const double c = reduced_cost(e);
            if (c < best) {
                best = c;
                entering_ = e;
                found = true;
            }
            if (--since_check == 0) {
                if (found && admissible(entering_, best)) {
                    next_arc_ = e;
                    return true;
                }
                since_check = block_size_;
            }
        }
        if (found && admissible(entering_, best)) {
            next_arc_ = e;
            return true;
        }
        return false;
    }

    void find_join_node() {
        Node u = source_[entering_];
        Node v = target_[entering_];
        while (u != v) {
            if (succ_count_[u] < succ_count_[v])
                u = parent_[u];
            else
                v = parent_[v];
        }
        join_ = u;
    }

    bool find_leaving_arc() {
        Node first, second;
        if (state_[entering_] == kLower) {
            first = source_[entering_];
            second = target_[entering_];
        } else {
            first = target_[entering_];
            second = source_[entering_];
        }
        delta_ = std::numeric_limits<double>::infinity();
        char side = 0;
        for (Node u = first; u != join_; u = parent_[u]) {
            const double d = forward_[u] ? flow_[pred_arc_[u]] : std::numeric_limits<double>::infinity();
            if (d < delta_) {
                delta_ = d;
                u_out_ = u;
                side = 1;
            }
        }
        for (Node u = second; u != join_; u = parent_[u]) {
            const double d = forward_[u] ? std::numeric_limits<double>::infinity() : flow_[pred_arc_[u]];
            if (d <= delta_) {
                delta_ = d;
                u_out_ = u;
                side = 2;
            }
        }
        if (side == 1) {
            u_in_ = first;
            v_in_ = second;
        } else {
            u_in_ = second;
            v_in_ = first;
        }
        return side != 0;
    }

    void apply_flow_change(bool change) {
        if (delta_ > 0.0) {
            const double val = state_[entering_] * delta_;
            flow_[entering_] += val;
            for (Node u = source_[entering_]; u != join_; u = parent_[u])
                flow_[pred_arc_[u]] += forward_[u] ? -val : val;
            for (Node u = target_[entering_]; u != join_; u = parent_[u])
                flow_[pred_arc_[u]] += forward_[u] ? val : -val;
        }
        if (change) {
            state_[entering_] = kTree;
            state_[pred_arc_[u_out_]] = (flow_[pred_arc_[u_out_]] == 0.0) ? kLower : kUpper;
        } else {
            state_[entering_] = -state_[entering_];
        }
    }

    void update_tree() {
        const Node old_rev_thread = rev_thread_[u_out_];
        const Node old_succ_count = succ_count_[u_out_];
        const Node old_last_succ = last_succ_[u_out_];
        const Node v_out = parent_[u_out_];

        Node u = last_succ_[u_in_];
        Node right = thread_[u];
        Node last;
        if (old_rev_thread == v_in_)
            last = thread_[last_succ_[u_out_]];
        else
            last = thread_[v_in_];

        // Re-hang the stem between u_in and u_out.
        thread_[v_in_] = u_in_;
        stem_scratch_.clear();
        stem_scratch_.push_back(v_in_);
        Node stem = u_in_;
        Node par_stem = v_in_;
        while (stem != u_out_) {
            const Node new_stem = parent_[stem];
            thread_[u] = new_stem;
            stem_scratch_.push_back(u);

            const Node w = rev_thread_[stem];
            thread_[w] = right;
            rev_thread_[right] = w;

            parent_[stem] = par_stem;
            par_stem = stem;
            stem = new_stem;

            u = (last_succ_[stem] == last_succ_[par_stem]) ? rev_thread_[par_stem] : last_succ_[stem];
            right = thread_[u];
        }
        parent_[u_out_] = par_stem;
        thread_[u] = last;
        rev_thread_[last] = u;
        last_succ_[u_out_] = u;

        if (old_rev_thread != v_in_) {
            thread_[old_rev_thread] = right;
            rev_thread_[right] = old_rev_thread;
        }
        for (Node s : stem_scratch_) rev_thread_[thread_[s]] = s;

        // Pred arcs, orientation and subtree sizes along the reversed stem.
        Node tmp_count = 0;
        const Node tmp_last = last_succ_[u_out_];
        u = u_out_;
        while (u != u_in_) {
            const Node w = parent_[u];
            pred_arc_[u] = pred_arc_[w];
            forward_[u] = !forward_[w];
            tmp_count += succ_count_[u] - succ_count_[w];
            succ_count_[u] = tmp_count;
            last_succ_[w] = tmp_last;
            u = w;
        }
        pred_arc_[u_in_] = entering_;
        forward_[u_in_] = (u_in_ == source_[entering_]);
        succ_count_[u_in_] = old_succ_count;

        Node up_limit_in = -1, up_limit_out = -1;
        if (last_succ_[join_] == v_in_)
            up_limit_out = join_;
        else
            up_limit_in = join_;

        for (u = v_in_; u != up_limit_in && last_succ_[u] == v_in_; u = parent_[u])
            last_succ_[u] = last_succ_[u_out_];
        if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
            for (u = v_out; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
                last_succ_[u] = old_rev_thread;
        } else {
            for (u = v_out; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
                last_succ_[u] = last_succ_[u_out_];
        }
        for (u = v_in_; u != join_; u = parent_[u]) succ_count_[u] += old_succ_count;
        for (u = v_out; u != join_; u = parent_[u]) succ_count_[u] -= old_succ_count;
    }

    void update_potentials() {
        const double sigma = forward_[u_in_]
                                 ? potential_[v_in_] - potential_[u_in_] - cost_[pred_arc_[u_in_]]
                                 : potential_[v_in_] - potential_[u_in_] + cost_[pred_arc_[u_in_]];
        const Node end = thread_[last_succ_[u_in_]];
        for (Node u = u_in_; u != end; u = thread_[u]) potential_[u] += sigma;
    }
};

} // namespace mfg::transport
