#pragma once

// Primal network simplex for uncapacitated min-cost flow on a sparse arc
// list.  Used as the core of the exact transport solver: sources and sinks
// become nodes, candidate pairings become arcs.  The implementation keeps the
// classic spanning-tree representation (parent / thread / subtree counters)
// with an artificial root node and big-M arcs so any supply vector is
// feasible initially, and uses deterministic block pricing so identical
// inputs pivot identically.

#include <cstdint>
#include <vector>

namespace stripes {

class NetworkSimplex {
 public:
  enum class Status { optimal, infeasible, iteration_limit };

  explicit NetworkSimplex(int node_count);

  // Supplies must sum to zero (checked in solve within tolerance).
  void set_supply(int node, double supply);

  // Adds a directed arc; returns its index.  Costs must be finite and
  // non-negative.
  int add_arc(int from, int to, double cost);

  int node_count() const { return n_; }
  int arc_count() const { return static_cast<int>(cost_.size()); }

  Status solve(std::int64_t max_pivots = -1);

  double total_cost() const;
  double flow(int arc) const { return flow_[arc]; }
  // Node potential pi with c + pi[from] - pi[to] = 0 on basic arcs and >= 0
  // (up to the pivot tolerance) elsewhere at optimality.
  double potential(int node) const { return pi_[node]; }
  std::int64_t pivots() const { return pivots_; }

  // Reduced cost of an arbitrary (from, to, cost) triple against the current
  // potentials; used by column generation to price candidate arcs.
  double reduced_cost(int from, int to, double cost) const {
    return cost + pi_[from] - pi_[to];
  }

  // Pricing tolerance: arcs with reduced cost below -tol enter the basis.
  void set_tolerance(double tol) { tol_ = tol; }

 private:
  int root_ms() const { return n_; }  // artificial root index

  void build_initial_tree();
  int price_block();  // returns entering arc or -1
  void pivot(int entering);

  int n_ = 0;  // user nodes; internal count is n_ + 1 (root)
  std::vector<double> supply_;

  std::vector<std::int32_t> src_, dst_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;  // 1 = in tree, 0 = at lower bound

  std::vector<double> pi_;
  std::vector<std::int32_t> parent_, pred_arc_, thread_, rev_thread_;
  std::vector<std::int32_t> succ_num_, last_succ_;
  std::vector<std::uint8_t> pred_up_;  // pred arc oriented node -> parent

  double tol_ = 1e-11;
  double big_cost_ = 0.0;
  int block_size_ = 0;
  int next_arc_ = 0;
  std::int64_t pivots_ = 0;
};

}  // namespace stripes
