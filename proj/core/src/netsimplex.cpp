#include "stripes/netsimplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stripes/common.hpp"

namespace stripes {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Arc indices 0..n-1 are reserved for one artificial root arc per user node,
// so arcs added between solves (column generation) extend the tail without
// disturbing the basis bookkeeping.
NetworkSimplex::NetworkSimplex(int node_count) : n_(node_count) {
  if (node_count <= 0) throw Error("network needs at least one node");
  supply_.assign(n_, 0.0);
  const int art = n_;
  src_.assign(art, 0);
  dst_.assign(art, 0);
  cost_.assign(art, 0.0);
  flow_.assign(art, 0.0);
  state_.assign(art, 1);  // placeholder until the initial tree is built
}

void NetworkSimplex::set_supply(int node, double supply) {
  if (node < 0 || node >= n_) throw Error("supply node out of range");
  if (!pi_.empty()) throw Error("supplies are fixed once solve has run");
  supply_[node] = supply;
}

int NetworkSimplex::add_arc(int from, int to, double cost) {
  if (from < 0 || from >= n_ || to < 0 || to >= n_ || from == to)
    throw Error("arc endpoints out of range");
  if (!(cost >= 0.0) || !std::isfinite(cost))
    throw Error("arc cost must be finite and non-negative");
  src_.push_back(from);
  dst_.push_back(to);
  cost_.push_back(cost);
  flow_.push_back(0.0);
  state_.push_back(0);  // enters at its lower bound
  return static_cast<int>(cost_.size()) - 1;
}

void NetworkSimplex::build_initial_tree() {
  const int root = root_ms();
  const int total = n_ + 1;
  pi_.assign(total, 0.0);
  parent_.assign(total, -1);
  pred_arc_.assign(total, -1);
  thread_.assign(total, 0);
  rev_thread_.assign(total, 0);
  succ_num_.assign(total, 1);
  last_succ_.assign(total, 0);
  pred_up_.assign(total, 0);

  double max_cost = 0.0;
  for (std::size_t a = n_; a < cost_.size(); ++a) max_cost = std::max(max_cost, cost_[a]);
  big_cost_ = (max_cost + 1.0) * total;

  parent_[root] = -1;
  pred_arc_[root] = -1;
  thread_[root] = 0;
  rev_thread_[0] = root;
  succ_num_[root] = total;
  last_succ_[root] = root - 1;
  pi_[root] = 0.0;

  for (int u = 0; u < n_; ++u) {
    parent_[u] = root;
    pred_arc_[u] = u;  // reserved artificial arc
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    state_[u] = 1;
    if (supply_[u] >= 0.0) {
      pred_up_[u] = 1;  // arc runs u -> root
      pi_[u] = 0.0;
      src_[u] = u;
      dst_[u] = root;
      flow_[u] = supply_[u];
      cost_[u] = 0.0;
    } else {
      pred_up_[u] = 0;
      pi_[u] = big_cost_;
      src_[u] = root;
      dst_[u] = u;
      flow_[u] = -supply_[u];
      cost_[u] = big_cost_;
    }
  }

  const int m_real = arc_count() - n_;
  block_size_ = std::max(
      10, static_cast<int>(std::lround(std::sqrt(static_cast<double>(m_real)))));
  next_arc_ = n_;
  pivots_ = 0;
}

int NetworkSimplex::price_block() {
  const int m = arc_count();
  double best = 0.0;
  int in_arc = -1;
  int e = next_arc_;
  int countdown = block_size_;
  auto accept = [&]() {
    if (in_arc < 0) return false;
    const double scale = std::max(
        {1.0, std::fabs(pi_[src_[in_arc]]), std::fabs(pi_[dst_[in_arc]]),
         std::fabs(cost_[in_arc])});
    return best < -tol_ * scale;
  };
  for (int seen = n_; seen < m; ++seen, ++e) {
    if (e == m) e = n_;
    if (state_[e] == 0) {
      const double rc = cost_[e] + pi_[src_[e]] - pi_[dst_[e]];
      if (rc < best) {
        best = rc;
        in_arc = e;
      }
    }
    if (--countdown == 0) {
      if (accept()) {
        next_arc_ = e + 1 == m ? n_ : e + 1;
        return in_arc;
      }
      countdown = block_size_;
    }
  }
  if (accept()) {
    next_arc_ = e == m ? n_ : e;
    return in_arc;
  }
  return -1;
}

void NetworkSimplex::pivot(int in_arc) {
  ++pivots_;

  // Join node: nearest common ancestor of the entering arc's endpoints.
  int u = src_[in_arc], v = dst_[in_arc];
  while (u != v) {
    if (succ_num_[u] < succ_num_[v])
      u = parent_[u];
    else
      v = parent_[v];
  }
  const int join = u;

  // Leaving arc: smallest flow against the cycle direction.  The entering arc
  // sits at its lower bound, so the cycle pushes from src toward dst.
  const int first = src_[in_arc], second = dst_[in_arc];
  double delta = kInf;
  int u_out = -1;
  int result = 0;
  for (u = first; u != join; u = parent_[u]) {
    const double d = pred_up_[u] ? flow_[pred_arc_[u]] : kInf;
    if (d < delta) {
      delta = d;
      u_out = u;
      result = 1;
    }
  }
  for (u = second; u != join; u = parent_[u]) {
    const double d = pred_up_[u] ? kInf : flow_[pred_arc_[u]];
    if (d <= delta) {
      delta = d;
      u_out = u;
      result = 2;
    }
  }
  if (result == 0)
    throw Error("transport network is unbounded; arc costs must be non-negative");
  const int u_in = result == 1 ? first : second;
  const int v_in = result == 1 ? second : first;

  // Push delta around the cycle.
  if (delta > 0.0) {
    flow_[in_arc] += delta;
    for (u = src_[in_arc]; u != join; u = parent_[u])
      flow_[pred_arc_[u]] += pred_up_[u] ? -delta : delta;
    for (u = dst_[in_arc]; u != join; u = parent_[u])
      flow_[pred_arc_[u]] += pred_up_[u] ? delta : -delta;
  }
  state_[in_arc] = 1;
  state_[pred_arc_[u_out]] = 0;

  // Re-hang the subtree between u_in and u_out: thread/parent surgery ported
  // from the classic spanning-tree simplex bookkeeping.
  int w;
  u = last_succ_[u_in];
  const int old_rev_thread = rev_thread_[u_out];
  const int old_succ_num = succ_num_[u_out];
  const int old_last_succ = last_succ_[u_out];
  const int v_out = parent_[u_out];
  int right = thread_[u];
  const int last = old_rev_thread == v_in ? thread_[last_succ_[u_out]] : thread_[v_in];

  thread_[v_in] = u_in;
  std::vector<int> dirty_revs;
  dirty_revs.push_back(v_in);
  int stem = u_in;
  int par_stem = v_in;
  while (stem != u_out) {
    const int new_stem = parent_[stem];
    thread_[u] = new_stem;
    dirty_revs.push_back(u);

    w = rev_thread_[stem];
    thread_[w] = right;
    rev_thread_[right] = w;

    parent_[stem] = par_stem;
    par_stem = stem;
    stem = new_stem;

    u = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                 : last_succ_[stem];
    right = thread_[u];
  }
  parent_[u_out] = par_stem;
  thread_[u] = last;
  rev_thread_[last] = last_succ_[u_out] = u;

  if (old_rev_thread != v_in) {
    thread_[old_rev_thread] = right;
    rev_thread_[right] = old_rev_thread;
  }
  for (const int d : dirty_revs) rev_thread_[thread_[d]] = d;

  int tmp_sc = 0;
  int tmp_ls = last_succ_[u_out];
  u = u_out;
  while (u != u_in) {
    w = parent_[u];
    pred_arc_[u] = pred_arc_[w];
    pred_up_[u] = !pred_up_[w];
    tmp_sc += succ_num_[u] - succ_num_[w];
    succ_num_[u] = tmp_sc;
    last_succ_[w] = tmp_ls;
    u = w;
  }
  pred_arc_[u_in] = in_arc;
  pred_up_[u_in] = u_in == src_[in_arc];
  succ_num_[u_in] = old_succ_num;

  int up_limit_in = -1, up_limit_out = -1;
  if (last_succ_[join] == v_in)
    up_limit_out = join;
  else
    up_limit_in = join;

  for (u = v_in; u != up_limit_in && last_succ_[u] == v_in; u = parent_[u])
    last_succ_[u] = last_succ_[u_out];
  if (join != old_rev_thread && v_in != old_rev_thread) {
    for (u = v_out; u != up_limit_out && last_succ_[u] == old_last_succ;
         u = parent_[u])
      last_succ_[u] = old_rev_thread;
  } else {
    for (u = v_out; u != up_limit_out && last_succ_[u] == old_last_succ;
         u = parent_[u])
      last_succ_[u] = last_succ_[u_out];
  }

  for (u = v_in; u != join; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (u = v_out; u != join; u = parent_[u]) succ_num_[u] -= old_succ_num;

  // Shift potentials in the re-hung subtree.
  const double sigma = pred_up_[u_in]
                           ? pi_[v_in] - pi_[u_in] - cost_[pred_arc_[u_in]]
                           : pi_[v_in] - pi_[u_in] + cost_[pred_arc_[u_in]];
  const int end = thread_[last_succ_[u_in]];
  for (u = u_in; u != end; u = thread_[u]) pi_[u] += sigma;
}

NetworkSimplex::Status NetworkSimplex::solve(std::int64_t max_pivots) {
  double sum = 0.0, scale = 1.0;
  for (const double s : supply_) {
    sum += s;
    scale = std::max(scale, std::fabs(s));
  }
  if (std::fabs(sum) > 1e-9 * scale * n_)
    throw Error("supplies must balance; their sum is " + format_double(sum));

  if (pi_.empty()) {
    build_initial_tree();

    // Warm-up pivots: cheapest incoming arc per demand node.
    std::vector<int> best_in(n_, -1);
    for (int a = n_; a < arc_count(); ++a) {
      const int v = dst_[a];
      if (supply_[v] < 0.0 && (best_in[v] < 0 || cost_[a] < cost_[best_in[v]]))
        best_in[v] = a;
    }
    for (int v = 0; v < n_; ++v) {
      const int a = best_in[v];
      if (a >= 0 && state_[a] == 0 && cost_[a] + pi_[src_[a]] - pi_[dst_[a]] < 0.0)
        pivot(a);
    }
  }

  if (max_pivots < 0)
    max_pivots = std::max<std::int64_t>(
        10'000'000, 64LL * (n_ + 1) + 8LL * (arc_count() - n_));

  for (int e = price_block(); e >= 0; e = price_block()) {
    if (pivots_ >= max_pivots) return Status::iteration_limit;
    pivot(e);
  }

  for (int u = 0; u < n_; ++u) {
    if (std::fabs(flow_[u]) > 1e-9) return Status::infeasible;
    flow_[u] = 0.0;
  }
  return Status::optimal;
}

double NetworkSimplex::total_cost() const {
  std::vector<double> terms;
  terms.reserve(cost_.size());
  for (int a = n_; a < arc_count(); ++a)
    if (flow_[a] != 0.0) terms.push_back(flow_[a] * cost_[a]);
  return pairwise_sum(terms);
}

}  // namespace stripes
