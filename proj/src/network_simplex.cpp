#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hawkesfield::detail {

namespace {
constexpr int kLower = 1, kTree = 0;
constexpr int kUp = 1, kDown = -1;
constexpr NetworkSimplex::Value kInf = std::numeric_limits<NetworkSimplex::Value>::max();
}  // namespace

NetworkSimplex::NetworkSimplex(std::vector<Value> supply)
    : node_num_(static_cast<int>(supply.size())), supply_(std::move(supply)) {
  Value s = 0;
  for (Value v : supply_) s += v;
  if (s != 0) throw std::invalid_argument("supplies must sum to zero");
}

void NetworkSimplex::add_arc(int from, int to, Value cost) {
  source_.push_back(from);
  target_.push_back(to);
  cost_.push_back(cost);
  ++real_arcs_;
}

bool NetworkSimplex::run() {
  if (!flow_.empty()) throw std::logic_error("network simplex instance already solved");
  arc_num_ = static_cast<int>(source_.size());
  all_arc_num_ = arc_num_ + node_num_;
  const int n = node_num_;
  root_ = n;

  Value max_cost = 0;
  for (Value c : cost_) max_cost = std::max(max_cost, c < 0 ? -c : c);
  const Value art_cost = (max_cost + 1) * (n + 1);

  source_.resize(all_arc_num_);
  target_.resize(all_arc_num_);
  cost_.resize(all_arc_num_);
  flow_.assign(all_arc_num_, 0);
  state_.assign(all_arc_num_, kLower);
  pi_.assign(n + 1, 0);
  parent_.assign(n + 1, -1);
  pred_.assign(n + 1, -1);
  thread_.assign(n + 1, 0);
  rev_thread_.assign(n + 1, 0);
  succ_num_.assign(n + 1, 0);
  last_succ_.assign(n + 1, 0);
  pred_dir_.assign(n + 1, 0);

  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = n + 1;
  last_succ_[root_] = root_ - 1;
  pi_[root_] = 0;

  for (int u = 0, e = arc_num_; u != n; ++u, ++e) {
    parent_[u] = root_;
    pred_[u] = e;
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    state_[e] = kTree;
    if (supply_[u] >= 0) {
      pred_dir_[u] = kUp;
      pi_[u] = 0;
      source_[e] = u;
      target_[e] = root_;
      flow_[e] = supply_[u];
      cost_[e] = 0;
    } else {
      pred_dir_[u] = kDown;
      pi_[u] = art_cost;
      source_[e] = root_;
      target_[e] = u;
      flow_[e] = -supply_[u];
      cost_[e] = art_cost;
    }
  }

  block_size_ = std::max(10, static_cast<int>(std::sqrt(double(arc_num_))));
  next_arc_ = 0;
  pivots_ = 0;

  while (find_entering()) {
    find_join();
    const bool change = find_leaving();
    if (delta_ >= kInf) throw std::logic_error("unbounded transport problem");
    change_flow(change);
    if (change) {
      update_tree();
      update_potential();
    }
    ++pivots_;
  }
  for (int e = arc_num_; e != all_arc_num_; ++e)
    if (flow_[e] != 0) return false;
  return true;
}

bool NetworkSimplex::find_entering() {
  if (arc_num_ == 0) return false;
  Value min = 0;
  int cnt = block_size_;
  int e;
  for (e = next_arc_; e != arc_num_; ++e) {
    const Value c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = e;
    }
    if (--cnt == 0) {
      if (min < 0) goto found;
      cnt = block_size_;
    }
  }
  for (e = 0; e != next_arc_; ++e) {
    const Value c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = e;
    }
    if (--cnt == 0) {
      if (min < 0) goto found;
      cnt = block_size_;
    }
  }
  if (min >= 0) return false;
found:
  next_arc_ = e == arc_num_ ? 0 : e;
  return true;
}

void NetworkSimplex::find_join() {
  int u = source_[in_arc_], v = target_[in_arc_];
  while (u != v) {
    if (succ_num_[u] < succ_num_[v])
      u = parent_[u];
    else
      v = parent_[v];
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving() {
  int first, second;
  if (state_[in_arc_] == kLower) {
    first = source_[in_arc_];
    second = target_[in_arc_];
  } else {
    first = target_[in_arc_];
    second = source_[in_arc_];
  }
  delta_ = kInf;
  int result = 0;
  for (int u = first; u != join_; u = parent_[u]) {
    const int e = pred_[u];
    const Value d = pred_dir_[u] == kDown ? kInf : flow_[e];
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[u]) {
    const int e = pred_[u];
    const Value d = pred_dir_[u] == kUp ? kInf : flow_[e];
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void NetworkSimplex::change_flow(bool change) {
  if (delta_ > 0) {
    const Value val = state_[in_arc_] * delta_;
    flow_[in_arc_] += val;
    for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
    for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
  }
  if (change) {
    state_[in_arc_] = kTree;
    // Uncapacitated: a leaving arc always drops to zero flow.
    state_[pred_[u_out_]] = kLower;
  } else {
    state_[in_arc_] = -state_[in_arc_];
  }
}

void NetworkSimplex::update_tree() {
  const int old_rev_thread = rev_thread_[u_out_];
  const int old_succ_num = succ_num_[u_out_];
  const int old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
    if (thread_[v_in_] != u_out_) {
      int after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
    int stem = u_in_, par_stem = v_in_, next_stem;
    int last = last_succ_[u_in_];
    int before, after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);
      before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;
      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;
      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;
    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }
    for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

    int tmp_sc = 0, tmp_ls = last_succ_[u_out_];
    for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = -pred_dir_[p];
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ_[u_out_];
  for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
      last_succ_[u] = old_rev_thread;
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
      last_succ_[u] = last_succ_out;
  }

  for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const Value sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
  const int end = thread_[last_succ_[u_in_]];
  for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

}  // namespace hawkesfield::detail
