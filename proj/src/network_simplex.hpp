#pragma once

// Primal network simplex for uncapacitated min-cost flow with integer
// supplies and integer costs (block-search pivot, spanning tree kept as
// parent / thread / successor-count arrays, artificial root). Private to the
// transport module.

#include <cstdint>
#include <vector>

namespace hawkesfield::detail {

class NetworkSimplex {
 public:
  using Value = std::int64_t;

  // supply[u] > 0 for sources, < 0 for sinks; must sum to 0.
  explicit NetworkSimplex(std::vector<Value> supply);

  void add_arc(int from, int to, Value cost);
  std::size_t arc_count() const noexcept { return real_arcs_; }

  // Returns false if the artificial arcs still carry flow (infeasible on the
  // given arc set).
  bool run();

  Value flow(std::size_t arc) const { return flow_[arc]; }
  // Node potentials: reduced cost of (u, v) is cost + pi[u] - pi[v].
  Value potential(int node) const { return pi_[node]; }
  std::size_t pivots() const noexcept { return pivots_; }

 private:
  bool find_entering();
  void find_join();
  bool find_leaving();
  void change_flow(bool change);
  void update_tree();
  void update_potential();

  int node_num_;
  std::size_t real_arcs_ = 0;
  std::vector<Value> supply_;
  std::vector<int> source_, target_;
  std::vector<Value> cost_;

  int arc_num_ = 0, all_arc_num_ = 0, root_ = 0;
  std::vector<Value> flow_, pi_;
  std::vector<int> state_, parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_, pred_dir_;
  std::vector<int> dirty_revs_;

  int block_size_ = 0, next_arc_ = 0;
  int in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  Value delta_ = 0;
  std::size_t pivots_ = 0;
};

}  // namespace hawkesfield::detail
