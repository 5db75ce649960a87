#include "unseen/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace unseen {

namespace {

// Primal network simplex on the complete bipartite graph sources -> sinks with
// an artificial root. The spanning tree is kept strongly feasible (leaving arc
// chosen as the last blocking arc along the cycle), which rules out cycling.
// Tree structure and potentials are rebuilt by a walk from the root after
// each pivot, O(nodes) per pivot.
class NetworkSimplex {
public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                 std::vector<double> costs, std::size_t sinks)
      : sources_(supply.size()), sinks_(sinks), root_(supply.size() + sinks),
        costs_(std::move(costs)) {
    const std::size_t nodes = sources_ + sinks_ + 1;
    max_cost_ = 0.0;
    for (double c : costs_) max_cost_ = std::max(max_cost_, std::abs(c));
    art_cost_ = (max_cost_ + 1.0) * static_cast<double>(nodes);

    adj_.assign(nodes, {});
    edges_.reserve(nodes - 1);
    for (std::size_t u = 0; u < sources_; ++u) add_edge(Edge{u, root_, kNoArc, 0.0, supply[u]});
    for (std::size_t k = 0; k < sinks_; ++k) {
      add_edge(Edge{root_, sources_ + k, kNoArc, art_cost_, demand[k]});
    }
    parent_.assign(nodes, kNone);
    pred_.assign(nodes, kNone);
    up_.assign(nodes, false);
    depth_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    order_.reserve(nodes);
    rebuild();
  }

  TransportSolution run() {
    const std::size_t arcs = sources_ * sinks_;
    const std::size_t block = std::max<std::size_t>(
        16, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs))));
    std::size_t next = 0;
    std::size_t pivots = 0;
    const std::size_t pivot_limit = 50 * (arcs + sources_ + sinks_) + 1000;
    while (true) {
      std::size_t entering = kNoArc;
      double best = 0.0;
      std::size_t scanned = 0;
      while (scanned < arcs) {
        const std::size_t stop = std::min(arcs, scanned + block);
        for (; scanned < stop; ++scanned) {
          const std::size_t a = next;
          next = (next + 1 == arcs) ? 0 : next + 1;
          const std::size_t i = a / sinks_;
          const std::size_t k = sources_ + a % sinks_;
          const double rc = costs_[a] + pi_[i] - pi_[k];
          const double tol = 1e-14 * (1.0 + std::abs(pi_[i]) + std::abs(pi_[k]));
          if (rc < -tol && rc < best) {
            best = rc;
            entering = a;
          }
        }
        if (entering != kNoArc) break;
      }
      if (entering == kNoArc) break;
      pivot(entering);
      if (++pivots > pivot_limit) throw std::runtime_error("solve_transport: pivot limit exceeded");
    }

    double total = 0.0;
    for (const auto& e : edges_) {
      if (e.arc == kNoArc) {
        if (e.flow > 1e-9 * (1.0 + scale_)) {
          throw std::runtime_error("solve_transport: infeasible (artificial flow remains)");
        }
        continue;
      }
      total += e.flow * e.cost;
    }
    return {total, pivots};
  }

  void set_scale(double s) { scale_ = s; }

private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr std::size_t kNoArc = std::numeric_limits<std::size_t>::max();

  struct Edge {
    std::size_t from;
    std::size_t to;
    std::size_t arc;  // bipartite arc id, kNoArc for artificial arcs
    double cost;
    double flow;
  };

  void add_edge(const Edge& e) {
    const std::size_t slot = edges_.size();
    edges_.push_back(e);
    adj_[e.from].push_back(slot);
    adj_[e.to].push_back(slot);
  }

  void detach(std::size_t node, std::size_t slot) {
    auto& list = adj_[node];
    list.erase(std::find(list.begin(), list.end(), slot));
  }

  // Recompute parent, predecessor edge, orientation, depth and potentials
  // from the root. Tree arcs have zero reduced cost: c + pi_from - pi_to = 0.
  void rebuild() {
    order_.clear();
    order_.push_back(root_);
    parent_[root_] = kNone;
    pred_[root_] = kNone;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const std::size_t u = order_[head];
      for (std::size_t slot : adj_[u]) {
        if (slot == pred_[u]) continue;
        const Edge& e = edges_[slot];
        const std::size_t v = e.from == u ? e.to : e.from;
        parent_[v] = u;
        pred_[v] = slot;
        depth_[v] = depth_[u] + 1;
        up_[v] = (e.from == v);
        pi_[v] = up_[v] ? pi_[u] - e.cost : pi_[u] + e.cost;
        order_.push_back(v);
      }
    }
  }

  void pivot(std::size_t arc) {
    const std::size_t first = arc / sinks_;
    const std::size_t second = sources_ + arc % sinks_;

    std::size_t a = first;
    std::size_t b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        a = parent_[a];
      } else {
        b = parent_[b];
      }
    }
    const std::size_t join = a;

    const double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    std::size_t leaving = kNone;
    // Flow travels join -> ... -> first -> second -> ... -> join.
    for (std::size_t x = first; x != join; x = parent_[x]) {
      const double d = up_[x] ? edges_[pred_[x]].flow : inf;
      if (d < delta) {
        delta = d;
        leaving = x;
      }
    }
    for (std::size_t x = second; x != join; x = parent_[x]) {
      const double d = up_[x] ? inf : edges_[pred_[x]].flow;
      if (d <= delta) {
        delta = d;
        leaving = x;
      }
    }
    if (leaving == kNone) throw std::runtime_error("solve_transport: unbounded cycle");

    for (std::size_t x = first; x != join; x = parent_[x]) {
      edges_[pred_[x]].flow += up_[x] ? -delta : delta;
    }
    for (std::size_t x = second; x != join; x = parent_[x]) {
      edges_[pred_[x]].flow += up_[x] ? delta : -delta;
    }

    const std::size_t slot = pred_[leaving];
    detach(edges_[slot].from, slot);
    detach(edges_[slot].to, slot);
    edges_[slot] = Edge{first, second, arc, costs_[arc], delta};
    adj_[first].push_back(slot);
    adj_[second].push_back(slot);
    rebuild();
  }

  std::size_t sources_;
  std::size_t sinks_;
  std::size_t root_;
  std::vector<double> costs_;
  double max_cost_ = 0.0;
  double art_cost_ = 0.0;
  double scale_ = 1.0;

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<bool> up_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;
  std::vector<std::size_t> order_;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const std::function<double(std::size_t, std::size_t)>& cost) {
  for (double v : supply) {
    if (!(v >= 0.0)) throw std::invalid_argument("solve_transport: negative supply");
  }
  for (double v : demand) {
    if (!(v >= 0.0)) throw std::invalid_argument("solve_transport: negative demand");
  }
  const double total_s = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_d = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(total_s - total_d) > 1e-9 * std::max({1.0, total_s, total_d})) {
    throw std::invalid_argument("solve_transport: supplies and demands are unbalanced");
  }

  // Zero-mass nodes carry no flow; dropping them keeps the initial tree
  // nondegenerate.
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    if (supply[i] > 0.0) src.push_back(i);
  }
  for (std::size_t k = 0; k < demand.size(); ++k) {
    if (demand[k] > 0.0) dst.push_back(k);
  }
  if (src.empty() || dst.empty()) return {};

  std::vector<double> s(src.size());
  std::vector<double> d(dst.size());
  for (std::size_t i = 0; i < src.size(); ++i) s[i] = supply[src[i]];
  for (std::size_t k = 0; k < dst.size(); ++k) d[k] = demand[dst[k]];
  // Absorb the rounding imbalance into the largest demand.
  const double ds = std::accumulate(s.begin(), s.end(), 0.0);
  const double dd = std::accumulate(d.begin(), d.end(), 0.0);
  *std::max_element(d.begin(), d.end()) += ds - dd;

  std::vector<double> c(src.size() * dst.size());
  double max_cost = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t k = 0; k < dst.size(); ++k) {
      const double v = cost(src[i], dst[k]);
      if (!std::isfinite(v)) throw std::invalid_argument("solve_transport: non-finite cost");
      c[i * dst.size() + k] = v;
      max_cost = std::max(max_cost, std::abs(v));
    }
  }
  // Work in units where the largest cost is 1 so tolerances are scale-free.
  const double unit = max_cost > 0.0 ? max_cost : 1.0;
  for (double& v : c) v /= unit;

  NetworkSimplex solver(s, d, std::move(c), dst.size());
  solver.set_scale(ds);
  auto sol = solver.run();
  sol.cost *= unit;
  return sol;
}

double emd(const Histogram& h1, const Histogram& h2) {
  require_same_m(h1.m(), h2.m(), "emd");
  if (h1.size() + h2.size() > kEmdMaxSupport) {
    throw TooLarge("emd: combined support " + std::to_string(h1.size() + h2.size()) +
                   " exceeds " + std::to_string(kEmdMaxSupport));
  }
  const std::size_t m = h1.m();
  std::vector<const ProbVector*> a;
  std::vector<const ProbVector*> b;
  std::vector<double> supply;
  std::vector<double> demand;
  for (const auto& [key, e] : h1.entries()) {
    a.push_back(&e.alpha);
    supply.push_back(e.mass);
  }
  for (const auto& [key, e] : h2.entries()) {
    b.push_back(&e.alpha);
    demand.push_back(e.mass);
  }
  // Zero vector on both sides: the source side supplies what h2 needs, the
  // sink side absorbs what h1 holds; zero-to-zero transport is free.
  const double total1 = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total2 = std::accumulate(demand.begin(), demand.end(), 0.0);
  supply.push_back(total2);
  demand.push_back(total1);
  const std::size_t zero_src = a.size();
  const std::size_t zero_dst = b.size();

  const double scale = 1.0 / (2.0 * static_cast<double>(m));
  auto l1 = [m](const ProbVector* x, const ProbVector* y) {
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      d += std::abs((x ? (*x)[j] : 0.0) - (y ? (*y)[j] : 0.0));
    }
    return d;
  };
  auto cost = [&](std::size_t i, std::size_t k) {
    const ProbVector* x = i == zero_src ? nullptr : a[i];
    const ProbVector* y = k == zero_dst ? nullptr : b[k];
    return scale * l1(x, y);
  };
  return solve_transport(supply, demand, cost).cost;
}

}  // namespace unseen
