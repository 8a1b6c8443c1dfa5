#include "homflow/mincost.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace homflow::mincost {

int Network::add_arc(int tail, int head, double cap, double cost) {
  if (cost < -1e-12) throw Error("mincost: negative arc cost");
  int id = static_cast<int>(arcs_.size());
  arcs_.push_back({head, cap, cost, id + 1});
  arcs_.push_back({tail, 0.0, -cost, id});
  if (out_.size() < static_cast<std::size_t>(num_nodes_)) out_.resize(num_nodes_);
  out_[tail].push_back(id);
  out_[head].push_back(id + 1);
  return id / 2;
}

FlowResult solve(Network& net, double tol) {
  const int n = net.num_nodes();
  FlowResult res;
  double total_pos = 0, total_neg = 0;
  for (double s : net.supply) (s > 0 ? total_pos : total_neg) += s;
  if (std::abs(total_pos + total_neg) > tol * std::max(1.0, total_pos)) return res;

  // Super source n -> surplus nodes; deficit nodes -> super sink n+1.
  const int S = n, T = n + 1;
  std::vector<Network::Arc>& arcs = net.arcs_;
  std::vector<std::vector<int>> out = net.out_;
  out.resize(n + 2);
  auto add = [&](int tail, int head, double cap, double cost) {
    int id = static_cast<int>(arcs.size());
    arcs.push_back({head, cap, cost, id + 1});
    arcs.push_back({tail, 0.0, -cost, id});
    out[tail].push_back(id);
    out[head].push_back(id + 1);
  };
  double demand = 0;
  for (int x = 0; x < n; ++x) {
    if (net.supply[x] > 0) {
      add(S, x, net.supply[x], 0.0);
      demand += net.supply[x];
    } else if (net.supply[x] < 0) {
      add(x, T, -net.supply[x], 0.0);
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot(n + 2, 0.0), dist(n + 2);
  std::vector<int> pre_arc(n + 2);
  double sent = 0, cost = 0;
  long iter = 0;
  const long max_iter = 1000L + 10L * static_cast<long>(arcs.size());

  while (demand - sent > tol * std::max(1.0, demand)) {
    if (++iter > max_iter) throw Error("mincost: augmentation limit exceeded");
    // Dijkstra on reduced costs from S.
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(pre_arc.begin(), pre_arc.end(), -1);
    dist[S] = 0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, S});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u] + 1e-15) continue;
      for (int aid : out[u]) {
        const auto& a = arcs[aid];
        if (a.cap <= tol) continue;
        double rc = a.cost + pot[u] - pot[a.head];
        if (rc < 0) rc = 0;  // guard tiny negatives from float drift
        double nd = d + rc;
        if (nd < dist[a.head] - 1e-15) {
          dist[a.head] = nd;
          pre_arc[a.head] = aid;
          pq.push({nd, a.head});
        }
      }
    }
    if (dist[T] == inf) return res;  // cannot route remaining supply
    for (int u = 0; u <= n + 1; ++u) pot[u] += std::min(dist[u], dist[T]);
    // Bottleneck along the path.
    double delta = inf;
    for (int u = T; u != S;) {
      const auto& a = arcs[pre_arc[u]];
      delta = std::min(delta, a.cap);
      u = arcs[a.twin].head;
    }
    for (int u = T; u != S;) {
      auto& a = arcs[pre_arc[u]];
      a.cap -= delta;
      arcs[a.twin].cap += delta;
      cost += delta * a.cost;
      u = arcs[a.twin].head;
    }
    sent += delta;
  }

  res.feasible = true;
  res.cost = cost;
  res.flow.resize(net.num_arcs());
  for (int i = 0; i < net.num_arcs(); ++i) res.flow[i] = arcs[2 * i + 1].cap;  // flow = twin residual
  return res;
}

}  // namespace homflow::mincost
