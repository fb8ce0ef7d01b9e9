#include "linkpred/louvain.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "linkpred/rng.hpp"

namespace linkpred {

double modularity(const Graph& g, const Partition& p) {
  if (g.num_edges() == 0) {
    throw std::invalid_argument("modularity undefined: graph has no edges");
  }
  if (static_cast<NodeId>(p.num_nodes()) != g.num_nodes()) {
    throw std::invalid_argument("modularity: partition does not cover all nodes");
  }
  p.validate();

  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  std::vector<double> internal(static_cast<std::size_t>(p.k), 0.0);  // ordered-pair mass
  std::vector<double> total_degree(static_cast<std::size_t>(p.k), 0.0);
  for (const auto& [u, v] : g.edges()) {
    if (p.community_of[static_cast<std::size_t>(u)] ==
        p.community_of[static_cast<std::size_t>(v)]) {
      internal[static_cast<std::size_t>(p.community_of[static_cast<std::size_t>(u)])] += 2.0;
    }
  }
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    total_degree[static_cast<std::size_t>(p.community_of[static_cast<std::size_t>(u)])] +=
        static_cast<double>(g.degree(u));
  }

  double q = 0.0;
  for (std::int32_t c = 0; c < p.k; ++c) {
    const double tot = total_degree[static_cast<std::size_t>(c)] / two_m;
    q += internal[static_cast<std::size_t>(c)] / two_m - tot * tot;
  }
  return q;
}

namespace {

// Aggregated multigraph used between Louvain levels. Off-diagonal weights
// live in symmetric adjacency lists; self_loop holds the full ordered-pair
// internal mass A_cc.
struct WeightedGraph {
  std::int32_t n = 0;
  std::vector<std::vector<std::pair<std::int32_t, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> weighted_degree;  // k_i = A_ii + sum_j A_ij
  double two_m = 0.0;

  static WeightedGraph from_graph(const Graph& g) {
    WeightedGraph wg;
    wg.n = g.num_nodes();
    wg.adj.resize(static_cast<std::size_t>(wg.n));
    wg.self_loop.assign(static_cast<std::size_t>(wg.n), 0.0);
    for (const auto& [u, v] : g.edges()) {
      wg.adj[static_cast<std::size_t>(u)].emplace_back(v, 1.0);
      wg.adj[static_cast<std::size_t>(v)].emplace_back(u, 1.0);
    }
    wg.finish_degrees();
    return wg;
  }

  void finish_degrees() {
    weighted_degree.assign(static_cast<std::size_t>(n), 0.0);
    two_m = 0.0;
    for (std::int32_t u = 0; u < n; ++u) {
      double k = self_loop[static_cast<std::size_t>(u)];
      for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) k += w;
      weighted_degree[static_cast<std::size_t>(u)] = k;
      two_m += k;
    }
  }

  // Q of an assignment of this (possibly aggregated) graph.
  double partition_quality(const std::vector<std::int32_t>& comm,
                           std::int32_t n_comm) const {
    std::vector<double> internal(static_cast<std::size_t>(n_comm), 0.0);
    std::vector<double> total(static_cast<std::size_t>(n_comm), 0.0);
    for (std::int32_t u = 0; u < n; ++u) {
      const auto c = static_cast<std::size_t>(comm[static_cast<std::size_t>(u)]);
      internal[c] += self_loop[static_cast<std::size_t>(u)];
      total[c] += weighted_degree[static_cast<std::size_t>(u)];
      for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
        if (comm[static_cast<std::size_t>(v)] == comm[static_cast<std::size_t>(u)]) {
          internal[c] += w;
        }
      }
    }
    double q = 0.0;
    for (std::int32_t c = 0; c < n_comm; ++c) {
      const double tot = total[static_cast<std::size_t>(c)] / two_m;
      q += internal[static_cast<std::size_t>(c)] / two_m - tot * tot;
    }
    return q;
  }
};

// One level of local moving. Returns the node -> community assignment
// (not renumbered) and whether any move was accepted.
bool local_moving(const WeightedGraph& wg, double min_gain, Rng& rng,
                  std::vector<std::int32_t>& comm) {
  comm.resize(static_cast<std::size_t>(wg.n));
  std::iota(comm.begin(), comm.end(), 0);

  std::vector<double> community_total = wg.weighted_degree;
  std::vector<double> weight_to(static_cast<std::size_t>(wg.n), 0.0);
  std::vector<std::int32_t> order(static_cast<std::size_t>(wg.n));
  std::iota(order.begin(), order.end(), 0);

  bool any_move = false;
  bool moved_in_pass = true;
  while (moved_in_pass) {
    moved_in_pass = false;
    rng.shuffle(order);
    for (const std::int32_t u : order) {
      const auto su = static_cast<std::size_t>(u);
      const std::int32_t c_old = comm[su];
      const double k_u = wg.weighted_degree[su];

      std::vector<std::int32_t> touched;
      touched.push_back(c_old);
      for (const auto& [v, w] : wg.adj[su]) {
        const std::int32_t c = comm[static_cast<std::size_t>(v)];
        if (weight_to[static_cast<std::size_t>(c)] == 0.0 && c != c_old) {
          touched.push_back(c);
        }
        weight_to[static_cast<std::size_t>(c)] += w;
      }

      community_total[static_cast<std::size_t>(c_old)] -= k_u;

      // Candidate score: the community-dependent part of the Q delta for
      // inserting u. Lowest community id wins ties.
      std::sort(touched.begin(), touched.end());
      auto score = [&](std::int32_t c) {
        return 2.0 * weight_to[static_cast<std::size_t>(c)] / wg.two_m -
               2.0 * community_total[static_cast<std::size_t>(c)] * k_u /
                   (wg.two_m * wg.two_m);
      };
      std::int32_t best = touched.front();
      double best_score = score(best);
      for (std::size_t i = 1; i < touched.size(); ++i) {
        const double s = score(touched[i]);
        if (s > best_score) {
          best = touched[i];
          best_score = s;
        }
      }

      const double gain = best_score - score(c_old);
      if (best != c_old && gain >= min_gain) {
        comm[su] = best;
        community_total[static_cast<std::size_t>(best)] += k_u;
        moved_in_pass = true;
        any_move = true;
      } else {
        community_total[static_cast<std::size_t>(c_old)] += k_u;
      }

      for (const std::int32_t c : touched) weight_to[static_cast<std::size_t>(c)] = 0.0;
    }
  }
  return any_move;
}

std::int32_t renumber(std::vector<std::int32_t>& comm) {
  std::vector<std::int32_t> remap(comm.size(), -1);
  std::int32_t next = 0;
  for (auto& c : comm) {
    if (remap[static_cast<std::size_t>(c)] < 0) remap[static_cast<std::size_t>(c)] = next++;
    c = remap[static_cast<std::size_t>(c)];
  }
  return next;
}

WeightedGraph aggregate(const WeightedGraph& wg, const std::vector<std::int32_t>& comm,
                        std::int32_t n_comm) {
  WeightedGraph out;
  out.n = n_comm;
  out.adj.resize(static_cast<std::size_t>(n_comm));
  out.self_loop.assign(static_cast<std::size_t>(n_comm), 0.0);

  std::vector<double> row(static_cast<std::size_t>(n_comm), 0.0);
  std::vector<std::vector<std::pair<std::int32_t, double>>> grouped(
      static_cast<std::size_t>(n_comm));
  for (std::int32_t u = 0; u < wg.n; ++u) {
    const std::int32_t cu = comm[static_cast<std::size_t>(u)];
    out.self_loop[static_cast<std::size_t>(cu)] += wg.self_loop[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : wg.adj[static_cast<std::size_t>(u)]) {
      const std::int32_t cv = comm[static_cast<std::size_t>(v)];
      if (cu == cv) {
        out.self_loop[static_cast<std::size_t>(cu)] += w;  // ordered pair (u,v)
      } else {
        grouped[static_cast<std::size_t>(cu)].emplace_back(cv, w);
      }
    }
  }
  for (std::int32_t c = 0; c < n_comm; ++c) {
    auto& edges = grouped[static_cast<std::size_t>(c)];
    std::sort(edges.begin(), edges.end());
    auto& merged = out.adj[static_cast<std::size_t>(c)];
    for (const auto& [d, w] : edges) {
      if (!merged.empty() && merged.back().first == d) {
        merged.back().second += w;
      } else {
        merged.emplace_back(d, w);
      }
    }
  }
  out.finish_degrees();
  return out;
}

}  // namespace

Partition louvain(const Graph& g, double min_gain, std::uint64_t seed) {
  if (g.num_edges() == 0) {
    throw std::invalid_argument("louvain: graph has no edges");
  }
  Rng rng(seed);

  WeightedGraph wg = WeightedGraph::from_graph(g);
  std::vector<std::int32_t> node_community(static_cast<std::size_t>(g.num_nodes()));
  std::iota(node_community.begin(), node_community.end(), 0);

  double q_prev = wg.partition_quality(node_community, g.num_nodes());
  for (;;) {
    std::vector<std::int32_t> level_comm;
    const bool moved = local_moving(wg, min_gain, rng, level_comm);
    if (!moved) break;

    const std::int32_t n_comm = renumber(level_comm);
    const double q_now = wg.partition_quality(level_comm, n_comm);
    if (q_now < q_prev - 1e-12) {
      throw std::logic_error("louvain: modularity decreased across a pass");
    }

    for (auto& c : node_community) {
      c = level_comm[static_cast<std::size_t>(c)];
    }
    if (q_now - q_prev < min_gain) break;
    q_prev = q_now;
    wg = aggregate(wg, level_comm, n_comm);
  }

  return Partition::from_labels(node_community);
}

FeatureMatrix one_hot_communities(const Partition& p) {
  p.validate();
  std::vector<std::vector<FeatureMatrix::Entry>> rows(p.num_nodes());
  for (std::size_t u = 0; u < p.num_nodes(); ++u) {
    rows[u] = {{p.community_of[u], 1.0}};
  }
  return FeatureMatrix::from_rows(
      rows, p.k,
      std::vector<FeatureProvenance>(static_cast<std::size_t>(p.k),
                                     FeatureProvenance::Community));
}

}  // namespace linkpred
