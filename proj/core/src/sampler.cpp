#include "linkpred/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "linkpred/rng.hpp"

namespace linkpred {
namespace {

std::int64_t round_half_even(double x) {
  const double fl = std::floor(x);
  const double frac = x - fl;
  const auto lo = static_cast<std::int64_t>(fl);
  if (frac > 0.5) return lo + 1;
  if (frac < 0.5) return lo;
  return (lo % 2 == 0) ? lo : lo + 1;
}

std::uint64_t pair_count(std::int64_t n) {
  return static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
}

// Index -> canonical pair under lexicographic enumeration of u < v.
NodePair unrank_pair(std::uint64_t t, std::int64_t n) {
  // offset(u) = u*(2n-u-1)/2 is the index of pair (u, u+1).
  const double nd = static_cast<double>(n);
  double guess = nd - 0.5 - std::sqrt((nd - 0.5) * (nd - 0.5) - 2.0 * static_cast<double>(t));
  auto u = static_cast<std::int64_t>(std::max(0.0, guess));
  auto offset = [n](std::int64_t k) {
    return static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(2 * n - k - 1) / 2;
  };
  while (u > 0 && offset(u) > t) --u;
  while (u + 1 < n && offset(u + 1) <= t) ++u;
  const std::int64_t v = u + 1 + static_cast<std::int64_t>(t - offset(u));
  return {static_cast<NodeId>(u), static_cast<NodeId>(v)};
}

}  // namespace

std::int64_t LabeledPairSet::positives() const {
  std::int64_t count = 0;
  for (const int label : labels) count += label;
  return count;
}

void LabeledPairSet::validate() const {
  if (pairs.size() != labels.size()) {
    throw std::invalid_argument("labeled pair set: pairs/labels length mismatch");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    if (u >= v) throw std::invalid_argument("labeled pair set: pair not canonical");
    if (!seen.insert(pair_key(u, v)).second) {
      throw std::invalid_argument("labeled pair set: duplicate pair");
    }
  }
  const std::int64_t pos = positives();
  const std::int64_t neg = static_cast<std::int64_t>(labels.size()) - pos;
  if (pos != neg) {
    throw std::invalid_argument("labeled pair set: classes not balanced");
  }
}

EdgeSplit split_edges(const Graph& g, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must lie in (0,1)");
  }
  if (g.num_edges() == 0) throw std::invalid_argument("split: empty graph");

  std::vector<NodePair> edges = g.edges();
  Rng rng(seed);
  rng.shuffle(edges);

  const auto n_test = static_cast<std::size_t>(
      round_half_even(static_cast<double>(g.num_edges()) * test_fraction));
  EdgeSplit split;
  split.test_edges.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_edges.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test), edges.end());
  return split;
}

std::vector<NodePair> sample_non_links(const Graph& g, std::int64_t count,
                                       std::span<const NodePair> exclude,
                                       std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("non-links: negative count");
  const std::int64_t n = g.num_nodes();
  const std::uint64_t total = pair_count(n);

  std::unordered_set<std::uint64_t> excluded;
  excluded.reserve(exclude.size());
  for (const auto& [u, v] : exclude) excluded.insert(pair_key(u, v));

  const std::int64_t available = static_cast<std::int64_t>(total) - g.num_edges() -
                                 static_cast<std::int64_t>(excluded.size());
  if (count > available) {
    throw std::invalid_argument(
        "non-links: requested " + std::to_string(count) + " but only " +
        std::to_string(std::max<std::int64_t>(available, 0)) +
        " non-edges are available (short by " +
        std::to_string(count - std::max<std::int64_t>(available, 0)) + ")");
  }

  Rng rng(seed);
  std::vector<NodePair> result;
  result.reserve(static_cast<std::size_t>(count));
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(count));

  auto admissible = [&](NodeId u, NodeId v) {
    return !g.has_edge(u, v) && !excluded.contains(pair_key(u, v)) &&
           !chosen.contains(pair_key(u, v));
  };

  // Rejection sampling over pair indices; on small graphs (or if rejection
  // stalls because nearly every pair is taken) fall back to a seeded
  // partial Fisher-Yates over the enumerated complement. Either way the
  // draw is uniform and fully determined by (inputs, seed).
  const bool enumerate_directly = total < 1'000'000ull;
  std::uint64_t attempts = 0;
  const std::uint64_t max_attempts =
      50ull * static_cast<std::uint64_t>(count) + 1'000'000ull;

  if (!enumerate_directly) {
    while (result.size() < static_cast<std::size_t>(count) && attempts < max_attempts) {
      ++attempts;
      const auto [u, v] = unrank_pair(rng.bounded(total), n);
      if (!admissible(u, v)) continue;
      chosen.insert(pair_key(u, v));
      result.emplace_back(u, v);
    }
  }

  if (result.size() < static_cast<std::size_t>(count)) {
    std::vector<NodePair> complement;
    complement.reserve(static_cast<std::size_t>(available) - result.size());
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (admissible(u, v)) complement.emplace_back(u, v);
      }
    }
    while (result.size() < static_cast<std::size_t>(count)) {
      const auto idx = static_cast<std::size_t>(rng.bounded(complement.size()));
      result.push_back(complement[idx]);
      complement[idx] = complement.back();
      complement.pop_back();
    }
  }
  return result;
}

Datasets build_datasets(const Graph& g, double test_fraction, std::uint64_t seed) {
  const EdgeSplit split = split_edges(g, test_fraction, Rng::derive(seed, "split"));

  auto assemble = [](std::vector<NodePair> positives, std::vector<NodePair> negatives,
                     SplitRole role) {
    LabeledPairSet set;
    set.role = role;
    set.pairs = std::move(positives);
    set.labels.assign(set.pairs.size(), 1);
    set.pairs.insert(set.pairs.end(), negatives.begin(), negatives.end());
    set.labels.resize(set.pairs.size(), 0);
    return set;
  };

  const auto train_neg =
      sample_non_links(g, static_cast<std::int64_t>(split.train_edges.size()), {},
                       Rng::derive(seed, "train-negatives"));
  const auto test_neg =
      sample_non_links(g, static_cast<std::int64_t>(split.test_edges.size()), train_neg,
                       Rng::derive(seed, "test-negatives"));

  Datasets out;
  out.train = assemble(split.train_edges, train_neg, SplitRole::Train);
  out.test = assemble(split.test_edges, test_neg, SplitRole::Test);
  out.train.validate();
  out.test.validate();
  return out;
}

}  // namespace linkpred
