#include <doctest.h>

#include <cmath>

#include "linkpred/features.hpp"
#include "linkpred/louvain.hpp"
#include "linkpred/rng.hpp"

using namespace linkpred;

namespace {

std::vector<double> dense_row(const FeatureMatrix& m, std::int64_t i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()), 0.0);
  for (const auto& e : m.row(i)) out[static_cast<std::size_t>(e.col)] = e.value;
  return out;
}

// Dense evaluation of the smoothed tf-idf formula with L2 rows.
std::vector<std::vector<double>> tfidf_dense_oracle(
    const std::vector<std::vector<std::string>>& docs) {
  std::vector<std::string> vocab;
  for (const auto& d : docs) vocab.insert(vocab.end(), d.begin(), d.end());
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  const double n = static_cast<double>(docs.size());
  std::vector<double> idf(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t) {
    double df = 0;
    for (const auto& d : docs) {
      if (std::find(d.begin(), d.end(), vocab[t]) != d.end()) df += 1;
    }
    idf[t] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
  }
  std::vector<std::vector<double>> rows;
  for (const auto& d : docs) {
    std::vector<double> row(vocab.size(), 0.0);
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      const double tf = static_cast<double>(std::count(d.begin(), d.end(), vocab[t]));
      row[t] = tf * idf[t];
    }
    double norm = 0;
    for (const double x : row) norm += x * x;
    if (norm > 0) {
      for (double& x : row) x /= std::sqrt(norm);
    }
    rows.push_back(row);
  }
  return rows;
}

NodeTable small_table() {
  NodeTable table;
  table.intern("n0");
  table.intern("n1");
  table.intern("n2");
  table.columns.push_back({"year", ColumnKind::Numeric, {"1", "2", "3"}});
  table.columns.push_back({"venue", ColumnKind::Categorical, {"x", "y", "x"}});
  table.columns.push_back(
      {"abstract", ColumnKind::Text, {"zinc anode", "zinc cathode", "solid anode"}});
  return table;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("standard scaler") {
  const std::vector<double> column = {1, 2, 3};
  const auto scaled = standard_scale(column);
  REQUIRE(scaled.size() == 3);
  CHECK(scaled[0] == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(scaled[1] == doctest::Approx(0.0));
  CHECK(scaled[2] == doctest::Approx(1.224745).epsilon(1e-6));

  CHECK(standard_scale(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(standard_scale(std::vector<double>{}).empty());
  CHECK_THROWS_AS(standard_scale(std::vector<double>{1.0, std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("one-hot encoding") {
  const std::vector<std::string> column = {"x", "y", "x"};
  const FeatureMatrix m = one_hot_encode(column);
  CHECK(m.cols() == 2);
  CHECK(dense_row(m, 0) == std::vector<double>{1, 0});
  CHECK(dense_row(m, 1) == std::vector<double>{0, 1});
  CHECK(dense_row(m, 2) == std::vector<double>{1, 0});

  const FeatureMatrix single = one_hot_encode(std::vector<std::string>{"a", "a"});
  CHECK(single.cols() == 1);
  CHECK(single.nonzeros() == 2);

  // unknown category at transform time -> all-zero row
  const OneHotEncoder enc = OneHotEncoder::fit(std::vector<std::string>{"a", "b"});
  const FeatureMatrix unknown = enc.transform(std::vector<std::string>{"c"});
  CHECK(unknown.row(0).empty());
}

TEST_CASE("tfidf worked example") {
  const std::vector<std::vector<std::string>> docs = {{"a", "b"}, {"a", "c"}};
  const FeatureMatrix m = tfidf(docs);
  CHECK(m.cols() == 3);  // a, b, c
  const auto row0 = dense_row(m, 0);
  CHECK(row0[0] == doctest::Approx(0.579739).epsilon(1e-6));
  CHECK(row0[1] == doctest::Approx(0.814802).epsilon(1e-6));
  CHECK(row0[2] == 0.0);
}

TEST_CASE("tfidf rows are unit length and idf stays positive") {
  const std::vector<std::vector<std::string>> docs = {
      {"a", "a", "b"}, {"a", "c"}, {"a"}, {}};
  const FeatureMatrix m = tfidf(docs);
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    double norm = 0;
    for (const auto& e : m.row(i)) norm += e.value * e.value;
    if (!m.row(i).empty()) CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(m.row(3).empty());  // empty document -> zero row

  // term present everywhere keeps idf = ln(1) + 1 = 1 > 0
  const TfidfVectorizer v = TfidfVectorizer::fit({{"a"}, {"a"}});
  CHECK(v.idf[0] == doctest::Approx(1.0));
}

TEST_CASE("tfidf matches the dense oracle") {
  Rng rng(31);
  const std::vector<std::string> lexicon = {"aa", "bb", "cc", "dd", "ee",
                                            "ff", "gg", "hh", "ii", "jj"};
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::vector<std::string>> docs(1 + rng.bounded(5));
    for (auto& d : docs) {
      const std::size_t len = rng.bounded(8);
      for (std::size_t t = 0; t < len; ++t) {
        d.push_back(lexicon[rng.bounded(lexicon.size())]);
      }
    }
    const auto oracle = tfidf_dense_oracle(docs);
    const FeatureMatrix m = tfidf(docs);
    REQUIRE(m.rows() == static_cast<std::int64_t>(docs.size()));
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto row = dense_row(m, static_cast<std::int64_t>(i));
      REQUIRE(row.size() == oracle[i].size());
      for (std::size_t j = 0; j < row.size(); ++j) {
        CHECK(row[j] == doctest::Approx(oracle[i][j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("vocabulary cap keeps the most document-frequent terms") {
  const std::vector<std::vector<std::string>> docs = {
      {"common", "rare1"}, {"common", "rare2"}, {"common", "mid"}, {"mid"}};
  const TfidfVectorizer v = TfidfVectorizer::fit(docs, 2);
  CHECK(v.vocabulary == std::vector<std::string>{"common", "mid"});
}

TEST_CASE("tokenizer") {
  CHECK(tokenize("Hello, World! a x2") == std::vector<std::string>{"hello", "world", "x2"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Zn-anode/cathode") == std::vector<std::string>{"zn", "anode", "cathode"});
}

TEST_CASE("node feature matrix concatenates blocks in order") {
  const NodeTable table = small_table();
  const FeatureMatrix m = node_feature_matrix(table);
  // 1 scaled numeric + 2 one-hot + 4 tf-idf terms (anode, cathode, solid, zinc)
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 7);
  const auto& prov = m.column_provenance();
  CHECK(prov[0] == FeatureProvenance::Numeric);
  CHECK(prov[1] == FeatureProvenance::Categorical);
  CHECK(prov[2] == FeatureProvenance::Categorical);
  for (std::size_t c = 3; c < 7; ++c) CHECK(prov[c] == FeatureProvenance::Text);

  NodeTable empty;
  empty.intern("a");
  CHECK_THROWS_AS(node_feature_matrix(empty), std::invalid_argument);

  NodeTable mismatched = small_table();
  mismatched.columns[0].values.pop_back();
  CHECK_THROWS_AS(node_feature_matrix(mismatched), std::invalid_argument);
}

TEST_CASE("fit/transform separation reproduces the fit output") {
  const NodeTable table = small_table();
  const FeaturePipeline pipeline = FeaturePipeline::fit(table);
  const FeatureMatrix a = pipeline.transform(table);
  const FeatureMatrix b = pipeline.transform(table);
  CHECK(a == b);
  CHECK(a == node_feature_matrix(table));
}

TEST_CASE("pipeline manifest round trip") {
  const FeaturePipeline pipeline = FeaturePipeline::fit(small_table());
  const std::string manifest = pipeline.to_manifest_json();
  const FeaturePipeline restored = FeaturePipeline::from_manifest_json(manifest);
  CHECK(restored == pipeline);
  CHECK(restored.transform(small_table()) == pipeline.transform(small_table()));
}

TEST_CASE("community augmentation appends k columns and preserves entries") {
  const NodeTable table = small_table();
  const FeatureMatrix x = node_feature_matrix(table);
  Partition p;
  p.community_of = {1, 0, 1};
  p.k = 2;
  const FeatureMatrix augmented = augment_with_communities(x, p);
  CHECK(augmented.cols() == x.cols() + 2);
  CHECK(augmented.rows() == x.rows());
  for (std::int64_t i = 0; i < x.rows(); ++i) {
    const auto original = x.row(i);
    const auto grown = augmented.row(i);
    REQUIRE(grown.size() == original.size() + 1);
    for (std::size_t e = 0; e < original.size(); ++e) {
      CHECK(grown[e].col == original[e].col);
      CHECK(grown[e].value == original[e].value);  // bit-identical
    }
    CHECK(grown.back().col == x.cols() + p.community_of[static_cast<std::size_t>(i)]);
  }
  const auto& prov = augmented.column_provenance();
  CHECK(prov[static_cast<std::size_t>(x.cols())] == FeatureProvenance::Community);

  Partition wrong;
  wrong.community_of = {0, 0};
  wrong.k = 1;
  CHECK_THROWS_AS(augment_with_communities(x, wrong), std::invalid_argument);
}

TEST_CASE("pair features") {
  CHECK(pair_features(std::vector<double>{1, 2}, std::vector<double>{3, 4}) ==
        std::vector<double>{3, 8});
  CHECK(pair_features(std::vector<double>{1, 2}, std::vector<double>{0, 0}) ==
        std::vector<double>{0, 0});
  Rng rng(5);
  std::vector<double> a(6), b(6);
  for (std::size_t i = 0; i < 6; ++i) {
    a[i] = rng.uniform(-2, 2);
    b[i] = rng.uniform(-2, 2);
  }
  CHECK(pair_features(a, b) == pair_features(b, a));
  CHECK_THROWS_AS(pair_features(std::vector<double>{1}, std::vector<double>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("batched pair features agree with the dense product") {
  const NodeTable table = small_table();
  const FeatureMatrix x = node_feature_matrix(table);
  const std::vector<NodePair> pairs = {{0, 1}, {1, 2}, {0, 2}};
  const FeatureMatrix px = build_pair_features(x, pairs);
  REQUIRE(px.rows() == 3);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto expected =
        pair_features(dense_row(x, pairs[k].first), dense_row(x, pairs[k].second));
    CHECK(dense_row(px, static_cast<std::int64_t>(k)) == expected);
  }
}

TEST_CASE("feature matrix validation") {
  using Entry = FeatureMatrix::Entry;
  const std::vector<FeatureProvenance> prov(2, FeatureProvenance::Numeric);
  CHECK_THROWS_AS(
      FeatureMatrix::from_rows({{Entry{1, 1.0}, Entry{0, 1.0}}}, 2, prov),
      std::invalid_argument);  // out-of-order columns
  CHECK_THROWS_AS(FeatureMatrix::from_rows({{Entry{5, 1.0}}}, 2, prov),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      FeatureMatrix::from_rows({{Entry{0, std::numeric_limits<double>::infinity()}}}, 2,
                               prov),
      std::invalid_argument);
  // explicit zeros are dropped
  const FeatureMatrix m = FeatureMatrix::from_rows({{Entry{0, 0.0}, Entry{1, 2.0}}}, 2, prov);
  CHECK(m.nonzeros() == 1);
}

}  // TEST_SUITE
