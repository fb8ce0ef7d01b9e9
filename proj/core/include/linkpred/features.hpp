#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/partition.hpp"

namespace linkpred {

enum class FeatureProvenance { Numeric, Categorical, Text, Community };

// Sparse row-major matrix of node (or pair) features. Stored entries are
// nonzero and finite; column indices strictly increase within a row.
class FeatureMatrix {
 public:
  struct Entry {
    std::int32_t col = 0;
    double value = 0.0;
  };

  FeatureMatrix() = default;

  // Compresses per-row entry lists; drops explicit zeros, validates order
  // and finiteness. provenance must have one tag per column.
  static FeatureMatrix from_rows(const std::vector<std::vector<Entry>>& rows,
                                 std::int64_t n_cols,
                                 std::vector<FeatureProvenance> provenance);

  static FeatureMatrix identity(std::int64_t n,
                                FeatureProvenance tag = FeatureProvenance::Numeric);

  std::int64_t rows() const { return n_rows_; }
  std::int64_t cols() const { return n_cols_; }
  std::int64_t nonzeros() const { return static_cast<std::int64_t>(entries_.size()); }

  std::span<const Entry> row(std::int64_t i) const;

  const std::vector<FeatureProvenance>& column_provenance() const { return provenance_; }

  // Horizontal concatenation; left block columns keep their indices.
  FeatureMatrix concat_columns(const FeatureMatrix& right) const;

  bool operator==(const FeatureMatrix& other) const;

 private:
  std::int64_t n_rows_ = 0;
  std::int64_t n_cols_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<Entry> entries_;
  std::vector<FeatureProvenance> provenance_;
};

// --- fitted transformers -----------------------------------------------

// (x - mean) / stddev with the population stddev; a zero-variance column
// maps to all zeros.
struct StandardScaler {
  double mean = 0.0;
  double stddev = 0.0;

  static StandardScaler fit(std::span<const double> column);
  std::vector<double> transform(std::span<const double> column) const;
};

// One column per distinct category, ordered lexicographically; categories
// unseen at fit time produce an all-zero row.
struct OneHotEncoder {
  std::vector<std::string> categories;

  static OneHotEncoder fit(std::span<const std::string> column);
  FeatureMatrix transform(std::span<const std::string> column) const;
};

// Smoothed TF-IDF: tf = raw count, idf = ln((1+N)/(1+df)) + 1, rows
// L2-normalized. Vocabulary is ordered lexicographically; max_vocab = 0
// means unlimited, otherwise the most document-frequent terms are kept.
struct TfidfVectorizer {
  std::vector<std::string> vocabulary;
  std::vector<double> idf;

  static TfidfVectorizer fit(const std::vector<std::vector<std::string>>& documents,
                             std::size_t max_vocab = 0);
  FeatureMatrix transform(const std::vector<std::vector<std::string>>& documents) const;
};

// Lowercases, splits on non-alphanumeric runs, drops tokens shorter than
// two characters.
std::vector<std::string> tokenize(std::string_view text);

// Full node-attribute pipeline: scaled numeric columns, then one-hot
// categorical, then TF-IDF text, in schema order within each group.
struct FeaturePipeline {
  struct NumericField {
    std::string name;
    StandardScaler scaler;
  };
  struct CategoricalField {
    std::string name;
    OneHotEncoder encoder;
  };
  struct TextField {
    std::string name;
    TfidfVectorizer vectorizer;
  };

  std::vector<NumericField> numeric;
  std::vector<CategoricalField> categorical;
  std::vector<TextField> text;

  static FeaturePipeline fit(const NodeTable& table, std::size_t max_vocab = 0);
  FeatureMatrix transform(const NodeTable& table) const;

  // JSON manifest (vocabularies, categories, moments, provenance) for
  // exact replay of a fitted pipeline.
  std::string to_manifest_json() const;
  static FeaturePipeline from_manifest_json(const std::string& json_text);

  bool operator==(const FeaturePipeline& other) const;
};

// --- one-shot convenience forms of the fitted transformers --------------

std::vector<double> standard_scale(std::span<const double> column);
FeatureMatrix one_hot_encode(std::span<const std::string> column);
FeatureMatrix tfidf(const std::vector<std::vector<std::string>>& documents);
FeatureMatrix node_feature_matrix(const NodeTable& table, std::size_t max_vocab = 0);

// X with the community one-hot block appended; adds exactly p.k columns
// and leaves the original entries untouched.
FeatureMatrix augment_with_communities(const FeatureMatrix& x, const Partition& p);

// Elementwise (Hadamard) product of two feature rows of equal length;
// symmetric, so undirected pairs get one well-defined vector.
std::vector<double> pair_features(std::span<const double> x_u,
                                  std::span<const double> x_v);

// Hadamard rows for a batch of node pairs, sparse in and out.
FeatureMatrix build_pair_features(const FeatureMatrix& x,
                                  std::span<const NodePair> pairs);

}  // namespace linkpred
