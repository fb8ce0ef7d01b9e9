#include "linkpred/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "linkpred/louvain.hpp"

namespace linkpred {

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<Entry>>& rows,
                                       std::int64_t n_cols,
                                       std::vector<FeatureProvenance> provenance) {
  if (static_cast<std::int64_t>(provenance.size()) != n_cols) {
    throw std::invalid_argument("feature matrix: provenance size != n_cols");
  }
  FeatureMatrix m;
  m.n_rows_ = static_cast<std::int64_t>(rows.size());
  m.n_cols_ = n_cols;
  m.provenance_ = std::move(provenance);
  m.row_ptr_.reserve(rows.size() + 1);
  for (const auto& row : rows) {
    std::int32_t last_col = -1;
    for (const auto& e : row) {
      if (e.col < 0 || e.col >= n_cols) {
        throw std::invalid_argument("feature matrix: column index out of range");
      }
      if (e.col <= last_col) {
        throw std::invalid_argument("feature matrix: columns must strictly increase");
      }
      if (!std::isfinite(e.value)) {
        throw std::invalid_argument("feature matrix: non-finite value");
      }
      last_col = e.col;
      if (e.value != 0.0) m.entries_.push_back(e);
    }
    m.row_ptr_.push_back(static_cast<std::int64_t>(m.entries_.size()));
  }
  return m;
}

FeatureMatrix FeatureMatrix::identity(std::int64_t n, FeatureProvenance tag) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] = {{static_cast<std::int32_t>(i), 1.0}};
  }
  return from_rows(rows, n, std::vector<FeatureProvenance>(static_cast<std::size_t>(n), tag));
}

std::span<const FeatureMatrix::Entry> FeatureMatrix::row(std::int64_t i) const {
  if (i < 0 || i >= n_rows_) throw std::out_of_range("feature matrix: row out of range");
  const auto begin = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(i)]);
  const auto end = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(i) + 1]);
  return {entries_.data() + begin, end - begin};
}

FeatureMatrix FeatureMatrix::concat_columns(const FeatureMatrix& right) const {
  if (n_rows_ != right.n_rows_) {
    throw std::invalid_argument("feature matrix: row count mismatch in concat");
  }
  FeatureMatrix m;
  m.n_rows_ = n_rows_;
  m.n_cols_ = n_cols_ + right.n_cols_;
  m.provenance_ = provenance_;
  m.provenance_.insert(m.provenance_.end(), right.provenance_.begin(),
                       right.provenance_.end());
  m.entries_.reserve(entries_.size() + right.entries_.size());
  m.row_ptr_.clear();
  m.row_ptr_.push_back(0);
  const auto shift = static_cast<std::int32_t>(n_cols_);
  for (std::int64_t i = 0; i < n_rows_; ++i) {
    for (const auto& e : row(i)) m.entries_.push_back(e);
    for (const auto& e : right.row(i)) {
      m.entries_.push_back({e.col + shift, e.value});
    }
    m.row_ptr_.push_back(static_cast<std::int64_t>(m.entries_.size()));
  }
  return m;
}

bool FeatureMatrix::operator==(const FeatureMatrix& other) const {
  if (n_rows_ != other.n_rows_ || n_cols_ != other.n_cols_ ||
      provenance_ != other.provenance_ || row_ptr_ != other.row_ptr_) {
    return false;
  }
  return std::equal(entries_.begin(), entries_.end(), other.entries_.begin(),
                    other.entries_.end(), [](const Entry& a, const Entry& b) {
                      return a.col == b.col && a.value == b.value;
                    });
}

// --- transformers -------------------------------------------------------

StandardScaler StandardScaler::fit(std::span<const double> column) {
  StandardScaler s;
  if (column.empty()) return s;
  double sum = 0.0;
  for (const double x : column) {
    if (!std::isfinite(x)) throw std::invalid_argument("standard scaler: non-finite input");
    sum += x;
  }
  s.mean = sum / static_cast<double>(column.size());
  double ss = 0.0;
  for (const double x : column) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(column.size()));
  return s;
}

std::vector<double> StandardScaler::transform(std::span<const double> column) const {
  std::vector<double> out;
  out.reserve(column.size());
  for (const double x : column) {
    if (!std::isfinite(x)) throw std::invalid_argument("standard scaler: non-finite input");
    out.push_back(stddev == 0.0 ? 0.0 : (x - mean) / stddev);
  }
  return out;
}

OneHotEncoder OneHotEncoder::fit(std::span<const std::string> column) {
  OneHotEncoder enc;
  enc.categories.assign(column.begin(), column.end());
  std::sort(enc.categories.begin(), enc.categories.end());
  enc.categories.erase(std::unique(enc.categories.begin(), enc.categories.end()),
                       enc.categories.end());
  return enc;
}

FeatureMatrix OneHotEncoder::transform(std::span<const std::string> column) const {
  std::vector<std::vector<FeatureMatrix::Entry>> rows(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    const auto it = std::lower_bound(categories.begin(), categories.end(), column[i]);
    if (it != categories.end() && *it == column[i]) {
      rows[i] = {{static_cast<std::int32_t>(it - categories.begin()), 1.0}};
    }
  }
  return FeatureMatrix::from_rows(
      rows, static_cast<std::int64_t>(categories.size()),
      std::vector<FeatureProvenance>(categories.size(), FeatureProvenance::Categorical));
}

TfidfVectorizer TfidfVectorizer::fit(const std::vector<std::vector<std::string>>& documents,
                                     std::size_t max_vocab) {
  std::map<std::string, std::int64_t> df;  // ordered: lexicographic vocabulary
  for (const auto& doc : documents) {
    std::vector<std::string> distinct(doc.begin(), doc.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (const auto& term : distinct) ++df[term];
  }

  TfidfVectorizer v;
  if (max_vocab > 0 && df.size() > max_vocab) {
    // Keep the most document-frequent terms; ties go to the
    // lexicographically smaller term.
    std::vector<std::pair<std::string, std::int64_t>> ranked(df.begin(), df.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(max_vocab);
    df.clear();
    df.insert(ranked.begin(), ranked.end());
  }

  const double n_docs = static_cast<double>(documents.size());
  v.vocabulary.reserve(df.size());
  v.idf.reserve(df.size());
  for (const auto& [term, count] : df) {
    v.vocabulary.push_back(term);
    v.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return v;
}

FeatureMatrix TfidfVectorizer::transform(
    const std::vector<std::vector<std::string>>& documents) const {
  std::vector<std::vector<FeatureMatrix::Entry>> rows(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    std::unordered_map<std::int32_t, double> counts;
    for (const auto& term : documents[i]) {
      const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
      if (it != vocabulary.end() && *it == term) {
        counts[static_cast<std::int32_t>(it - vocabulary.begin())] += 1.0;
      }
    }
    auto& row = rows[i];
    row.reserve(counts.size());
    for (const auto& [col, tf] : counts) {
      row.push_back({col, tf * idf[static_cast<std::size_t>(col)]});
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.col < b.col; });
    double norm_sq = 0.0;
    for (const auto& e : row) norm_sq += e.value * e.value;
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& e : row) e.value *= inv;
    }
  }
  return FeatureMatrix::from_rows(
      rows, static_cast<std::int64_t>(vocabulary.size()),
      std::vector<FeatureProvenance>(vocabulary.size(), FeatureProvenance::Text));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (const char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

// --- pipeline -----------------------------------------------------------

namespace {

std::vector<double> parse_numeric_column(const AttributeColumn& col) {
  std::vector<double> out;
  out.reserve(col.values.size());
  for (std::size_t i = 0; i < col.values.size(); ++i) {
    try {
      std::size_t used = 0;
      const double x = std::stod(col.values[i], &used);
      if (used != col.values[i].size()) throw std::invalid_argument("trailing chars");
      out.push_back(x);
    } catch (const std::exception&) {
      throw std::invalid_argument("feature pipeline: column '" + col.name +
                                  "' row " + std::to_string(i) +
                                  " is not numeric: '" + col.values[i] + "'");
    }
  }
  return out;
}

std::vector<std::vector<std::string>> tokenize_column(const AttributeColumn& col) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(col.values.size());
  for (const auto& value : col.values) docs.push_back(tokenize(value));
  return docs;
}

const AttributeColumn& find_column(const NodeTable& table, const std::string& name,
                                   ColumnKind kind) {
  for (const auto& col : table.columns) {
    if (col.name == name) {
      if (col.kind != kind) {
        throw std::invalid_argument("feature pipeline: column '" + name +
                                    "' changed kind between fit and transform");
      }
      return col;
    }
  }
  throw std::invalid_argument("feature pipeline: column '" + name + "' missing");
}

FeatureMatrix dense_column(const std::vector<double>& values, FeatureProvenance tag) {
  std::vector<std::vector<FeatureMatrix::Entry>> rows(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows[i] = {{0, values[i]}};
  }
  return FeatureMatrix::from_rows(rows, 1, {tag});
}

}  // namespace

FeaturePipeline FeaturePipeline::fit(const NodeTable& table, std::size_t max_vocab) {
  if (table.columns.empty()) {
    throw std::invalid_argument("feature pipeline: node table has no attribute columns");
  }
  for (const auto& col : table.columns) {
    if (static_cast<NodeId>(col.values.size()) != table.size()) {
      throw std::invalid_argument("feature pipeline: column '" + col.name +
                                  "' row count does not match node count");
    }
  }
  FeaturePipeline p;
  for (const auto& col : table.columns) {
    switch (col.kind) {
      case ColumnKind::Numeric:
        p.numeric.push_back({col.name, StandardScaler::fit(parse_numeric_column(col))});
        break;
      case ColumnKind::Categorical:
        p.categorical.push_back({col.name, OneHotEncoder::fit(col.values)});
        break;
      case ColumnKind::Text:
        p.text.push_back({col.name, TfidfVectorizer::fit(tokenize_column(col), max_vocab)});
        break;
    }
  }
  return p;
}

FeatureMatrix FeaturePipeline::transform(const NodeTable& table) const {
  FeatureMatrix out;
  bool first = true;
  auto append = [&](FeatureMatrix block) {
    out = first ? std::move(block) : out.concat_columns(block);
    first = false;
  };
  for (const auto& field : numeric) {
    const auto& col = find_column(table, field.name, ColumnKind::Numeric);
    append(dense_column(field.scaler.transform(parse_numeric_column(col)),
                        FeatureProvenance::Numeric));
  }
  for (const auto& field : categorical) {
    const auto& col = find_column(table, field.name, ColumnKind::Categorical);
    append(field.encoder.transform(col.values));
  }
  for (const auto& field : text) {
    const auto& col = find_column(table, field.name, ColumnKind::Text);
    append(field.vectorizer.transform(tokenize_column(col)));
  }
  if (first) {
    throw std::invalid_argument("feature pipeline: nothing fitted");
  }
  return out;
}

bool FeaturePipeline::operator==(const FeaturePipeline& other) const {
  auto eq_scaler = [](const StandardScaler& a, const StandardScaler& b) {
    return a.mean == b.mean && a.stddev == b.stddev;
  };
  if (numeric.size() != other.numeric.size() ||
      categorical.size() != other.categorical.size() || text.size() != other.text.size()) {
    return false;
  }
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    if (numeric[i].name != other.numeric[i].name ||
        !eq_scaler(numeric[i].scaler, other.numeric[i].scaler)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < categorical.size(); ++i) {
    if (categorical[i].name != other.categorical[i].name ||
        categorical[i].encoder.categories != other.categorical[i].encoder.categories) {
      return false;
    }
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i].name != other.text[i].name ||
        text[i].vectorizer.vocabulary != other.text[i].vectorizer.vocabulary ||
        text[i].vectorizer.idf != other.text[i].vectorizer.idf) {
      return false;
    }
  }
  return true;
}

std::string FeaturePipeline::to_manifest_json() const {
  nlohmann::json j;
  j["numeric"] = nlohmann::json::array();
  for (const auto& f : numeric) {
    j["numeric"].push_back(
        {{"name", f.name}, {"mean", f.scaler.mean}, {"stddev", f.scaler.stddev}});
  }
  j["categorical"] = nlohmann::json::array();
  for (const auto& f : categorical) {
    j["categorical"].push_back({{"name", f.name}, {"categories", f.encoder.categories}});
  }
  j["text"] = nlohmann::json::array();
  for (const auto& f : text) {
    j["text"].push_back({{"name", f.name},
                         {"vocabulary", f.vectorizer.vocabulary},
                         {"idf", f.vectorizer.idf}});
  }
  return j.dump(2);
}

FeaturePipeline FeaturePipeline::from_manifest_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  FeaturePipeline p;
  for (const auto& f : j.at("numeric")) {
    p.numeric.push_back(
        {f.at("name").get<std::string>(),
         StandardScaler{f.at("mean").get<double>(), f.at("stddev").get<double>()}});
  }
  for (const auto& f : j.at("categorical")) {
    p.categorical.push_back(
        {f.at("name").get<std::string>(),
         OneHotEncoder{f.at("categories").get<std::vector<std::string>>()}});
  }
  for (const auto& f : j.at("text")) {
    p.text.push_back({f.at("name").get<std::string>(),
                      TfidfVectorizer{f.at("vocabulary").get<std::vector<std::string>>(),
                                      f.at("idf").get<std::vector<double>>()}});
  }
  return p;
}

// --- one-shot forms -----------------------------------------------------

std::vector<double> standard_scale(std::span<const double> column) {
  return StandardScaler::fit(column).transform(column);
}

FeatureMatrix one_hot_encode(std::span<const std::string> column) {
  return OneHotEncoder::fit(column).transform(column);
}

FeatureMatrix tfidf(const std::vector<std::vector<std::string>>& documents) {
  return TfidfVectorizer::fit(documents).transform(documents);
}

FeatureMatrix node_feature_matrix(const NodeTable& table, std::size_t max_vocab) {
  return FeaturePipeline::fit(table, max_vocab).transform(table);
}

FeatureMatrix augment_with_communities(const FeatureMatrix& x, const Partition& p) {
  if (x.rows() != static_cast<std::int64_t>(p.num_nodes())) {
    throw std::invalid_argument("augment: feature rows != partition nodes");
  }
  return x.concat_columns(one_hot_communities(p));
}

std::vector<double> pair_features(std::span<const double> x_u,
                                  std::span<const double> x_v) {
  if (x_u.size() != x_v.size()) {
    throw std::invalid_argument("pair features: length mismatch");
  }
  std::vector<double> out(x_u.size());
  for (std::size_t i = 0; i < x_u.size(); ++i) out[i] = x_u[i] * x_v[i];
  return out;
}

FeatureMatrix build_pair_features(const FeatureMatrix& x,
                                  std::span<const NodePair> pairs) {
  std::vector<std::vector<FeatureMatrix::Entry>> rows(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto ru = x.row(pairs[k].first);
    const auto rv = x.row(pairs[k].second);
    auto& out = rows[k];
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ru.size() && j < rv.size()) {
      if (ru[i].col < rv[j].col) {
        ++i;
      } else if (ru[i].col > rv[j].col) {
        ++j;
      } else {
        out.push_back({ru[i].col, ru[i].value * rv[j].value});
        ++i;
        ++j;
      }
    }
  }
  return FeatureMatrix::from_rows(rows, x.cols(), x.column_provenance());
}

}  // namespace linkpred
