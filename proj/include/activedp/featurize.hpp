#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace activedp {

class Dataset;

/// Row-per-instance feature matrix. Text rows are sparse TF-IDF vectors;
/// tabular rows are stored in the same format for a uniform model interface.
using FeatureMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

using TokenList = std::vector<std::string>;

struct Vocabulary {
    std::vector<std::string> tokens;                 // column -> token
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::size_t> doc_freq;                // per column, >= 1
    std::size_t n_docs = 0;                           // corpus size used for idf

    std::size_t size() const { return tokens.size(); }
};

inline constexpr std::size_t kDefaultVocabCap = 1000;

/// Lowercase, split on non-alphanumerics, drop tokens shorter than 2 chars.
TokenList tokenize(std::string_view text);

/// Keep the `max_size` tokens of highest document frequency, ties by token.
Vocabulary build_vocab(std::span<const TokenList> train_corpus, std::size_t max_size);

/// tf = raw count, idf = ln((1+N)/(1+df)) + 1, rows L2-normalised.
FeatureMatrix tfidf(std::span<const TokenList> corpus, const Vocabulary& vocab);

/// Column-wise (x - mean)/std with moments from `train`. Columns whose train
/// std is below 1e-12 become all zeros.
Eigen::MatrixXd standardize_tabular(const Eigen::MatrixXd& train, const Eigen::MatrixXd& apply);

/// Features for every instance of `d` (in dataset order), fitted on the
/// train split only.
FeatureMatrix featurize_dataset(const Dataset& d, std::size_t vocab_cap = kDefaultVocabCap);

/// Rows of `x` at `rows`, in that order.
FeatureMatrix gather_rows(const FeatureMatrix& x, std::span<const std::size_t> rows);

}  // namespace activedp
