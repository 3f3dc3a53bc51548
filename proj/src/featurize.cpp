#include "activedp/featurize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "activedp/core.hpp"
#include "activedp/error.hpp"

namespace activedp {

TokenList tokenize(std::string_view text) {
    TokenList out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) out.push_back(cur);
        cur.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

Vocabulary build_vocab(std::span<const TokenList> train_corpus, std::size_t max_size) {
    if (max_size < 1) throw UsageError("vocabulary max_size must be >= 1");
    if (train_corpus.empty()) throw UsageError("cannot build a vocabulary from an empty corpus");
    std::unordered_map<std::string, std::size_t> df;
    std::unordered_set<std::string_view> seen;
    for (const auto& doc : train_corpus) {
        seen.clear();
        for (const auto& tok : doc)
            if (seen.insert(tok).second) ++df[tok];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (ranked.size() > max_size) ranked.resize(max_size);

    Vocabulary v;
    v.n_docs = train_corpus.size();
    for (auto& [tok, count] : ranked) {
        v.index.emplace(tok, v.tokens.size());
        v.tokens.push_back(std::move(tok));
        v.doc_freq.push_back(count);
    }
    return v;
}

FeatureMatrix tfidf(std::span<const TokenList> corpus, const Vocabulary& vocab) {
    std::vector<double> idf(vocab.size());
    for (std::size_t c = 0; c < vocab.size(); ++c)
        idf[c] = std::log((1.0 + static_cast<double>(vocab.n_docs)) /
                          (1.0 + static_cast<double>(vocab.doc_freq[c]))) + 1.0;

    std::vector<Eigen::Triplet<double>> triplets;
    std::unordered_map<std::size_t, double> counts;
    for (std::size_t r = 0; r < corpus.size(); ++r) {
        counts.clear();
        for (const auto& tok : corpus[r])
            if (auto it = vocab.index.find(tok); it != vocab.index.end()) counts[it->second] += 1.0;
        std::vector<std::pair<std::size_t, double>> cells(counts.begin(), counts.end());
        std::sort(cells.begin(), cells.end());
        double norm2 = 0.0;
        for (auto& [c, v] : cells) {
            v *= idf[c];
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        for (const auto& [c, v] : cells)
            triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v / norm);
    }
    FeatureMatrix x(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(vocab.size()));
    x.setFromTriplets(triplets.begin(), triplets.end());
    return x;
}

Eigen::MatrixXd standardize_tabular(const Eigen::MatrixXd& train, const Eigen::MatrixXd& apply) {
    if (train.cols() != apply.cols()) throw UsageError("standardize_tabular: column count mismatch");
    if (train.rows() == 0) throw UsageError("standardize_tabular: empty train matrix");
    Eigen::MatrixXd out(apply.rows(), apply.cols());
    const double n = static_cast<double>(train.rows());
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        const double mean = train.col(j).sum() / n;
        const double var = (train.col(j).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd < 1e-12)
            out.col(j).setZero();
        else
            out.col(j) = (apply.col(j).array() - mean) / sd;
    }
    return out;
}

FeatureMatrix featurize_dataset(const Dataset& d, std::size_t vocab_cap) {
    const auto& train = d.indices(Split::train);
    if (d.kind() == DataKind::text) {
        std::vector<TokenList> all;
        all.reserve(d.size());
        for (const auto& x : d.instances()) all.push_back(x.text().tokens);
        std::vector<TokenList> train_docs;
        train_docs.reserve(train.size());
        for (auto i : train) train_docs.push_back(all[i]);
        const auto vocab = build_vocab(train_docs, vocab_cap);
        return tfidf(all, vocab);
    }
    const auto m = static_cast<Eigen::Index>(d.m_feat());
    Eigen::MatrixXd all(static_cast<Eigen::Index>(d.size()), m);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (Eigen::Index j = 0; j < m; ++j) all(static_cast<Eigen::Index>(i), j) = d[i].features()[j];
    Eigen::MatrixXd tr(static_cast<Eigen::Index>(train.size()), m);
    for (std::size_t r = 0; r < train.size(); ++r) tr.row(static_cast<Eigen::Index>(r)) = all.row(train[r]);
    return standardize_tabular(tr, all).sparseView(0.0, 0.0);
}

FeatureMatrix gather_rows(const FeatureMatrix& x, std::span<const std::size_t> rows) {
    FeatureMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (FeatureMatrix::InnerIterator it(x, static_cast<Eigen::Index>(rows[r])); it; ++it)
            triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

}  // namespace activedp
