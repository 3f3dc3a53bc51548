#include <algorithm>
#include <array>
#include <cmath>

#include "activedp/core.hpp"
#include "activedp/error.hpp"
#include "activedp/featurize.hpp"
#include "activedp/rng.hpp"

namespace activedp {

namespace {

// Documents draw min_len..max_len Zipf background tokens, then keywords and
// topic words are planted independently at their class-dependent rates.

std::vector<int> balanced_labels(std::size_t n, Rng& rng) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
    shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

}  // namespace

Dataset make_synthetic_text(const SyntheticTextConfig& cfg) {
    if (cfg.n < 30) throw ConfigError("synthetic text needs n >= 30");
    if (cfg.n_signal_words < 2) throw ConfigError("synthetic text needs n_signal_words >= 2");
    if (cfg.vocab_size < 1) throw ConfigError("synthetic text needs vocab_size >= 1");
    if (cfg.min_len > cfg.max_len) throw ConfigError("synthetic text needs min_len <= max_len");
    if (!(cfg.flip_noise >= 0.0 && cfg.flip_noise <= 1.0)) throw ConfigError("flip_noise must lie in [0,1]");
    for (double r : {cfg.own_rate, cfg.other_rate, cfg.phrase_rate, cfg.topic_own_rate, cfg.topic_other_rate})
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("synthetic word rates must lie in [0,1]");

    Rng rng(cfg.seed);
    const auto labels = balanced_labels(cfg.n, rng);

    // Zipf(1) background distribution as a cumulative table.
    std::vector<double> cdf(cfg.vocab_size);
    double total = 0.0;
    for (std::size_t r = 0; r < cfg.vocab_size; ++r) {
        total += 1.0 / static_cast<double>(r + 1);
        cdf[r] = total;
    }
    for (auto& c : cdf) c /= total;

    std::array<std::vector<std::string>, 2> keywords;
    for (std::size_t k = 0; k < cfg.n_signal_words; ++k)
        keywords[k % 2].push_back("kw" + std::to_string(k % 2) + "x" + std::to_string(k / 2));
    std::array<std::vector<std::string>, 2> topics;
    for (int c = 0; c < 2; ++c)
        for (std::size_t k = 0; k < cfg.topic_words; ++k)
            topics[static_cast<std::size_t>(c)].push_back("tp" + std::to_string(c) + "x" + std::to_string(k));

    std::vector<Instance> instances;
    instances.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        int source = labels[i];
        if (uniform01(rng) < cfg.flip_noise) source = 1 - source;
        const std::size_t len = cfg.min_len + uniform_index(rng, cfg.max_len - cfg.min_len + 1);
        std::vector<std::string> words;
        for (std::size_t t = 0; t < len; ++t) {
            const double u = uniform01(rng);
            const auto r = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            words.push_back("w" + std::to_string(std::min(r, cfg.vocab_size - 1)));
        }
        auto plant = [&](const std::vector<std::string>& vocab, double rate, double phrase) {
            for (const auto& kw : vocab)
                if (uniform01(rng) < rate) {
                    const auto pos = uniform_index(rng, words.size() + 1);
                    const auto at = words.begin() + static_cast<std::ptrdiff_t>(pos);
                    if (phrase > 0.0 && uniform01(rng) < phrase)
                        words.insert(at, {kw, kw + "p"});
                    else
                        words.insert(at, kw);
                }
        };
        for (int c = 0; c < 2; ++c) {
            const auto k = static_cast<std::size_t>(c);
            plant(keywords[k], c == source ? cfg.own_rate : cfg.other_rate, cfg.phrase_rate);
            plant(topics[k], c == source ? cfg.topic_own_rate : cfg.topic_other_rate, 0.0);
        }
        std::string text;
        for (const auto& w : words) {
            if (!text.empty()) text += ' ';
            text += w;
        }
        Instance x;
        x.id = static_cast<std::int64_t>(i);
        auto tokens = tokenize(text);
        x.payload = TextPayload{std::move(text), std::move(tokens)};
        x.true_label = labels[i];
        instances.push_back(std::move(x));
    }
    return Dataset(DataKind::text, 2, std::move(instances));
}

Dataset make_synthetic_tabular(const SyntheticTabularConfig& cfg) {
    if (cfg.n < 30) throw ConfigError("synthetic tabular needs n >= 30");
    if (cfg.m_feat < 1) throw ConfigError("synthetic tabular needs m_feat >= 1");
    if (!(cfg.cluster_sep >= 0.0) || !std::isfinite(cfg.cluster_sep))
        throw ConfigError("cluster_sep must be a finite non-negative number");

    Rng rng(cfg.seed);
    const auto labels = balanced_labels(cfg.n, rng);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cfg.m_feat; ++j) names.push_back("f" + std::to_string(j));

    std::vector<Instance> instances;
    instances.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double centre = (labels[i] == 1 ? 0.5 : -0.5) * cfg.cluster_sep;
        FeatureVector f(cfg.m_feat);
        for (auto& v : f) v = centre + standard_normal(rng);
        Instance x;
        x.id = static_cast<std::int64_t>(i);
        x.payload = std::move(f);
        x.true_label = labels[i];
        instances.push_back(std::move(x));
    }
    return Dataset(DataKind::tabular, 2, std::move(instances), std::move(names));
}

}  // namespace activedp
