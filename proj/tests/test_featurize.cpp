#include <doctest.h>

#include "activedp/core.hpp"
#include "activedp/featurize.hpp"

using namespace activedp;

TEST_CASE("tokenize lowercases, splits and drops short tokens") {
    CHECK(tokenize("Check OUT my-channel!! a 42") == TokenList{"check", "out", "my", "channel", "42"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("x y z").empty());
}

TEST_CASE("vocabulary ranks by document frequency then token") {
    const std::vector<TokenList> docs{{"bb", "bb", "aa"}, {"bb", "cc"}, {"dd", "cc"}};
    const auto v = build_vocab(docs, 10);
    CHECK(v.tokens == std::vector<std::string>{"bb", "cc", "aa", "dd"});
    CHECK(v.doc_freq == std::vector<std::size_t>{2, 2, 1, 1});
    CHECK(v.n_docs == 3);
    const auto capped = build_vocab(docs, 2);
    CHECK(capped.tokens == std::vector<std::string>{"bb", "cc"});
}

TEST_CASE("tf-idf matches smoothed idf with l2-normalised rows") {
    // Expected values: idf = ln((1+N)/(1+df)) + 1 computed by hand with N = 2.
    const std::vector<TokenList> docs{{"aa", "bb", "bb"}, {"bb", "cc"}};
    const auto v = build_vocab(docs, 10);
    REQUIRE(v.tokens == std::vector<std::string>{"bb", "aa", "cc"});
    const auto x = tfidf(docs, v);
    CHECK(x.coeff(0, 0) == doctest::Approx(0.8181802073667197).epsilon(1e-12));
    CHECK(x.coeff(0, 1) == doctest::Approx(0.5749618667993135).epsilon(1e-12));
    CHECK(x.coeff(0, 2) == 0.0);
    CHECK(x.coeff(1, 0) == doctest::Approx(0.5797386715).epsilon(1e-9));
    CHECK(x.coeff(1, 2) == doctest::Approx(0.8148024747).epsilon(1e-9));

    // unseen tokens are ignored; an all-unknown document is an empty row
    const std::vector<TokenList> other{{"zz"}, {"cc", "qq"}};
    const auto y = tfidf(other, v);
    CHECK(y.row(0).nonZeros() == 0);
    CHECK(y.coeff(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("tabular standardisation uses train moments") {
    Eigen::MatrixXd train(3, 2);
    train << 1, 10, 3, 10, 5, 10;
    Eigen::MatrixXd apply(1, 2);
    apply << 7, 3;
    const auto z = standardize_tabular(train, apply);
    CHECK(z(0, 0) == doctest::Approx(2.449489742783178).epsilon(1e-12));
    CHECK(z(0, 1) == 0.0);  // constant train column
}

TEST_CASE("featurize fits on the train split only") {
    std::vector<Instance> xs;
    xs.push_back({0, TextPayload{"", {"aa", "bb"}}, 0});
    xs.push_back({1, TextPayload{"", {"aa"}}, 1});
    xs.push_back({2, TextPayload{"", {"cc"}}, 0});
    const Dataset d = Dataset(DataKind::text, 2, xs).with_splits({Split::train, Split::train, Split::test});
    const auto x = featurize_dataset(d);
    CHECK(x.cols() == 2);  // "cc" only appears outside train
    CHECK(x.row(2).nonZeros() == 0);
    const std::vector<std::size_t> rows{1, 0};
    const auto g = gather_rows(x, rows);
    CHECK(g.coeff(0, 0) == x.coeff(1, 0));
    CHECK(g.coeff(1, 1) == x.coeff(0, 1));
}
