#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "art/errors.hpp"
#include "art/heads.hpp"

using namespace art;

namespace {

NodeRef zeros(std::vector<int> shape) { return make_leaf(Tensor(std::move(shape)), true); }

NodeRef rand_leaf(Rng& rng, std::vector<int> shape) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
    return make_leaf(std::move(t), true);
}

CrfHead rand_crf(Rng& rng, int k, int width) {
    CrfHead h;
    h.num_tags = k;
    h.emission = rand_leaf(rng, {k, width});
    h.transition = rand_leaf(rng, {k, k});
    h.start = rand_leaf(rng, {k});
    h.stop = rand_leaf(rng, {k});
    return h;
}

// Brute force over all K^n paths, on raw doubles.
struct Enumeration {
    double log_z = 0.0;
    std::vector<int> best_path;
    double best_score = -1e300;
    std::vector<double> path_scores;
};

Enumeration enumerate_paths(const std::vector<NodeRef>& states, const CrfHead& head) {
    const int n = static_cast<int>(states.size());
    const int k = head.num_tags;
    const int width = static_cast<int>(states[0]->size());
    std::vector<std::vector<double>> emit(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int t = 0; t < n; ++t) {
        for (int j = 0; j < k; ++j) {
            for (int w = 0; w < width; ++w)
                emit[t][j] += head.emission->value.at(j, w) * states[t]->value.data[w];
        }
    }
    Enumeration out;
    long long total = 1;
    for (int t = 0; t < n; ++t) total *= k;
    std::vector<int> path(static_cast<std::size_t>(n));
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        for (int t = n - 1; t >= 0; --t) {  // lexicographic order over paths
            path[static_cast<std::size_t>(t)] = static_cast<int>(c % k);
            c /= k;
        }
        double score = head.start->value.data[path[0]] + emit[0][path[0]];
        for (int t = 1; t < n; ++t)
            score += head.transition->value.at(path[t - 1], path[t]) + emit[t][path[t]];
        score += head.stop->value.data[path[static_cast<std::size_t>(n - 1)]];
        out.path_scores.push_back(score);
        if (score > out.best_score) {
            out.best_score = score;
            out.best_path = path;
        }
    }
    double m = *std::max_element(out.path_scores.begin(), out.path_scores.end());
    double z = 0.0;
    for (double s : out.path_scores) z += std::exp(s - m);
    out.log_z = m + std::log(z);
    return out;
}

double gold_path_score(const std::vector<NodeRef>& states, const std::vector<int>& tags,
                       const CrfHead& head) {
    const int n = static_cast<int>(states.size());
    const int width = static_cast<int>(states[0]->size());
    auto emit = [&](int t, int j) {
        double e = 0.0;
        for (int w = 0; w < width; ++w)
            e += head.emission->value.at(j, w) * states[static_cast<std::size_t>(t)]->value.data[w];
        return e;
    };
    double score = head.start->value.data[tags[0]] + emit(0, tags[0]);
    for (int t = 1; t < n; ++t)
        score += head.transition->value.at(tags[t - 1], tags[t]) + emit(t, tags[t]);
    return score + head.stop->value.data[tags[static_cast<std::size_t>(n - 1)]];
}

}  // namespace

TEST_CASE("classifier with zero parameters scores one half") {
    Rng rng(1);
    ClassifierHead head{zeros({1, 4}), zeros({1})};
    std::vector<NodeRef> states = {rand_leaf(rng, {4}), rand_leaf(rng, {4})};
    NodeRef p = classify(states, head, 0.0, false, rng);
    CHECK(p->value.data[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("classifier pooling over one state is the identity") {
    Rng rng(2);
    ClassifierHead head{rand_leaf(rng, {1, 3}), rand_leaf(rng, {1})};
    NodeRef s = rand_leaf(rng, {3});
    NodeRef p1 = classify({s}, head, 0.0, false, rng);
    double manual = head.b_y->value.data[0];
    for (int k = 0; k < 3; ++k) manual += head.w_y->value.at(0, k) * s->value.data[k];
    manual = 1.0 / (1.0 + std::exp(-manual));
    CHECK(p1->value.data[0] == doctest::Approx(manual).epsilon(1e-12));
    CHECK_THROWS_AS(classify({}, head, 0.0, false, rng), ContractViolation);
}

TEST_CASE("classifier is invariant to the time order of states") {
    Rng rng(3);
    ClassifierHead head{rand_leaf(rng, {1, 4}), rand_leaf(rng, {1})};
    std::vector<NodeRef> states = {rand_leaf(rng, {4}), rand_leaf(rng, {4}), rand_leaf(rng, {4})};
    std::vector<NodeRef> shuffled = {states[2], states[0], states[1]};
    NodeRef a = classify(states, head, 0.0, false, rng);
    NodeRef b = classify(shuffled, head, 0.0, false, rng);
    CHECK(a->value.data[0] == b->value.data[0]);
}

TEST_CASE("maxpool gradient routes to argmax positions") {
    Rng rng(4);
    ClassifierHead head{rand_leaf(rng, {1, 3}), rand_leaf(rng, {1})};
    std::vector<NodeRef> states = {rand_leaf(rng, {3}), rand_leaf(rng, {3})};
    Rng drop(0);
    const double err =
        grad_check([&] { return bce_loss(classify(states, head, 0.0, false, drop), 1); },
                   {states[0], states[1], head.w_y, head.b_y});
    CHECK(err < 1e-4);
}

TEST_CASE("bce at p=0.5 is log 2, at the correct limit it vanishes") {
    NodeRef half = make_leaf(Tensor::vector({0.5}), true);
    CHECK(bce_loss(half, 1)->value.data[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    NodeRef sure = make_leaf(Tensor::vector({1.0}), true);
    CHECK(bce_loss(sure, 1)->value.data[0] == doctest::Approx(0.0).epsilon(1e-9));
    NodeRef sure0 = make_leaf(Tensor::vector({0.0}), true);
    CHECK(bce_loss(sure0, 0)->value.data[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(bce_loss(half, 2), ContractViolation);
}

TEST_CASE("bce gradient matches (p - y) / (p (1 - p))") {
    for (int label : {0, 1}) {
        NodeRef p = make_leaf(Tensor::vector({0.3}), true);
        backward(bce_loss(p, label));
        const double expected = (0.3 - label) / (0.3 * 0.7);
        CHECK(p->grad.data[0] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("uniform crf has log Z equal to log of the path count") {
    CrfHead head;
    head.num_tags = 2;
    head.emission = zeros({2, 3});
    head.transition = zeros({2, 2});
    head.start = zeros({2});
    head.stop = zeros({2});
    Rng rng(5);
    std::vector<NodeRef> states = {rand_leaf(rng, {3}), rand_leaf(rng, {3})};
    NodeRef ll = crf_log_likelihood(states, {0, 1}, head);
    CHECK(ll->value.data[0] == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("single-position crf reduces to a log softmax") {
    Rng rng(6);
    CrfHead head = rand_crf(rng, 3, 2);
    NodeRef state = rand_leaf(rng, {2});
    for (int y = 0; y < 3; ++y) {
        NodeRef ll = crf_log_likelihood({state}, {y}, head);
        std::vector<double> logits(3, 0.0);
        for (int j = 0; j < 3; ++j) {
            logits[j] = head.start->value.data[j] + head.stop->value.data[j];
            for (int w = 0; w < 2; ++w)
                logits[j] += head.emission->value.at(j, w) * state->value.data[w];
        }
        double m = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double l : logits) z += std::exp(l - m);
        const double expected = logits[y] - (m + std::log(z));
        CHECK(ll->value.data[0] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("crf log likelihood matches exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        const int k = 2 + rng.uniform_int(3);
        const int n = 1 + rng.uniform_int(5);
        const int width = 2 + rng.uniform_int(2);
        CrfHead head = rand_crf(rng, k, width);
        std::vector<NodeRef> states;
        std::vector<int> tags;
        for (int t = 0; t < n; ++t) {
            states.push_back(rand_leaf(rng, {width}));
            tags.push_back(rng.uniform_int(k));
        }
        Enumeration oracle = enumerate_paths(states, head);
        const double gold = gold_path_score(states, tags, head);
        NodeRef ll = crf_log_likelihood(states, tags, head);
        CHECK(std::fabs(ll->value.data[0] - (gold - oracle.log_z)) < 1e-8);
    }
}

TEST_CASE("crf path probabilities normalize over the enumeration") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(100 + seed);
        const int k = 2 + rng.uniform_int(3);
        const int n = 1 + rng.uniform_int(5);
        CrfHead head = rand_crf(rng, k, 2);
        std::vector<NodeRef> states;
        for (int t = 0; t < n; ++t) states.push_back(rand_leaf(rng, {2}));
        Enumeration oracle = enumerate_paths(states, head);
        double total = 0.0;
        for (double s : oracle.path_scores) total += std::exp(s - oracle.log_z);
        CHECK(std::fabs(total - 1.0) < 1e-8);
    }
}

TEST_CASE("viterbi matches the brute-force argmax") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(200 + seed);
        const int k = 2 + rng.uniform_int(3);
        const int n = 1 + rng.uniform_int(5);
        CrfHead head = rand_crf(rng, k, 2);
        std::vector<NodeRef> states;
        for (int t = 0; t < n; ++t) states.push_back(rand_leaf(rng, {2}));
        Enumeration oracle = enumerate_paths(states, head);
        auto [path, score] = viterbi_decode(states, head);
        CHECK(path == oracle.best_path);
        CHECK(score == doctest::Approx(oracle.best_score).epsilon(1e-10));
    }
}

TEST_CASE("viterbi with peaked emissions and zero transitions is per-token argmax") {
    CrfHead head;
    head.num_tags = 3;
    head.emission = make_leaf(Tensor::matrix(3, 3, {9, 0, 0, 0, 9, 0, 0, 0, 9}), true);
    head.transition = zeros({3, 3});
    head.start = zeros({3});
    head.stop = zeros({3});
    std::vector<NodeRef> states = {make_leaf(Tensor::vector({1, 0, 0}), true),
                                   make_leaf(Tensor::vector({0, 0, 1}), true),
                                   make_leaf(Tensor::vector({0, 1, 0}), true)};
    auto [path, score] = viterbi_decode(states, head);
    CHECK(path == std::vector<int>{0, 2, 1});
}

TEST_CASE("viterbi n=1 is an argmax and ties break to the lower tag") {
    CrfHead head;
    head.num_tags = 3;
    head.emission = zeros({3, 2});
    head.transition = zeros({3, 3});
    head.start = zeros({3});
    head.stop = zeros({3});
    NodeRef state = make_leaf(Tensor::vector({0.0, 0.0}), true);
    auto [path, score] = viterbi_decode({state}, head);
    CHECK(path == std::vector<int>{0});  // exact tie across all tags
}

TEST_CASE("viterbi score dominates the gold path score") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(300 + seed);
        const int k = 2 + rng.uniform_int(3);
        const int n = 1 + rng.uniform_int(5);
        CrfHead head = rand_crf(rng, k, 2);
        std::vector<NodeRef> states;
        std::vector<int> tags;
        for (int t = 0; t < n; ++t) {
            states.push_back(rand_leaf(rng, {2}));
            tags.push_back(rng.uniform_int(k));
        }
        auto [path, best] = viterbi_decode(states, head);
        CHECK(best >= gold_path_score(states, tags, head) - 1e-9);
    }
}

TEST_CASE("crf rejects invalid tag ids") {
    Rng rng(7);
    CrfHead head = rand_crf(rng, 2, 2);
    std::vector<NodeRef> states = {rand_leaf(rng, {2})};
    CHECK_THROWS_AS(crf_log_likelihood(states, {5}, head), ContractViolation);
    CHECK_THROWS_AS(crf_log_likelihood(states, {0, 1}, head), ContractViolation);
}

TEST_CASE("softmax tagging loss ignores transitions") {
    Rng rng(8);
    CrfHead head = rand_crf(rng, 3, 2);
    NodeRef state = rand_leaf(rng, {2});
    NodeRef loss = tag_softmax_loss({state}, {1}, head);
    std::vector<double> logits(3, 0.0);
    for (int j = 0; j < 3; ++j) {
        for (int w = 0; w < 2; ++w)
            logits[j] += head.emission->value.at(j, w) * state->value.data[w];
    }
    double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - m);
    CHECK(loss->value.data[0] == doctest::Approx(-(logits[1] - m - std::log(z))).epsilon(1e-10));
}

TEST_CASE("char cnn with zero filters is zero") {
    CharCnnEmbedder emb;
    emb.char_dim = 2;
    emb.width = 3;
    emb.n_filters = 50;
    Rng rng(9);
    emb.table = rand_leaf(rng, {5, 2});
    emb.filters = zeros({50, 6});
    emb.bias = zeros({50});
    NodeRef out = char_cnn_embed({1, 2, 3, 4}, emb);
    REQUIRE(out->size() == 50);
    for (double v : out->value.data) CHECK(v == 0.0);
}

TEST_CASE("char cnn pads single characters and keeps output width") {
    CharCnnEmbedder emb;
    emb.char_dim = 3;
    emb.width = 3;
    emb.n_filters = 50;
    Rng rng(10);
    emb.table = rand_leaf(rng, {6, 3});
    emb.filters = rand_leaf(rng, {50, 9});
    emb.bias = rand_leaf(rng, {50});
    NodeRef out = char_cnn_embed({4}, emb);
    CHECK(out->size() == 50);
    CHECK_THROWS_AS(char_cnn_embed({}, emb), ContractViolation);
}

TEST_CASE("char cnn gradient through max-over-time") {
    CharCnnEmbedder emb;
    emb.char_dim = 2;
    emb.width = 3;
    emb.n_filters = 4;
    Rng rng(11);
    emb.table = rand_leaf(rng, {5, 2});
    emb.filters = rand_leaf(rng, {4, 6});
    emb.bias = rand_leaf(rng, {4});
    const double err = grad_check([&] { return sum(char_cnn_embed({1, 3, 2, 4, 0}, emb)); },
                                  {emb.table, emb.filters, emb.bias});
    CHECK(err < 1e-4);
}

TEST_CASE("entity span extraction follows bio conventions") {
    auto spans = extract_entity_spans({"B-PER", "I-PER", "O", "B-LOC", "B-LOC", "I-ORG"});
    REQUIRE(spans.size() == 4);
    CHECK(spans[0] == EntitySpan{0, 2, "PER"});
    CHECK(spans[1] == EntitySpan{3, 4, "LOC"});
    CHECK(spans[2] == EntitySpan{4, 5, "LOC"});
    CHECK(spans[3] == EntitySpan{5, 6, "ORG"});  // orphan I- starts a span

    CHECK(extract_entity_spans({"O", "O"}).empty());
    auto tail = extract_entity_spans({"O", "B-X", "I-X"});
    REQUIRE(tail.size() == 1);
    CHECK(tail[0] == EntitySpan{1, 3, "X"});
}

TEST_CASE("metrics agree with a naive reference counter") {
    std::vector<std::vector<int>> gold = {{0, 1, 2}, {1, 1, 0, 2}};
    std::vector<std::vector<int>> pred = {{0, 1, 1}, {1, 0, 0, 2}};
    CHECK(token_accuracy(gold, pred) == doctest::Approx(5.0 / 7.0));

    std::vector<std::vector<std::string>> gold_tags = {{"B-PER", "I-PER", "O", "B-LOC"}};
    std::vector<std::vector<std::string>> pred_tags = {{"B-PER", "I-PER", "B-LOC", "O"}};
    // tp = 1, fp = 1, fn = 1: precision = recall = f1 = 0.5
    CHECK(span_f1(gold_tags, pred_tags) == doctest::Approx(0.5));
    CHECK(span_f1(gold_tags, gold_tags) == doctest::Approx(1.0));
    CHECK(span_f1(gold_tags, {{"O", "O", "O", "O"}}) == doctest::Approx(0.0));
}
