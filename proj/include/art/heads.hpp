#pragma once

#include <string>
#include <utility>
#include <vector>

#include "art/ops.hpp"
#include "art/param_store.hpp"

namespace art {

// Max-pool over time + perceptron + sigmoid, scoring the positive class.
struct ClassifierHead {
    NodeRef w_y;  // 1 x 2d
    NodeRef b_y;  // scalar
};

ClassifierHead make_classifier_head(ParamStore& store, const std::string& prefix, int input,
                                    Rng& rng);

// p = sigmoid(W_y maxpool(states) + b_y); dropout on the pooled vector.
NodeRef classify(const std::vector<NodeRef>& states, const ClassifierHead& head, double dropout_p,
                 bool training, Rng& rng);

// -y log p - (1-y) log(1-p), p clamped away from {0,1}.
NodeRef bce_loss(const NodeRef& p, int label);

// Linear-chain CRF over K tags: per-position emission scores plus tag-pair
// transition scores and start/stop scores.
struct CrfHead {
    NodeRef emission;    // K x 2d
    NodeRef transition;  // K x K, row = from tag, column = to tag
    NodeRef start;       // K
    NodeRef stop;        // K
    int num_tags = 0;
};

CrfHead make_crf_head(ParamStore& store, const std::string& prefix, int input, int num_tags,
                      Rng& rng);

// log p(tags | states) = score(tags) - log Z, with log Z by the forward
// algorithm in log space. Differentiable end to end.
NodeRef crf_log_likelihood(const std::vector<NodeRef>& states, const std::vector<int>& tags,
                           const CrfHead& head);

// Per-token softmax cross entropy over emissions, ignoring transitions.
// Alternative tagging loss, selected by configuration.
NodeRef tag_softmax_loss(const std::vector<NodeRef>& states, const std::vector<int>& tags,
                         const CrfHead& head);

// Max-product decoding; ties break toward the lower tag id.
std::pair<std::vector<int>, double> viterbi_decode(const std::vector<NodeRef>& states,
                                                   const CrfHead& head);

// Character-level CNN: embed chars, convolve 1d filters of fixed width over
// positions, max-pool over time. Output width = number of filters.
struct CharCnnEmbedder {
    NodeRef table;    // |C| x char_dim
    NodeRef filters;  // n_filters x (width * char_dim)
    NodeRef bias;     // n_filters
    int char_dim = 0;
    int width = 3;
    int n_filters = 50;
};

CharCnnEmbedder make_char_cnn(ParamStore& store, const std::string& prefix, int alphabet,
                              int char_dim, int n_filters, int width, Rng& rng);

// Tokens shorter than the filter width are padded with the pad char (id 0).
NodeRef char_cnn_embed(const std::vector<int>& char_ids, const CharCnnEmbedder& emb);

// --- evaluation metrics ---

// Entity span in a BIO tag sequence: [begin, end) with a type label.
struct EntitySpan {
    int begin = 0;
    int end = 0;
    std::string type;
    bool operator==(const EntitySpan&) const = default;
};

std::vector<EntitySpan> extract_entity_spans(const std::vector<std::string>& tags);

double token_accuracy(const std::vector<std::vector<int>>& gold,
                      const std::vector<std::vector<int>>& predicted);

// Entity-level F1 with exact boundary and type match.
double span_f1(const std::vector<std::vector<std::string>>& gold,
               const std::vector<std::vector<std::string>>& predicted);

}  // namespace art
