#include "art/heads.hpp"

#include <algorithm>
#include <cmath>

#include "art/errors.hpp"
#include "art/kernels.hpp"

namespace art {

ClassifierHead make_classifier_head(ParamStore& store, const std::string& prefix, int input,
                                    Rng& rng) {
    ClassifierHead h;
    h.w_y = store.create(prefix + ".W_y", init_glorot(rng, 1, input));
    h.b_y = store.create(prefix + ".b_y", init_zeros(1));
    return h;
}

NodeRef classify(const std::vector<NodeRef>& states, const ClassifierHead& head, double dropout_p,
                 bool training, Rng& rng) {
    if (states.empty()) throw ContractViolation("classify: empty state sequence");
    NodeRef pooled = max_over_time(states);
    pooled = dropout(pooled, dropout_p, training, rng);
    return sigmoid(add(matvec(head.w_y, pooled), head.b_y));
}

NodeRef bce_loss(const NodeRef& p, int label) {
    if (label != 0 && label != 1)
        throw ContractViolation("bce_loss: label must be 0 or 1, got " + std::to_string(label));
    NodeRef pc = clamp(p, 1e-12, 1.0 - 1e-12);
    if (label == 1) return scale(log_op(pc), -1.0);
    return scale(log_op(axpb(pc, -1.0, 1.0)), -1.0);
}

CrfHead make_crf_head(ParamStore& store, const std::string& prefix, int input, int num_tags,
                      Rng& rng) {
    if (num_tags < 2) throw ConfigError("CRF head needs at least 2 tags");
    CrfHead h;
    h.num_tags = num_tags;
    h.emission = store.create(prefix + ".emission", init_glorot(rng, num_tags, input));
    h.transition = store.create(prefix + ".transition", Tensor({num_tags, num_tags}));
    h.start = store.create(prefix + ".start", init_zeros(num_tags));
    h.stop = store.create(prefix + ".stop", init_zeros(num_tags));
    return h;
}

namespace {

void check_tags(const std::vector<int>& tags, std::size_t n, int num_tags) {
    if (tags.size() != n)
        throw ContractViolation("crf: " + std::to_string(tags.size()) + " tags for " +
                                std::to_string(n) + " states");
    for (int t : tags) {
        if (t < 0 || t >= num_tags)
            throw ContractViolation("crf: invalid tag id " + std::to_string(t));
    }
}

}  // namespace

NodeRef crf_log_likelihood(const std::vector<NodeRef>& states, const std::vector<int>& tags,
                           const CrfHead& head) {
    if (states.empty()) throw ContractViolation("crf_log_likelihood: empty sequence");
    const int n = static_cast<int>(states.size());
    const int k = head.num_tags;
    check_tags(tags, states.size(), k);

    std::vector<NodeRef> emissions;
    emissions.reserve(states.size());
    for (const auto& s : states) emissions.push_back(matvec(head.emission, s));

    // gold path score
    NodeRef score = add(pick(head.start, tags[0]), pick(emissions[0], tags[0]));
    for (int t = 1; t < n; ++t) {
        score = add(score, pick_rc(head.transition, tags[t - 1], tags[t]));
        score = add(score, pick(emissions[t], tags[t]));
    }
    score = add(score, pick(head.stop, tags[n - 1]));

    // log partition, forward algorithm in log space
    NodeRef alpha = add(head.start, emissions[0]);
    for (int t = 1; t < n; ++t) {
        std::vector<NodeRef> next;
        next.reserve(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            next.push_back(logsumexp(add(alpha, matrix_column(head.transition, j))));
        alpha = add(stack_scalars(next), emissions[t]);
    }
    NodeRef log_z = logsumexp(add(alpha, head.stop));
    return sub(score, log_z);
}

NodeRef tag_softmax_loss(const std::vector<NodeRef>& states, const std::vector<int>& tags,
                         const CrfHead& head) {
    if (states.empty()) throw ContractViolation("tag_softmax_loss: empty sequence");
    check_tags(tags, states.size(), head.num_tags);
    NodeRef loss;
    for (std::size_t t = 0; t < states.size(); ++t) {
        NodeRef e = matvec(head.emission, states[t]);
        NodeRef term = sub(logsumexp(e), pick(e, tags[t]));
        loss = loss ? add(loss, term) : term;
    }
    return loss;
}

std::pair<std::vector<int>, double> viterbi_decode(const std::vector<NodeRef>& states,
                                                   const CrfHead& head) {
    if (states.empty()) throw ContractViolation("viterbi_decode: empty sequence");
    const int n = static_cast<int>(states.size());
    const int k = head.num_tags;
    const Tensor& trans = head.transition->value;

    std::vector<std::vector<double>> emit(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(k)));
    for (int t = 0; t < n; ++t)
        kernels::matvec(head.emission->value.data.data(), states[t]->value.data.data(),
                        emit[t].data(), k, static_cast<int>(states[t]->size()));

    std::vector<double> score(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) score[j] = head.start->value.data[j] + emit[0][j];

    std::vector<std::vector<int>> backptr(static_cast<std::size_t>(n),
                                          std::vector<int>(static_cast<std::size_t>(k), 0));
    std::vector<double> next(static_cast<std::size_t>(k));
    for (int t = 1; t < n; ++t) {
        for (int j = 0; j < k; ++j) {
            int best_i = 0;
            double best = score[0] + trans.at(0, j);
            for (int i = 1; i < k; ++i) {
                const double s = score[i] + trans.at(i, j);
                if (s > best) {  // strict: ties keep the lower tag id
                    best = s;
                    best_i = i;
                }
            }
            next[j] = best + emit[t][j];
            backptr[t][j] = best_i;
        }
        score.swap(next);
    }
    for (int j = 0; j < k; ++j) score[j] += head.stop->value.data[j];

    int best_j = 0;
    for (int j = 1; j < k; ++j) {
        if (score[j] > score[best_j]) best_j = j;
    }
    std::vector<int> path(static_cast<std::size_t>(n));
    path[n - 1] = best_j;
    for (int t = n - 1; t > 0; --t) path[t - 1] = backptr[t][path[t]];
    return {path, score[best_j]};
}

CharCnnEmbedder make_char_cnn(ParamStore& store, const std::string& prefix, int alphabet,
                              int char_dim, int n_filters, int width, Rng& rng) {
    CharCnnEmbedder e;
    e.char_dim = char_dim;
    e.width = width;
    e.n_filters = n_filters;
    e.table = store.create(prefix + ".table", init_glorot(rng, alphabet, char_dim));
    e.filters = store.create(prefix + ".filters", init_glorot(rng, n_filters, width * char_dim));
    e.bias = store.create(prefix + ".bias", init_zeros(n_filters));
    return e;
}

NodeRef char_cnn_embed(const std::vector<int>& char_ids, const CharCnnEmbedder& emb) {
    if (char_ids.empty()) throw ContractViolation("char_cnn_embed: empty token");
    std::vector<int> ids = char_ids;
    while (static_cast<int>(ids.size()) < emb.width) ids.push_back(0);  // pad char

    std::vector<NodeRef> rows;
    rows.reserve(ids.size());
    for (int id : ids) rows.push_back(matrix_row(emb.table, id));

    std::vector<NodeRef> responses;
    for (std::size_t t = 0; t + emb.width <= ids.size(); ++t) {
        std::vector<NodeRef> window(rows.begin() + t, rows.begin() + t + emb.width);
        responses.push_back(affine(concat(window), emb.filters, emb.bias));
    }
    return max_over_time(responses);
}

std::vector<EntitySpan> extract_entity_spans(const std::vector<std::string>& tags) {
    std::vector<EntitySpan> spans;
    EntitySpan current;
    bool open = false;
    auto close = [&](int end) {
        if (open) {
            current.end = end;
            spans.push_back(current);
            open = false;
        }
    };
    for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
        const std::string& tag = tags[i];
        if (tag.size() >= 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
            const std::string type = tag.substr(2);
            if (tag[0] == 'B' || !open || current.type != type) {
                close(i);
                current = EntitySpan{i, i + 1, type};
                open = true;
            }
        } else {
            close(i);
        }
    }
    close(static_cast<int>(tags.size()));
    return spans;
}

double token_accuracy(const std::vector<std::vector<int>>& gold,
                      const std::vector<std::vector<int>>& predicted) {
    std::size_t correct = 0, total = 0;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        for (std::size_t t = 0; t < gold[s].size(); ++t) {
            total += 1;
            if (predicted[s][t] == gold[s][t]) correct += 1;
        }
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

double span_f1(const std::vector<std::vector<std::string>>& gold,
               const std::vector<std::vector<std::string>>& predicted) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        auto g = extract_entity_spans(gold[s]);
        auto p = extract_entity_spans(predicted[s]);
        for (const auto& span : p) {
            if (std::find(g.begin(), g.end(), span) != g.end())
                tp += 1;
            else
                fp += 1;
        }
        for (const auto& span : g) {
            if (std::find(p.begin(), p.end(), span) == p.end()) fn += 1;
        }
    }
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace art
