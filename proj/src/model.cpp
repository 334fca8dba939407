#include "art/model.hpp"

#include <algorithm>

#include "art/errors.hpp"

namespace art {

namespace {

// Transfer modes share θ_T plus whatever the ablation actually evaluates.
ArtLstmParams make_target_params(ParamStore& store, const std::string& prefix,
                                 const TrainingConfig& cfg, int input, Rng& rng) {
    ArtLstmParams p;
    const int d = cfg.hidden;
    p.target_lstm = make_lstm_params(store, prefix + ".lstm", input, d, rng);
    if (cfg.mode == TransferMode::full_art || cfg.mode == TransferMode::lwt ||
        cfg.mode == TransferMode::cct) {
        p.fuse_h = make_fusion_params(store, prefix + ".fuse_h", input, d, rng);
        p.fuse_c = make_fusion_params(store, prefix + ".fuse_c", input, d, rng);
    }
    if (cfg.mode == TransferMode::full_art || cfg.mode == TransferMode::lwt) {
        p.attn_h = make_attention_params(store, prefix + ".attn_h", d, cfg.resolved_attn_dim(), rng);
        p.attn_c = make_attention_params(store, prefix + ".attn_c", d, cfg.resolved_attn_dim(), rng);
        p.conc_h = make_concentrate_params(store, prefix + ".conc_h", d, rng);
        p.conc_c = make_concentrate_params(store, prefix + ".conc_c", d, rng);
    }
    return p;
}

}  // namespace

TransferModel::TransferModel(const TrainingConfig& cfg, Vocabulary words, Vocabulary chars,
                             Vocabulary target_tags, Vocabulary source_tags)
    : cfg_(cfg),
      words_(std::move(words)),
      chars_(std::move(chars)),
      tags_(std::move(target_tags)),
      source_tags_(std::move(source_tags)) {
    cfg_.validate();
    Rng rng(mix_seed(cfg_.seed, 0x1417));

    word_table_ = store.create("embed.word", init_glorot(rng, words_.size(), cfg_.word_dim));

    int input = cfg_.word_dim;
    if (cfg_.task == Task::tagging) {
        char_cnn_ = make_char_cnn(store, "embed.char", chars_.size(), cfg_.char_table_dim,
                                  cfg_.char_filters, cfg_.char_filter_width, rng);
        input += cfg_.char_filters;
    }

    const int d = cfg_.hidden;
    if (mode_uses_transfer(cfg_.mode)) {
        src_fwd_ = make_lstm_params(store, "source.fwd", input, d, rng);
        src_bwd_ = make_lstm_params(store, "source.bwd", input, d, rng);
        if (cfg_.task == Task::classification) {
            src_cls_head_ = make_classifier_head(store, "source.head", 2 * d, rng);
        } else {
            src_crf_head_ = make_crf_head(store, "source.head", 2 * d, source_tags_.size(), rng);
        }
    }

    target_ = build_ablation(cfg_.mode, make_target_params(store, "target.fwd", cfg_, input, rng),
                             make_target_params(store, "target.bwd", cfg_, input, rng),
                             cfg_.task == Task::tagging);

    if (cfg_.task == Task::classification) {
        cls_head_ = make_classifier_head(store, "target.head", 2 * d, rng);
    } else {
        crf_head_ = make_crf_head(store, "target.head", 2 * d, tags_.size(), rng);
    }
}

void TransferModel::init_embeddings(const EmbeddingFile& emb) {
    if (emb.width != cfg_.word_dim)
        throw ConfigError("embedding width " + std::to_string(emb.width) + " does not match " +
                          "word_dim " + std::to_string(cfg_.word_dim));
    Tensor& table = word_table_->value;
    for (std::size_t i = 0; i < emb.tokens.size(); ++i) {
        if (!words_.contains(emb.tokens[i])) continue;
        const int id = words_.lookup(emb.tokens[i]);
        for (int k = 0; k < cfg_.word_dim; ++k) table.at(id, k) = emb.rows[i][static_cast<std::size_t>(k)];
    }
}

bool TransferModel::is_source_param(const std::string& name) {
    return name.rfind("source.", 0) == 0;
}

void TransferModel::set_source_trainable(bool trainable) {
    for (auto& [name, e] : store.entries()) {
        if (is_source_param(name)) e.node->requires_grad = trainable;
    }
}

void TransferModel::pin_update_gate_zero(bool on) {
    target_.fwd.pin_update_gate_zero = on;
    target_.bwd.pin_update_gate_zero = on;
}

void TransferModel::pin_concentrate_one(bool on) {
    target_.fwd.pin_concentrate_one = on;
    target_.bwd.pin_concentrate_one = on;
}

std::vector<NodeRef> TransferModel::embed(const Example& e) const {
    if (e.token_ids.empty())
        throw ContractViolation("model: example has no token ids (numericalize first)");
    std::vector<NodeRef> xs;
    xs.reserve(e.token_ids.size());
    for (std::size_t i = 0; i < e.token_ids.size(); ++i) {
        NodeRef w = matrix_row(word_table_, e.token_ids[i]);
        if (cfg_.task == Task::tagging) {
            if (e.char_ids.size() != e.token_ids.size())
                throw ContractViolation("model: tagging example lacks char ids");
            xs.push_back(concat({w, char_cnn_embed(e.char_ids[i], *char_cnn_)}));
        } else {
            xs.push_back(w);
        }
    }
    return xs;
}

ModelForward TransferModel::head_forward(const std::vector<NodeRef>& states, const Example& e,
                                         const ForwardOptions& opts, const ClassifierHead& cls,
                                         const CrfHead& crf, Rng& rng) const {
    ModelForward out;
    if (cfg_.task == Task::classification) {
        out.prob = classify(states, cls, cfg_.dropout, opts.training, rng);
        if (e.label >= 0) out.loss = bce_loss(out.prob, e.label);
    } else {
        // dropout on the concatenated bidirectional outputs, before emission
        std::vector<NodeRef> dropped;
        dropped.reserve(states.size());
        for (const auto& s : states)
            dropped.push_back(dropout(s, cfg_.dropout, opts.training, rng));
        if (!e.tag_ids.empty()) {
            out.loss = cfg_.crf_loss ? scale(crf_log_likelihood(dropped, e.tag_ids, crf), -1.0)
                                     : tag_softmax_loss(dropped, e.tag_ids, crf);
        }
        if (opts.decode) out.predicted_tags = viterbi_decode(dropped, crf).first;
    }
    return out;
}

ModelForward TransferModel::forward_target(const Example& e, const ForwardOptions& opts) const {
    Rng rng(mix_seed(opts.dropout_seed, 0xd20b));
    std::vector<NodeRef> xs = embed(e);
    const int n = static_cast<int>(xs.size());
    const int pad_to = std::max(opts.pad_to, n);

    std::vector<AttentionTrace> traces;
    std::vector<NodeRef> states;
    if (mode_uses_transfer(cfg_.mode)) {
        SourceEncoding enc_fwd = encode_source(xs, *src_fwd_, nullptr, nullptr, pad_to);
        std::vector<NodeRef> xs_rev(xs.rbegin(), xs.rend());
        SourceEncoding enc_bwd = encode_source(xs_rev, *src_bwd_, nullptr, nullptr, pad_to);
        if (cfg_.mode == TransferMode::full_art || cfg_.mode == TransferMode::lwt) {
            precompute_keys(enc_fwd, target_.fwd.attn_h, target_.fwd.attn_c);
            precompute_keys(enc_bwd, target_.bwd.attn_h, target_.bwd.attn_c);
        }
        states = target_.encode(xs, &enc_fwd, &enc_bwd, opts.want_traces ? &traces : nullptr);
    } else {
        states = target_.encode(xs, nullptr, nullptr, nullptr);
    }

    ModelForward out = head_forward(states, e, opts, cls_head_ ? *cls_head_ : ClassifierHead{},
                                    crf_head_ ? *crf_head_ : CrfHead{}, rng);
    out.traces = std::move(traces);
    return out;
}

ModelForward TransferModel::forward_source(const Example& e, const ForwardOptions& opts) const {
    if (!mode_uses_transfer(cfg_.mode))
        throw ContractViolation("forward_source: mode " + transfer_mode_to_string(cfg_.mode) +
                                " has no separate source stack");
    Rng rng(mix_seed(opts.dropout_seed, 0xd20b));
    std::vector<NodeRef> xs = embed(e);
    const int n = static_cast<int>(xs.size());

    SourceEncoding enc_fwd = encode_source(xs, *src_fwd_);
    std::vector<NodeRef> xs_rev(xs.rbegin(), xs.rend());
    SourceEncoding enc_bwd = encode_source(xs_rev, *src_bwd_);

    std::vector<NodeRef> states;
    states.reserve(xs.size());
    for (int i = 0; i < n; ++i)
        states.push_back(concat({enc_fwd.h[static_cast<std::size_t>(i)],
                                 enc_bwd.h[static_cast<std::size_t>(n - 1 - i)]}));

    return head_forward(states, e, opts, src_cls_head_ ? *src_cls_head_ : ClassifierHead{},
                        src_crf_head_ ? *src_crf_head_ : CrfHead{}, rng);
}

}  // namespace art
