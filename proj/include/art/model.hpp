#pragma once

#include <optional>

#include "art/config.hpp"
#include "art/data.hpp"
#include "art/heads.hpp"

namespace art {

struct ModelForward {
    NodeRef loss;
    NodeRef prob;                     // classification
    std::vector<int> predicted_tags;  // tagging, filled when decode requested
    std::vector<AttentionTrace> traces;
};

struct ForwardOptions {
    bool training = false;
    int pad_to = 0;  // batch pad length; 0 = no padding
    bool want_traces = false;
    bool decode = false;
    std::uint64_t dropout_seed = 0;
};

// Source encoder + target encoder + task heads over one shared embedding
// table. Which pieces exist depends on the mode: transfer modes carry the
// source stack and its pretraining head, plain modes are a single
// bidirectional LSTM with the task head.
class TransferModel {
public:
    TransferModel(const TrainingConfig& cfg, Vocabulary words, Vocabulary chars,
                  Vocabulary target_tags, Vocabulary source_tags);

    // Overwrites embedding rows for tokens present in the file.
    void init_embeddings(const EmbeddingFile& emb);

    // Target-task path (the network evaluated on the target domain).
    ModelForward forward_target(const Example& e, const ForwardOptions& opts) const;
    // Source-task path used for pretraining; transfer modes only.
    ModelForward forward_source(const Example& e, const ForwardOptions& opts) const;

    const TrainingConfig& config() const { return cfg_; }
    const Vocabulary& words() const { return words_; }
    const Vocabulary& chars() const { return chars_; }
    const Vocabulary& target_tags() const { return tags_; }
    const Vocabulary& source_tags() const { return source_tags_; }

    bool has_source_stack() const { return mode_uses_transfer(cfg_.mode); }
    // Entry names of the pretrained source stack (prefix match).
    static bool is_source_param(const std::string& name);
    void set_source_trainable(bool trainable);

    // Reduction-identity test hooks.
    void pin_update_gate_zero(bool on);
    void pin_concentrate_one(bool on);

    ParamStore store;

private:
    std::vector<NodeRef> embed(const Example& e) const;
    ModelForward head_forward(const std::vector<NodeRef>& states, const Example& e,
                              const ForwardOptions& opts, const ClassifierHead& cls,
                              const CrfHead& crf, Rng& rng) const;

    TrainingConfig cfg_;
    Vocabulary words_, chars_, tags_, source_tags_;

    NodeRef word_table_;
    std::optional<CharCnnEmbedder> char_cnn_;

    std::optional<LstmParams> src_fwd_, src_bwd_;
    std::optional<ClassifierHead> src_cls_head_;
    std::optional<CrfHead> src_crf_head_;

    TargetEncoder target_;
    std::optional<ClassifierHead> cls_head_;
    std::optional<CrfHead> crf_head_;
};

}  // namespace art
