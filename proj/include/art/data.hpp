#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "art/rng.hpp"
#include "art/tensor.hpp"

namespace art {

// Token registry with reserved pad/unk slots. Non-reserved ids follow
// frequency order (descending), ties broken lexicographically.
class Vocabulary {
public:
    static constexpr int pad_id = 0;
    static constexpr int unk_id = 1;

    Vocabulary();

    int add(const std::string& token);  // idempotent, returns id
    int lookup(const std::string& token) const;  // unk_id when absent
    bool contains(const std::string& token) const;
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(id_to_token_.size()); }
    const std::vector<std::string>& tokens() const { return id_to_token_; }

    static Vocabulary build(const std::unordered_map<std::string, long long>& counts,
                            long long min_freq);

private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> token_to_id_;
};

struct Example {
    std::vector<std::string> tokens;
    std::vector<int> token_ids;
    std::vector<std::vector<int>> char_ids;  // per token, tagging only
    int label = -1;                          // classification
    std::vector<std::string> tags;           // tagging
    std::vector<int> tag_ids;
    bool from_source = false;
};

using Corpus = std::vector<Example>;

// --- embedding text format: "token v1 v2 ... v_width" per line ---

struct EmbeddingFile {
    std::vector<std::string> tokens;
    std::vector<std::vector<double>> rows;
    int width = 0;
};

EmbeddingFile load_embeddings_text(const std::string& path, int expected_width);
void save_embeddings_text(const std::string& path, const EmbeddingFile& emb);

// --- classification corpus: "label<TAB>whitespace tokenized text" ---

Corpus load_classification_tsv(const std::string& path, int* skipped_blank = nullptr);
void save_classification_tsv(const std::string& path, const Corpus& corpus);

// --- tagging corpus: "token<TAB>tag" lines, blank line between sentences ---

Corpus load_conll(const std::string& path);
void save_conll(const std::string& path, const Corpus& corpus);

// Deterministically retains round(fraction * n) sentences, original order.
Corpus subsample(const Corpus& corpus, double fraction, std::uint64_t seed);

// --- vocabulary / id assignment over a corpus ---

Vocabulary build_token_vocab(const std::vector<const Corpus*>& corpora, bool lowercase,
                             long long min_freq);
Vocabulary build_char_vocab(const std::vector<const Corpus*>& corpora);
Vocabulary build_tag_vocab(const std::vector<const Corpus*>& corpora);

void numericalize(Corpus& corpus, const Vocabulary& words, bool lowercase,
                  const Vocabulary* chars = nullptr, const Vocabulary* tags = nullptr);

// --- batching ---

// Shuffled index batches; the multiset of indices per epoch is exact.
std::vector<std::vector<int>> make_batches(int corpus_size, int batch_size, Rng& rng);
// Pad length for a batch (max sequence length in it).
int batch_pad_length(const Corpus& corpus, const std::vector<int>& batch);

// --- synthetic cross-domain task ---
//
// Sentences of filler words with exactly one class trigger. A modifier
// placed at offset >= min_offset flips the trigger's label, so a fraction of
// labels is decided by a long-range collocation. Source and target differ by
// a substitution map over the filler vocabulary.
struct SyntheticTaskSpec {
    std::vector<std::string> pos_triggers = {"tp0", "tp1", "tp2", "tp3"};
    std::vector<std::string> neg_triggers = {"tn0", "tn1", "tn2", "tn3"};
    std::vector<std::string> modifiers = {"mod0", "mod1"};
    int fillers = 20;
    double domain_shift = 1.0;  // fraction of fillers substituted in the target
    int min_len = 6;
    int max_len = 12;
    int min_offset = 3;  // modifier-to-trigger distance
    int max_offset = 5;
    double collocation_fraction = 0.3;  // examples whose label a modifier flips
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticData {
    Corpus source;
    Corpus target_train;
    Corpus target_test;
};

SyntheticData generate_synthetic_transfer(const SyntheticTaskSpec& spec, int n_source,
                                          int n_target_train, int n_target_test);

// Label by the generating rules; the data-independent reference classifier.
int synthetic_oracle_label(const SyntheticTaskSpec& spec, const std::vector<std::string>& tokens);

}  // namespace art
