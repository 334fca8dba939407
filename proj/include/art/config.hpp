#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "art/param_store.hpp"
#include "art/transfer.hpp"

namespace art {

enum class Task { classification, tagging };

Task task_from_string(const std::string& name);
std::string task_to_string(Task task);

// One experiment's knobs. Field defaults follow the classification setup;
// defaults_for(Task::tagging) switches to the tagging ones (hidden 300,
// adagrad, 50d word embeddings).
struct TrainingConfig {
    Task task = Task::classification;
    TransferMode mode = TransferMode::full_art;

    int hidden = 100;
    int attn_dim = 0;  // 0 means: same as hidden
    int word_dim = 100;
    int char_table_dim = 16;
    int char_filters = 50;
    int char_filter_width = 3;

    OptimizerKind optimizer = OptimizerKind::adam;
    double lr = 1e-3;
    OptimizerHyper hyper;
    double dropout = 0.5;
    int batch_size = 16;
    int pretrain_epochs = 10;
    int finetune_epochs = 20;
    int patience = 5;
    int freeze_source_epochs = 0;
    bool crf_loss = true;              // tagging: CRF NLL vs per-token softmax
    std::string eval_metric = "accuracy";  // accuracy | f1
    std::uint64_t seed = 1;
    int threads = 0;  // <= 1 runs the serial batch evaluator
    long long min_freq = 1;
    int max_sentence_len = 256;

    std::string source_train, source_dev;
    std::string target_train, target_dev, target_test;
    std::string embeddings;
    std::string out_dir = ".";

    int resolved_attn_dim() const { return attn_dim > 0 ? attn_dim : hidden; }
    bool lowercase_tokens() const { return task == Task::classification; }

    static TrainingConfig defaults_for(Task task);
    void validate() const;
};

// Flat key = value round trip, shared by config files and checkpoints.
std::map<std::string, std::string> config_to_map(const TrainingConfig& cfg);
TrainingConfig config_from_map(const std::map<std::string, std::string>& kv);

// Flat "key = value" file with '#' comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace art
