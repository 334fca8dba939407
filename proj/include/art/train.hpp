#pragma once

#include <functional>

#include "art/model.hpp"

namespace art {

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_metric = -1.0;  // -1 when no dev set
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    double best_dev = -1.0;
};

struct ExperimentReport {
    std::string mode;
    std::uint64_t seed = 0;
    TrainLog pretrain;
    TrainLog finetune;
    double test_metric = 0.0;
    double wall_seconds = 0.0;
};

struct Corpora {
    Corpus source_train, source_dev;
    Corpus target_train, target_dev, target_test;
    EmbeddingFile embeddings;
    bool has_embeddings = false;
};

// Copy of all parameter values, used for best-dev retention.
using ParamSnapshot = std::map<std::string, Tensor>;
ParamSnapshot snapshot_params(const ParamStore& store);
void restore_params(ParamStore& store, const ParamSnapshot& snap);

// Accumulates gradients of the mean batch loss into the store and returns
// that loss. Per-example gradients land in private sinks which are reduced
// in example order, so the serial and OpenMP paths are bit-identical.
double batch_gradients_serial(TransferModel& model, const Corpus& corpus,
                              const std::vector<int>& batch, bool source_phase,
                              std::uint64_t dropout_seed_base);
double batch_gradients_parallel(TransferModel& model, const Corpus& corpus,
                                const std::vector<int>& batch, bool source_phase,
                                std::uint64_t dropout_seed_base);

// Pre-trains the source stack (embeddings + source LSTM + source head) on
// the source corpus. Retains the best-dev parameters when a dev set exists.
TrainLog pretrain_source(TransferModel& model, const Corpus& train, const Corpus* dev,
                         const TrainingConfig& cfg);

// Jointly fine-tunes every parameter on the target task. Plain modes train
// their single network here (lstm_union on source+target, lstm_source_only
// on source only).
TrainLog finetune_target(TransferModel& model, const Corpus& train, const Corpus* dev,
                         const TrainingConfig& cfg);

// Eval-mode metric on a corpus: classification accuracy, or tagging
// accuracy / span F1 per cfg.eval_metric.
double evaluate(const TransferModel& model, const Corpus& corpus, bool source_head = false);

// Builds vocabularies and the model for a mode, runs its training phases and
// the test evaluation. The trained model is handed back when requested.
ExperimentReport run_experiment(const TrainingConfig& cfg, const Corpora& corpora,
                                std::unique_ptr<TransferModel>* out_model = nullptr);

std::vector<ExperimentReport> run_experiment_grid(const std::vector<TrainingConfig>& cfgs,
                                                  const Corpora& corpora);

// One row per report: mode, seed, test metric, wall seconds.
std::string report_tsv(const std::vector<ExperimentReport>& reports);

// Model construction shared by the trainer and checkpoint loading.
std::unique_ptr<TransferModel> build_model(const TrainingConfig& cfg, const Corpora& corpora);

}  // namespace art
