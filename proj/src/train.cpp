#include "art/train.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

#include "art/errors.hpp"

namespace art {

namespace {

constexpr std::uint64_t kPretrainStream = 0xa001;
constexpr std::uint64_t kFinetuneStream = 0xa002;

// Training corpus and dev set for a mode (the target task's view).
const Corpus& train_corpus_for_mode(TransferMode mode, const Corpora& c, Corpus& scratch) {
    switch (mode) {
        case TransferMode::lstm_union:
            scratch = c.source_train;
            scratch.insert(scratch.end(), c.target_train.begin(), c.target_train.end());
            return scratch;
        case TransferMode::lstm_source_only:
            return c.source_train;
        default:
            return c.target_train;
    }
}

const Corpus* dev_corpus_for_mode(TransferMode mode, const Corpora& c) {
    const Corpus& dev =
        mode == TransferMode::lstm_source_only ? c.source_dev : c.target_dev;
    return dev.empty() ? nullptr : &dev;
}

double run_example_losses(TransferModel& model, const Corpus& corpus,
                          const std::vector<int>& batch, bool source_phase,
                          std::uint64_t dropout_seed_base, bool parallel,
                          std::vector<GradSink>& sinks) {
    const int b = static_cast<int>(batch.size());
    const int pad_to = batch_pad_length(corpus, batch);
    std::vector<double> losses(static_cast<std::size_t>(b), 0.0);
    std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int k = 0; k < b; ++k) {
        try {
            const Example& e = corpus[static_cast<std::size_t>(batch[static_cast<std::size_t>(k)])];
            ForwardOptions opts;
            opts.training = true;
            opts.pad_to = pad_to;
            opts.dropout_seed =
                mix_seed(dropout_seed_base, static_cast<std::uint64_t>(batch[static_cast<std::size_t>(k)]));
            ModelForward fwd =
                source_phase ? model.forward_source(e, opts) : model.forward_target(e, opts);
            if (!fwd.loss) throw ContractViolation("training example produced no loss");
            NodeRef scaled = scale(fwd.loss, 1.0 / b);
            backward(scaled, &sinks[static_cast<std::size_t>(k)]);
            losses[static_cast<std::size_t>(k)] = fwd.loss->value.data[0];
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    double total = 0.0;
    for (double l : losses) total += l;
    return total / b;
}

double batch_gradients_impl(TransferModel& model, const Corpus& corpus,
                            const std::vector<int>& batch, bool source_phase,
                            std::uint64_t dropout_seed_base, bool parallel) {
    if (batch.empty()) throw ContractViolation("batch_gradients: empty batch");
    std::vector<GradSink> sinks;
    sinks.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) sinks.push_back(model.store.make_sink());

    const double mean_loss = run_example_losses(model, corpus, batch, source_phase,
                                                dropout_seed_base, parallel, sinks);

    // deterministic reduction, example order
    for (const auto& sink : sinks) model.store.apply_sink(sink);
    return mean_loss;
}

}  // namespace

double batch_gradients_serial(TransferModel& model, const Corpus& corpus,
                              const std::vector<int>& batch, bool source_phase,
                              std::uint64_t dropout_seed_base) {
    return batch_gradients_impl(model, corpus, batch, source_phase, dropout_seed_base, false);
}

double batch_gradients_parallel(TransferModel& model, const Corpus& corpus,
                                const std::vector<int>& batch, bool source_phase,
                                std::uint64_t dropout_seed_base) {
    return batch_gradients_impl(model, corpus, batch, source_phase, dropout_seed_base, true);
}

ParamSnapshot snapshot_params(const ParamStore& store) {
    ParamSnapshot snap;
    for (const auto& [name, e] : store.entries()) snap[name] = e.node->value;
    return snap;
}

void restore_params(ParamStore& store, const ParamSnapshot& snap) {
    for (auto& [name, e] : store.entries()) {
        auto it = snap.find(name);
        if (it == snap.end()) throw ContractViolation("snapshot missing parameter " + name);
        e.node->value = it->second;
    }
}

namespace {

TrainLog train_loop(TransferModel& model, const Corpus& train, const Corpus* dev,
                    const TrainingConfig& cfg, bool source_phase, int epochs,
                    std::uint64_t stream) {
    if (train.empty()) throw DataError("training corpus is empty");
    TrainLog log;
    if (epochs == 0) return log;

    Rng shuffle_rng(mix_seed(cfg.seed, stream));
    const bool parallel = cfg.threads != 1;
    ParamSnapshot best;
    int stale = 0;
    // joint-gradient check applies to the first fine-tune batch of transfer modes
    bool checked_joint = source_phase || !model.has_source_stack();

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const bool freeze = !source_phase && model.has_source_stack() &&
                            epoch < cfg.freeze_source_epochs;
        if (!source_phase && model.has_source_stack())
            model.set_source_trainable(!freeze);

        auto batches = make_batches(static_cast<int>(train.size()), cfg.batch_size, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (const auto& batch : batches) {
            const std::uint64_t seed_base =
                mix_seed(mix_seed(cfg.seed, stream + 7), static_cast<std::uint64_t>(epoch));
            const double mean_loss =
                parallel ? batch_gradients_parallel(model, train, batch, source_phase, seed_base)
                         : batch_gradients_serial(model, train, batch, source_phase, seed_base);
            if (!checked_joint && !freeze) {
                double src_grad = 0.0;
                for (const auto& [name, e] : model.store.entries()) {
                    if (!TransferModel::is_source_param(name)) continue;
                    for (double g : e.node->grad.data) src_grad = std::max(src_grad, std::fabs(g));
                }
                if (src_grad <= 0.0)
                    throw ContractViolation(
                        "joint fine-tuning: source parameters received no gradient");
                checked_joint = true;
            }
            loss_sum += mean_loss * static_cast<double>(batch.size());
            seen += batch.size();
            if (cfg.lr > 0.0) {
                optimizer_step(model.store, cfg.optimizer, cfg.lr, cfg.hyper);
            } else {
                model.store.zero_grads();
            }
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / static_cast<double>(seen);
        if (dev) {
            entry.dev_metric = evaluate(model, *dev, source_phase);
            if (entry.dev_metric > log.best_dev) {
                log.best_dev = entry.dev_metric;
                best = snapshot_params(model.store);
                stale = 0;
            } else {
                stale += 1;
            }
        }
        log.epochs.push_back(entry);
        if (dev && cfg.patience > 0 && stale >= cfg.patience) break;
    }

    if (!source_phase && model.has_source_stack()) model.set_source_trainable(true);
    if (dev && !best.empty()) restore_params(model.store, best);
    return log;
}

}  // namespace

TrainLog pretrain_source(TransferModel& model, const Corpus& train, const Corpus* dev,
                         const TrainingConfig& cfg) {
    if (!model.has_source_stack())
        throw ContractViolation("pretrain_source: mode " + transfer_mode_to_string(cfg.mode) +
                                " does not pre-train");
    return train_loop(model, train, dev, cfg, true, cfg.pretrain_epochs, kPretrainStream);
}

TrainLog finetune_target(TransferModel& model, const Corpus& train, const Corpus* dev,
                         const TrainingConfig& cfg) {
    return train_loop(model, train, dev, cfg, false, cfg.finetune_epochs, kFinetuneStream);
}

double evaluate(const TransferModel& model, const Corpus& corpus, bool source_head) {
    if (corpus.empty()) throw DataError("evaluation corpus is empty");
    const TrainingConfig& cfg = model.config();
    if (cfg.task == Task::classification) {
        std::size_t correct = 0;
        for (const auto& e : corpus) {
            ForwardOptions opts;
            ModelForward fwd = source_head ? model.forward_source(e, opts)
                                           : model.forward_target(e, opts);
            const int predicted = fwd.prob->value.data[0] >= 0.5 ? 1 : 0;
            if (predicted == e.label) correct += 1;
        }
        return static_cast<double>(correct) / static_cast<double>(corpus.size());
    }

    const Vocabulary& tag_vocab = source_head ? model.source_tags() : model.target_tags();
    std::vector<std::vector<int>> gold_ids, pred_ids;
    std::vector<std::vector<std::string>> gold_tags, pred_tags;
    for (const auto& e : corpus) {
        ForwardOptions opts;
        opts.decode = true;
        ModelForward fwd = source_head ? model.forward_source(e, opts)
                                       : model.forward_target(e, opts);
        gold_ids.push_back(e.tag_ids);
        pred_ids.push_back(fwd.predicted_tags);
        if (cfg.eval_metric == "f1") {
            gold_tags.push_back(e.tags);
            std::vector<std::string> p;
            for (int id : fwd.predicted_tags) p.push_back(tag_vocab.token(id));
            pred_tags.push_back(std::move(p));
        }
    }
    if (cfg.eval_metric == "f1") return span_f1(gold_tags, pred_tags);
    return token_accuracy(gold_ids, pred_ids);
}

std::unique_ptr<TransferModel> build_model(const TrainingConfig& cfg, const Corpora& corpora) {
    const bool lower = cfg.lowercase_tokens();
    Corpus scratch;
    const Corpus& train = train_corpus_for_mode(cfg.mode, corpora, scratch);

    std::vector<const Corpus*> vocab_sources;
    if (mode_uses_transfer(cfg.mode)) {
        vocab_sources = {&corpora.source_train, &corpora.target_train};
    } else {
        vocab_sources = {&train};
    }
    Vocabulary words = build_token_vocab(vocab_sources, lower, cfg.min_freq);
    if (corpora.has_embeddings) {
        for (const auto& t : corpora.embeddings.tokens) words.add(t);
    }

    Vocabulary chars, target_tags, source_tags;
    if (cfg.task == Task::tagging) {
        chars = build_char_vocab(vocab_sources);
        if (mode_uses_transfer(cfg.mode)) {
            target_tags = build_tag_vocab({&corpora.target_train});
            source_tags = build_tag_vocab({&corpora.source_train});
        } else {
            target_tags = build_tag_vocab({&train, &corpora.target_train});
        }
    }

    auto model = std::make_unique<TransferModel>(cfg, std::move(words), std::move(chars),
                                                 std::move(target_tags), std::move(source_tags));
    if (corpora.has_embeddings) model->init_embeddings(corpora.embeddings);
    return model;
}

ExperimentReport run_experiment(const TrainingConfig& cfg, const Corpora& corpora,
                                std::unique_ptr<TransferModel>* out_model) {
    const auto t0 = std::chrono::steady_clock::now();
    auto model = build_model(cfg, corpora);

    // numericalize against this run's vocabularies
    Corpora data = corpora;
    const bool lower = cfg.lowercase_tokens();
    const Vocabulary* chars = cfg.task == Task::tagging ? &model->chars() : nullptr;
    const Vocabulary* src_tags =
        cfg.task == Task::tagging && mode_uses_transfer(cfg.mode) ? &model->source_tags()
                                                                  : nullptr;
    const Vocabulary* tgt_tags = cfg.task == Task::tagging ? &model->target_tags() : nullptr;
    numericalize(data.source_train, model->words(), lower, chars,
                 src_tags ? src_tags : tgt_tags);
    numericalize(data.source_dev, model->words(), lower, chars, src_tags ? src_tags : tgt_tags);
    numericalize(data.target_train, model->words(), lower, chars, tgt_tags);
    numericalize(data.target_dev, model->words(), lower, chars, tgt_tags);
    numericalize(data.target_test, model->words(), lower, chars, tgt_tags);

    ExperimentReport report;
    report.mode = transfer_mode_to_string(cfg.mode);
    report.seed = cfg.seed;

    if (mode_uses_transfer(cfg.mode)) {
        if (data.source_train.empty()) throw DataError("mode needs a source training corpus");
        report.pretrain = pretrain_source(*model, data.source_train,
                                          data.source_dev.empty() ? nullptr : &data.source_dev,
                                          cfg);
    }

    Corpus scratch;
    const Corpus& train = train_corpus_for_mode(cfg.mode, data, scratch);
    report.finetune = finetune_target(*model, train, dev_corpus_for_mode(cfg.mode, data), cfg);

    if (!data.target_test.empty()) report.test_metric = evaluate(*model, data.target_test);

    const auto t1 = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

    if (out_model) *out_model = std::move(model);
    return report;
}

std::vector<ExperimentReport> run_experiment_grid(const std::vector<TrainingConfig>& cfgs,
                                                  const Corpora& corpora) {
    std::vector<ExperimentReport> reports;
    reports.reserve(cfgs.size());
    for (const auto& cfg : cfgs) reports.push_back(run_experiment(cfg, corpora));
    return reports;
}

std::string report_tsv(const std::vector<ExperimentReport>& reports) {
    std::ostringstream out;
    out << "mode\tseed\ttest_metric\twall_seconds\n";
    for (const auto& r : reports) {
        char metric[32], wall[32];
        std::snprintf(metric, sizeof(metric), "%.4f", r.test_metric);
        std::snprintf(wall, sizeof(wall), "%.2f", r.wall_seconds);
        out << r.mode << '\t' << r.seed << '\t' << metric << '\t' << wall << '\n';
    }
    return out.str();
}

}  // namespace art
