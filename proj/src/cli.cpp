#include "art/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "art/checkpoint.hpp"
#include "art/errors.hpp"
#include "art/gradcheck.hpp"
#include "art/train.hpp"

namespace fs = std::filesystem;

namespace art {

namespace {

std::string join_args(const std::vector<std::string>& argv) {
    std::string out;
    for (std::size_t i = 0; i < argv.size(); ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

RunManifest start_manifest(const std::vector<std::string>& argv) {
    RunManifest m;
    m.command_line = join_args(argv);
    m.build_id = build_id();
    m.started = timestamp_utc();
    return m;
}

void finish_manifest(RunManifest& m, const std::string& out_dir) {
    m.finished = timestamp_utc();
    fs::create_directories(out_dir);
    write_manifest((fs::path(out_dir) / "manifest.json").string(), m);
}

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::string mode;
    std::string out_dir;
    std::int64_t seed = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "flat key = value config file");
    cmd->add_option("--set", flags.overrides, "override a config key (KEY=VALUE, repeatable)");
    cmd->add_option("--mode", flags.mode, "transfer mode");
    cmd->add_option("--seed", flags.seed, "random seed");
    cmd->add_option("--out", flags.out_dir, "output directory");
}

TrainingConfig resolve_config(const CommonFlags& flags) {
    std::map<std::string, std::string> kv;
    if (!flags.config_path.empty()) kv = parse_config_file(flags.config_path);
    for (const auto& kvpair : flags.overrides) {
        const auto eq = kvpair.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects KEY=VALUE, got '" + kvpair + "'");
        kv[kvpair.substr(0, eq)] = kvpair.substr(eq + 1);
    }
    if (!flags.mode.empty()) kv["mode"] = flags.mode;
    if (flags.seed >= 0) kv["seed"] = std::to_string(flags.seed);
    if (!flags.out_dir.empty()) kv["out_dir"] = flags.out_dir;
    TrainingConfig cfg = config_from_map(kv);
    cfg.validate();
    return cfg;
}

Corpus load_task_corpus(Task task, const std::string& path) {
    return task == Task::classification ? load_classification_tsv(path) : load_conll(path);
}

Corpora load_corpora(const TrainingConfig& cfg) {
    auto need = [&](const char* key, const std::string& path) {
        if (path.empty())
            throw DataError(std::string("mode ") + transfer_mode_to_string(cfg.mode) +
                            " needs config key '" + key + "' to point at a corpus");
    };
    if (mode_uses_transfer(cfg.mode) || cfg.mode == TransferMode::lstm_union ||
        cfg.mode == TransferMode::lstm_source_only)
        need("source_train", cfg.source_train);
    if (cfg.mode != TransferMode::lstm_source_only) need("target_train", cfg.target_train);

    Corpora c;
    auto load = [&](const std::string& path) {
        return path.empty() ? Corpus{} : load_task_corpus(cfg.task, path);
    };
    c.source_train = load(cfg.source_train);
    c.source_dev = load(cfg.source_dev);
    c.target_train = load(cfg.target_train);
    c.target_dev = load(cfg.target_dev);
    c.target_test = load(cfg.target_test);
    for (auto* corpus : {&c.source_train, &c.source_dev}) {
        for (auto& e : *corpus) e.from_source = true;
    }
    if (!cfg.embeddings.empty()) {
        c.embeddings = load_embeddings_text(cfg.embeddings, cfg.word_dim);
        c.has_embeddings = true;
    }
    return c;
}

int cmd_train(const CommonFlags& flags, const std::vector<std::string>& argv) {
    TrainingConfig cfg = resolve_config(flags);
    RunManifest manifest = start_manifest(argv);
    manifest.config = config_to_map(cfg);
    manifest.seed = cfg.seed;

    Corpora corpora = load_corpora(cfg);
    std::unique_ptr<TransferModel> model;
    ExperimentReport report = run_experiment(cfg, corpora, &model);

    fs::create_directories(cfg.out_dir);
    save_checkpoint((fs::path(cfg.out_dir) / "checkpoint.art").string(),
                    make_checkpoint(*model));
    {
        std::ofstream tsv(fs::path(cfg.out_dir) / "reports.tsv");
        tsv << report_tsv({report});
    }
    std::cout << report_tsv({report});

    manifest.metrics["test_metric"] = report.test_metric;
    manifest.metrics["wall_seconds"] = report.wall_seconds;
    if (!report.pretrain.epochs.empty())
        manifest.metrics["pretrain_best_dev"] = report.pretrain.best_dev;
    if (!report.finetune.epochs.empty())
        manifest.metrics["finetune_best_dev"] = report.finetune.best_dev;
    finish_manifest(manifest, cfg.out_dir);
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& out_dir, const std::vector<std::string>& argv) {
    RunManifest manifest = start_manifest(argv);
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    std::unique_ptr<TransferModel> model = model_from_checkpoint(ckpt);
    const TrainingConfig& cfg = model->config();
    manifest.config = ckpt.config;
    manifest.seed = cfg.seed;

    Corpus corpus = load_task_corpus(cfg.task, data_path);
    const Vocabulary* chars = cfg.task == Task::tagging ? &model->chars() : nullptr;
    const Vocabulary* tags = cfg.task == Task::tagging ? &model->target_tags() : nullptr;
    numericalize(corpus, model->words(), cfg.lowercase_tokens(), chars, tags);

    const double metric = evaluate(*model, corpus);
    std::printf("%s\t%.6f\n", cfg.eval_metric.c_str(), metric);

    manifest.metrics[cfg.eval_metric] = metric;
    finish_manifest(manifest, out_dir);
    return 0;
}

int cmd_gradcheck(const GradCheckOptions& opts, const std::string& out_dir,
                  const std::vector<std::string>& argv) {
    RunManifest manifest = start_manifest(argv);
    std::vector<GradCheckResult> results = run_gradcheck_suite(opts);
    bool all_passed = true;
    for (const auto& r : results) {
        std::printf("%-16s max_rel_err %.3g  %s\n", r.component.c_str(), r.max_rel_err,
                    r.passed() ? "PASS" : "FAIL");
        manifest.metrics[r.component] = r.max_rel_err;
        all_passed = all_passed && r.passed();
    }
    finish_manifest(manifest, out_dir);
    if (!all_passed) {
        for (const auto& r : results) {
            if (!r.passed())
                std::fprintf(stderr, "gradient check failed for %s\n", r.component.c_str());
        }
        return 1;
    }
    return 0;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_attention_csv(const std::string& path, const Tensor& alpha,
                         const std::vector<std::string>& tokens, bool reversed) {
    const int n = static_cast<int>(tokens.size());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (int j = 0; j < n; ++j) out << ',' << csv_quote(tokens[static_cast<std::size_t>(j)]);
    out << '\n';
    char cell[32];
    for (int i = 0; i < n; ++i) {
        out << csv_quote(tokens[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            // backward traces are recorded in processing (reversed) order
            const double v = reversed ? alpha.at(n - 1 - i, n - 1 - j) : alpha.at(i, j);
            std::snprintf(cell, sizeof(cell), "%.6f", v);
            out << ',' << cell;
        }
        out << '\n';
    }
}

int cmd_export_attention(const std::string& checkpoint_path, const std::string& input_path,
                         const std::string& out_dir, const std::vector<std::string>& argv) {
    RunManifest manifest = start_manifest(argv);
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    std::unique_ptr<TransferModel> model = model_from_checkpoint(ckpt);
    const TrainingConfig& cfg = model->config();
    manifest.config = ckpt.config;
    manifest.seed = cfg.seed;
    if (cfg.mode != TransferMode::full_art)
        throw ConfigError("attention export needs a full_art checkpoint, got mode " +
                          transfer_mode_to_string(cfg.mode));

    std::ifstream in(input_path);
    if (!in) throw DataError("cannot open " + input_path);
    fs::create_directories(out_dir);

    std::string line;
    int sentence = 0;
    int exported = 0;
    while (std::getline(in, line)) {
        std::istringstream iss(line);
        Example e;
        std::string tok;
        while (iss >> tok) e.tokens.push_back(tok);
        if (e.tokens.empty()) continue;
        sentence += 1;
        if (static_cast<int>(e.tokens.size()) > cfg.max_sentence_len)
            throw DataError(input_path + ": sentence " + std::to_string(sentence) + " has " +
                            std::to_string(e.tokens.size()) + " tokens, max_sentence_len is " +
                            std::to_string(cfg.max_sentence_len));

        Corpus one{e};
        const Vocabulary* chars = cfg.task == Task::tagging ? &model->chars() : nullptr;
        numericalize(one, model->words(), cfg.lowercase_tokens(), chars, nullptr);

        ForwardOptions opts;
        opts.want_traces = true;
        ModelForward fwd = model->forward_target(one[0], opts);
        if (fwd.traces.size() != 2)
            throw ContractViolation("expected forward and backward traces");

        char name[64];
        const auto& toks = one[0].tokens;
        for (const auto& trace : fwd.traces) {
            const bool rev = trace.direction == AttentionTrace::Direction::backward;
            const char* dir = rev ? "bwd" : "fwd";
            std::snprintf(name, sizeof(name), "sent%04d_h_%s.csv", sentence, dir);
            write_attention_csv((fs::path(out_dir) / name).string(), trace.alpha_h, toks, rev);
            std::snprintf(name, sizeof(name), "sent%04d_c_%s.csv", sentence, dir);
            write_attention_csv((fs::path(out_dir) / name).string(), trace.alpha_c, toks, rev);
        }
        exported += 1;
    }

    std::printf("exported attention matrices for %d sentences to %s\n", exported,
                out_dir.c_str());
    manifest.metrics["sentences"] = exported;
    finish_manifest(manifest, out_dir);
    return 0;
}

struct GenSynthArgs {
    std::string out_dir = ".";
    std::int64_t seed = 1;
    int n_source = 2000;
    int n_target_train = 50;
    int n_target_test = 500;
    int n_source_dev = 0;
    int n_target_dev = 0;
    SyntheticTaskSpec spec;
};

int cmd_gen_synthetic(const GenSynthArgs& args, const std::vector<std::string>& argv) {
    RunManifest manifest = start_manifest(argv);
    manifest.seed = static_cast<std::uint64_t>(args.seed);
    SyntheticTaskSpec spec = args.spec;
    spec.seed = static_cast<std::uint64_t>(args.seed);

    SyntheticData data =
        generate_synthetic_transfer(spec, args.n_source, args.n_target_train, args.n_target_test);
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    save_classification_tsv((out / "source_train.tsv").string(), data.source);
    save_classification_tsv((out / "target_train.tsv").string(), data.target_train);
    save_classification_tsv((out / "target_test.tsv").string(), data.target_test);

    if (args.n_source_dev > 0 || args.n_target_dev > 0) {
        SyntheticTaskSpec dev_spec = spec;
        dev_spec.seed = mix_seed(spec.seed, 0xdef);
        SyntheticData dev = generate_synthetic_transfer(dev_spec, std::max(1, args.n_source_dev),
                                                        std::max(1, args.n_target_dev), 1);
        if (args.n_source_dev > 0)
            save_classification_tsv((out / "source_dev.tsv").string(), dev.source);
        if (args.n_target_dev > 0)
            save_classification_tsv((out / "target_dev.tsv").string(), dev.target_train);
    }

    std::printf("wrote synthetic corpora (%d source / %d target train / %d target test) to %s\n",
                args.n_source, args.n_target_train, args.n_target_test, args.out_dir.c_str());
    manifest.metrics["n_source"] = args.n_source;
    manifest.metrics["n_target_train"] = args.n_target_train;
    manifest.metrics["n_target_test"] = args.n_target_test;
    finish_manifest(manifest, args.out_dir);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
    std::vector<const char*> raw;
    raw.reserve(argv.size());
    for (const auto& a : argv) raw.push_back(a.c_str());
    return run_cli(static_cast<int>(raw.size()), raw.data());
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);

    CLI::App app{"attention-aligned cell-level transfer for recurrent sequence models"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    CLI::App* train_cmd = app.add_subcommand("train", "pre-train on the source domain, then "
                                                      "fine-tune on the target domain");
    add_common_flags(train_cmd, train_flags);

    std::string eval_ckpt, eval_data, eval_out = ".";
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--data", eval_data, "corpus to evaluate")->required();
    eval_cmd->add_option("--out", eval_out, "output directory");

    GradCheckOptions gc_opts;
    std::string gc_out = ".";
    CLI::App* gc_cmd = app.add_subcommand("gradcheck", "finite-difference verification of all "
                                                       "operations");
    gc_cmd->add_option("--component", gc_opts.component, "restrict to one component");
    gc_cmd->add_option("--seeds", gc_opts.seeds, "random seeds per component");
    gc_cmd->add_option("--inject-fault", gc_opts.inject_fault,
                       "test hook: corrupt a component's backward pass");
    gc_cmd->add_option("--out", gc_out, "output directory");

    std::string exp_ckpt, exp_input, exp_out = ".";
    CLI::App* exp_cmd = app.add_subcommand("export-attention",
                                           "write attention matrices as CSV per sentence");
    exp_cmd->add_option("--checkpoint", exp_ckpt, "checkpoint file")->required();
    exp_cmd->add_option("--input", exp_input, "sentence file, one per line")->required();
    exp_cmd->add_option("--out", exp_out, "output directory");

    GenSynthArgs gen_args;
    CLI::App* gen_cmd = app.add_subcommand("gen-synthetic",
                                           "generate the synthetic cross-domain task");
    gen_cmd->add_option("--out", gen_args.out_dir, "output directory");
    gen_cmd->add_option("--seed", gen_args.seed, "generator seed");
    gen_cmd->add_option("--n-source", gen_args.n_source, "source training examples");
    gen_cmd->add_option("--n-target-train", gen_args.n_target_train, "target training examples");
    gen_cmd->add_option("--n-target-test", gen_args.n_target_test, "target test examples");
    gen_cmd->add_option("--n-source-dev", gen_args.n_source_dev, "source dev examples");
    gen_cmd->add_option("--n-target-dev", gen_args.n_target_dev, "target dev examples");
    gen_cmd->add_option("--collocation-fraction", gen_args.spec.collocation_fraction,
                        "fraction of examples whose label a modifier flips");
    gen_cmd->add_option("--domain-shift", gen_args.spec.domain_shift,
                        "fraction of fillers substituted in the target domain");
    gen_cmd->add_option("--fillers", gen_args.spec.fillers, "filler vocabulary size per domain");
    gen_cmd->add_option("--min-len", gen_args.spec.min_len, "minimum sentence length");
    gen_cmd->add_option("--max-len", gen_args.spec.max_len, "maximum sentence length");
    gen_cmd->add_option("--min-offset", gen_args.spec.min_offset, "minimum collocation offset");
    gen_cmd->add_option("--max-offset", gen_args.spec.max_offset, "maximum collocation offset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_flags, args);
        if (eval_cmd->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_out, args);
        if (gc_cmd->parsed()) return cmd_gradcheck(gc_opts, gc_out, args);
        if (exp_cmd->parsed()) return cmd_export_attention(exp_ckpt, exp_input, exp_out, args);
        if (gen_cmd->parsed()) return cmd_gen_synthetic(gen_args, args);
        std::fprintf(stderr, "no command given\n");
        return 2;
    } catch (const ConfigError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return 2;
    } catch (const DataError& err) {
        std::fprintf(stderr, "data error: %s\n", err.what());
        return 3;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
}

}  // namespace art
