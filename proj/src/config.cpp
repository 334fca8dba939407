#include "art/config.hpp"

#include <cstdio>
#include <fstream>

#include "art/errors.hpp"

namespace art {

Task task_from_string(const std::string& name) {
    if (name == "classification") return Task::classification;
    if (name == "tagging") return Task::tagging;
    throw ConfigError("unknown task '" + name + "' (expected classification or tagging)");
}

std::string task_to_string(Task task) {
    return task == Task::classification ? "classification" : "tagging";
}

TrainingConfig TrainingConfig::defaults_for(Task task) {
    TrainingConfig cfg;
    cfg.task = task;
    if (task == Task::tagging) {
        cfg.hidden = 300;
        cfg.word_dim = 50;
        cfg.optimizer = OptimizerKind::adagrad;
        cfg.lr = 0.1;
    }
    return cfg;
}

void TrainingConfig::validate() const {
    if (hidden <= 0) throw ConfigError("hidden must be positive");
    if (attn_dim < 0) throw ConfigError("attn_dim must be >= 0");
    if (word_dim <= 0) throw ConfigError("word_dim must be positive");
    if (lr < 0.0) throw ConfigError("lr must be >= 0 (0 trains without updates)");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (pretrain_epochs < 0 || finetune_epochs < 0) throw ConfigError("epochs must be >= 0");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (eval_metric != "accuracy" && eval_metric != "f1")
        throw ConfigError("eval_metric must be accuracy or f1");
    if (task == Task::tagging && mode == TransferMode::lwt)
        throw ConfigError("mode lwt only supports sentence classification");
    if (max_sentence_len < 1) throw ConfigError("max_sentence_len must be >= 1");
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

long long to_ll(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
    }
}

double to_d(const std::string& key, const std::string& v) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ConfigError("config key '" + key + "': bad number '" + v + "'");
    return x;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> config_to_map(const TrainingConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["task"] = task_to_string(cfg.task);
    kv["mode"] = transfer_mode_to_string(cfg.mode);
    kv["hidden"] = std::to_string(cfg.hidden);
    kv["attn_dim"] = std::to_string(cfg.attn_dim);
    kv["word_dim"] = std::to_string(cfg.word_dim);
    kv["char_table_dim"] = std::to_string(cfg.char_table_dim);
    kv["char_filters"] = std::to_string(cfg.char_filters);
    kv["char_filter_width"] = std::to_string(cfg.char_filter_width);
    kv["optimizer"] = optimizer_to_string(cfg.optimizer);
    kv["lr"] = fmt_double(cfg.lr);
    kv["beta1"] = fmt_double(cfg.hyper.beta1);
    kv["beta2"] = fmt_double(cfg.hyper.beta2);
    kv["eps"] = fmt_double(cfg.hyper.eps);
    kv["dropout"] = fmt_double(cfg.dropout);
    kv["batch_size"] = std::to_string(cfg.batch_size);
    kv["pretrain_epochs"] = std::to_string(cfg.pretrain_epochs);
    kv["finetune_epochs"] = std::to_string(cfg.finetune_epochs);
    kv["patience"] = std::to_string(cfg.patience);
    kv["freeze_source_epochs"] = std::to_string(cfg.freeze_source_epochs);
    kv["tag_loss"] = cfg.crf_loss ? "crf" : "softmax";
    kv["eval_metric"] = cfg.eval_metric;
    kv["seed"] = std::to_string(cfg.seed);
    kv["threads"] = std::to_string(cfg.threads);
    kv["min_freq"] = std::to_string(cfg.min_freq);
    kv["max_sentence_len"] = std::to_string(cfg.max_sentence_len);
    kv["source_train"] = cfg.source_train;
    kv["source_dev"] = cfg.source_dev;
    kv["target_train"] = cfg.target_train;
    kv["target_dev"] = cfg.target_dev;
    kv["target_test"] = cfg.target_test;
    kv["embeddings"] = cfg.embeddings;
    kv["out_dir"] = cfg.out_dir;
    return kv;
}

TrainingConfig config_from_map(const std::map<std::string, std::string>& kv) {
    Task task = Task::classification;
    if (auto it = kv.find("task"); it != kv.end()) task = task_from_string(it->second);
    TrainingConfig cfg = TrainingConfig::defaults_for(task);
    for (const auto& [key, v] : kv) {
        if (key == "task") {
            // consumed above
        } else if (key == "mode") {
            cfg.mode = transfer_mode_from_string(v);
        } else if (key == "hidden") {
            cfg.hidden = static_cast<int>(to_ll(key, v));
        } else if (key == "attn_dim") {
            cfg.attn_dim = static_cast<int>(to_ll(key, v));
        } else if (key == "word_dim") {
            cfg.word_dim = static_cast<int>(to_ll(key, v));
        } else if (key == "char_table_dim") {
            cfg.char_table_dim = static_cast<int>(to_ll(key, v));
        } else if (key == "char_filters") {
            cfg.char_filters = static_cast<int>(to_ll(key, v));
        } else if (key == "char_filter_width") {
            cfg.char_filter_width = static_cast<int>(to_ll(key, v));
        } else if (key == "optimizer") {
            cfg.optimizer = optimizer_from_string(v);
        } else if (key == "lr") {
            cfg.lr = to_d(key, v);
        } else if (key == "beta1") {
            cfg.hyper.beta1 = to_d(key, v);
        } else if (key == "beta2") {
            cfg.hyper.beta2 = to_d(key, v);
        } else if (key == "eps") {
            cfg.hyper.eps = to_d(key, v);
        } else if (key == "dropout") {
            cfg.dropout = to_d(key, v);
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<int>(to_ll(key, v));
        } else if (key == "pretrain_epochs") {
            cfg.pretrain_epochs = static_cast<int>(to_ll(key, v));
        } else if (key == "finetune_epochs") {
            cfg.finetune_epochs = static_cast<int>(to_ll(key, v));
        } else if (key == "patience") {
            cfg.patience = static_cast<int>(to_ll(key, v));
        } else if (key == "freeze_source_epochs") {
            cfg.freeze_source_epochs = static_cast<int>(to_ll(key, v));
        } else if (key == "tag_loss") {
            if (v == "crf")
                cfg.crf_loss = true;
            else if (v == "softmax")
                cfg.crf_loss = false;
            else
                throw ConfigError("config key 'tag_loss': expected crf or softmax, got '" + v +
                                  "'");
        } else if (key == "eval_metric") {
            cfg.eval_metric = v;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(to_ll(key, v));
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(to_ll(key, v));
        } else if (key == "min_freq") {
            cfg.min_freq = to_ll(key, v);
        } else if (key == "max_sentence_len") {
            cfg.max_sentence_len = static_cast<int>(to_ll(key, v));
        } else if (key == "source_train") {
            cfg.source_train = v;
        } else if (key == "source_dev") {
            cfg.source_dev = v;
        } else if (key == "target_train") {
            cfg.target_train = v;
        } else if (key == "target_dev") {
            cfg.target_dev = v;
        } else if (key == "target_test") {
            cfg.target_test = v;
        } else if (key == "embeddings") {
            cfg.embeddings = v;
        } else if (key == "out_dir") {
            cfg.out_dir = v;
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no += 1;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

}  // namespace art
