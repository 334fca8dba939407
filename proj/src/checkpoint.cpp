#include "art/checkpoint.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "art/errors.hpp"

#ifndef ART_BUILD_ID
#define ART_BUILD_ID "unknown"
#endif

namespace art {

namespace {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_vocab_section(std::ostream& out, const std::string& name,
                         const std::vector<std::string>& tokens) {
    out << "[vocab." << name << "]\n" << tokens.size() << '\n';
    for (const auto& t : tokens) out << t << '\n';
}

std::vector<std::string> read_vocab_section(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": truncated vocabulary section");
    const int n = std::stoi(line);
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError(path + ": truncated vocabulary section");
        tokens.push_back(line);
    }
    return tokens;
}

Vocabulary vocab_from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i < 2) {
            if (tokens[i] != v.token(static_cast<int>(i)))
                throw DataError("checkpoint vocabulary: reserved slot " + std::to_string(i) +
                                " holds '" + tokens[i] + "'");
            continue;
        }
        v.add(tokens[i]);
    }
    return v;
}

}  // namespace

Checkpoint make_checkpoint(const TransferModel& model) {
    Checkpoint ckpt;
    ckpt.config = config_to_map(model.config());
    ckpt.words = model.words().tokens();
    ckpt.chars = model.chars().tokens();
    ckpt.tags = model.target_tags().tokens();
    ckpt.source_tags = model.source_tags().tokens();
    for (const auto& [name, e] : model.store.entries()) ckpt.params.emplace_back(name, e.node->value);
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path);
    out << "artckpt " << ckpt.version << '\n';
    out << "[config]\n";
    for (const auto& [k, v] : ckpt.config) out << k << " = " << v << '\n';
    write_vocab_section(out, "words", ckpt.words);
    write_vocab_section(out, "chars", ckpt.chars);
    write_vocab_section(out, "tags", ckpt.tags);
    write_vocab_section(out, "source_tags", ckpt.source_tags);
    out << "[params]\n" << ckpt.params.size() << '\n';
    for (const auto& [name, tensor] : ckpt.params) {
        out << name << ' ' << tensor.rank();
        for (int d : tensor.shape) out << ' ' << d;
        out << '\n';
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            if (i) out << ' ';
            out << fmt_g17(tensor.data[i]);
        }
        out << '\n';
    }
    out << "[end]\n";
    if (!out) throw DataError("write failed for checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    Checkpoint ckpt;
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty checkpoint");
    if (line.rfind("artckpt ", 0) != 0)
        throw DataError(path + ": not a checkpoint file");
    ckpt.version = std::stoi(line.substr(8));
    if (ckpt.version != 1)
        throw DataError(path + ": unsupported checkpoint version " +
                        std::to_string(ckpt.version));

    if (!std::getline(in, line) || line != "[config]")
        throw DataError(path + ": missing [config] section");
    while (std::getline(in, line)) {
        if (line == "[vocab.words]") break;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw DataError(path + ": bad config line '" + line + "'");
        ckpt.config[line.substr(0, eq)] = line.substr(eq + 3);
    }
    ckpt.words = read_vocab_section(in, path);
    if (!std::getline(in, line) || line != "[vocab.chars]")
        throw DataError(path + ": missing [vocab.chars] section");
    ckpt.chars = read_vocab_section(in, path);
    if (!std::getline(in, line) || line != "[vocab.tags]")
        throw DataError(path + ": missing [vocab.tags] section");
    ckpt.tags = read_vocab_section(in, path);
    if (!std::getline(in, line) || line != "[vocab.source_tags]")
        throw DataError(path + ": missing [vocab.source_tags] section");
    ckpt.source_tags = read_vocab_section(in, path);

    if (!std::getline(in, line) || line != "[params]")
        throw DataError(path + ": missing [params] section");
    if (!std::getline(in, line)) throw DataError(path + ": truncated params");
    const int count = std::stoi(line);
    for (int p = 0; p < count; ++p) {
        if (!std::getline(in, line)) throw DataError(path + ": truncated params");
        std::istringstream head(line);
        std::string name;
        int rank = 0;
        head >> name >> rank;
        if (name.empty() || rank < 1 || rank > 2)
            throw DataError(path + ": bad parameter header '" + line + "'");
        std::vector<int> shape(static_cast<std::size_t>(rank));
        for (int& d : shape) {
            if (!(head >> d)) throw DataError(path + ": bad parameter header '" + line + "'");
        }
        if (!std::getline(in, line)) throw DataError(path + ": truncated values for " + name);
        Tensor t(shape);
        std::istringstream values(line);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!(values >> t.data[i]))
                throw DataError(path + ": wrong value count for " + name);
        }
        double extra;
        if (values >> extra) throw DataError(path + ": wrong value count for " + name);
        ckpt.params.emplace_back(name, std::move(t));
    }
    if (!std::getline(in, line) || line != "[end]")
        throw DataError(path + ": missing [end] marker");
    return ckpt;
}

std::unique_ptr<TransferModel> model_from_checkpoint(const Checkpoint& ckpt) {
    TrainingConfig cfg = config_from_map(ckpt.config);
    auto model = std::make_unique<TransferModel>(cfg, vocab_from_tokens(ckpt.words),
                                                 vocab_from_tokens(ckpt.chars),
                                                 vocab_from_tokens(ckpt.tags),
                                                 vocab_from_tokens(ckpt.source_tags));
    std::size_t matched = 0;
    for (const auto& [name, tensor] : ckpt.params) {
        if (!model->store.has(name))
            throw DataError("checkpoint parameter '" + name + "' does not fit this config");
        NodeRef node = model->store.get(name);
        if (node->value.shape != tensor.shape)
            throw DataError("checkpoint parameter '" + name + "' has shape " +
                            Tensor(tensor).shape_str() + ", expected " +
                            node->value.shape_str());
        node->value = tensor;
        matched += 1;
    }
    if (matched != model->store.size())
        throw DataError("checkpoint is missing " +
                        std::to_string(model->store.size() - matched) + " parameters");
    return model;
}

std::string build_id() { return ART_BUILD_ID; }

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["command_line"] = manifest.command_line;
    j["config"] = manifest.config;
    j["seed"] = manifest.seed;
    j["build_id"] = manifest.build_id;
    j["started"] = manifest.started;
    j["finished"] = manifest.finished;
    j["metrics"] = manifest.metrics;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write manifest " + tmp);
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace art
