#include "art/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "art/errors.hpp"

namespace art {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// C-locale decimal parse; rejects trailing garbage.
double parse_double(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw DataError(where + ": bad float '" + s + "'");
    return v;
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

Vocabulary::Vocabulary() {
    add("<pad>");
    add("<unk>");
}

int Vocabulary::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    const int id = static_cast<int>(id_to_token_.size());
    id_to_token_.push_back(token);
    token_to_id_[token] = id;
    return id;
}

int Vocabulary::lookup(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? unk_id : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.count(token) != 0;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw ContractViolation("Vocabulary: bad id " + std::to_string(id));
    return id_to_token_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::build(const std::unordered_map<std::string, long long>& counts,
                             long long min_freq) {
    std::vector<std::pair<std::string, long long>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    for (const auto& [token, freq] : items) {
        if (freq >= min_freq) v.add(token);
    }
    return v;
}

EmbeddingFile load_embeddings_text(const std::string& path, int expected_width) {
    auto in = open_in(path);
    EmbeddingFile emb;
    emb.width = expected_width;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no += 1;
        if (line.empty()) continue;
        std::vector<std::string> parts = split_ws(line);
        if (static_cast<int>(parts.size()) != expected_width + 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected token + " +
                            std::to_string(expected_width) + " floats, got " +
                            std::to_string(parts.size()) + " fields");
        emb.tokens.push_back(parts[0]);
        std::vector<double> row(static_cast<std::size_t>(expected_width));
        for (int i = 0; i < expected_width; ++i)
            row[static_cast<std::size_t>(i)] =
                parse_double(parts[static_cast<std::size_t>(i + 1)],
                             path + ":" + std::to_string(line_no));
        emb.rows.push_back(std::move(row));
    }
    return emb;
}

void save_embeddings_text(const std::string& path, const EmbeddingFile& emb) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < emb.tokens.size(); ++i) {
        out << emb.tokens[i];
        for (double v : emb.rows[i]) out << ' ' << format_g17(v);
        out << '\n';
    }
}

Corpus load_classification_tsv(const std::string& path, int* skipped_blank) {
    auto in = open_in(path);
    Corpus corpus;
    std::string line;
    int line_no = 0, skipped = 0;
    while (std::getline(in, line)) {
        line_no += 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            skipped += 1;
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": missing tab separator");
        const std::string label = line.substr(0, tab);
        if (label != "0" && label != "1")
            throw DataError(path + ":" + std::to_string(line_no) + ": bad label '" + label + "'");
        Example e;
        e.label = label == "1" ? 1 : 0;
        e.tokens = split_ws(line.substr(tab + 1));
        if (e.tokens.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": empty text");
        corpus.push_back(std::move(e));
    }
    if (skipped_blank) *skipped_blank = skipped;
    return corpus;
}

void save_classification_tsv(const std::string& path, const Corpus& corpus) {
    auto out = open_out(path);
    for (const auto& e : corpus) {
        out << e.label << '\t';
        for (std::size_t i = 0; i < e.tokens.size(); ++i) {
            if (i) out << ' ';
            out << e.tokens[i];
        }
        out << '\n';
    }
}

Corpus load_conll(const std::string& path) {
    auto in = open_in(path);
    Corpus corpus;
    Example current;
    std::string line;
    int line_no = 0;
    auto flush = [&] {
        if (!current.tokens.empty()) {
            corpus.push_back(std::move(current));
            current = Example{};
        }
    };
    while (std::getline(in, line)) {
        line_no += 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": missing tab separator");
        const std::string token = line.substr(0, tab);
        const std::string tag = line.substr(tab + 1);
        if (token.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": tag on empty token");
        if (tag.empty())
            throw DataError(path + ":" + std::to_string(line_no) + ": empty tag");
        current.tokens.push_back(token);
        current.tags.push_back(tag);
    }
    flush();  // no trailing blank line still yields the final sentence
    return corpus;
}

void save_conll(const std::string& path, const Corpus& corpus) {
    auto out = open_out(path);
    for (const auto& e : corpus) {
        for (std::size_t i = 0; i < e.tokens.size(); ++i)
            out << e.tokens[i] << '\t' << e.tags[i] << '\n';
        out << '\n';
    }
}

Corpus subsample(const Corpus& corpus, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw ConfigError("subsample: fraction must be in [0, 1]");
    const int n = static_cast<int>(corpus.size());
    const int keep = static_cast<int>(std::llround(fraction * n));
    std::vector<int> idx(corpus.size());
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(mix_seed(seed, 0x5ab5a3b1eULL));
    rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(keep));
    std::sort(idx.begin(), idx.end());
    Corpus out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(corpus[static_cast<std::size_t>(i)]);
    return out;
}

Vocabulary build_token_vocab(const std::vector<const Corpus*>& corpora, bool lowercase,
                             long long min_freq) {
    std::unordered_map<std::string, long long> counts;
    for (const Corpus* c : corpora) {
        for (const auto& e : *c) {
            for (const auto& t : e.tokens) counts[lowercase ? lower(t) : t] += 1;
        }
    }
    return Vocabulary::build(counts, min_freq);
}

Vocabulary build_char_vocab(const std::vector<const Corpus*>& corpora) {
    std::unordered_map<std::string, long long> counts;
    for (const Corpus* c : corpora) {
        for (const auto& e : *c) {
            for (const auto& t : e.tokens) {
                for (char ch : t) counts[std::string(1, ch)] += 1;
            }
        }
    }
    return Vocabulary::build(counts, 1);
}

Vocabulary build_tag_vocab(const std::vector<const Corpus*>& corpora) {
    std::unordered_map<std::string, long long> counts;
    for (const Corpus* c : corpora) {
        for (const auto& e : *c) {
            for (const auto& t : e.tags) counts[t] += 1;
        }
    }
    return Vocabulary::build(counts, 1);
}

void numericalize(Corpus& corpus, const Vocabulary& words, bool lowercase,
                  const Vocabulary* chars, const Vocabulary* tags) {
    for (auto& e : corpus) {
        e.token_ids.clear();
        for (const auto& t : e.tokens) e.token_ids.push_back(words.lookup(lowercase ? lower(t) : t));
        if (chars) {
            e.char_ids.assign(e.tokens.size(), {});
            for (std::size_t i = 0; i < e.tokens.size(); ++i) {
                for (char ch : e.tokens[i])
                    e.char_ids[i].push_back(chars->lookup(std::string(1, ch)));
            }
        }
        if (tags) {
            e.tag_ids.clear();
            for (const auto& t : e.tags) {
                const int id = tags->lookup(t);
                if (id == Vocabulary::unk_id)
                    throw DataError("unknown tag '" + t + "' outside the training tag set");
                e.tag_ids.push_back(id);
            }
        }
    }
}

std::vector<std::vector<int>> make_batches(int corpus_size, int batch_size, Rng& rng) {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    std::vector<int> idx(static_cast<std::size_t>(corpus_size));
    for (int i = 0; i < corpus_size; ++i) idx[static_cast<std::size_t>(i)] = i;
    rng.shuffle(idx);
    std::vector<std::vector<int>> batches;
    for (int begin = 0; begin < corpus_size; begin += batch_size) {
        const int end = std::min(corpus_size, begin + batch_size);
        batches.emplace_back(idx.begin() + begin, idx.begin() + end);
    }
    return batches;
}

int batch_pad_length(const Corpus& corpus, const std::vector<int>& batch) {
    int n = 0;
    for (int i : batch)
        n = std::max(n, static_cast<int>(corpus[static_cast<std::size_t>(i)].tokens.size()));
    return n;
}

void SyntheticTaskSpec::validate() const {
    if (pos_triggers.empty() || neg_triggers.empty() || modifiers.empty())
        throw ConfigError("synthetic spec: trigger and modifier sets must be non-empty");
    std::set<std::string> pos(pos_triggers.begin(), pos_triggers.end());
    for (const auto& t : neg_triggers) {
        if (pos.count(t))
            throw ConfigError("synthetic spec: trigger '" + t + "' appears in both classes");
    }
    std::set<std::string> all(pos_triggers.begin(), pos_triggers.end());
    all.insert(neg_triggers.begin(), neg_triggers.end());
    for (const auto& m : modifiers) {
        if (all.count(m))
            throw ConfigError("synthetic spec: modifier '" + m + "' collides with a trigger");
    }
    if (fillers < 1) throw ConfigError("synthetic spec: need at least one filler token");
    if (min_len < min_offset + 1)
        throw ConfigError("synthetic spec: min_len must be at least min_offset + 1");
    if (max_len < min_len || max_offset < min_offset)
        throw ConfigError("synthetic spec: empty length or offset range");
    if (collocation_fraction < 0.0 || collocation_fraction > 1.0)
        throw ConfigError("synthetic spec: collocation_fraction must be in [0, 1]");
    if (domain_shift < 0.0 || domain_shift > 1.0)
        throw ConfigError("synthetic spec: domain_shift must be in [0, 1]");
}

namespace {

std::string filler_name(const SyntheticTaskSpec& spec, bool target_domain, int k) {
    const int shifted = static_cast<int>(std::llround(spec.domain_shift * spec.fillers));
    char buf[32];
    if (target_domain && k < shifted)
        std::snprintf(buf, sizeof(buf), "tgtw%02d", k);
    else
        std::snprintf(buf, sizeof(buf), "srcw%02d", k);
    return buf;
}

Corpus generate_domain(const SyntheticTaskSpec& spec, int n, bool target_domain, Rng& rng,
                       bool from_source) {
    const int quota = static_cast<int>(std::ceil(spec.collocation_fraction * n));
    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) {
        const int len = spec.min_len + rng.uniform_int(spec.max_len - spec.min_len + 1);
        std::vector<std::string> tokens(static_cast<std::size_t>(len));
        for (auto& t : tokens) t = filler_name(spec, target_domain, rng.uniform_int(spec.fillers));

        const int cls = rng.uniform_int(2);
        const auto& triggers = cls == 1 ? spec.pos_triggers : spec.neg_triggers;
        const int trig_pos = rng.uniform_int(len);
        tokens[static_cast<std::size_t>(trig_pos)] =
            triggers[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(triggers.size())))];

        const bool collocated = e < quota;  // guarantees the requested fraction
        if (collocated) {
            std::vector<int> positions;
            for (int off = spec.min_offset; off <= spec.max_offset; ++off) {
                if (trig_pos - off >= 0) positions.push_back(trig_pos - off);
                if (trig_pos + off < len) positions.push_back(trig_pos + off);
            }
            const int mod_pos =
                positions[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(positions.size())))];
            tokens[static_cast<std::size_t>(mod_pos)] = spec.modifiers[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(spec.modifiers.size())))];
        }

        Example ex;
        ex.tokens = std::move(tokens);
        ex.label = collocated ? 1 - cls : cls;
        ex.from_source = from_source;
        corpus.push_back(std::move(ex));
    }
    rng.shuffle(corpus);  // collocated examples were front-loaded by the quota
    return corpus;
}

}  // namespace

SyntheticData generate_synthetic_transfer(const SyntheticTaskSpec& spec, int n_source,
                                          int n_target_train, int n_target_test) {
    spec.validate();
    if (n_source < 1 || n_target_train < 1 || n_target_test < 1)
        throw ConfigError("synthetic spec: corpus sizes must be positive");
    SyntheticData data;
    Rng rng_src(mix_seed(spec.seed, 1));
    Rng rng_train(mix_seed(spec.seed, 2));
    Rng rng_test(mix_seed(spec.seed, 3));
    data.source = generate_domain(spec, n_source, false, rng_src, true);
    data.target_train = generate_domain(spec, n_target_train, true, rng_train, false);
    data.target_test = generate_domain(spec, n_target_test, true, rng_test, false);
    return data;
}

int synthetic_oracle_label(const SyntheticTaskSpec& spec, const std::vector<std::string>& tokens) {
    int cls = -1;
    bool modifier = false;
    for (const auto& t : tokens) {
        if (std::find(spec.pos_triggers.begin(), spec.pos_triggers.end(), t) !=
            spec.pos_triggers.end())
            cls = 1;
        else if (std::find(spec.neg_triggers.begin(), spec.neg_triggers.end(), t) !=
                 spec.neg_triggers.end())
            cls = 0;
        else if (std::find(spec.modifiers.begin(), spec.modifiers.end(), t) !=
                 spec.modifiers.end())
            modifier = true;
    }
    if (cls < 0) throw ContractViolation("synthetic oracle: sentence has no trigger");
    return modifier ? 1 - cls : cls;
}

}  // namespace art
