#pragma once

#include <memory>

#include "art/model.hpp"

namespace art {

// Versioned text snapshot of a trained model: config, vocabularies and
// parameter values at 17 significant digits (doubles survive the round trip
// bit-exactly, and save -> load -> save is byte-identical).
struct Checkpoint {
    int version = 1;
    std::map<std::string, std::string> config;
    std::vector<std::string> words;
    std::vector<std::string> chars;
    std::vector<std::string> tags;
    std::vector<std::string> source_tags;
    std::vector<std::pair<std::string, Tensor>> params;  // sorted by name
};

Checkpoint make_checkpoint(const TransferModel& model);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the model the checkpoint describes and loads its values.
std::unique_ptr<TransferModel> model_from_checkpoint(const Checkpoint& ckpt);

// Machine-readable record of one command invocation, written atomically.
struct RunManifest {
    std::string command_line;
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::string build_id;
    std::string started;
    std::string finished;
    std::map<std::string, double> metrics;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

std::string build_id();
std::string timestamp_utc();

}  // namespace art
