#pragma once

// Shared run configuration for the command-line tool. Paths inside the
// file resolve relative to the file's own directory; defaults reproduce
// the standard constants (512/128/20/100 chunking, 0.8/0.1/0.1 split).

#include "iduqa/chunker.h"
#include "iduqa/common.h"
#include "iduqa/dataset.h"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iduqa {

struct RunConfig {
    std::filesystem::path lexicon_path;
    std::filesystem::path corpus_path; // manifest or cleaned-corpus file
    std::filesystem::path out_dir;
    std::optional<uint64_t> seed;
    std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
    ChunkPolicy chunk;
    Pairing::Mode pairing_mode = Pairing::Mode::all_variants;
    size_t pairing_k = 0;
    double bootstrap_level = 0.95;
    size_t bootstrap_replicates = 10000;
    std::optional<LogLevel> log_level;
    std::vector<std::string> sentence_abbreviations; // appended to the defaults
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir,
                           const std::string& origin = "<string>");

/// Protected-abbreviation list for sentence splitting: the built-in
/// defaults plus any extras from the config.
std::vector<std::string> sentence_abbreviations(const RunConfig& config);

} // namespace iduqa
