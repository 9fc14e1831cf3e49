#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "seedgen/neural.hpp"
#include "seedgen/pathgen.hpp"
#include "seedgen/trace.hpp"

namespace seedgen {

struct PipelineConfig {
    std::string seed_dir;
    std::string trace_dir;  // optional; toy target used for seeds without traces
    std::string work_dir = "work";

    std::uint32_t max_len = 300;
    std::size_t hidden_dim = 256;
    std::size_t vocab_budget = 256;

    double learning_rate = 2e-3;
    std::size_t batch_size = 4;
    std::size_t bptt_window = 64;
    std::size_t epochs = 200;
    std::size_t translator_epochs = 200;
    double gradient_clip_norm = 5.0;

    double temperature = 1.0;
    std::size_t gen_count = 10;
    std::size_t max_attempts = 50;
    std::uint64_t seed = 1;

    TrainConfig path_train_config() const;
    TrainConfig translator_train_config() const;
};

// Flat "key = value" text, '#' comments. Unknown keys are errors.
PipelineConfig parse_config(const std::string& text);
void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value);

struct CoverageColumn {
    std::string label;          // e.g. "C_s"
    std::size_t blocks_union = 0;  // original + new, distinct blocks
    std::size_t paths_union = 0;
};

struct CoverageReport {
    std::size_t blocks_original = 0;
    std::size_t paths_original = 0;
    std::vector<CoverageColumn> columns;
};

// 100 * delta / original, rounded half-up to three significant figures
// (at most two decimals).
double pct_delta(std::size_t original, long long delta);

// Distinct blocks / distinct paths; "new" measured as union with original.
CoverageReport coverage_delta(const PathCorpus& original,
                              const std::vector<std::pair<std::string, const PathCorpus*>>& news);
CoverageReport coverage_delta(const PathCorpus& original, const PathCorpus& added);

std::string render_report(const CoverageReport& report);

// Stage failure with partial artifacts preserved under work/failed-<stage>/.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(const std::string& stage_name, const std::string& cause)
        : std::runtime_error("stage '" + stage_name + "' failed: " + cause), stage(stage_name) {}
};

struct PipelineResult {
    PathCorpus original_corpus;
    std::map<std::string, std::size_t> well_formed_seeds;  // per strategy label
    std::map<std::string, std::size_t> generated_paths;    // per strategy label
    std::string manifest_path;
};

// Steps 1-3 end to end: ingest/record, compress, train the path model,
// generate novel paths under both strategies, train the translator, translate
// and validate. Deterministic given cfg.seed.
PipelineResult cmd_pipeline(const PipelineConfig& cfg);

// Runs original and new seed dirs through the toy target and renders the
// coverage table. Labels follow the given order.
CoverageReport cmd_eval(const PipelineConfig& cfg, const std::string& original_seed_dir,
                        const std::vector<std::pair<std::string, std::string>>& new_seed_dirs);

// Helpers shared by the CLI and tests.
std::vector<std::pair<std::string, std::string>> read_seed_files(const std::string& dir);
PathCorpus corpus_from_seeds(const std::vector<std::pair<std::string, std::string>>& seeds,
                             const std::string& trace_dir);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace seedgen
