#pragma once

#include <map>
#include <string>
#include <vector>

#include "seedgen/neural.hpp"
#include "seedgen/pathcomp.hpp"

namespace seedgen {

// Bijection between compressed-path tokens and dense model ids.
// Ids 0 and 1 are the PATH_START / PATH_END sentinels.
class PathVocab {
public:
    static constexpr int kPathStart = 0;
    static constexpr int kPathEnd = 1;

    static PathVocab build(const std::vector<CompressedPath>& corpus);

    bool contains(const Token& t) const { return ids_.count(t.key()) > 0; }
    int id_of(const Token& t) const;
    const Token& token_of(int id) const;
    std::size_t size() const { return tokens_.size() + 2; }

    std::string serialize() const;
    static PathVocab parse(const std::string& text,
                           const std::map<std::uint32_t, BlockId>& universe);

private:
    std::map<std::pair<int, std::uint32_t>, int> ids_;
    std::vector<Token> tokens_;  // index = id - 2
};

enum class SamplingStrategy { Sample, SampleFunction };

struct GenerationConfig {
    SamplingStrategy strategy = SamplingStrategy::Sample;
    double temperature = 1.0;
    std::size_t max_tokens = 300;
    std::size_t max_attempts = 50;
    std::uint64_t rng_seed = 1;
};

struct PathModel {
    RnnLM model;
    PathVocab vocab;
};

// Builds the vocab and trains on PATH_START . tokens . PATH_END sequences.
PathModel train_path_model(const std::vector<CompressedPath>& corpus,
                           const TrainConfig& cfg, std::size_t hidden_dim);

// Generates one compressed path starting at `initial`. Sample draws every
// token; SampleFunction takes argmax except after tokens whose expansion ends
// in a function-exit block.
CompressedPath generate_path(const RnnLM& model, const PathVocab& vocab, const Token& initial,
                             const GenerationConfig& cfg, const CompressionDictionary& dict,
                             Rng& rng);

struct GenerationReport {
    std::vector<CompressedPath> paths;
    std::vector<std::string> slots;  // "slot <n>: accepted|exhausted after <k> attempts"
};

// Generates up to `count` paths whose decompressed block sequences are novel
// w.r.t. the corpus and each other. Initial tokens are drawn uniformly from
// the corpus paths' initial tokens.
GenerationReport generate_novel_corpus(const RnnLM& model, const PathVocab& vocab,
                                       const PathCorpus& corpus,
                                       const CompressionDictionary& dict,
                                       const GenerationConfig& cfg, std::size_t count);

}  // namespace seedgen
