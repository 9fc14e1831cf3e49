#include "seedgen/pathgen.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "seedgen/errors.hpp"

namespace seedgen {

PathVocab PathVocab::build(const std::vector<CompressedPath>& corpus) {
    std::set<std::pair<int, std::uint32_t>> keys;
    std::map<std::pair<int, std::uint32_t>, Token> by_key;
    for (const auto& p : corpus)
        for (const auto& t : p.tokens) {
            keys.insert(t.key());
            by_key.emplace(t.key(), t);
        }
    PathVocab v;
    int next = 2;
    for (const auto& k : keys) {
        v.ids_[k] = next++;
        v.tokens_.push_back(by_key.at(k));
    }
    return v;
}

int PathVocab::id_of(const Token& t) const {
    auto it = ids_.find(t.key());
    if (it == ids_.end()) throw ParameterError("token not in path vocabulary");
    return it->second;
}

const Token& PathVocab::token_of(int id) const {
    if (id < 2 || static_cast<std::size_t>(id - 2) >= tokens_.size())
        throw ParameterError("id " + std::to_string(id) + " is not a path token");
    return tokens_[static_cast<std::size_t>(id - 2)];
}

namespace {

std::string hex8(std::uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(8, '0');
    for (int i = 7; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace

std::string PathVocab::serialize() const {
    std::string out;
    out += "0\t<path-start>\n1\t<path-end>\n";
    int id = 2;
    for (const auto& t : tokens_) {
        out += std::to_string(id++) + "\t";
        out += t.kind == Token::Kind::Super ? "S" + std::to_string(t.super_id)
                                            : "B" + hex8(t.block.id);
        out += "\n";
    }
    return out;
}

PathVocab PathVocab::parse(const std::string& text,
                           const std::map<std::uint32_t, BlockId>& universe) {
    PathVocab v;
    std::istringstream in(text);
    std::string line;
    int expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("malformed vocab line: " + line);
        int id = std::stoi(line.substr(0, tab));
        if (id != expected++) throw FormatError("non-dense vocab ids");
        if (id < 2) continue;  // sentinels
        std::string tok = line.substr(tab + 1);
        Token t;
        if (!tok.empty() && tok[0] == 'S') {
            t = Token::super(static_cast<std::uint32_t>(std::stoul(tok.substr(1))));
        } else if (!tok.empty() && tok[0] == 'B') {
            std::uint32_t bid = static_cast<std::uint32_t>(std::stoul(tok.substr(1), nullptr, 16));
            BlockId b;
            b.id = bid;
            auto it = universe.find(bid);
            if (it != universe.end()) b = it->second;
            t = Token::base(b);
        } else {
            throw FormatError("malformed vocab token: " + tok);
        }
        v.ids_[t.key()] = id;
        v.tokens_.push_back(t);
    }
    return v;
}

PathModel train_path_model(const std::vector<CompressedPath>& corpus,
                           const TrainConfig& cfg, std::size_t hidden_dim) {
    if (corpus.empty()) throw ParameterError("empty compressed corpus");
    PathVocab vocab = PathVocab::build(corpus);
    std::vector<std::vector<int>> sequences;
    sequences.reserve(corpus.size());
    for (const auto& p : corpus) {
        std::vector<int> seq;
        seq.reserve(p.tokens.size() + 2);
        seq.push_back(PathVocab::kPathStart);
        for (const auto& t : p.tokens) seq.push_back(vocab.id_of(t));
        seq.push_back(PathVocab::kPathEnd);
        sequences.push_back(std::move(seq));
    }
    RnnLM model(vocab.size(), hidden_dim, cfg.rng_seed);
    lm_train(model, sequences, cfg);
    return {std::move(model), std::move(vocab)};
}

CompressedPath generate_path(const RnnLM& model, const PathVocab& vocab, const Token& initial,
                             const GenerationConfig& cfg, const CompressionDictionary& dict,
                             Rng& rng) {
    int initial_id = vocab.id_of(initial);  // throws if unknown
    LmSampler sampler(model);
    sampler.step(PathVocab::kPathStart);
    std::vector<double> dist = sampler.step(initial_id);

    CompressedPath out;
    out.tokens.push_back(initial);
    while (out.tokens.size() < cfg.max_tokens) {
        const Token& current = out.tokens.back();
        int next;
        if (cfg.strategy == SamplingStrategy::Sample || token_fn_exit(current, dict))
            next = sample_categorical(dist, cfg.temperature, rng);
        else
            next = argmax_index(dist);
        if (next == PathVocab::kPathEnd || next == PathVocab::kPathStart) break;
        out.tokens.push_back(vocab.token_of(next));
        dist = sampler.step(next);
    }
    return out;
}

GenerationReport generate_novel_corpus(const RnnLM& model, const PathVocab& vocab,
                                       const PathCorpus& corpus,
                                       const CompressionDictionary& dict,
                                       const GenerationConfig& cfg, std::size_t count) {
    if (count < 1) throw ParameterError("count must be >= 1");

    // distinct initial tokens of the corpus paths, in deterministic order
    std::set<Token> initial_set;
    for (const auto& p : corpus.paths()) {
        CompressedPath cp = compress_single(p, dict);
        if (!cp.tokens.empty()) initial_set.insert(cp.tokens.front());
    }
    std::vector<Token> initials(initial_set.begin(), initial_set.end());
    if (initials.empty()) throw ParameterError("corpus has no initial tokens");

    Rng rng(cfg.rng_seed);
    GenerationReport report;
    std::set<std::vector<std::uint32_t>> emitted;
    for (std::size_t slot = 0; slot < count; ++slot) {
        bool accepted = false;
        std::size_t attempts = 0;
        while (attempts < cfg.max_attempts && !accepted) {
            ++attempts;
            const Token& init = initials[rng.index(initials.size())];
            CompressedPath cand = generate_path(model, vocab, init, cfg, dict, rng);
            ExecutionPath full = decompress(cand, dict);
            auto ids = full.block_ids();
            if (corpus.contains_sequence(ids) || emitted.count(ids)) continue;
            emitted.insert(ids);
            report.paths.push_back(std::move(cand));
            accepted = true;
        }
        std::ostringstream line;
        line << "slot " << slot << ": " << (accepted ? "accepted" : "exhausted")
             << " after " << attempts << " attempts";
        report.slots.push_back(line.str());
    }
    return report;
}

}  // namespace seedgen
