#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "seedgen/errors.hpp"
#include "seedgen/pathgen.hpp"

using namespace seedgen;

namespace {

Token base_tok(std::uint32_t id, bool exit = false) {
    BlockId b;
    b.id = id;
    b.fn_exit = exit;
    return Token::base(b);
}

CompressedPath cpath(std::initializer_list<Token> tokens) {
    CompressedPath p;
    p.tokens = tokens;
    return p;
}

ExecutionPath epath(std::initializer_list<std::uint32_t> ids) {
    ExecutionPath p;
    for (auto id : ids) {
        BlockId b;
        b.id = id;
        p.blocks.push_back(b);
    }
    if (!p.blocks.empty()) p.blocks.front().fn_entry = true;
    return p;
}

// A model whose output distribution is a fixed near-one-hot (or flat-topped)
// function of nothing: all weights zero, logits carried entirely by proj_b.
RnnLM spike_model(std::size_t vocab_size, std::initializer_list<int> spike_ids) {
    RnnLM m(vocab_size, 4, 1);
    for (auto& p : m.params()) p.tensor->fill(0.0);
    for (int id : spike_ids) m.proj_b[static_cast<std::size_t>(id)] = 500.0;
    return m;
}

}  // namespace

TEST_CASE("vocab assigns dense ids after the sentinels") {
    std::vector<CompressedPath> corpus = {
        cpath({base_tok(5), Token::super(0), base_tok(2)}),
        cpath({base_tok(2), base_tok(5)}),
    };
    auto vocab = PathVocab::build(corpus);
    CHECK(vocab.size() == 5);  // 3 distinct tokens + 2 sentinels

    // sorted by key: bases before supers, ascending ids
    CHECK(vocab.id_of(base_tok(2)) == 2);
    CHECK(vocab.id_of(base_tok(5)) == 3);
    CHECK(vocab.id_of(Token::super(0)) == 4);
    CHECK(vocab.token_of(3) == base_tok(5));

    CHECK_THROWS_AS(vocab.id_of(base_tok(99)), ParameterError);
    CHECK_THROWS_AS(vocab.token_of(0), ParameterError);
    CHECK_THROWS_AS(vocab.token_of(5), ParameterError);
}

TEST_CASE("vocab text round trip") {
    std::vector<CompressedPath> corpus = {
        cpath({base_tok(0x10), Token::super(3), base_tok(0xabcd)}),
    };
    auto vocab = PathVocab::build(corpus);
    auto text = vocab.serialize();
    CHECK(text.find("0\t<path-start>") == 0);

    std::map<std::uint32_t, BlockId> universe;
    for (auto id : {0x10u, 0xabcdu}) {
        BlockId b;
        b.id = id;
        universe[id] = b;
    }
    auto reloaded = PathVocab::parse(text, universe);
    CHECK(reloaded.serialize() == text);
    CHECK(reloaded.id_of(Token::super(3)) == vocab.id_of(Token::super(3)));

    CHECK_THROWS_AS(PathVocab::parse("no tab here\n", universe), FormatError);
}

TEST_CASE("trained model reproduces a memorized path under argmax") {
    std::vector<CompressedPath> corpus = {
        cpath({base_tok(1), base_tok(2), base_tok(3), base_tok(4), base_tok(5), base_tok(6)}),
    };
    TrainConfig tcfg;
    tcfg.epochs = 400;
    tcfg.rng_seed = 9;
    PathModel pm = train_path_model(corpus, tcfg, 16);

    CompressionDictionary dict;  // no super-blocks, no fn_exit anywhere
    GenerationConfig gcfg;
    gcfg.strategy = SamplingStrategy::SampleFunction;  // pure argmax here
    Rng rng(1);
    auto out = generate_path(pm.model, pm.vocab, base_tok(1), gcfg, dict, rng);
    CHECK(out.tokens == corpus[0].tokens);
}

TEST_CASE("train_path_model rejects an empty corpus") {
    CHECK_THROWS_AS(train_path_model({}, TrainConfig{}, 8), ParameterError);
}

TEST_CASE("generate_path requires a known initial token") {
    std::vector<CompressedPath> corpus = {cpath({base_tok(1), base_tok(2)})};
    auto vocab = PathVocab::build(corpus);
    auto model = spike_model(vocab.size(), {PathVocab::kPathEnd});
    CompressionDictionary dict;
    GenerationConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS(generate_path(model, vocab, base_tok(42), cfg, dict, rng), ParameterError);
}

TEST_CASE("one-hot distributions make both strategies identical and cap length") {
    std::vector<CompressedPath> corpus = {cpath({base_tok(1), base_tok(2), base_tok(3)})};
    auto vocab = PathVocab::build(corpus);
    auto model = spike_model(vocab.size(), {vocab.id_of(base_tok(2))});
    CompressionDictionary dict;

    GenerationConfig cfg;
    cfg.max_tokens = 7;
    for (auto strategy : {SamplingStrategy::Sample, SamplingStrategy::SampleFunction}) {
        cfg.strategy = strategy;
        Rng rng(3);
        auto out = generate_path(model, vocab, base_tok(1), cfg, dict, rng);
        REQUIRE(out.tokens.size() == 7);
        CHECK(out.tokens.front() == base_tok(1));
        for (std::size_t i = 1; i < out.tokens.size(); ++i) CHECK(out.tokens[i] == base_tok(2));
    }
}

TEST_CASE("emitting the end sentinel stops generation") {
    std::vector<CompressedPath> corpus = {cpath({base_tok(1), base_tok(2)})};
    auto vocab = PathVocab::build(corpus);
    auto model = spike_model(vocab.size(), {PathVocab::kPathEnd});
    CompressionDictionary dict;
    GenerationConfig cfg;
    Rng rng(4);
    auto out = generate_path(model, vocab, base_tok(1), cfg, dict, rng);
    CHECK(out.tokens == std::vector<Token>{base_tok(1)});
}

TEST_CASE("SampleFunction draws only after function-exit tokens") {
    // initial token exits a function; the two follow-ups do not
    Token a = base_tok(1, true), b = base_tok(2), c = base_tok(3);
    std::vector<CompressedPath> corpus = {cpath({a, b, c})};
    auto vocab = PathVocab::build(corpus);
    // equal spikes at b and c: a fair coin when sampling, a tie under argmax
    auto model = spike_model(vocab.size(), {vocab.id_of(b), vocab.id_of(c)});
    CompressionDictionary dict;

    GenerationConfig cfg;
    cfg.strategy = SamplingStrategy::SampleFunction;
    cfg.max_tokens = 5;
    std::set<std::pair<int, std::uint32_t>> first_choices;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        auto out = generate_path(model, vocab, a, cfg, dict, rng);
        REQUIRE(out.tokens.size() == 5);
        first_choices.insert(out.tokens[1].key());
        // after the drawn token everything is argmax: the tie resolves low
        for (std::size_t i = 2; i < out.tokens.size(); ++i) CHECK(out.tokens[i] == b);
    }
    CHECK(first_choices.size() == 2);  // the post-exit position really samples
}

TEST_CASE("novelty filter can reject every candidate") {
    PathCorpus corpus;
    corpus.add(epath({1}));
    auto compressed = std::vector<CompressedPath>{cpath({base_tok(1)})};
    auto vocab = PathVocab::build(compressed);
    auto model = spike_model(vocab.size(), {PathVocab::kPathEnd});
    CompressionDictionary dict;

    GenerationConfig cfg;
    cfg.max_attempts = 5;
    auto report = generate_novel_corpus(model, vocab, corpus, dict, cfg, 2);
    CHECK(report.paths.empty());
    REQUIRE(report.slots.size() == 2);
    CHECK(report.slots[0] == "slot 0: exhausted after 5 attempts");
    CHECK(report.slots[1] == "slot 1: exhausted after 5 attempts");
}

TEST_CASE("generated paths are deduplicated within a call") {
    PathCorpus corpus;
    corpus.add(epath({1, 3}));
    auto compressed = std::vector<CompressedPath>{cpath({base_tok(1), base_tok(2), base_tok(3)})};
    auto vocab = PathVocab::build(compressed);
    // deterministic generator: always 1 -> 2,2,2 (novel once, duplicate after)
    auto model = spike_model(vocab.size(), {vocab.id_of(base_tok(2))});
    CompressionDictionary dict;

    GenerationConfig cfg;
    cfg.max_tokens = 4;
    cfg.max_attempts = 3;
    auto report = generate_novel_corpus(model, vocab, corpus, dict, cfg, 3);
    REQUIRE(report.paths.size() == 1);
    CHECK(report.paths[0].tokens.size() == 4);
    REQUIRE(report.slots.size() == 3);
    CHECK(report.slots[0] == "slot 0: accepted after 1 attempts");
    CHECK(report.slots[1] == "slot 1: exhausted after 3 attempts");
    CHECK(report.slots[2] == "slot 2: exhausted after 3 attempts");
}

TEST_CASE("generation is reproducible for a fixed seed") {
    PathCorpus corpus;
    corpus.add(epath({1, 2, 3, 4}));
    corpus.add(epath({2, 4, 1}));
    auto [compressed, dict] = compress_corpus(corpus, 300);

    TrainConfig tcfg;
    tcfg.epochs = 40;
    tcfg.rng_seed = 2;
    PathModel pm = train_path_model(compressed, tcfg, 12);

    GenerationConfig cfg;
    cfg.rng_seed = 31;
    cfg.max_attempts = 10;
    auto a = generate_novel_corpus(pm.model, pm.vocab, corpus, dict, cfg, 4);
    auto b = generate_novel_corpus(pm.model, pm.vocab, corpus, dict, cfg, 4);
    CHECK(a.slots == b.slots);
    REQUIRE(a.paths.size() == b.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i) CHECK(a.paths[i].tokens == b.paths[i].tokens);
}
