#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seedgen/errors.hpp"
#include "seedgen/translator.hpp"

using namespace seedgen;

namespace {

Token base_tok(std::uint32_t id) {
    BlockId b;
    b.id = id;
    return Token::base(b);
}

PdfObject obj(std::uint32_t num, std::string body) {
    PdfObject o;
    o.obj_number = num;
    o.generation = 0;
    o.body = std::move(body);
    return o;
}

CompressedPath cpath(std::initializer_list<std::uint32_t> ids) {
    CompressedPath p;
    for (auto id : ids) p.tokens.push_back(base_tok(id));
    return p;
}

}  // namespace

TEST_CASE("lexes a dictionary body into four tokens") {
    auto toks = lex_object_body("<< /Type /Catalog >>");
    CHECK(toks == std::vector<std::string>{"<<", "/Type", "/Catalog", ">>"});
}

TEST_CASE("lexer keeps composite literals whole") {
    auto s = lex_object_body("(a (nested) \\) still)");
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "(a (nested) \\) still)");

    auto hex = lex_object_body("<4AFF 00>");
    REQUIRE(hex.size() == 1);
    CHECK(hex[0] == "<4AFF 00>");

    auto arr = lex_object_body("[3 0 R/Next(x)]");
    CHECK(arr == std::vector<std::string>{"[", "3", "0", "R", "/Next", "(x)", "]"});
}

TEST_CASE("whitespace normalization single-spaces the token stream") {
    CHECK(normalize_body_ws("<<  /A\n\t1 >>") == "<< /A 1 >>");
    CHECK(normalize_body_ws("42") == "42");
    CHECK(normalize_body_ws("") == "");
}

TEST_CASE("object vocab budgets by frequency") {
    CHECK_THROWS_AS(ObjectVocab::build({"a"}, 7), ParameterError);

    std::vector<std::string> toks;
    for (int i = 0; i < 5; ++i) toks.push_back("/Common");
    for (int i = 0; i < 3; ++i) toks.push_back("42");
    toks.insert(toks.end(), {"/r1", "/r2", "/r3", "/r4", "/r5", "/r6", "/r7", "/r8"});
    auto vocab = ObjectVocab::build(toks, 8);
    CHECK(vocab.size() == 12);  // 8 kept + 4 reserved
    CHECK(vocab.id_of("/Common") >= 4);
    CHECK(vocab.id_of("42") >= 4);
    // the rare tail ties by string; /r7 and /r8 fall out of the budget
    CHECK(vocab.id_of("/r1") >= 4);
    CHECK(vocab.id_of("/r7") == ObjectVocab::kUnk);
    CHECK(vocab.id_of("/r8") == ObjectVocab::kUnk);
    CHECK(vocab.id_of("never-seen") == ObjectVocab::kUnk);
    CHECK_THROWS_AS(vocab.token_of(ObjectVocab::kUnk), ParameterError);
}

TEST_CASE("object vocab text round trip survives control characters") {
    auto vocab = ObjectVocab::build({"(a\tb)", "(c\nd)", "42", "/N", "x", "y", "z", "w"}, 8);
    auto text = vocab.serialize();
    auto reloaded = ObjectVocab::parse(text);
    CHECK(reloaded.serialize() == text);
    CHECK(reloaded.id_of("(a\tb)") == vocab.id_of("(a\tb)"));
    CHECK(reloaded.id_of("(c\nd)") == vocab.id_of("(c\nd)"));

    CHECK_THROWS_AS(ObjectVocab::parse("0 no-tab\n"), FormatError);
}

TEST_CASE("source vocab maps unknown tokens to UNK") {
    auto vocab = SourceVocab::build({cpath({5, 7}), cpath({7, 9})});
    CHECK(vocab.size() == 4);  // 3 distinct tokens + UNK
    CHECK(vocab.id_of(base_tok(5)) == 1);
    CHECK(vocab.id_of(base_tok(7)) == 2);
    CHECK(vocab.id_of(base_tok(9)) == 3);
    CHECK(vocab.id_of(base_tok(1000)) == SourceVocab::kUnk);
    CHECK(vocab.id_of(Token::super(0)) == SourceVocab::kUnk);
}

TEST_CASE("empty object list encodes to just the sentinels") {
    auto vocab = ObjectVocab::build({"a", "b", "c", "d", "e", "f", "g", "h"}, 8);
    CHECK(encode_objects({}, vocab) ==
          std::vector<int>{ObjectVocab::kSeqStart, ObjectVocab::kSeqEnd});
}

TEST_CASE("multiple objects are joined with the separator") {
    std::vector<PdfObject> objects = {obj(1, "42"), obj(2, "/N")};
    auto [ids, vocab] = tokenize_objects(objects, 8);
    REQUIRE(ids.size() == 5);
    CHECK(ids.front() == ObjectVocab::kSeqStart);
    CHECK(ids[2] == ObjectVocab::kObjSep);
    CHECK(ids.back() == ObjectVocab::kSeqEnd);
}

TEST_CASE("detokenize inverts tokenize modulo whitespace") {
    std::vector<PdfObject> objects = {
        obj(1, "<< /Type /Catalog\n   /Pages 2 0 R >>"),
        obj(2, "[1 2(a b)/X]"),
        obj(3, "42"),
    };
    auto [ids, vocab] = tokenize_objects(objects, 64);
    auto bodies = detokenize_objects(ids, vocab);
    REQUIRE(bodies.size() == objects.size());
    for (std::size_t i = 0; i < bodies.size(); ++i)
        CHECK(bodies[i] == normalize_body_ws(objects[i].body));
}

TEST_CASE("detokenize drops empty segments and renders UNK as null") {
    auto vocab = ObjectVocab::build({"a", "b", "c", "d", "e", "f", "g", "h"}, 8);
    int a = vocab.id_of("a");

    CHECK(detokenize_objects({ObjectVocab::kSeqStart, ObjectVocab::kSeqEnd}, vocab).empty());
    CHECK(detokenize_objects({ObjectVocab::kSeqStart, ObjectVocab::kObjSep,
                              ObjectVocab::kObjSep, ObjectVocab::kSeqEnd}, vocab)
              .empty());

    auto bodies = detokenize_objects(
        {ObjectVocab::kSeqStart, a, ObjectVocab::kUnk, a, ObjectVocab::kObjSep, a,
         ObjectVocab::kSeqEnd},
        vocab);
    REQUIRE(bodies.size() == 2);
    CHECK(bodies[0] == "a null a");
    CHECK(bodies[1] == "a");
}

TEST_CASE("parallel corpus pairs seeds with their recorded paths") {
    PathCorpus corpus;
    auto add_path = [&](const std::string& name, std::initializer_list<std::uint32_t> ids) {
        ExecutionPath p;
        for (auto id : ids) {
            BlockId b;
            b.id = id;
            p.blocks.push_back(b);
        }
        p.blocks.front().fn_entry = true;
        p.source_id = name;
        corpus.add(p);
    };
    add_path("s1", {1, 2, 3});
    add_path("s2", {1, 3, 2});
    add_path("s3", {2, 1, 3});

    std::vector<std::pair<std::string, std::string>> seeds = {
        {"s1", assemble_pdf({"<< /Type /Catalog >>", "42"}, 0)},
        {"s2", "no objects in here"},          // extractable object count: 0
        {"s3", assemble_pdf({"/Solo"}, 0)},
        {"s4", assemble_pdf({"(orphan)"}, 0)},  // no recorded path
    };
    CompressionDictionary dict;
    auto pc = build_parallel_corpus(seeds, corpus, dict, 32);

    CHECK(pc.dropped_empty == 1);
    CHECK(pc.skipped_missing_path == 1);
    REQUIRE(pc.pairs.size() == 2);
    CHECK(pc.pairs[0].name == "s1");
    CHECK(pc.pairs[1].name == "s3");
    CHECK(pc.pairs[0].source.size() == 3);
    // << /Type /Catalog >> | sep | 42, plus the two sentinels
    CHECK(pc.pairs[0].target.size() == 8);
    CHECK(pc.pairs[1].target.size() == 3);
    CHECK(pc.max_target_len == 8);
    for (const auto& pair : pc.pairs)
        for (int id : pair.source) CHECK(id != SourceVocab::kUnk);
}

TEST_CASE("a memorized pair translates to a well-formed seed") {
    std::vector<PdfObject> objects = {obj(1, "<< /Type /Catalog >>")};
    auto [target, vocab] = tokenize_objects(objects, 8);
    std::vector<int> source = {1, 2, 1};

    Seq2Seq model(3, vocab.size(), 24, 6);
    TrainConfig cfg;
    cfg.epochs = 900;
    cfg.rng_seed = 8;
    auto log = seq2seq_train(model, {{source, target}}, cfg);
    REQUIRE(log.back() < 0.1);

    auto result = translate(model, source, 50, vocab);
    REQUIRE(result.bodies.size() == 1);
    CHECK(result.bodies[0] == "<< /Type /Catalog >>");
    CHECK(result.well_formed);
    CHECK(result.seed_bytes.find("/Root 1 0 R") != std::string::npos);

    // deterministic decode
    auto again = translate(model, source, 50, vocab);
    CHECK(again.seed_bytes == result.seed_bytes);
}

TEST_CASE("a unit decode budget yields nothing") {
    auto vocab = ObjectVocab::build({"a", "b", "c", "d", "e", "f", "g", "h"}, 8);
    Seq2Seq model(3, vocab.size(), 8, 2);
    auto result = translate(model, {1, 2}, 1, vocab);
    CHECK(result.bodies.empty());
    CHECK(result.seed_bytes.empty());
    CHECK_FALSE(result.well_formed);
}
