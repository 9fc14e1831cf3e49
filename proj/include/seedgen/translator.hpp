#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seedgen/neural.hpp"
#include "seedgen/pathcomp.hpp"
#include "seedgen/pdf.hpp"

namespace seedgen {

// Target-side alphabet over PDF lexical tokens with a frequency-capped
// vocabulary; everything else maps to UNK.
class ObjectVocab {
public:
    static constexpr int kSeqStart = 0;
    static constexpr int kSeqEnd = 1;
    static constexpr int kObjSep = 2;
    static constexpr int kUnk = 3;

    static ObjectVocab build(const std::vector<std::string>& token_strings,
                             std::size_t vocab_budget);

    int id_of(const std::string& token) const;  // kUnk when absent
    const std::string& token_of(int id) const;  // reserved ids throw
    bool is_reserved(int id) const { return id >= 0 && id < 4; }
    std::size_t size() const { return strings_.size() + 4; }

    std::string serialize() const;
    static ObjectVocab parse(const std::string& text);

private:
    std::map<std::string, int> ids_;
    std::vector<std::string> strings_;  // index = id - 4
};

// Source-side alphabet over compressed-path tokens, id 0 = UNK.
class SourceVocab {
public:
    static constexpr int kUnk = 0;

    static SourceVocab build(const std::vector<CompressedPath>& corpus);

    int id_of(const Token& t) const;  // kUnk when absent
    std::size_t size() const { return tokens_.size() + 1; }

    std::string serialize() const;

private:
    std::map<std::pair<int, std::uint32_t>, int> ids_;
    std::vector<Token> tokens_;
};

// Splits a PDF object body into lexical tokens: dictionary/array delimiters,
// whole string literals, names, and bare runs.
std::vector<std::string> lex_object_body(const std::string& body);

// Lexed tokens re-joined with single spaces (the "modulo whitespace" form).
std::string normalize_body_ws(const std::string& body);

// Whole-object-list encoding: SEQ_START body-tokens (OBJ_SEP body-tokens)* SEQ_END.
std::vector<int> encode_objects(const std::vector<PdfObject>& objects, const ObjectVocab& vocab);

// Builds a vocabulary from exactly these objects, then encodes them.
std::pair<std::vector<int>, ObjectVocab> tokenize_objects(const std::vector<PdfObject>& objects,
                                                          std::size_t vocab_budget);

// Splits on OBJ_SEP, joins tokens with spaces, renders UNK as "null", drops
// empty segments.
std::vector<std::string> detokenize_objects(const std::vector<int>& ids, const ObjectVocab& vocab);

struct ParallelPair {
    std::string name;
    std::vector<int> source;  // compressed-path token ids
    std::vector<int> target;  // object token ids with sentinels
};

struct ParallelCorpus {
    std::vector<ParallelPair> pairs;
    SourceVocab source_vocab;
    ObjectVocab target_vocab;
    std::size_t dropped_empty = 0;         // seeds with no extractable objects
    std::size_t skipped_missing_path = 0;  // seeds with no recorded path
    std::size_t max_target_len = 0;
};

// One pair per (seed, recorded path with matching source_id); sources
// compressed with the shared dictionary.
ParallelCorpus build_parallel_corpus(const std::vector<std::pair<std::string, std::string>>& seeds,
                                     const PathCorpus& corpus, const CompressionDictionary& dict,
                                     std::size_t vocab_budget);

std::vector<int> encode_source(const CompressedPath& path, const SourceVocab& vocab);

struct TranslationResult {
    std::vector<std::string> bodies;
    std::string seed_bytes;
    bool well_formed = false;
};

// Greedy decode, detokenize, assemble, validate. max_decode_len caps the
// decoded length including the start sentinel.
TranslationResult translate(const Seq2Seq& model, const std::vector<int>& source,
                            std::size_t max_decode_len, const ObjectVocab& target_vocab);

}  // namespace seedgen
