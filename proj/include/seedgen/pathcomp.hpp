#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seedgen/trace.hpp"

namespace seedgen {

// A compressed-path symbol: either a real basic block or a super-block
// standing for a pair of tokens.
struct Token {
    enum class Kind { Base, Super };
    Kind kind = Kind::Base;
    BlockId block;                // valid when kind == Base
    std::uint32_t super_id = 0;   // valid when kind == Super

    static Token base(BlockId b) {
        Token t;
        t.kind = Kind::Base;
        t.block = b;
        return t;
    }
    static Token super(std::uint32_t id) {
        Token t;
        t.kind = Kind::Super;
        t.super_id = id;
        return t;
    }

    // Identity ignores block flags: flags are derivable from the id.
    std::pair<int, std::uint32_t> key() const {
        return {kind == Kind::Super ? 1 : 0, kind == Kind::Super ? super_id : block.id};
    }
    friend bool operator==(const Token& a, const Token& b) { return a.key() == b.key(); }
    friend bool operator<(const Token& a, const Token& b) { return a.key() < b.key(); }
};

struct SuperBlockRule {
    std::uint32_t super_id = 0;
    Token left;
    Token right;
};

struct CompressionDictionary {
    std::vector<SuperBlockRule> rules;  // topologically ordered by construction
    std::uint32_t max_len = 300;
};

struct CompressedPath {
    std::vector<Token> tokens;
    ExecutionPath origin;
};

// Iterative digram replacement: the most frequent adjacent pair shared by at
// least two distinct paths becomes a fresh super-block, until every path is
// shorter than max_len or no eligible pair remains. A final phase admits
// pairs repeated within a single path. Ties break by smaller (left, right).
std::pair<std::vector<CompressedPath>, CompressionDictionary>
compress_corpus(const PathCorpus& corpus, std::uint32_t max_len);

ExecutionPath decompress(const CompressedPath& path, const CompressionDictionary& dict);
std::vector<BlockId> expand_tokens(const std::vector<Token>& tokens,
                                   const CompressionDictionary& dict);

// Encode a new path against a fixed dictionary (greedy, in rule order).
CompressedPath compress_single(const ExecutionPath& path, const CompressionDictionary& dict);

// Whether a token's expansion ends in a function-exit block.
bool token_fn_exit(const Token& token, const CompressionDictionary& dict);

// Text persistence: one rule per line, "S<id> <lhs> <rhs>", operands
// "B<8-hex-digits>" or "S<id>".
std::string serialize_dictionary(const CompressionDictionary& dict);
CompressionDictionary parse_dictionary(const std::string& text,
                                       const std::map<std::uint32_t, BlockId>& universe);

}  // namespace seedgen
