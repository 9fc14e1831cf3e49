#include "seedgen/pathcomp.hpp"

#include <map>
#include <sstream>

#include "seedgen/errors.hpp"

namespace seedgen {

namespace {

using TokenKey = std::pair<int, std::uint32_t>;
using PairKey = std::pair<TokenKey, TokenKey>;

struct PairStats {
    std::size_t total = 0;
    std::size_t distinct_paths = 0;
    std::size_t max_in_one_path = 0;
    Token left;
    Token right;
};

std::map<PairKey, PairStats> count_pairs(const std::vector<std::vector<Token>>& paths) {
    std::map<PairKey, PairStats> stats;
    for (const auto& p : paths) {
        std::map<PairKey, std::size_t> local;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            PairKey k{p[i].key(), p[i + 1].key()};
            ++local[k];
            auto& s = stats[k];
            if (s.total == 0) {
                s.left = p[i];
                s.right = p[i + 1];
            }
            ++s.total;
        }
        for (const auto& [k, n] : local) {
            auto& s = stats[k];
            ++s.distinct_paths;
            if (n > s.max_in_one_path) s.max_in_one_path = n;
        }
    }
    return stats;
}

// Left-to-right non-overlapping replacement of (left,right) with repl.
bool replace_pair(std::vector<Token>& tokens, const Token& left, const Token& right,
                  const Token& repl) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    bool changed = false;
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (i + 1 < tokens.size() && tokens[i] == left && tokens[i + 1] == right) {
            out.push_back(repl);
            i += 2;
            changed = true;
        } else {
            out.push_back(tokens[i]);
            ++i;
        }
    }
    if (changed) tokens = std::move(out);
    return changed;
}

std::string hex8(std::uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(8, '0');
    for (int i = 7; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

std::string token_text(const Token& t) {
    if (t.kind == Token::Kind::Super) return "S" + std::to_string(t.super_id);
    return "B" + hex8(t.block.id);
}

}  // namespace

std::pair<std::vector<CompressedPath>, CompressionDictionary>
compress_corpus(const PathCorpus& corpus, std::uint32_t max_len) {
    if (max_len < 2) throw ParameterError("max_len must be >= 2");

    std::vector<std::vector<Token>> paths;
    paths.reserve(corpus.size());
    for (const auto& p : corpus.paths()) {
        std::vector<Token> toks;
        toks.reserve(p.blocks.size());
        for (const auto& b : p.blocks) toks.push_back(Token::base(b));
        paths.push_back(std::move(toks));
    }

    CompressionDictionary dict;
    dict.max_len = max_len;

    bool single_path_phase = false;
    for (;;) {
        bool over = false;
        for (const auto& p : paths)
            if (p.size() >= max_len) { over = true; break; }
        if (!over) break;

        auto stats = count_pairs(paths);
        const PairStats* best = nullptr;
        PairKey best_key{};
        for (const auto& [k, s] : stats) {
            bool eligible = s.distinct_paths >= 2 ||
                            (single_path_phase && s.max_in_one_path >= 2);
            if (!eligible) continue;
            if (!best || s.total > best->total ||
                (s.total == best->total && k < best_key)) {
                best = &s;
                best_key = k;
            }
        }
        if (!best) {
            if (!single_path_phase) {
                single_path_phase = true;
                continue;
            }
            break;
        }

        auto id = static_cast<std::uint32_t>(dict.rules.size());
        dict.rules.push_back({id, best->left, best->right});
        Token repl = Token::super(id);
        for (auto& p : paths) replace_pair(p, best->left, best->right, repl);
    }

    std::vector<CompressedPath> out;
    out.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i)
        out.push_back({std::move(paths[i]), corpus.paths()[i]});
    return {std::move(out), std::move(dict)};
}

std::vector<BlockId> expand_tokens(const std::vector<Token>& tokens,
                                   const CompressionDictionary& dict) {
    std::vector<BlockId> out;
    // iterative expansion with an explicit stack, rules are acyclic by id order
    std::vector<Token> stack(tokens.rbegin(), tokens.rend());
    while (!stack.empty()) {
        Token t = stack.back();
        stack.pop_back();
        if (t.kind == Token::Kind::Base) {
            out.push_back(t.block);
        } else {
            if (t.super_id >= dict.rules.size())
                throw ParameterError("unknown super-block id S" + std::to_string(t.super_id));
            const auto& rule = dict.rules[t.super_id];
            stack.push_back(rule.right);
            stack.push_back(rule.left);
        }
    }
    return out;
}

ExecutionPath decompress(const CompressedPath& path, const CompressionDictionary& dict) {
    ExecutionPath out;
    out.blocks = expand_tokens(path.tokens, dict);
    out.source_id = path.origin.source_id;
    return out;
}

CompressedPath compress_single(const ExecutionPath& path, const CompressionDictionary& dict) {
    CompressedPath cp;
    cp.origin = path;
    cp.tokens.reserve(path.blocks.size());
    for (const auto& b : path.blocks) cp.tokens.push_back(Token::base(b));

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& rule : dict.rules)
            if (replace_pair(cp.tokens, rule.left, rule.right, Token::super(rule.super_id)))
                changed = true;
    }
    return cp;
}

bool token_fn_exit(const Token& token, const CompressionDictionary& dict) {
    Token t = token;
    while (t.kind == Token::Kind::Super) {
        if (t.super_id >= dict.rules.size())
            throw ParameterError("unknown super-block id S" + std::to_string(t.super_id));
        t = dict.rules[t.super_id].right;
    }
    return t.block.fn_exit;
}

std::string serialize_dictionary(const CompressionDictionary& dict) {
    std::string out;
    for (const auto& r : dict.rules) {
        out += "S" + std::to_string(r.super_id);
        out += " " + token_text(r.left);
        out += " " + token_text(r.right);
        out += "\n";
    }
    return out;
}

namespace {

Token parse_operand(const std::string& s, std::size_t lineno,
                    const std::map<std::uint32_t, BlockId>& universe) {
    auto bad = [lineno](const std::string& what) {
        throw FormatError("dictionary line " + std::to_string(lineno) + ": " + what);
    };
    if (s.size() < 2) bad("operand too short");
    if (s[0] == 'S') {
        return Token::super(static_cast<std::uint32_t>(std::stoul(s.substr(1))));
    }
    if (s[0] == 'B') {
        std::uint32_t id = static_cast<std::uint32_t>(std::stoul(s.substr(1), nullptr, 16));
        auto it = universe.find(id);
        BlockId b;
        b.id = id;
        if (it != universe.end()) b = it->second;
        return Token::base(b);
    }
    bad("operand must start with B or S");
    return {};
}

}  // namespace

CompressionDictionary parse_dictionary(const std::string& text,
                                       const std::map<std::uint32_t, BlockId>& universe) {
    CompressionDictionary dict;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string sid, lhs, rhs;
        if (!(ls >> sid >> lhs >> rhs) || sid.empty() || sid[0] != 'S')
            throw FormatError("dictionary line " + std::to_string(lineno) + ": malformed rule");
        SuperBlockRule r;
        r.super_id = static_cast<std::uint32_t>(std::stoul(sid.substr(1)));
        if (r.super_id != dict.rules.size())
            throw FormatError("dictionary line " + std::to_string(lineno) + ": non-dense rule id");
        r.left = parse_operand(lhs, lineno, universe);
        r.right = parse_operand(rhs, lineno, universe);
        // acyclicity: operands only reference earlier rules
        for (const Token* t : {&r.left, &r.right})
            if (t->kind == Token::Kind::Super && t->super_id >= r.super_id)
                throw FormatError("dictionary line " + std::to_string(lineno) + ": forward rule reference");
        dict.rules.push_back(r);
    }
    return dict;
}

}  // namespace seedgen
