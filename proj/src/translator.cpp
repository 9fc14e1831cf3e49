#include "seedgen/translator.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "seedgen/errors.hpp"

namespace seedgen {

namespace {

bool is_pdf_ws(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char n = s[++i];
            if (n == 't') out += '\t';
            else if (n == 'n') out += '\n';
            else if (n == 'r') out += '\r';
            else out += n;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> lex_object_body(const std::string& body) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = body.size();
    while (i < n) {
        char c = body[i];
        if (is_pdf_ws(c)) { ++i; continue; }
        if (body.compare(i, 2, "<<") == 0) { out.emplace_back("<<"); i += 2; continue; }
        if (body.compare(i, 2, ">>") == 0) { out.emplace_back(">>"); i += 2; continue; }
        if (c == '[' || c == ']') { out.emplace_back(1, c); ++i; continue; }
        if (c == '(') {
            // whole string literal including nesting and escapes
            std::size_t start = i++;
            int nest = 1;
            while (i < n && nest > 0) {
                if (body[i] == '\\' && i + 1 < n) i += 2;
                else {
                    if (body[i] == '(') ++nest;
                    else if (body[i] == ')') --nest;
                    ++i;
                }
            }
            out.push_back(body.substr(start, i - start));
            continue;
        }
        if (c == '<') {
            // hex string
            std::size_t start = i++;
            while (i < n && body[i] != '>') ++i;
            if (i < n) ++i;
            out.push_back(body.substr(start, i - start));
            continue;
        }
        if (c == '/') {
            std::size_t start = i++;
            while (i < n && !is_pdf_ws(body[i]) &&
                   std::string("/[]<>()").find(body[i]) == std::string::npos)
                ++i;
            out.push_back(body.substr(start, i - start));
            continue;
        }
        std::size_t start = i;
        while (i < n && !is_pdf_ws(body[i]) &&
               std::string("/[]<>()").find(body[i]) == std::string::npos)
            ++i;
        if (i == start) ++i;  // lone '>' or similar
        out.push_back(body.substr(start, std::max<std::size_t>(1, i - start)));
    }
    return out;
}

std::string normalize_body_ws(const std::string& body) {
    auto toks = lex_object_body(body);
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

ObjectVocab ObjectVocab::build(const std::vector<std::string>& token_strings,
                               std::size_t vocab_budget) {
    if (vocab_budget < 8) throw ParameterError("vocab_budget must be >= 8");
    std::map<std::string, std::size_t> freq;
    for (const auto& s : token_strings) ++freq[s];
    // most frequent first, ties by string order
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > vocab_budget) ranked.resize(vocab_budget);
    std::sort(ranked.begin(), ranked.end());  // stable id assignment
    ObjectVocab v;
    int id = 4;
    for (const auto& [s, _] : ranked) {
        v.ids_[s] = id++;
        v.strings_.push_back(s);
    }
    return v;
}

int ObjectVocab::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
}

const std::string& ObjectVocab::token_of(int id) const {
    if (id < 4 || static_cast<std::size_t>(id - 4) >= strings_.size())
        throw ParameterError("id " + std::to_string(id) + " is not an object token");
    return strings_[static_cast<std::size_t>(id - 4)];
}

std::string ObjectVocab::serialize() const {
    std::string out = "0\t<seq-start>\n1\t<seq-end>\n2\t<obj-sep>\n3\t<unk>\n";
    int id = 4;
    for (const auto& s : strings_) out += std::to_string(id++) + "\t" + escape(s) + "\n";
    return out;
}

ObjectVocab ObjectVocab::parse(const std::string& text) {
    ObjectVocab v;
    std::istringstream in(text);
    std::string line;
    int expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("malformed vocab line: " + line);
        int id = std::stoi(line.substr(0, tab));
        if (id != expected++) throw FormatError("non-dense vocab ids");
        if (id < 4) continue;
        std::string s = unescape(line.substr(tab + 1));
        v.ids_[s] = id;
        v.strings_.push_back(s);
    }
    return v;
}

SourceVocab SourceVocab::build(const std::vector<CompressedPath>& corpus) {
    std::set<std::pair<int, std::uint32_t>> keys;
    std::map<std::pair<int, std::uint32_t>, Token> by_key;
    for (const auto& p : corpus)
        for (const auto& t : p.tokens) {
            keys.insert(t.key());
            by_key.emplace(t.key(), t);
        }
    SourceVocab v;
    int id = 1;
    for (const auto& k : keys) {
        v.ids_[k] = id++;
        v.tokens_.push_back(by_key.at(k));
    }
    return v;
}

int SourceVocab::id_of(const Token& t) const {
    auto it = ids_.find(t.key());
    return it == ids_.end() ? kUnk : it->second;
}

std::string SourceVocab::serialize() const {
    std::string out = "0\t<unk>\n";
    int id = 1;
    for (const auto& t : tokens_) {
        out += std::to_string(id++) + "\t";
        if (t.kind == Token::Kind::Super) out += "S" + std::to_string(t.super_id);
        else {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "B%08x", t.block.id);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::vector<int> encode_objects(const std::vector<PdfObject>& objects, const ObjectVocab& vocab) {
    std::vector<int> ids;
    ids.push_back(ObjectVocab::kSeqStart);
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (i) ids.push_back(ObjectVocab::kObjSep);
        for (const auto& tok : lex_object_body(objects[i].body))
            ids.push_back(vocab.id_of(tok));
    }
    ids.push_back(ObjectVocab::kSeqEnd);
    return ids;
}

std::pair<std::vector<int>, ObjectVocab> tokenize_objects(const std::vector<PdfObject>& objects,
                                                          std::size_t vocab_budget) {
    std::vector<std::string> all;
    for (const auto& o : objects)
        for (auto& t : lex_object_body(o.body)) all.push_back(std::move(t));
    ObjectVocab vocab = ObjectVocab::build(all, vocab_budget);
    return {encode_objects(objects, vocab), vocab};
}

std::vector<std::string> detokenize_objects(const std::vector<int>& ids, const ObjectVocab& vocab) {
    std::vector<std::string> bodies;
    std::vector<std::string> current;
    auto flush = [&] {
        if (current.empty()) return;
        std::string body;
        for (std::size_t i = 0; i < current.size(); ++i) {
            if (i) body += ' ';
            body += current[i];
        }
        bodies.push_back(std::move(body));
        current.clear();
    };
    for (int id : ids) {
        if (id == ObjectVocab::kSeqStart || id == ObjectVocab::kSeqEnd) continue;
        if (id == ObjectVocab::kObjSep) { flush(); continue; }
        if (id == ObjectVocab::kUnk) current.emplace_back("null");
        else current.push_back(vocab.token_of(id));
    }
    flush();
    return bodies;
}

ParallelCorpus build_parallel_corpus(const std::vector<std::pair<std::string, std::string>>& seeds,
                                     const PathCorpus& corpus, const CompressionDictionary& dict,
                                     std::size_t vocab_budget) {
    ParallelCorpus out;

    // index recorded paths by source id
    std::map<std::string, const ExecutionPath*> by_source;
    for (const auto& p : corpus.paths())
        if (p.source_id) by_source[*p.source_id] = &p;

    struct Row {
        std::string name;
        CompressedPath path;
        std::vector<PdfObject> objects;
    };
    std::vector<Row> rows;
    std::vector<std::string> all_tokens;
    std::vector<CompressedPath> all_paths;
    for (const auto& [name, bytes] : seeds) {
        auto it = by_source.find(name);
        if (it == by_source.end()) {
            ++out.skipped_missing_path;
            continue;
        }
        auto extracted = extract_objects(bytes);
        if (extracted.objects.empty()) {
            ++out.dropped_empty;
            continue;
        }
        Row row;
        row.name = name;
        row.path = compress_single(*it->second, dict);
        row.objects = std::move(extracted.objects);
        for (const auto& o : row.objects)
            for (auto& t : lex_object_body(o.body)) all_tokens.push_back(std::move(t));
        all_paths.push_back(row.path);
        rows.push_back(std::move(row));
    }

    out.source_vocab = SourceVocab::build(all_paths);
    out.target_vocab = ObjectVocab::build(all_tokens, vocab_budget);
    for (auto& row : rows) {
        ParallelPair pair;
        pair.name = row.name;
        pair.source = encode_source(row.path, out.source_vocab);
        pair.target = encode_objects(row.objects, out.target_vocab);
        out.max_target_len = std::max(out.max_target_len, pair.target.size());
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

std::vector<int> encode_source(const CompressedPath& path, const SourceVocab& vocab) {
    std::vector<int> ids;
    ids.reserve(path.tokens.size());
    for (const auto& t : path.tokens) ids.push_back(vocab.id_of(t));
    return ids;
}

TranslationResult translate(const Seq2Seq& model, const std::vector<int>& source,
                            std::size_t max_decode_len, const ObjectVocab& target_vocab) {
    TranslationResult result;
    auto decoded = seq2seq_greedy_decode(model, source, ObjectVocab::kSeqStart,
                                         ObjectVocab::kSeqEnd, max_decode_len);
    result.bodies = detokenize_objects(decoded, target_vocab);
    if (!result.bodies.empty()) {
        result.seed_bytes = assemble_pdf(result.bodies, pick_root_index(result.bodies));
        result.well_formed = is_well_formed(result.seed_bytes).ok;
    }
    return result;
}

}  // namespace seedgen
