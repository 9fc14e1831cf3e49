#include "seedgen/trace.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seedgen/errors.hpp"

namespace fs = std::filesystem;

namespace seedgen {

namespace {

char flag_char(const BlockId& b) {
    if (b.fn_entry && b.fn_exit) return 'B';
    if (b.fn_entry) return 'E';
    if (b.fn_exit) return 'X';
    return '-';
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

BlockId parse_trace_line(const std::string& line, std::size_t lineno) {
    auto bad = [lineno](const std::string& what) {
        std::ostringstream os;
        os << "trace line " << lineno << ": " << what;
        throw FormatError(os.str());
    };
    if (line.size() != 10) bad("expected 8 hex digits, space, flag");
    std::uint32_t id = 0;
    for (int i = 0; i < 8; ++i) {
        char c = line[i];
        std::uint32_t d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = 10 + (c - 'a');
        else { bad("non-hex block id"); return {}; }
        id = (id << 4) | d;
    }
    if (line[8] != ' ') bad("missing separator");
    char f = line[9];
    BlockId b;
    b.id = id;
    switch (f) {
        case '-': break;
        case 'E': b.fn_entry = true; break;
        case 'X': b.fn_exit = true; break;
        case 'B': b.fn_entry = b.fn_exit = true; break;
        default: bad("unknown flag character");
    }
    return b;
}

}  // namespace

ExecutionPath ingest_trace_file(const std::string& content) {
    if (content.empty()) throw FormatError("empty trace");
    ExecutionPath path;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        std::string line = (nl == std::string::npos) ? content.substr(pos)
                                                     : content.substr(pos, nl - pos);
        ++lineno;
        path.blocks.push_back(parse_trace_line(line, lineno));
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    if (path.blocks.empty()) throw FormatError("empty trace");
    return path;
}

std::string serialize_trace(const ExecutionPath& path) {
    std::string out;
    for (const auto& b : path.blocks) {
        out += hex8(b.id);
        out += ' ';
        out += flag_char(b);
        out += '\n';
    }
    return out;
}

bool PathCorpus::add(const ExecutionPath& path) {
    auto ids = path.block_ids();
    if (!seen_.insert(ids).second) return false;
    for (const auto& b : path.blocks) universe_.emplace(b.id, b);
    paths_.push_back(path);
    return true;
}

void save_corpus(const PathCorpus& corpus, const std::string& dir) {
    fs::create_directories(dir);
    std::size_t i = 0;
    for (const auto& p : corpus.paths()) {
        std::ostringstream name;
        name << "path-" << i++ << ".trace";
        std::ofstream out(fs::path(dir) / name.str(), std::ios::binary);
        out << serialize_trace(p);
    }
    std::ofstream uni(fs::path(dir) / "universe.txt", std::ios::binary);
    for (const auto& [id, b] : corpus.block_universe())
        uni << hex8(id) << ' ' << flag_char(b) << '\n';
}

PathCorpus load_corpus(const std::string& dir) {
    PathCorpus corpus;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".trace") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        ExecutionPath p = ingest_trace_file(ss.str());
        p.source_id = f.stem().string();
        corpus.add(p);
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Toy target: an instrumented recursive-descent parser for a miniature
// PDF-like grammar (header, indirect objects, xref/trailer). Every labeled
// program point pushes its block onto the trace.
// ---------------------------------------------------------------------------

namespace {

const char* const kToyLabels[] = {
    // document
    "DOC_ENTRY", "DOC_HDR_OK", "DOC_HDR_MISSING", "DOC_OBJ_LOOP", "DOC_AFTER_TRAILER", "DOC_EXIT",
    // header
    "HDR_ENTRY", "HDR_MATCH", "HDR_NOMATCH", "HDR_EXIT",
    // indirect object
    "OBJ_ENTRY", "OBJ_NUM_OK", "OBJ_NUM_BAD", "OBJ_GEN_OK", "OBJ_KW_OK", "OBJ_KW_BAD",
    "OBJ_HAS_STREAM", "OBJ_ENDOBJ_OK", "OBJ_ENDOBJ_MISSING", "OBJ_EXIT",
    // value
    "VAL_ENTRY", "VAL_DICT", "VAL_ARRAY", "VAL_NAME", "VAL_STRING", "VAL_NUMBER",
    "VAL_REF", "VAL_KEYWORD", "VAL_BAD", "VAL_DEPTH_LIMIT", "VAL_EXIT",
    // dictionary
    "DICT_ENTRY", "DICT_KEY", "DICT_VALUE", "DICT_END", "DICT_BAD", "DICT_EXIT",
    // array
    "ARR_ENTRY", "ARR_ITEM", "ARR_END", "ARR_BAD", "ARR_EXIT",
    // stream
    "STM_ENTRY", "STM_DATA", "STM_END", "STM_BAD", "STM_EXIT",
    // trailer
    "TRL_ENTRY", "TRL_XREF", "TRL_DICT", "TRL_EOF_OK", "TRL_MISSING", "TRL_EXIT",
};

bool label_is_entry(const std::string& l) { return l.size() > 6 && l.substr(l.size() - 6) == "_ENTRY"; }
bool label_is_exit(const std::string& l) { return l.size() > 5 && l.substr(l.size() - 5) == "_EXIT"; }

std::map<std::string, BlockId> build_toy_table() {
    std::map<std::string, BlockId> table;
    std::uint32_t addr = 0x1000;
    for (const char* l : kToyLabels) {
        BlockId b;
        b.id = addr;
        b.fn_entry = label_is_entry(l);
        b.fn_exit = label_is_exit(l);
        table.emplace(l, b);
        addr += 0x10;
    }
    return table;
}

class ToyParser {
public:
    explicit ToyParser(const std::string& input)
        : in_(input), table_(toy_target_blocks()) {}

    ExecutionPath run() {
        parse_document();
        ExecutionPath p;
        p.blocks = std::move(trace_);
        return p;
    }

private:
    static constexpr std::size_t kMaxBlocks = 20000;
    static constexpr int kMaxDepth = 6;
    static constexpr int kMaxItems = 64;

    void emit(const char* label) {
        if (trace_.size() < kMaxBlocks) trace_.push_back(table_.at(label));
    }

    bool at_end() const { return pos_ >= in_.size(); }
    char peek() const { return at_end() ? '\0' : in_[pos_]; }
    void advance() { if (!at_end()) ++pos_; }

    bool lookahead(const char* kw) const {
        std::size_t n = std::char_traits<char>::length(kw);
        return in_.compare(pos_, n, kw) == 0;
    }
    bool consume_kw(const char* kw) {
        if (!lookahead(kw)) return false;
        pos_ += std::char_traits<char>::length(kw);
        return true;
    }

    static bool is_ws(char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
    }
    void skip_ws() {
        while (!at_end() && (is_ws(peek()) || peek() == '%')) {
            if (peek() == '%') {
                if (lookahead("%%EOF")) break;  // not a comment, the EOF marker
                while (!at_end() && peek() != '\n') advance();
            } else {
                advance();
            }
        }
    }

    bool read_uint() {
        if (!std::isdigit(static_cast<unsigned char>(peek()))) return false;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        return true;
    }

    void parse_document() {
        emit("DOC_ENTRY");
        parse_header();
        int objects = 0;
        while (objects < kMaxItems) {
            skip_ws();
            if (!std::isdigit(static_cast<unsigned char>(peek()))) break;
            emit("DOC_OBJ_LOOP");
            parse_object();
            ++objects;
        }
        parse_trailer();
        emit("DOC_AFTER_TRAILER");
        emit("DOC_EXIT");
    }

    void parse_header() {
        emit("HDR_ENTRY");
        if (consume_kw("%PDF-")) {
            while (!at_end() && peek() != '\n') advance();
            emit("HDR_MATCH");
            emit("HDR_EXIT");
            emit("DOC_HDR_OK");
        } else {
            emit("HDR_NOMATCH");
            emit("HDR_EXIT");
            emit("DOC_HDR_MISSING");
        }
    }

    void parse_object() {
        emit("OBJ_ENTRY");
        if (!read_uint()) {
            emit("OBJ_NUM_BAD");
            advance();
            emit("OBJ_EXIT");
            return;
        }
        emit("OBJ_NUM_OK");
        skip_ws();
        if (read_uint()) emit("OBJ_GEN_OK");
        else emit("OBJ_NUM_BAD");
        skip_ws();
        if (consume_kw("obj")) {
            emit("OBJ_KW_OK");
        } else {
            emit("OBJ_KW_BAD");
            skip_to_endobj();
            emit("OBJ_EXIT");
            return;
        }
        parse_value(0);
        skip_ws();
        if (lookahead("stream")) {
            emit("OBJ_HAS_STREAM");
            parse_stream();
        }
        skip_ws();
        if (consume_kw("endobj")) emit("OBJ_ENDOBJ_OK");
        else {
            emit("OBJ_ENDOBJ_MISSING");
            skip_to_endobj();
        }
        emit("OBJ_EXIT");
    }

    void skip_to_endobj() {
        std::size_t found = in_.find("endobj", pos_);
        pos_ = (found == std::string::npos) ? in_.size() : found + 6;
    }

    void parse_value(int depth) {
        emit("VAL_ENTRY");
        if (depth > kMaxDepth) {
            emit("VAL_DEPTH_LIMIT");
            advance();
            emit("VAL_EXIT");
            return;
        }
        skip_ws();
        char c = peek();
        if (lookahead("<<")) {
            emit("VAL_DICT");
            parse_dict(depth);
        } else if (c == '[') {
            emit("VAL_ARRAY");
            parse_array(depth);
        } else if (c == '/') {
            emit("VAL_NAME");
            advance();
            while (!at_end() && !is_ws(peek()) && std::string("/[]<>()").find(peek()) == std::string::npos)
                advance();
        } else if (c == '(') {
            emit("VAL_STRING");
            advance();
            int nest = 1;
            int guard = 0;
            while (!at_end() && nest > 0 && ++guard < 4096) {
                char s = peek();
                advance();
                if (s == '\\') advance();
                else if (s == '(') ++nest;
                else if (s == ')') --nest;
            }
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
            std::size_t save = pos_;
            read_number();
            if (looks_like_ref(save)) emit("VAL_REF");
            else emit("VAL_NUMBER");
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            emit("VAL_KEYWORD");
            while (std::isalpha(static_cast<unsigned char>(peek()))) advance();
        } else {
            emit("VAL_BAD");
            advance();
        }
        emit("VAL_EXIT");
    }

    void read_number() {
        if (peek() == '+' || peek() == '-') advance();
        while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') advance();
    }

    // After a number at `start`, "gen R" makes it an indirect reference.
    bool looks_like_ref(std::size_t start) {
        (void)start;
        std::size_t save = pos_;
        skip_ws();
        if (!read_uint()) { pos_ = save; return false; }
        skip_ws();
        if (peek() == 'R' && (pos_ + 1 >= in_.size() || !std::isalpha(static_cast<unsigned char>(in_[pos_ + 1])))) {
            advance();
            return true;
        }
        pos_ = save;
        return false;
    }

    void parse_dict(int depth) {
        emit("DICT_ENTRY");
        consume_kw("<<");
        int items = 0;
        while (items < kMaxItems) {
            skip_ws();
            if (consume_kw(">>")) { emit("DICT_END"); break; }
            if (at_end()) { emit("DICT_BAD"); break; }
            if (peek() == '/') {
                emit("DICT_KEY");
                advance();
                while (!at_end() && !is_ws(peek()) && std::string("/[]<>()").find(peek()) == std::string::npos)
                    advance();
                emit("DICT_VALUE");
                parse_value(depth + 1);
            } else {
                emit("DICT_BAD");
                advance();
            }
            ++items;
        }
        emit("DICT_EXIT");
    }

    void parse_array(int depth) {
        emit("ARR_ENTRY");
        advance();  // '['
        int items = 0;
        while (items < kMaxItems) {
            skip_ws();
            if (peek() == ']') { advance(); emit("ARR_END"); break; }
            if (at_end()) { emit("ARR_BAD"); break; }
            emit("ARR_ITEM");
            parse_value(depth + 1);
            ++items;
        }
        emit("ARR_EXIT");
    }

    void parse_stream() {
        emit("STM_ENTRY");
        consume_kw("stream");
        if (peek() == '\r') advance();
        if (peek() == '\n') advance();
        std::size_t end = in_.find("endstream", pos_);
        if (end == std::string::npos) {
            emit("STM_BAD");
            pos_ = in_.size();
        } else {
            if (end > pos_) emit("STM_DATA");
            pos_ = end + 9;
            emit("STM_END");
        }
        emit("STM_EXIT");
    }

    void parse_trailer() {
        emit("TRL_ENTRY");
        std::size_t xref = in_.find("xref", pos_);
        bool any = false;
        if (xref != std::string::npos) {
            emit("TRL_XREF");
            pos_ = xref + 4;
            any = true;
        }
        std::size_t trl = in_.find("trailer", pos_);
        if (trl != std::string::npos) {
            pos_ = trl + 7;
            skip_ws();
            if (lookahead("<<")) {
                emit("TRL_DICT");
                parse_dict(0);
            }
            any = true;
        }
        if (in_.find("%%EOF", pos_) != std::string::npos) {
            emit("TRL_EOF_OK");
            any = true;
        }
        if (!any) emit("TRL_MISSING");
        emit("TRL_EXIT");
    }

    const std::string& in_;
    const std::map<std::string, BlockId>& table_;
    std::size_t pos_ = 0;
    std::vector<BlockId> trace_;
};

}  // namespace

const std::map<std::string, BlockId>& toy_target_blocks() {
    static const std::map<std::string, BlockId> table = build_toy_table();
    return table;
}

ExecutionPath run_toy_target(const std::string& input) {
    return ToyParser(input).run();
}

}  // namespace seedgen
