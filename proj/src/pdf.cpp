#include "seedgen/pdf.hpp"

#include <cctype>
#include <cstdio>
#include <optional>

#include "seedgen/errors.hpp"

namespace seedgen {

namespace {

bool is_pdf_ws(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_pdf_ws(s[b])) ++b;
    while (e > b && is_pdf_ws(s[e - 1])) --e;
    return s.substr(b, e - b);
}

struct Header {
    std::uint32_t num = 0;
    std::uint32_t gen = 0;
    std::size_t body_start = 0;
};

// Try to parse "num gen obj" starting at i. Returns body start on success.
std::optional<Header> parse_object_header(const std::string& s, std::size_t i) {
    std::size_t p = i;
    auto read_uint = [&](std::uint32_t& out) {
        if (p >= s.size() || !is_digit(s[p])) return false;
        std::uint64_t v = 0;
        std::size_t start = p;
        while (p < s.size() && is_digit(s[p]) && p - start < 10) v = v * 10 + (s[p++] - '0');
        out = static_cast<std::uint32_t>(v);
        return true;
    };
    auto skip_ws1 = [&] {
        std::size_t start = p;
        while (p < s.size() && is_pdf_ws(s[p])) ++p;
        return p > start;
    };
    Header h;
    if (!read_uint(h.num)) return std::nullopt;
    if (!skip_ws1()) return std::nullopt;
    if (!read_uint(h.gen)) return std::nullopt;
    if (!skip_ws1()) return std::nullopt;
    if (s.compare(p, 3, "obj") != 0) return std::nullopt;
    p += 3;
    if (p < s.size() && (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '_'))
        return std::nullopt;
    h.body_start = p;
    return h;
}

// "stream" keyword at a word boundary (rejects the tail of "endstream").
std::size_t find_stream_kw(const std::string& s, std::size_t from) {
    std::size_t p = from;
    while ((p = s.find("stream", p)) != std::string::npos) {
        bool bounded = p == 0 || !std::isalpha(static_cast<unsigned char>(s[p - 1]));
        if (bounded) return p;
        ++p;
    }
    return std::string::npos;
}

}  // namespace

ExtractResult extract_objects(const std::string& bytes) {
    ExtractResult result;
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        if (!is_digit(bytes[i])) { ++i; continue; }
        bool boundary = i == 0 || is_pdf_ws(bytes[i - 1]) ||
                        bytes[i - 1] == '>' || bytes[i - 1] == ']';
        if (!boundary) { ++i; continue; }
        auto h = parse_object_header(bytes, i);
        if (!h) { ++i; continue; }

        // find the terminating endobj, skipping over stream payloads
        std::size_t pos = h->body_start;
        std::size_t end = std::string::npos;
        while (pos < n) {
            std::size_t e = bytes.find("endobj", pos);
            std::size_t st = find_stream_kw(bytes, pos);
            if (st != std::string::npos && (e == std::string::npos || st < e)) {
                std::size_t es = bytes.find("endstream", st + 6);
                if (es == std::string::npos) break;  // unterminated stream
                pos = es + 9;
                continue;
            }
            end = e;
            break;
        }
        if (end == std::string::npos) {
            ++result.warnings;
            i = h->body_start;
            continue;
        }
        PdfObject obj;
        obj.obj_number = h->num;
        obj.generation = h->gen;
        obj.body = trim(bytes.substr(h->body_start, end - h->body_start));
        result.objects.push_back(std::move(obj));
        i = end + 6;
    }
    return result;
}

std::string assemble_pdf(const std::vector<std::string>& bodies, std::size_t root_index) {
    if (bodies.empty()) throw ParameterError("assemble_pdf: empty body list");
    if (root_index >= bodies.size()) throw ParameterError("assemble_pdf: root_index out of range");

    std::string out = "%PDF-1.4\n";
    std::vector<std::size_t> offsets;
    offsets.reserve(bodies.size());
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        offsets.push_back(out.size());
        out += std::to_string(i + 1) + " 0 obj\n";
        out += bodies[i];
        out += "\nendobj\n";
    }
    std::size_t xref_off = out.size();
    out += "xref\n0 " + std::to_string(bodies.size() + 1) + "\n";
    out += "0000000000 65535 f \n";
    char buf[32];
    for (std::size_t off : offsets) {
        std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n", off);
        out += buf;
    }
    out += "trailer\n<< /Size " + std::to_string(bodies.size() + 1) +
           " /Root " + std::to_string(root_index + 1) + " 0 R >>\n";
    out += "startxref\n" + std::to_string(xref_off) + "\n%%EOF\n";
    return out;
}

std::size_t pick_root_index(const std::vector<std::string>& bodies) {
    for (std::size_t i = 0; i < bodies.size(); ++i)
        if (bodies[i].find("/Type /Catalog") != std::string::npos) return i;
    return 0;
}

namespace {

std::optional<std::uint64_t> read_uint_at(const std::string& s, std::size_t& p) {
    while (p < s.size() && is_pdf_ws(s[p])) ++p;
    if (p >= s.size() || !is_digit(s[p])) return std::nullopt;
    std::uint64_t v = 0;
    while (p < s.size() && is_digit(s[p])) v = v * 10 + (s[p++] - '0');
    return v;
}

}  // namespace

WellFormedResult is_well_formed(const std::string& bytes) {
    WellFormedResult r;
    bool ok = true;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        r.diagnostics.push_back("WF:" + name + ":" + (pass ? "pass" : "fail") + ":" + detail);
        if (!pass) ok = false;
        return pass;
    };

    check("header", bytes.compare(0, 5, "%PDF-") == 0, "version marker");

    auto extracted = extract_objects(bytes);
    check("objects", !extracted.objects.empty(),
          std::to_string(extracted.objects.size()) + " objects");

    // xref offsets must point at the matching object headers
    bool xref_ok = false;
    std::string xref_detail = "missing startxref";
    std::size_t sx = bytes.rfind("startxref");
    if (sx != std::string::npos) {
        std::size_t p = sx + 9;
        auto xoff = read_uint_at(bytes, p);
        if (xoff && *xoff + 4 <= bytes.size() && bytes.compare(*xoff, 4, "xref") == 0) {
            std::size_t q = *xoff + 4;
            auto start = read_uint_at(bytes, q);
            auto count = read_uint_at(bytes, q);
            if (start && count) {
                while (q < bytes.size() && is_pdf_ws(bytes[q])) ++q;
                xref_ok = true;
                xref_detail = "all offsets exact";
                for (std::uint64_t j = 0; j < *count && xref_ok; ++j, q += 20) {
                    if (q + 20 > bytes.size()) {
                        xref_ok = false;
                        xref_detail = "truncated xref table";
                        break;
                    }
                    if (bytes[q + 17] != 'n') continue;  // free entry
                    bool digits = true;
                    for (int d = 0; d < 10; ++d)
                        if (!is_digit(bytes[q + d])) digits = false;
                    if (!digits) {
                        xref_ok = false;
                        xref_detail = "malformed xref entry";
                        break;
                    }
                    std::uint64_t off = std::stoull(bytes.substr(q, 10));
                    std::uint64_t objnum = *start + j;
                    auto h = parse_object_header(bytes, off);
                    if (!h || h->num != objnum) {
                        xref_ok = false;
                        xref_detail = "object " + std::to_string(objnum) +
                                      " not at offset " + std::to_string(off);
                    }
                }
            } else {
                xref_detail = "malformed xref subsection";
            }
        } else {
            xref_detail = "startxref does not point at an xref table";
        }
    }
    check("xref", xref_ok, xref_detail);

    // trailer /Root must resolve to an extracted object
    bool root_ok = false;
    std::string root_detail = "missing /Root";
    std::size_t tp = bytes.rfind("trailer");
    if (tp != std::string::npos) {
        std::size_t rp = bytes.find("/Root", tp);
        if (rp != std::string::npos) {
            std::size_t p = rp + 5;
            auto num = read_uint_at(bytes, p);
            if (num) {
                for (const auto& o : extracted.objects)
                    if (o.obj_number == *num) root_ok = true;
                root_detail = root_ok ? "object " + std::to_string(*num)
                                      : "object " + std::to_string(*num) + " missing";
            }
        }
    }
    check("root", root_ok, root_detail);

    r.ok = ok;
    return r;
}

}  // namespace seedgen
