#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seedgen {

// One indirect object; body is everything between "N G obj" and "endobj",
// with surrounding whitespace trimmed.
struct PdfObject {
    std::uint32_t obj_number = 0;
    std::uint32_t generation = 0;
    std::string body;
};

struct ExtractResult {
    std::vector<PdfObject> objects;  // in file order
    std::size_t warnings = 0;        // unterminated objects dropped
};

// Tolerant linear scan for indirect objects. Ignores xref tables entirely;
// respects stream extents so binary stream data cannot truncate an object.
// Total on arbitrary bytes.
ExtractResult extract_objects(const std::string& bytes);

// Builds a PDF 1.4 file: bodies become objects 1..n, classic xref table with
// exact byte offsets, trailer /Root = root_index+1.
std::string assemble_pdf(const std::vector<std::string>& bodies, std::size_t root_index);

struct WellFormedResult {
    bool ok = false;
    std::vector<std::string> diagnostics;  // "WF:<check>:<pass|fail>:<detail>"
};

// Header present, >= 1 object, xref offsets point at the right headers,
// trailer /Root resolves.
WellFormedResult is_well_formed(const std::string& bytes);

// First body containing "/Type /Catalog", else 0.
std::size_t pick_root_index(const std::vector<std::string>& bodies);

}  // namespace seedgen
