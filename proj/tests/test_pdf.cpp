#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "seedgen/errors.hpp"
#include "seedgen/pdf.hpp"
#include "seedgen/rng.hpp"

using namespace seedgen;

namespace {

// a minimal hand-written 4-object document
const char* kFixture =
    "%PDF-1.4\n"
    "1 0 obj\n<< /Type /Catalog /Pages 2 0 R >>\nendobj\n"
    "2 0 obj\n<< /Type /Pages /Kids [3 0 R] /Count 1 >>\nendobj\n"
    "3 0 obj\n<< /Type /Page /Parent 2 0 R /Contents 4 0 R >>\nendobj\n"
    "4 0 obj\n<< /Length 8 >>\nstream\nBT ET xx\nendstream\nendobj\n"
    "trailer\n<< /Size 5 /Root 1 0 R >>\n%%EOF\n";

std::string random_body(Rng& rng) {
    static const char* atoms[] = {"/Name", "42", "(text)", "3 0 R", "true", "null", "-1.5"};
    std::string body;
    switch (rng.index(3)) {
        case 0: {
            body = "<<";
            std::size_t n = 1 + rng.index(4);
            for (std::size_t i = 0; i < n; ++i) {
                body += " /K" + std::to_string(rng.index(10));
                body += " ";
                body += atoms[rng.index(std::size(atoms))];
            }
            body += " >>";
            break;
        }
        case 1: {
            body = "[";
            std::size_t n = rng.index(6);
            for (std::size_t i = 0; i < n; ++i) {
                body += " ";
                body += atoms[rng.index(std::size(atoms))];
            }
            body += " ]";
            break;
        }
        default:
            body = atoms[rng.index(std::size(atoms))];
    }
    return body;
}

}  // namespace

TEST_CASE("extracts the hand-written fixture objects") {
    auto r = extract_objects(kFixture);
    REQUIRE(r.objects.size() == 4);
    CHECK(r.warnings == 0);
    for (std::uint32_t i = 0; i < 4; ++i) CHECK(r.objects[i].obj_number == i + 1);
    CHECK(r.objects[0].body == "<< /Type /Catalog /Pages 2 0 R >>");
    CHECK(r.objects[3].body.find("stream") != std::string::npos);
}

TEST_CASE("extraction edge cases") {
    CHECK(extract_objects("").objects.empty());

    auto unterminated = extract_objects("%PDF-1.4\n1 0 obj\n<< /A 1 >>\n%%EOF");
    CHECK(unterminated.objects.empty());
    CHECK(unterminated.warnings == 1);

    // stream payload containing the terminator keyword is not truncated
    std::string tricky =
        "1 0 obj\n<< /Length 20 >>\nstream\nfake endobj inside\nendstream\nendobj\n";
    auto r = extract_objects(tricky);
    REQUIRE(r.objects.size() == 1);
    CHECK(r.objects[0].body.find("fake endobj inside") != std::string::npos);
}

TEST_CASE("extraction is total on random bytes") {
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        std::string blob;
        std::size_t len = rng.index(300);
        for (std::size_t j = 0; j < len; ++j)
            blob.push_back(static_cast<char>(rng.index(256)));
        CHECK_NOTHROW(extract_objects(blob));
    }
}

TEST_CASE("assemble places object 1 right after the header") {
    std::string out = assemble_pdf({"<< /Type /Catalog >>"}, 0);
    // "%PDF-1.4\n" is 9 bytes
    CHECK(out.find("1 0 obj") == 9);
    CHECK(out.find("0000000009 00000 n \n") != std::string::npos);
    CHECK(out.find("/Root 1 0 R") != std::string::npos);
    CHECK(out.substr(out.size() - 6) == "%%EOF\n");
}

TEST_CASE("assemble root indexing") {
    std::string out = assemble_pdf({"<< /A 1 >>", "<< /Type /Catalog >>"}, 1);
    CHECK(out.find("/Root 2 0 R") != std::string::npos);
    CHECK(out.find("/Size 3") != std::string::npos);
}

TEST_CASE("assemble rejects empty input") {
    CHECK_THROWS_AS(assemble_pdf({}, 0), ParameterError);
}

TEST_CASE("assemble/extract round trip on random bodies") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> bodies;
        std::size_t n = 1 + rng.index(6);
        for (std::size_t i = 0; i < n; ++i) bodies.push_back(random_body(rng));
        std::string pdf = assemble_pdf(bodies, rng.index(n));
        auto r = extract_objects(pdf);
        REQUIRE(r.objects.size() == bodies.size());
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(r.objects[i].obj_number == i + 1);
            CHECK(r.objects[i].body == bodies[i]);
        }
    }
}

TEST_CASE("assembled files are well formed") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> bodies;
        std::size_t n = 1 + rng.index(5);
        for (std::size_t i = 0; i < n; ++i) bodies.push_back(random_body(rng));
        auto wf = is_well_formed(assemble_pdf(bodies, 0));
        CHECK(wf.ok);
    }
}

TEST_CASE("perturbed xref offset is detected and named") {
    std::string pdf = assemble_pdf({"<< /Type /Catalog >>", "<< /B 2 >>"}, 0);
    // bump object 2's offset by one
    std::size_t entry = pdf.find("0000000009 00000 n \n");
    REQUIRE(entry != std::string::npos);
    std::size_t second = entry + 20;
    pdf[second + 9] = static_cast<char>(pdf[second + 9] + 1);
    auto wf = is_well_formed(pdf);
    CHECK_FALSE(wf.ok);
    bool named = false;
    for (const auto& d : wf.diagnostics)
        if (d.find("WF:xref:fail") == 0 && d.find("object 2") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("empty and headerless files are not well formed") {
    CHECK_FALSE(is_well_formed("").ok);
    CHECK_FALSE(is_well_formed("not a pdf at all").ok);
}

TEST_CASE("pick_root_index prefers the catalog") {
    CHECK(pick_root_index({"<< /A 1 >>", "<< /Type /Catalog >>"}) == 1);
    CHECK(pick_root_index({"<< /A 1 >>", "<< /B 2 >>"}) == 0);
}

TEST_CASE("well-formed diagnostics use the WF line format") {
    auto wf = is_well_formed(assemble_pdf({"42"}, 0));
    REQUIRE_FALSE(wf.diagnostics.empty());
    for (const auto& d : wf.diagnostics) {
        CHECK(d.rfind("WF:", 0) == 0);
        CHECK((d.find(":pass:") != std::string::npos || d.find(":fail:") != std::string::npos));
    }
}
