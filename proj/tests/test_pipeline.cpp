#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "seedgen/errors.hpp"
#include "seedgen/pdf.hpp"
#include "seedgen/pipeline.hpp"

using namespace seedgen;
namespace fs = std::filesystem;

namespace {

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty() && out.back() != '\n') out += ' ';
        in_ws = false;
        out += c;
    }
    return out;
}

ExecutionPath epath(std::initializer_list<std::uint32_t> ids) {
    ExecutionPath p;
    for (auto id : ids) {
        BlockId b;
        b.id = id;
        p.blocks.push_back(b);
    }
    p.blocks.front().fn_entry = true;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// structurally varied documents so the toy target produces distinct paths
fs::path make_seed_dir(const std::string& name) {
    fs::path dir = fresh_dir(name);
    std::vector<std::vector<std::string>> docs = {
        {"<< /Type /Catalog >>"},
        {"<< /Type /Catalog >>", "42"},
        {"<< /Type /Catalog >>", "[ 1 2 3 ]"},
        {"<< /Type /Catalog >>", "(text)", "/Name"},
        {"<< /Type /Catalog /Kids [ 1 0 R ] >>", "<< /A << /B 1 >> >>"},
        {"<< /Type /Catalog >>", "<< /L 4 >>", "true"},
    };
    for (std::size_t i = 0; i < docs.size(); ++i) {
        std::ofstream out(dir / ("seed-" + std::to_string(i) + ".pdf"), std::ios::binary);
        out << assemble_pdf(docs[i], 0);
    }
    return dir;
}

PipelineConfig small_config(const fs::path& seed_dir, const fs::path& work_dir) {
    PipelineConfig cfg;
    cfg.seed_dir = seed_dir.string();
    cfg.work_dir = work_dir.string();
    cfg.max_len = 60;
    cfg.hidden_dim = 12;
    cfg.vocab_budget = 24;
    cfg.epochs = 30;
    cfg.translator_epochs = 30;
    cfg.gen_count = 2;
    cfg.max_attempts = 5;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("percentage deltas round half-up to two decimals") {
    CHECK(pct_delta(4548, 113) == doctest::Approx(2.48).epsilon(1e-12));
    CHECK(pct_delta(14522, 3528) == doctest::Approx(24.30).epsilon(1e-12));
    CHECK(pct_delta(100, 0) == 0.0);
    CHECK(pct_delta(0, 7) == 0.0);
    CHECK(pct_delta(3, 1) == doctest::Approx(33.3).epsilon(1e-12));
    CHECK(pct_delta(200, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pct_delta(1000, -5) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("report renders the reference row values") {
    CoverageReport report;
    report.blocks_original = 4548;
    report.paths_original = 14522;
    report.columns.push_back({"C_s", 4661, 18050});
    std::string text = collapse_ws(render_report(report));
    CHECK(text.find("basic blocks 4,548 +113 +2.48%") != std::string::npos);
    CHECK(text.find("execution paths 14,522 +3528 +24.30%") != std::string::npos);
    CHECK(text.find("C_s #") != std::string::npos);
    CHECK(text.find("C_s %") != std::string::npos);
}

TEST_CASE("coverage deltas count unions of distinct blocks and paths") {
    PathCorpus original;
    original.add(epath({1, 2, 3}));
    original.add(epath({1, 3}));

    // nothing new
    PathCorpus same;
    same.add(epath({1, 2, 3}));
    auto zero = coverage_delta(original, same);
    CHECK(zero.blocks_original == 3);
    CHECK(zero.paths_original == 2);
    CHECK(zero.columns[0].blocks_union == 3);
    CHECK(zero.columns[0].paths_union == 2);

    // one new block, one new path
    PathCorpus added;
    added.add(epath({1, 2, 4}));
    auto one = coverage_delta(original, added);
    CHECK(one.columns[0].blocks_union == 4);
    CHECK(one.columns[0].paths_union == 3);

    // unions never shrink as corpora are added
    auto both = coverage_delta(original, {{"a", &same}, {"b", &added}});
    REQUIRE(both.columns.size() == 2);
    for (const auto& col : both.columns) {
        CHECK(col.blocks_union >= both.blocks_original);
        CHECK(col.paths_union >= both.paths_original);
    }
}

TEST_CASE("config text parses keys, comments and defaults") {
    auto cfg = parse_config(
        "# comment line\n"
        "seed_dir = /tmp/seeds   # trailing comment\n"
        "hidden_dim = 32\n"
        "learning_rate = 0.01\n"
        "\n"
        "seed = 9\n");
    CHECK(cfg.seed_dir == "/tmp/seeds");
    CHECK(cfg.hidden_dim == 32);
    CHECK(cfg.learning_rate == doctest::Approx(0.01));
    CHECK(cfg.seed == 9);
    // untouched keys keep their defaults
    CHECK(cfg.max_len == 300);
    CHECK(cfg.vocab_budget == 256);
    CHECK(cfg.epochs == 200);
    CHECK(cfg.gen_count == 10);
    CHECK(cfg.temperature == 1.0);
}

TEST_CASE("config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("hidden_dim = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("hidden_dim = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
}

TEST_CASE("pipeline refuses a missing seed directory before writing anything") {
    fs::path work = fs::temp_directory_path() / "seedgen-test-nowork";
    fs::remove_all(work);
    PipelineConfig cfg;
    cfg.seed_dir = "/definitely/not/a/dir";
    cfg.work_dir = work.string();
    CHECK_THROWS_AS(cmd_pipeline(cfg), ConfigError);
    CHECK_FALSE(fs::exists(work));
}

TEST_CASE("stage failures preserve partial artifacts") {
    auto seed_dir = make_seed_dir("seedgen-test-seeds-fail");
    auto work = fresh_dir("seedgen-test-work-fail");
    auto cfg = small_config(seed_dir, work);
    cfg.vocab_budget = 4;  // too small for the target vocabulary
    try {
        cmd_pipeline(cfg);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == "train-translator");
    }
    CHECK(fs::exists(work / "failed-train-translator" / "dictionary.txt"));
    CHECK(fs::exists(work / "failed-train-translator" / "pathgen.ckpt"));
    fs::remove_all(seed_dir);
    fs::remove_all(work);
}

TEST_CASE("pipeline runs end to end and is deterministic") {
    auto seed_dir = make_seed_dir("seedgen-test-seeds");
    auto work1 = fresh_dir("seedgen-test-work1");
    auto work2 = fresh_dir("seedgen-test-work2");

    auto result1 = cmd_pipeline(small_config(seed_dir, work1));
    CHECK(result1.original_corpus.size() == 6);
    REQUIRE(result1.generated_paths.count("C_s") == 1);
    REQUIRE(result1.generated_paths.count("C_sf") == 1);
    REQUIRE(result1.well_formed_seeds.count("C_s") == 1);
    REQUIRE(result1.well_formed_seeds.count("C_sf") == 1);

    CHECK(fs::exists(work1 / "corpus" / "universe.txt"));
    CHECK(fs::exists(work1 / "dictionary.txt"));
    CHECK(fs::exists(work1 / "pathgen.ckpt"));
    CHECK(fs::exists(work1 / "translator.ckpt"));
    CHECK(fs::exists(work1 / "generated" / "cs" / "summary.txt"));
    CHECK(fs::exists(work1 / "generated" / "csf" / "summary.txt"));
    REQUIRE(fs::exists(result1.manifest_path));

    // the manifest covers every file except itself, with fnv1a64 content hashes
    std::string manifest = slurp(result1.manifest_path);
    CHECK(manifest.find("manifest.txt") == std::string::npos);
    CHECK(manifest.find("dictionary.txt") != std::string::npos);
    std::istringstream lines(manifest);
    std::string line;
    while (std::getline(lines, line)) {
        REQUIRE(line.size() > 18);
        CHECK(line.substr(16, 2) == "  ");
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(slurp(work1 / line.substr(18)))));
        CHECK(line.substr(0, 16) == buf);
    }

    auto result2 = cmd_pipeline(small_config(seed_dir, work2));
    CHECK(slurp(result2.manifest_path) == manifest);

    fs::remove_all(seed_dir);
    fs::remove_all(work1);
    fs::remove_all(work2);
}

TEST_CASE("eval compares seed directories through the toy target") {
    auto orig = make_seed_dir("seedgen-test-eval-orig");
    auto extra = fresh_dir("seedgen-test-eval-extra");
    {
        std::ofstream out(extra / "novel.pdf", std::ios::binary);
        out << assemble_pdf({"<< /Deep << /Nested << /Dict 1 >> >> >>"}, 0);
    }

    PipelineConfig cfg;
    auto report = cmd_eval(cfg, orig.string(), {{"C_s", extra.string()}});
    REQUIRE(report.columns.size() == 1);
    CHECK(report.columns[0].label == "C_s");
    CHECK(report.paths_original == 6);
    CHECK(report.columns[0].paths_union == 7);
    CHECK(report.columns[0].blocks_union >= report.blocks_original);

    CHECK_THROWS_AS(cmd_eval(cfg, "/missing/dir", {}), ConfigError);

    fs::remove_all(orig);
    fs::remove_all(extra);
}
