#include "seedgen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "seedgen/errors.hpp"
#include "seedgen/pathcomp.hpp"
#include "seedgen/pdf.hpp"
#include "seedgen/translator.hpp"

namespace fs = std::filesystem;

namespace seedgen {

TrainConfig PipelineConfig::path_train_config() const {
    TrainConfig t;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.bptt_window = bptt_window;
    t.epochs = epochs;
    t.gradient_clip_norm = gradient_clip_norm;
    t.rng_seed = seed;
    return t;
}

TrainConfig PipelineConfig::translator_train_config() const {
    TrainConfig t = path_train_config();
    t.epochs = translator_epochs;
    t.rng_seed = seed + 1;
    return t;
}

void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto as_u = [&](const std::string& v) -> std::uint64_t {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value for '" + key + "': " + v);
        }
    };
    auto as_d = [&](const std::string& v) -> double {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value for '" + key + "': " + v);
        }
    };
    auto positive = [&](std::uint64_t v) {
        if (v == 0) throw ConfigError("'" + key + "' must be positive");
        return v;
    };

    if (key == "seed_dir") cfg.seed_dir = value;
    else if (key == "trace_dir") cfg.trace_dir = value;
    else if (key == "work_dir") cfg.work_dir = value;
    else if (key == "max_len") cfg.max_len = static_cast<std::uint32_t>(positive(as_u(value)));
    else if (key == "hidden_dim") cfg.hidden_dim = positive(as_u(value));
    else if (key == "vocab_budget") cfg.vocab_budget = positive(as_u(value));
    else if (key == "learning_rate") cfg.learning_rate = as_d(value);
    else if (key == "batch_size") cfg.batch_size = positive(as_u(value));
    else if (key == "bptt_window") cfg.bptt_window = positive(as_u(value));
    else if (key == "epochs") cfg.epochs = positive(as_u(value));
    else if (key == "translator_epochs") cfg.translator_epochs = positive(as_u(value));
    else if (key == "gradient_clip_norm") cfg.gradient_clip_norm = as_d(value);
    else if (key == "temperature") cfg.temperature = as_d(value);
    else if (key == "gen_count") cfg.gen_count = positive(as_u(value));
    else if (key == "max_attempts") cfg.max_attempts = positive(as_u(value));
    else if (key == "seed") cfg.seed = as_u(value);
    else throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// coverage
// ---------------------------------------------------------------------------

double pct_delta(std::size_t original, long long delta) {
    if (original == 0) return 0.0;
    double raw = 100.0 * static_cast<double>(delta) / static_cast<double>(original);
    // half-up to three significant figures, at most two decimals
    double mag = std::abs(raw);
    double scale = mag < 10.0 ? 100.0 : mag < 100.0 ? 10.0 : 1.0;
    return std::floor(raw * scale + 0.5) / scale;
}

CoverageReport coverage_delta(const PathCorpus& original,
                              const std::vector<std::pair<std::string, const PathCorpus*>>& news) {
    CoverageReport report;
    report.blocks_original = original.block_universe().size();
    report.paths_original = original.size();
    for (const auto& [label, added] : news) {
        PathCorpus uni;
        for (const auto& p : original.paths()) uni.add(p);
        for (const auto& p : added->paths()) uni.add(p);
        CoverageColumn col;
        col.label = label;
        col.blocks_union = uni.block_universe().size();
        col.paths_union = uni.size();
        report.columns.push_back(col);
    }
    return report;
}

CoverageReport coverage_delta(const PathCorpus& original, const PathCorpus& added) {
    return coverage_delta(original, {{"new", &added}});
}

namespace {

std::string with_commas(std::size_t v) {
    std::string raw = std::to_string(v);
    std::string out;
    int count = 0;
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
        if (count && count % 3 == 0) out += ',';
        out += *it;
        ++count;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string fmt_pct(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f%%", pct);
    return buf;
}

}  // namespace

std::string render_report(const CoverageReport& report) {
    struct Row {
        std::string metric;
        std::size_t original;
        std::vector<std::pair<long long, double>> cells;  // delta, pct
    };
    std::vector<Row> rows = {
        {"basic blocks", report.blocks_original, {}},
        {"execution paths", report.paths_original, {}},
    };
    for (const auto& col : report.columns) {
        long long bd = static_cast<long long>(col.blocks_union) -
                       static_cast<long long>(report.blocks_original);
        long long pd = static_cast<long long>(col.paths_union) -
                       static_cast<long long>(report.paths_original);
        rows[0].cells.push_back({bd, pct_delta(report.blocks_original, bd)});
        rows[1].cells.push_back({pd, pct_delta(report.paths_original, pd)});
    }

    std::ostringstream out;
    out << "metric           original";
    for (const auto& col : report.columns) out << "  " << col.label << " #  " << col.label << " %";
    out << "\n";
    for (const auto& row : rows) {
        std::ostringstream line;
        line << row.metric;
        while (line.str().size() < 16) line << ' ';
        line << ' ' << with_commas(row.original);
        for (const auto& [delta, pct] : row.cells) {
            line << ' ' << (delta >= 0 ? "+" : "") << delta;
            line << ' ' << fmt_pct(pct);
        }
        out << line.str() << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<std::pair<std::string, std::string>> read_seed_files(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pdf") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out.emplace_back(f.stem().string(), ss.str());
    }
    return out;
}

PathCorpus corpus_from_seeds(const std::vector<std::pair<std::string, std::string>>& seeds,
                             const std::string& trace_dir) {
    PathCorpus corpus;
    for (const auto& [name, bytes] : seeds) {
        ExecutionPath path;
        fs::path trace_file = fs::path(trace_dir) / (name + ".trace");
        if (!trace_dir.empty() && fs::exists(trace_file)) {
            std::ifstream in(trace_file, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            path = ingest_trace_file(ss.str());
        } else {
            path = run_toy_target(bytes);
        }
        path.source_id = name;
        corpus.add(path);
    }
    return corpus;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void preserve_failed_stage(const fs::path& work, const std::string& stage) {
    fs::path failed = work / ("failed-" + stage);
    fs::create_directories(failed);
    for (const auto& e : fs::directory_iterator(work)) {
        std::string name = e.path().filename().string();
        if (name.rfind("failed-", 0) == 0) continue;
        fs::rename(e.path(), failed / name);
    }
}

template <typename Fn>
void run_stage(const fs::path& work, const std::string& stage, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& ex) {
        preserve_failed_stage(work, stage);
        throw StageError(stage, ex.what());
    }
}

struct StrategyInfo {
    std::string label;     // report label
    std::string dir_name;  // filesystem-safe
    SamplingStrategy strategy;
};

const std::vector<StrategyInfo>& strategies() {
    static const std::vector<StrategyInfo> s = {
        {"C_s", "cs", SamplingStrategy::Sample},
        {"C_sf", "csf", SamplingStrategy::SampleFunction},
    };
    return s;
}

void write_manifest(const fs::path& work) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(work))
        if (e.is_regular_file() && e.path().filename() != "manifest.txt")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string manifest;
    for (const auto& f : files) {
        manifest += hex16(fnv1a64(read_file(f)));
        manifest += "  ";
        manifest += fs::relative(f, work).generic_string();
        manifest += "\n";
    }
    write_file(work / "manifest.txt", manifest);
}

}  // namespace

PipelineResult cmd_pipeline(const PipelineConfig& cfg) {
    if (cfg.seed_dir.empty() || !fs::is_directory(cfg.seed_dir))
        throw ConfigError("seed_dir missing or not a directory: '" + cfg.seed_dir + "'");
    auto seeds = read_seed_files(cfg.seed_dir);
    if (seeds.empty()) throw ConfigError("no .pdf seed files in '" + cfg.seed_dir + "'");

    fs::path work(cfg.work_dir);
    fs::create_directories(work);

    PipelineResult result;

    // Step 1: record/ingest
    PathCorpus corpus;
    run_stage(work, "ingest", [&] {
        corpus = corpus_from_seeds(seeds, cfg.trace_dir);
        save_corpus(corpus, (work / "corpus").string());
    });
    result.original_corpus = corpus;

    // Step 1: compress
    std::vector<CompressedPath> compressed;
    CompressionDictionary dict;
    run_stage(work, "compress", [&] {
        auto [cp, d] = compress_corpus(corpus, cfg.max_len);
        compressed = std::move(cp);
        dict = std::move(d);
        write_file(work / "dictionary.txt", serialize_dictionary(dict));
    });

    // Step 2: path model
    RnnLM path_model;
    PathVocab path_vocab;
    run_stage(work, "train-pathgen", [&] {
        PathModel pm = train_path_model(compressed, cfg.path_train_config(), cfg.hidden_dim);
        path_model = std::move(pm.model);
        path_vocab = std::move(pm.vocab);
        write_file(work / "pathgen.ckpt", save_checkpoint(path_model));
        write_file(work / "path-vocab.txt", path_vocab.serialize());
    });

    // Step 2: generate novel paths under both strategies
    std::map<std::string, std::vector<CompressedPath>> generated;
    run_stage(work, "gen-paths", [&] {
        std::uint64_t stream = 0;
        for (const auto& s : strategies()) {
            GenerationConfig gc;
            gc.strategy = s.strategy;
            gc.temperature = cfg.temperature;
            gc.max_tokens = cfg.max_len;
            gc.max_attempts = cfg.max_attempts;
            gc.rng_seed = cfg.seed + 101 * ++stream;
            auto report = generate_novel_corpus(path_model, path_vocab, corpus, dict, gc,
                                                cfg.gen_count);
            std::string attempts;
            for (const auto& line : report.slots) attempts += line + "\n";
            write_file(work / "generated-paths" / s.dir_name / "attempts.txt", attempts);
            for (std::size_t i = 0; i < report.paths.size(); ++i) {
                auto full = decompress(report.paths[i], dict);
                write_file(work / "generated-paths" / s.dir_name /
                               ("gen-" + std::to_string(i) + ".trace"),
                           serialize_trace(full));
            }
            result.generated_paths[s.label] = report.paths.size();
            generated[s.label] = std::move(report.paths);
        }
    });

    // Step 3: translator
    Seq2Seq translator_model;
    ParallelCorpus parallel;
    run_stage(work, "train-translator", [&] {
        parallel = build_parallel_corpus(seeds, corpus, dict, cfg.vocab_budget);
        if (parallel.pairs.empty()) throw FormatError("no usable (seed, path) pairs");
        std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
        for (const auto& p : parallel.pairs) {
            pairs.emplace_back(p.source, p.target);
            write_file(work / "parallel" / (p.name + ".src"), [&] {
                std::string s;
                for (std::size_t i = 0; i < p.source.size(); ++i)
                    s += (i ? " " : "") + std::to_string(p.source[i]);
                return s + "\n";
            }());
            write_file(work / "parallel" / (p.name + ".tgt"), [&] {
                std::string s;
                for (std::size_t i = 0; i < p.target.size(); ++i)
                    s += (i ? " " : "") + std::to_string(p.target[i]);
                return s + "\n";
            }());
        }
        translator_model = Seq2Seq(parallel.source_vocab.size(), parallel.target_vocab.size(),
                                   cfg.hidden_dim, cfg.seed + 7);
        seq2seq_train(translator_model, pairs, cfg.translator_train_config());
        write_file(work / "translator.ckpt", save_checkpoint(translator_model));
        write_file(work / "source-vocab.txt", parallel.source_vocab.serialize());
        write_file(work / "target-vocab.txt", parallel.target_vocab.serialize());
    });

    // Step 3: translate generated paths into seed files
    run_stage(work, "translate", [&] {
        std::size_t max_decode = 4 * std::max<std::size_t>(parallel.max_target_len, 4);
        for (const auto& s : strategies()) {
            std::size_t well_formed = 0;
            std::string summary;
            const auto& paths = generated[s.label];
            for (std::size_t i = 0; i < paths.size(); ++i) {
                auto src = encode_source(paths[i], parallel.source_vocab);
                auto tr = translate(translator_model, src, max_decode, parallel.target_vocab);
                std::string name = "gen-" + std::to_string(i) + ".pdf";
                if (!tr.seed_bytes.empty())
                    write_file(work / "generated" / s.dir_name / name, tr.seed_bytes);
                summary += name + (tr.well_formed ? " well-formed" : " malformed") + "\n";
                if (tr.well_formed) ++well_formed;
            }
            write_file(work / "generated" / s.dir_name / "summary.txt", summary);
            result.well_formed_seeds[s.label] = well_formed;
        }
    });

    run_stage(work, "manifest", [&] { write_manifest(work); });
    result.manifest_path = (work / "manifest.txt").string();
    return result;
}

CoverageReport cmd_eval(const PipelineConfig& cfg, const std::string& original_seed_dir,
                        const std::vector<std::pair<std::string, std::string>>& new_seed_dirs) {
    if (!fs::is_directory(original_seed_dir))
        throw ConfigError("seed dir missing: '" + original_seed_dir + "'");
    PathCorpus original = corpus_from_seeds(read_seed_files(original_seed_dir), cfg.trace_dir);

    std::vector<PathCorpus> corpora;
    corpora.reserve(new_seed_dirs.size());
    std::vector<std::pair<std::string, const PathCorpus*>> labeled;
    for (const auto& [label, dir] : new_seed_dirs) {
        if (!fs::is_directory(dir)) throw ConfigError("seed dir missing: '" + dir + "'");
        corpora.push_back(corpus_from_seeds(read_seed_files(dir), ""));
    }
    for (std::size_t i = 0; i < new_seed_dirs.size(); ++i)
        labeled.emplace_back(new_seed_dirs[i].first, &corpora[i]);
    return coverage_delta(original, labeled);
}

}  // namespace seedgen
