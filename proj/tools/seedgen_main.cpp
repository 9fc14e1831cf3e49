#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "seedgen/errors.hpp"
#include "seedgen/neural.hpp"
#include "seedgen/pathcomp.hpp"
#include "seedgen/pathgen.hpp"
#include "seedgen/pdf.hpp"
#include "seedgen/pipeline.hpp"
#include "seedgen/trace.hpp"
#include "seedgen/translator.hpp"

namespace fs = std::filesystem;
using namespace seedgen;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "seed_dir", "trace_dir", "work_dir", "max_len", "hidden_dim", "vocab_budget",
        "learning_rate", "batch_size", "bptt_window", "epochs", "translator_epochs",
        "gradient_clip_norm", "temperature", "gen_count", "max_attempts", "seed",
    };
    return keys;
}

struct ConfigCapture {
    std::map<std::string, std::string> values;

    void register_flags(CLI::App* cmd) {
        for (const auto& key : config_keys())
            cmd->add_option_function<std::string>(
                "--" + key, [this, key](const std::string& v) { values[key] = v; });
    }
};

PipelineConfig resolve_config(const std::string& config_file, const ConfigCapture& flags,
                              const std::string& global_seed, const std::string& global_work) {
    PipelineConfig cfg;
    if (!config_file.empty()) cfg = parse_config(read_file(config_file));
    for (const auto& [k, v] : flags.values) apply_config_line(cfg, k, v);
    if (!global_seed.empty()) apply_config_line(cfg, "seed", global_seed);
    if (!global_work.empty()) apply_config_line(cfg, "work_dir", global_work);
    return cfg;
}

int run_gradcheck() {
    // language model
    RnnLM lm(5, 8, 42);
    std::vector<std::vector<int>> seqs = {{0, 2, 1, 4, 3, 2}, {1, 3, 0, 2, 4, 1}};
    auto lm_params = lm.params();
    std::vector<Matrix> lm_grads;
    for (const auto& p : lm_params) lm_grads.emplace_back(p.tensor->rows(), p.tensor->cols());
    lm_loss_and_grads(lm, seqs, &lm_grads);
    double lm_err = gradient_check(lm_params, lm_grads,
                                   [&] { return lm_loss_and_grads(lm, seqs, nullptr); });
    std::cout << "rnnlm max relative error: " << lm_err << "\n";

    // seq2seq
    Seq2Seq s2s(5, 5, 8, 43);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs = {
        {{0, 2, 3, 1}, {0, 2, 3, 4, 1}},
        {{4, 1, 2, 0}, {0, 1, 2, 1}},
    };
    auto s2s_params = s2s.params();
    std::vector<Matrix> s2s_grads;
    for (const auto& p : s2s_params) s2s_grads.emplace_back(p.tensor->rows(), p.tensor->cols());
    seq2seq_loss_and_grads(s2s, pairs, &s2s_grads, nullptr);
    double s2s_err = gradient_check(s2s_params, s2s_grads,
                                    [&] { return seq2seq_loss_and_grads(s2s, pairs, nullptr, nullptr); });
    std::cout << "seq2seq max relative error: " << s2s_err << "\n";

    bool ok = lm_err < 1e-4 && s2s_err < 1e-4;
    std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ML-based seed corpus improvement pipeline"};
    app.require_subcommand(1);

    std::string config_file, global_seed, global_work;
    app.add_option("--config", config_file, "config file (key = value lines)");
    app.add_option("--seed", global_seed, "rng seed override");
    app.add_option("--work-dir", global_work, "work directory override");

    // pipeline
    auto* cmd_pipe = app.add_subcommand("pipeline", "run the full pipeline end to end");
    ConfigCapture pipe_flags;
    pipe_flags.register_flags(cmd_pipe);

    // eval
    auto* cmd_ev = app.add_subcommand("eval", "coverage comparison of seed corpora");
    ConfigCapture eval_flags;
    eval_flags.register_flags(cmd_ev);
    std::string eval_orig, eval_cs, eval_csf;
    cmd_ev->add_option("--seeds", eval_orig, "original seed directory")->required();
    cmd_ev->add_option("--new-cs", eval_cs, "Sample-strategy seed directory");
    cmd_ev->add_option("--new-csf", eval_csf, "SampleFunction-strategy seed directory");

    // trace
    auto* cmd_trace = app.add_subcommand("trace", "run the toy target on an input file");
    std::string trace_input, trace_out;
    cmd_trace->add_option("input", trace_input, "input file")->required();
    cmd_trace->add_option("-o,--out", trace_out, "output trace file (default stdout)");

    // compress
    auto* cmd_comp = app.add_subcommand("compress", "compress a corpus of trace files");
    ConfigCapture comp_flags;
    comp_flags.register_flags(cmd_comp);
    std::string comp_corpus;
    cmd_comp->add_option("--corpus", comp_corpus, "directory of .trace files")->required();

    // train-pathgen
    auto* cmd_tp = app.add_subcommand("train-pathgen", "train the path language model");
    ConfigCapture tp_flags;
    tp_flags.register_flags(cmd_tp);
    std::string tp_corpus;
    cmd_tp->add_option("--corpus", tp_corpus, "directory of .trace files")->required();

    // gen-paths
    auto* cmd_gp = app.add_subcommand("gen-paths", "generate novel paths from work-dir artifacts");
    ConfigCapture gp_flags;
    gp_flags.register_flags(cmd_gp);
    std::string gp_strategy = "sample";
    cmd_gp->add_option("--strategy", gp_strategy, "sample | samplefunction");

    // train-translator
    auto* cmd_tt = app.add_subcommand("train-translator", "train the path-to-object translator");
    ConfigCapture tt_flags;
    tt_flags.register_flags(cmd_tt);

    // translate
    auto* cmd_tr = app.add_subcommand("translate", "translate a trace file into a seed PDF");
    ConfigCapture tr_flags;
    tr_flags.register_flags(cmd_tr);
    std::string tr_input, tr_out;
    cmd_tr->add_option("input", tr_input, "trace file")->required();
    cmd_tr->add_option("-o,--out", tr_out, "output PDF path")->required();

    // gradcheck
    app.add_subcommand("gradcheck", "finite-difference check of both model gradients");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("pipeline")) {
            auto cfg = resolve_config(config_file, pipe_flags, global_seed, global_work);
            auto result = cmd_pipeline(cfg);
            std::cout << "pipeline complete; manifest: " << result.manifest_path << "\n";
            for (const auto& [label, n] : result.generated_paths)
                std::cout << label << ": " << n << " novel paths, "
                          << result.well_formed_seeds[label] << " well-formed seeds\n";
            return 0;
        }
        if (app.got_subcommand("eval")) {
            auto cfg = resolve_config(config_file, eval_flags, global_seed, global_work);
            std::vector<std::pair<std::string, std::string>> news;
            if (!eval_cs.empty()) news.emplace_back("C_s", eval_cs);
            if (!eval_csf.empty()) news.emplace_back("C_sf", eval_csf);
            if (news.empty()) throw ConfigError("eval needs --new-cs and/or --new-csf");
            auto report = cmd_eval(cfg, eval_orig, news);
            std::string rendered = render_report(report);
            std::cout << rendered;
            write_file(fs::path(cfg.work_dir) / "report.txt", rendered);
            return 0;
        }
        if (app.got_subcommand("trace")) {
            auto path = run_toy_target(read_file(trace_input));
            std::string text = serialize_trace(path);
            if (trace_out.empty()) std::cout << text;
            else write_file(trace_out, text);
            return 0;
        }
        if (app.got_subcommand("compress")) {
            auto cfg = resolve_config(config_file, comp_flags, global_seed, global_work);
            PathCorpus corpus = load_corpus(comp_corpus);
            auto [compressed, dict] = compress_corpus(corpus, cfg.max_len);
            write_file(fs::path(cfg.work_dir) / "dictionary.txt", serialize_dictionary(dict));
            std::size_t max_before = 0, max_after = 0;
            for (const auto& p : corpus.paths()) max_before = std::max(max_before, p.blocks.size());
            for (const auto& p : compressed) max_after = std::max(max_after, p.tokens.size());
            std::cout << dict.rules.size() << " rules; longest path " << max_before << " -> "
                      << max_after << " tokens\n";
            return 0;
        }
        if (app.got_subcommand("train-pathgen")) {
            auto cfg = resolve_config(config_file, tp_flags, global_seed, global_work);
            PathCorpus corpus = load_corpus(tp_corpus);
            auto [compressed, dict] = compress_corpus(corpus, cfg.max_len);
            auto pm = train_path_model(compressed, cfg.path_train_config(), cfg.hidden_dim);
            fs::path work(cfg.work_dir);
            write_file(work / "dictionary.txt", serialize_dictionary(dict));
            write_file(work / "pathgen.ckpt", save_checkpoint(pm.model));
            write_file(work / "path-vocab.txt", pm.vocab.serialize());
            save_corpus(corpus, (work / "corpus").string());
            std::cout << "trained on " << compressed.size() << " paths, vocab "
                      << pm.vocab.size() << "\n";
            return 0;
        }
        if (app.got_subcommand("gen-paths")) {
            auto cfg = resolve_config(config_file, gp_flags, global_seed, global_work);
            fs::path work(cfg.work_dir);
            PathCorpus corpus = load_corpus((work / "corpus").string());
            auto dict = parse_dictionary(read_file((work / "dictionary.txt").string()),
                                         corpus.block_universe());
            auto vocab = PathVocab::parse(read_file((work / "path-vocab.txt").string()),
                                          corpus.block_universe());
            RnnLM model(vocab.size(), cfg.hidden_dim);
            load_checkpoint(model, read_file((work / "pathgen.ckpt").string()));
            GenerationConfig gc;
            gc.strategy = gp_strategy == "samplefunction" ? SamplingStrategy::SampleFunction
                                                          : SamplingStrategy::Sample;
            gc.temperature = cfg.temperature;
            gc.max_tokens = cfg.max_len;
            gc.max_attempts = cfg.max_attempts;
            gc.rng_seed = cfg.seed;
            auto report = generate_novel_corpus(model, vocab, corpus, dict, gc, cfg.gen_count);
            fs::path out_dir = work / "generated-paths" / gp_strategy;
            for (std::size_t i = 0; i < report.paths.size(); ++i)
                write_file(out_dir / ("gen-" + std::to_string(i) + ".trace"),
                           serialize_trace(decompress(report.paths[i], dict)));
            for (const auto& line : report.slots) std::cout << line << "\n";
            return 0;
        }
        if (app.got_subcommand("train-translator")) {
            auto cfg = resolve_config(config_file, tt_flags, global_seed, global_work);
            if (cfg.seed_dir.empty()) throw ConfigError("train-translator needs seed_dir");
            fs::path work(cfg.work_dir);
            auto seeds = read_seed_files(cfg.seed_dir);
            PathCorpus corpus = load_corpus((work / "corpus").string());
            auto dict = parse_dictionary(read_file((work / "dictionary.txt").string()),
                                         corpus.block_universe());
            auto parallel = build_parallel_corpus(seeds, corpus, dict, cfg.vocab_budget);
            if (parallel.pairs.empty()) throw ConfigError("no usable (seed, path) pairs");
            std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
            for (const auto& p : parallel.pairs) pairs.emplace_back(p.source, p.target);
            Seq2Seq model(parallel.source_vocab.size(), parallel.target_vocab.size(),
                          cfg.hidden_dim, cfg.seed + 7);
            seq2seq_train(model, pairs, cfg.translator_train_config());
            write_file(work / "translator.ckpt", save_checkpoint(model));
            write_file(work / "source-vocab.txt", parallel.source_vocab.serialize());
            write_file(work / "target-vocab.txt", parallel.target_vocab.serialize());
            std::cout << "trained on " << pairs.size() << " pairs\n";
            return 0;
        }
        if (app.got_subcommand("translate")) {
            auto cfg = resolve_config(config_file, tr_flags, global_seed, global_work);
            fs::path work(cfg.work_dir);
            PathCorpus corpus = load_corpus((work / "corpus").string());
            auto dict = parse_dictionary(read_file((work / "dictionary.txt").string()),
                                         corpus.block_universe());
            auto seeds = read_seed_files(cfg.seed_dir);
            auto parallel = build_parallel_corpus(seeds, corpus, dict, cfg.vocab_budget);
            Seq2Seq model(parallel.source_vocab.size(), parallel.target_vocab.size(),
                          cfg.hidden_dim, cfg.seed + 7);
            load_checkpoint(model, read_file((work / "translator.ckpt").string()));
            auto path = ingest_trace_file(read_file(tr_input));
            auto src = encode_source(compress_single(path, dict), parallel.source_vocab);
            std::size_t max_decode = 4 * std::max<std::size_t>(parallel.max_target_len, 4);
            auto result = translate(model, src, max_decode, parallel.target_vocab);
            write_file(tr_out, result.seed_bytes);
            std::cout << (result.well_formed ? "well-formed" : "malformed") << ", "
                      << result.bodies.size() << " objects\n";
            return 0;
        }
        if (app.got_subcommand("gradcheck")) return run_gradcheck();
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const StageError& ex) {
        std::cerr << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
