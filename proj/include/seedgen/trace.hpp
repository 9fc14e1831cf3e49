#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace seedgen {

// A basic block, identified by a stand-in for its start address.
struct BlockId {
    std::uint32_t id = 0;
    bool fn_entry = false;
    bool fn_exit = false;

    friend bool operator==(const BlockId& a, const BlockId& b) {
        return a.id == b.id && a.fn_entry == b.fn_entry && a.fn_exit == b.fn_exit;
    }
};

// Ordered block sequence recorded from one run of a target.
struct ExecutionPath {
    std::vector<BlockId> blocks;
    std::optional<std::string> source_id;

    std::vector<std::uint32_t> block_ids() const {
        std::vector<std::uint32_t> out;
        out.reserve(blocks.size());
        for (const auto& b : blocks) out.push_back(b.id);
        return out;
    }
};

// Deduplicated set of execution paths plus the universe of blocks seen.
class PathCorpus {
public:
    // Returns true iff the block sequence was not already present.
    bool add(const ExecutionPath& path);

    const std::vector<ExecutionPath>& paths() const { return paths_; }
    const std::map<std::uint32_t, BlockId>& block_universe() const { return universe_; }
    std::size_t size() const { return paths_.size(); }
    bool contains_sequence(const std::vector<std::uint32_t>& ids) const {
        return seen_.count(ids) > 0;
    }

private:
    std::vector<ExecutionPath> paths_;
    std::set<std::vector<std::uint32_t>> seen_;
    std::map<std::uint32_t, BlockId> universe_;
};

// Trace interchange format: one block per line, "xxxxxxxx F" where x is a
// lowercase hex digit and F is '-', 'E', 'X' or 'B'. LF newlines.
ExecutionPath ingest_trace_file(const std::string& content);
std::string serialize_trace(const ExecutionPath& path);

// Corpus persistence: a directory of *.trace files plus universe.txt.
void save_corpus(const PathCorpus& corpus, const std::string& dir);
PathCorpus load_corpus(const std::string& dir);

// Built-in deterministically instrumented target: a recursive-descent parser
// for a miniature PDF-like grammar. Any input yields a path; parse failures
// are themselves paths.
ExecutionPath run_toy_target(const std::string& input);

// Block table of the toy target (labeled program point -> BlockId).
const std::map<std::string, BlockId>& toy_target_blocks();

}  // namespace seedgen
