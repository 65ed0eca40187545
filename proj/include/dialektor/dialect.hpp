#pragma once

#include "dialektor/tokenizer.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dialektor {

enum class Category { Benign, Suspicious, Malicious };
enum class SourceKind { MUA, MTA, Bot, Library };

std::string_view category_tag(Category c);
std::optional<Category> category_from_string(std::string_view tag);
std::string_view source_kind_tag(SourceKind k);
std::optional<SourceKind> source_kind_from_string(std::string_view tag);

std::string sha256_hex(std::string_view bytes);

/// Digest of the mode-tagged canonical serialization: the dialect's identity.
/// Throws ValidationError on an empty state list.
std::string hash_dialect(Mode mode, std::span<const std::string> state_strings);

struct KbEntry {
    std::string hash; // 64 lowercase hex chars
    Mode mode = Mode::M1;
    Category category = Category::Benign;
    std::string source_name;
    SourceKind source_kind = SourceKind::MUA;
    std::vector<std::string> mailer_patterns; // case-insensitive substrings
    std::vector<std::string> states;          // canonical state strings

    bool operator==(const KbEntry&) const = default;
};

enum class MatchKind { Exact, UnknownSequence, NovelStates };

struct MatchResult {
    MatchKind kind = MatchKind::UnknownSequence;
    const KbEntry* entry = nullptr;       // set when kind == Exact
    std::vector<std::string> novel_states; // deduped, first-seen order
};

class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Validates hash (recompute-and-compare), enums, and (hash, mode)
    /// uniqueness. Malicious entries must be Bot-sourced or carry an
    /// "unknown-" promotion name; load accepts both.
    static KnowledgeBase load(const std::string& path);
    static KnowledgeBase parse(std::string_view text, const std::string& origin);

    /// Canonical serialization: entries sorted by (hash, mode), one JSON
    /// object per line. Save is atomic (temp file + rename).
    void save(const std::string& path) const;
    std::string to_jsonl() const;

    /// Inserts after verifying the entry hash. Duplicate (hash, mode) raises
    /// KbConflictError naming the existing source. A Malicious entry whose
    /// source_kind is not Bot is an unknown-dialect promotion: it requires
    /// allow_unknown_promotion and an "unknown-"-prefixed source_name.
    void add(KbEntry entry, bool allow_unknown_promotion = false);

    /// Exact on (hash, mode) hit; UnknownSequence when every state is in the
    /// legitimate-state universe for the mode; NovelStates otherwise. The
    /// universe is Benign ∪ Suspicious states, or Benign only when
    /// universe_includes_suspicious is false.
    MatchResult match(Mode mode, std::span<const std::string> state_strings,
                      bool universe_includes_suspicious = true) const;

    const KbEntry* find(Mode mode, const std::string& hash) const;

    struct ModeStats {
        size_t benign = 0, suspicious = 0, malicious = 0;
        size_t total() const { return benign + suspicious + malicious; }
    };
    std::map<std::string, ModeStats> stats() const; // keyed by mode tag

    const std::vector<KbEntry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }

    bool universe_contains(Mode mode, const std::string& state,
                           bool include_suspicious = true) const;

private:
    void index_entry(size_t idx);

    std::vector<KbEntry> entries_;
    std::unordered_map<std::string, size_t> by_key_; // "M1:<hash>" -> index
    // Per-mode state universes backing the UNKNOWN verdict.
    std::unordered_map<std::string, std::unordered_set<std::string>> benign_universe_;
    std::unordered_map<std::string, std::unordered_set<std::string>> legit_universe_;
};

} // namespace dialektor
