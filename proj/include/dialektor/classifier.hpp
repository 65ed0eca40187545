#pragma once

#include "dialektor/dialect.hpp"
#include "dialektor/imf.hpp"
#include "dialektor/tokenizer.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dialektor {

enum class VerdictCategory { Known, Unknown, Malicious, Scan };

std::string_view verdict_category_tag(VerdictCategory c);
std::optional<VerdictCategory> verdict_category_from_string(std::string_view tag);

struct MatchedSource {
    std::string name;
    SourceKind kind = SourceKind::MUA;
    Category kb_category = Category::Benign;

    bool operator==(const MatchedSource&) const = default;
};

struct Verdict {
    std::string stream_id;
    Mode mode = Mode::M1;
    VerdictCategory category = VerdictCategory::Known;
    std::optional<MatchedSource> matched_source; // set on Exact match
    std::vector<Alert> alerts;
    bool treated_as_spam = false;
    std::string hash; // empty when the conversation produced no states
    std::vector<std::string> states;
    std::vector<std::string> novel_states;
    std::optional<std::string> src_ip;
};

/// Folds dialect match, scan flag, and IMF alerts into a category. Scan wins
/// outright (and clears alerts — nothing was delivered); then Malicious on a
/// malicious exact match or on states no legitimate client produces; then
/// Unknown for a never-seen sequence of known states; else Known.
Verdict classify(const MatchResult& match, bool scan, std::vector<Alert> alerts, bool imf_ext);

struct CategoryRow {
    std::uint64_t samples = 0;
    double ratio_of_total = 0.0; // percent of non-scan conversations
    std::uint64_t imf_inconsistency = 0; // conversations with >= 1 alert
    double ratio_of_alerts = 0.0; // percent of the category's samples
};

struct BotRollup {
    std::string name;
    std::uint64_t messages = 0;
    std::uint64_t distinct_ips = 0;

    bool operator==(const BotRollup&) const = default;
};

struct CorpusReport {
    std::string mode;
    bool imf_ext = false;
    std::uint64_t total = 0; // non-scan conversations
    std::uint64_t scan_count = 0;
    CategoryRow unknown, malicious, known;
    // Spamtrap ground truth (everything is spam): set when requested.
    std::optional<double> tp_pct, fn_pct, tp_pct_with_imf, fn_pct_with_imf;
    std::vector<BotRollup> fingerprints; // sorted by messages desc, name asc

    std::string to_json_string() const;
    std::string to_table() const;
};

/// Raw per-category tallies; the arithmetic core of aggregate(), exposed so
/// published-shape numbers can be fed in directly.
struct RawCounts {
    std::uint64_t unknown_samples = 0, malicious_samples = 0, known_samples = 0;
    std::uint64_t unknown_alerts = 0, malicious_alerts = 0, known_alerts = 0;
    std::uint64_t scan_count = 0;
    // Known conversations flipped to spam by alerts; defaults to known_alerts.
    std::optional<std::uint64_t> known_flips;
};

CorpusReport aggregate_counts(const RawCounts& counts, bool ground_truth_all_spam);

/// Table 4-shaped rollup over one mode's verdicts. Scans are excluded from
/// every denominator. Throws ValidationError when verdict modes are mixed.
CorpusReport aggregate(std::span<const Verdict> verdicts, bool ground_truth_all_spam = true);

/// Per-bot (message count, distinct source IPs) over exact-bot malicious
/// verdicts; conversations without src_ip count messages only.
std::vector<BotRollup> fingerprint(std::span<const Verdict> verdicts);

/// One decimal place, round-half-away-from-zero: the report's number format.
std::string format_pct(double value);

} // namespace dialektor
