#pragma once

#include "dialektor/classifier.hpp"
#include "dialektor/dialect.hpp"
#include "dialektor/transcript.hpp"

#include <span>
#include <string>
#include <vector>

namespace dialektor {

struct AnalysisOptions {
    Mode mode = Mode::M1;
    bool imf_ext = false;
    bool universe_includes_suspicious = true;
};

/// Tokenize → match → IMF check → classify, for one conversation.
Verdict analyze_conversation(const Conversation& conv, const KnowledgeBase& kb,
                             const AnalysisOptions& opts);

/// Straightforward loop; the reference the parallel kernel is checked against.
std::vector<Verdict> analyze_corpus_serial(std::span<const Conversation> corpus,
                                           const KnowledgeBase& kb, const AnalysisOptions& opts);

/// Parallel map over conversations (OpenMP when available). Output order and
/// content are identical to the serial reference: verdict i belongs to
/// conversation i regardless of scheduling.
std::vector<Verdict> analyze_corpus(std::span<const Conversation> corpus, const KnowledgeBase& kb,
                                    const AnalysisOptions& opts);

// Verdict interchange (JSONL, one verdict per line).
std::string verdicts_to_jsonl(std::span<const Verdict> verdicts);
std::vector<Verdict> parse_verdicts_jsonl(std::string_view text, const std::string& origin);
void save_verdicts(std::span<const Verdict> verdicts, const std::string& path);
std::vector<Verdict> load_verdicts(const std::string& path);

} // namespace dialektor
