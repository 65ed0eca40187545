#pragma once

#include "dialektor/classifier.hpp"
#include "dialektor/dialect.hpp"
#include "dialektor/transcript.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dialektor {

/// Inverse of DialectState::canonical(). Throws GenSpecError on atoms no
/// tokenizer output contains.
std::vector<Token> parse_canonical_state(std::string_view state);

/// Message header knobs for generated DATA bodies.
struct ImfSpec {
    std::optional<std::string> mailer; // claimed client, absent = no mailer field
    bool use_x_mailer = false;         // X-Mailer instead of User-Agent
    size_t received_count = 0;
};

struct GenSpec {
    KbEntry entry;
    size_t transaction_count = 1;
    std::optional<ImfSpec> imf;
    std::string stream_id;             // default: "gen-<seed>"
    std::optional<std::string> src_ip;
};

/// Renders a conversation whose tokenization under entry.mode reproduces
/// entry.states exactly. Pure function of (spec, seed): parameter tokens
/// get pseudo-random concrete values, structure is fixed. Entries holding a
/// `*repeat*` state need transaction_count >= 2; entries without one
/// reproduce exactly at transaction_count = 1 and gain a single `*repeat*`
/// state above that.
Conversation generate(const GenSpec& spec, std::uint64_t seed);

/// The shipped client inventory: every profile the fixture KB derives from.
struct ClientProfile {
    std::string name;
    SourceKind kind = SourceKind::MUA;
    Category category = Category::Benign;
    std::vector<std::string> mailer_patterns;
    std::string greeting;  // client greeting line, placeholders {domain} {ip} {email} {word} {n}
    std::string mail_line;
    std::string rcpt_line;
    std::string data_line = "DATA";
    std::string quit_line;              // empty = hangs up without QUIT
    std::string terminator = "\r\n";
    bool rset_after_greeting = false;
    bool noop_before_quit = false;
    bool rset_before_quit = false;
    bool repeat_entry = false;          // derive the KB entry from a 3-transaction session
};

const std::vector<ClientProfile>& client_profiles();

/// Reference session for a profile (fixed parameter values, deterministic).
Conversation reference_conversation(const ClientProfile& profile, size_t transaction_count = 1);

/// KB derived from client_profiles() under all three modes. Profiles whose
/// truncated dialect coincides with an earlier profile share that entry
/// (first one wins), so per-mode entry counts shrink as depth drops.
KnowledgeBase fixture_kb();

/// One shipped conversation with its expected analysis outcome (M1, IMF
/// extension enabled, default universe).
struct FixtureCase {
    std::string note;
    Conversation conv;
    VerdictCategory expected_category = VerdictCategory::Known;
    std::optional<std::string> expected_source; // Exact-match source_name
    std::vector<AlertKind> expected_alerts;
    bool expect_novel_states = false;
};

std::vector<FixtureCase> fixture_corpus();

/// Synthetic all-bot corpus shaped to published per-bot message/IP counts:
/// Vawtrak 3872 messages from 2 addresses, Kelihos 2816 from 627, Htbot 879
/// from 669, Zbot 1 from 1.
std::vector<Conversation> botnet_corpus(const KnowledgeBase& kb);

} // namespace dialektor
