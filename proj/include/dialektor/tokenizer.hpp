#pragma once

#include "dialektor/transcript.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dialektor {

/// How much of a conversation is tokenized:
///   M0 — up to the DATA command and its reply (B@bel-compatible reference),
///   M1 — the whole conversation,
///   M2 — the whole conversation plus SMTP extension syntax in server replies.
enum class Mode { M0, M1, M2 };

std::string_view mode_tag(Mode mode);                       // "M0" / "M1" / "M2"
std::optional<Mode> mode_from_string(std::string_view tag); // accepts m0/M0/...

enum class TokenKind { Word, Space, Punct, Param, Terminator, Message, Repeat };

struct Token {
    TokenKind kind = TokenKind::Word;
    std::string text; // canonical text: what canonical_string() emits

    bool operator==(const Token&) const = default;
};

enum class StateOrigin { ClientCommand, ServerReply, MessageBody };

/// The canonical token-level form of one protocol line (or the message body).
struct DialectState {
    std::vector<Token> tokens;
    StateOrigin origin = StateOrigin::ClientCommand;

    /// Token texts joined by single spaces; injective over tokenizer output.
    std::string canonical() const;
};

/// Parameter classification of one maximal non-delimiter run. First match
/// wins: email, IPv4, domain, known keyword / 3-digit reply code, else text.
Token classify_word(std::string_view word);

/// Tokenize one client protocol line (terminator bytes included).
DialectState tokenize_client_line(std::string_view line_bytes);

/// Tokenize one complete server reply (one or more lines sharing a code;
/// continuations use `-`). M0/M1 collapse it to one state of code plus
/// optional enhanced status; M2 adds one state per continuation line.
/// A line without a leading 3-digit code tokenizes client-style but keeps
/// ServerReply origin.
std::vector<DialectState> tokenize_server_reply(std::span<const Line> reply_lines, Mode mode);

struct TokenizedConversation {
    std::vector<DialectState> states;
    bool scan = false;                        // no completed message transfer
    std::optional<std::string> message_body;  // first DATA body, dot line excluded
};

/// Walk the line stream as a protocol session: client commands, grouped
/// server replies, DATA-body collapse to `message`, M0 truncation, and
/// collapse of repeated RSET-style transactions to a single `*repeat*`.
TokenizedConversation tokenize_conversation(const Conversation& conv, Mode mode);

std::vector<std::string> canonical_states(std::span<const DialectState> states);

/// States joined by ` | `; the serialization hashed and stored in the KB.
std::string canonical_serialization(std::span<const std::string> state_strings);

} // namespace dialektor
