#include "dialektor/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace dialektor {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_digits(std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// SMTP verbs and common extension keywords kept literal (casing preserved)
// instead of being folded into the `text` parameter.
const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kws = {
        "helo", "ehlo", "mail", "from", "rcpt", "to",   "data",     "quit",     "rset",
        "noop", "vrfy", "expn", "help", "auth", "size", "starttls", "pipelining", "8bitmime",
    };
    return kws;
}

bool looks_like_email(std::string_view w);
bool looks_like_ipv4(std::string_view w);
bool looks_like_domain(std::string_view w);

bool valid_local_part(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
    });
}

bool looks_like_email(std::string_view w) {
    auto at = w.find('@');
    if (at == std::string_view::npos || at != w.rfind('@')) return false;
    return valid_local_part(w.substr(0, at)) && looks_like_domain(w.substr(at + 1));
}

bool looks_like_ipv4(std::string_view w) {
    int fields = 0;
    size_t pos = 0;
    while (pos <= w.size()) {
        auto dot = w.find('.', pos);
        std::string_view field = w.substr(pos, dot == std::string_view::npos ? dot : dot - pos);
        if (field.empty() || field.size() > 3 || !is_digits(field)) return false;
        int v = 0;
        for (char c : field) v = v * 10 + (c - '0');
        if (v > 255) return false;
        ++fields;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return fields == 4;
}

bool looks_like_domain(std::string_view w) {
    int labels = 0;
    bool all_numeric = true; // digits-and-dots only, e.g. a botched IPv4
    size_t pos = 0;
    while (pos <= w.size()) {
        auto dot = w.find('.', pos);
        std::string_view label = w.substr(pos, dot == std::string_view::npos ? dot : dot - pos);
        if (label.empty()) return false;
        for (unsigned char c : label) {
            if (std::isalpha(c) || c == '-') all_numeric = false;
            else if (!std::isdigit(c)) return false;
        }
        ++labels;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return labels >= 2 && !all_numeric;
}

constexpr std::string_view kPunct = ":<>[](),;=";

bool is_punct_char(char c) { return kPunct.find(c) != std::string_view::npos; }
bool is_space_char(char c) { return c == ' ' || c == '\t'; }

// Splits off the line terminator and reports its canonical token text.
std::pair<std::string_view, std::string> split_terminator(std::string_view bytes) {
    if (bytes.ends_with("\r\n")) return {bytes.substr(0, bytes.size() - 2), "<CR> <LF>"};
    if (bytes.ends_with("\n")) return {bytes.substr(0, bytes.size() - 1), "<LF>"};
    return {bytes, "<none>"};
}

// Tokenizes line content (no terminator): space runs, punctuation, words.
// Stray CR separates tokens without emitting anything.
void scan_content(std::string_view content, std::vector<Token>& out) {
    size_t i = 0;
    const size_t n = content.size();
    while (i < n) {
        char c = content[i];
        if (is_space_char(c)) {
            while (i < n && is_space_char(content[i])) ++i;
            out.push_back({TokenKind::Space, "space"});
        } else if (is_punct_char(c)) {
            out.push_back({TokenKind::Punct, std::string(1, c)});
            ++i;
        } else if (c == '\r') {
            ++i;
        } else {
            size_t start = i;
            while (i < n && !is_space_char(content[i]) && !is_punct_char(content[i]) &&
                   content[i] != '\r')
                ++i;
            out.push_back(classify_word(content.substr(start, i - start)));
        }
    }
}

bool leading_reply_code(std::string_view content) {
    if (content.size() < 3) return false;
    if (!is_digits(content.substr(0, 3))) return false;
    return content.size() == 3 || content[3] == ' ' || content[3] == '-';
}

// Enhanced status code (RFC 3463 shape): three dot-separated fields of 1-3
// digits, e.g. `2.1.0`.
bool looks_like_enhanced_status(std::string_view w) {
    int fields = 0;
    size_t pos = 0;
    while (pos <= w.size()) {
        auto dot = w.find('.', pos);
        std::string_view field = w.substr(pos, dot == std::string_view::npos ? dot : dot - pos);
        if (field.empty() || field.size() > 3 || !is_digits(field)) return false;
        ++fields;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return fields == 3;
}

std::optional<std::string> extract_enhanced_status(std::string_view content) {
    // content starts with the 3-digit code; skip it and one separator.
    std::string_view rest = content.substr(3);
    if (!rest.empty() && (rest.front() == ' ' || rest.front() == '-')) rest.remove_prefix(1);
    size_t start = 0;
    while (start < rest.size() && is_space_char(rest[start])) ++start;
    size_t end = start;
    while (end < rest.size() && !is_space_char(rest[end]) && rest[end] != '\r') ++end;
    std::string_view word = rest.substr(start, end - start);
    if (looks_like_enhanced_status(word)) return std::string(word);
    return std::nullopt;
}

bool first_word_is(const DialectState& st, std::string_view verb_lower) {
    for (const auto& tok : st.tokens) {
        if (tok.kind == TokenKind::Space) continue;
        return tok.kind == TokenKind::Word && to_lower(tok.text) == verb_lower;
    }
    return false;
}

} // namespace

std::string_view mode_tag(Mode mode) {
    switch (mode) {
        case Mode::M0: return "M0";
        case Mode::M1: return "M1";
        case Mode::M2: return "M2";
    }
    return "M1";
}

std::optional<Mode> mode_from_string(std::string_view tag) {
    std::string t = to_lower(tag);
    if (t == "m0") return Mode::M0;
    if (t == "m1") return Mode::M1;
    if (t == "m2") return Mode::M2;
    return std::nullopt;
}

std::string DialectState::canonical() const {
    std::string out;
    for (const auto& tok : tokens) {
        if (!out.empty()) out += ' ';
        out += tok.text;
    }
    return out;
}

Token classify_word(std::string_view word) {
    if (looks_like_email(word)) return {TokenKind::Param, "email"};
    if (looks_like_ipv4(word)) return {TokenKind::Param, "IPv4"};
    if (looks_like_domain(word)) return {TokenKind::Param, "domain"};
    if ((word.size() == 3 && is_digits(word)) || keyword_set().contains(to_lower(word)))
        return {TokenKind::Word, std::string(word)};
    return {TokenKind::Param, "text"};
}

DialectState tokenize_client_line(std::string_view line_bytes) {
    auto [content, term] = split_terminator(line_bytes);
    DialectState st;
    st.origin = StateOrigin::ClientCommand;
    scan_content(content, st.tokens);
    st.tokens.push_back({TokenKind::Terminator, term});
    return st;
}

std::vector<DialectState> tokenize_server_reply(std::span<const Line> reply_lines, Mode mode) {
    std::vector<DialectState> out;
    if (reply_lines.empty()) return out;

    std::string first_content(reply_lines.front().content());
    if (!leading_reply_code(first_content)) {
        // Not reply syntax at all; keep the raw shape the way a client line
        // would be rendered, but remember who said it.
        DialectState st = tokenize_client_line(reply_lines.front().bytes);
        st.origin = StateOrigin::ServerReply;
        out.push_back(std::move(st));
        return out;
    }

    const Line& final_line = reply_lines.back();
    std::string final_content(final_line.content());

    if (mode == Mode::M2) {
        for (size_t i = 0; i + 1 < reply_lines.size(); ++i) {
            std::string content(reply_lines[i].content());
            DialectState st;
            st.origin = StateOrigin::ServerReply;
            st.tokens.push_back({TokenKind::Word, content.substr(0, 3)});
            st.tokens.push_back({TokenKind::Punct, "-"});
            scan_content(std::string_view(content).substr(4), st.tokens);
            out.push_back(std::move(st));
        }
    }

    DialectState st;
    st.origin = StateOrigin::ServerReply;
    std::string code = leading_reply_code(final_content) ? final_content.substr(0, 3)
                                                         : first_content.substr(0, 3);
    st.tokens.push_back({TokenKind::Word, code});
    if (leading_reply_code(final_content)) {
        if (auto enh = extract_enhanced_status(final_content))
            st.tokens.push_back({TokenKind::Word, *enh});
    }
    out.push_back(std::move(st));
    return out;
}

namespace {

// One reply group: either a single codeless line, or a run of `ddd-`
// continuations capped by the first non-continuation coded line.
size_t reply_group_end(const std::vector<Line>& lines, size_t i) {
    std::string content(lines[i].content());
    if (!leading_reply_code(content)) return i + 1;
    size_t j = i;
    auto is_cont = [&](size_t k) {
        std::string c(lines[k].content());
        return leading_reply_code(c) && c.size() > 3 && c[3] == '-';
    };
    while (j < lines.size() && lines[j].dir == Direction::Server && is_cont(j)) ++j;
    if (j < lines.size() && lines[j].dir == Direction::Server &&
        leading_reply_code(lines[j].content()))
        ++j;
    return std::max(j, i + 1);
}

std::string_view state_code(const DialectState& st) {
    if (st.origin != StateOrigin::ServerReply || st.tokens.empty()) return {};
    const Token& t = st.tokens.front();
    if (t.kind == TokenKind::Word && t.text.size() == 3 && is_digits(t.text)) return t.text;
    return {};
}

struct TxnSpan {
    size_t begin = 0; // index of the MAIL state
    size_t end = 0;   // one past the reply state that follows the message
    bool complete = false;
};

// Collapses repeated mail transactions: every completed transaction whose
// state sequence matches the first one is dropped, as are the gaps between
// two consecutive dropped transactions; one `*repeat*` marks the spot.
std::vector<DialectState> collapse_repeats(std::vector<DialectState> states) {
    std::vector<TxnSpan> spans;
    bool open = false;
    TxnSpan cur;
    bool awaiting_reply = false; // saw the message state, span ends after reply
    for (size_t i = 0; i < states.size(); ++i) {
        const DialectState& st = states[i];
        if (!open) {
            if (st.origin == StateOrigin::ClientCommand && first_word_is(st, "mail")) {
                open = true;
                cur = TxnSpan{i, i + 1, false};
                awaiting_reply = false;
            }
            continue;
        }
        if (st.origin == StateOrigin::MessageBody) {
            awaiting_reply = true;
        } else if (awaiting_reply && st.origin == StateOrigin::ServerReply) {
            cur.end = i + 1;
            cur.complete = true;
            spans.push_back(cur);
            open = false;
            continue;
        }
        cur.end = i + 1;
    }

    if (spans.size() < 2) return states;

    auto span_key = [&](const TxnSpan& s) {
        std::string key;
        for (size_t i = s.begin; i < s.end; ++i) {
            key += states[i].canonical();
            key += '\x1f';
        }
        return key;
    };
    std::string ref = span_key(spans.front());

    std::vector<bool> omitted(spans.size(), false);
    for (size_t k = 1; k < spans.size(); ++k) omitted[k] = (span_key(spans[k]) == ref);
    if (std::none_of(omitted.begin(), omitted.end(), [](bool b) { return b; })) return states;

    std::vector<bool> drop(states.size(), false);
    std::optional<size_t> first_drop;
    for (size_t k = 0; k < spans.size(); ++k) {
        if (!omitted[k]) continue;
        if (!first_drop) first_drop = spans[k].begin;
        for (size_t i = spans[k].begin; i < spans[k].end; ++i) drop[i] = true;
        if (k + 1 < spans.size() && omitted[k + 1])
            for (size_t i = spans[k].end; i < spans[k + 1].begin; ++i) drop[i] = true;
    }

    std::vector<DialectState> out;
    out.reserve(states.size());
    for (size_t i = 0; i < states.size(); ++i) {
        if (i == *first_drop) {
            DialectState marker;
            marker.origin = StateOrigin::ClientCommand;
            marker.tokens.push_back({TokenKind::Repeat, "*repeat*"});
            out.push_back(std::move(marker));
        }
        if (!drop[i]) out.push_back(std::move(states[i]));
    }
    return out;
}

} // namespace

TokenizedConversation tokenize_conversation(const Conversation& conv, Mode mode) {
    std::vector<Line> lines = split_lines(conv);
    TokenizedConversation result;
    std::vector<DialectState>& states = result.states;

    bool pending_data = false; // DATA sent, next reply decides
    bool in_body = false;
    std::string body;
    bool body_captured = false;
    bool any_message = false;
    std::optional<size_t> m0_cut; // states to keep under M0
    std::optional<size_t> first_data_state;

    size_t i = 0;
    while (i < lines.size()) {
        const Line& line = lines[i];
        if (line.dir == Direction::Client) {
            if (in_body) {
                if (line.content() == ".") {
                    DialectState st;
                    st.origin = StateOrigin::MessageBody;
                    st.tokens.push_back({TokenKind::Message, "message"});
                    states.push_back(std::move(st));
                    any_message = true;
                    if (!body_captured) {
                        result.message_body = body;
                        body_captured = true;
                    }
                    in_body = false;
                    body.clear();
                } else {
                    body += line.bytes;
                }
                ++i;
                continue;
            }
            DialectState st = tokenize_client_line(line.bytes);
            bool is_data = first_word_is(st, "data");
            states.push_back(std::move(st));
            if (is_data) {
                pending_data = true;
                if (!first_data_state) first_data_state = states.size() - 1;
            }
            ++i;
        } else {
            size_t end = reply_group_end(lines, i);
            auto reply_states =
                tokenize_server_reply(std::span<const Line>(lines.data() + i, end - i), mode);
            for (auto& st : reply_states) states.push_back(std::move(st));
            if (pending_data) {
                pending_data = false;
                if (!states.empty() && state_code(states.back()) == "354" && !in_body)
                    in_body = true;
                if (first_data_state && !m0_cut && states.size() > *first_data_state)
                    m0_cut = states.size();
            }
            i = end;
        }
    }

    result.scan = !any_message;

    if (mode == Mode::M0 && m0_cut && *m0_cut < states.size())
        states.resize(*m0_cut);

    states = collapse_repeats(std::move(states));
    return result;
}

std::vector<std::string> canonical_states(std::span<const DialectState> states) {
    std::vector<std::string> out;
    out.reserve(states.size());
    for (const auto& st : states) out.push_back(st.canonical());
    return out;
}

std::string canonical_serialization(std::span<const std::string> state_strings) {
    std::string out;
    for (size_t i = 0; i < state_strings.size(); ++i) {
        if (i) out += " | ";
        out += state_strings[i];
    }
    return out;
}

} // namespace dialektor
