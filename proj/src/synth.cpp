#include "dialektor/synth.hpp"

#include "dialektor/errors.hpp"
#include "dialektor/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

namespace dialektor {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_punct_atom(std::string_view a) {
    return a.size() == 1 && std::string_view(":<>[](),;=-").find(a[0]) != std::string_view::npos;
}

bool is_param_atom(std::string_view a) {
    return a == "email" || a == "IPv4" || a == "domain" || a == "text";
}

} // namespace

std::vector<Token> parse_canonical_state(std::string_view state) {
    std::vector<std::string> atoms;
    size_t pos = 0;
    while (pos <= state.size()) {
        auto sp = state.find(' ', pos);
        std::string_view a = state.substr(pos, sp == std::string_view::npos ? sp : sp - pos);
        if (a.empty()) throw GenSpecError("malformed canonical state: '" + std::string(state) + "'");
        atoms.emplace_back(a);
        if (sp == std::string_view::npos) break;
        pos = sp + 1;
    }
    if (atoms.empty()) throw GenSpecError("empty canonical state");

    std::vector<Token> tokens;
    std::optional<std::string> term;
    size_t n = atoms.size();
    if (n >= 2 && atoms[n - 2] == "<CR>" && atoms[n - 1] == "<LF>") {
        term = "<CR> <LF>";
        n -= 2;
    } else if (atoms[n - 1] == "<LF>") {
        term = "<LF>";
        n -= 1;
    } else if (atoms[n - 1] == "<none>") {
        term = "<none>";
        n -= 1;
    }
    for (size_t i = 0; i < n; ++i) {
        const std::string& a = atoms[i];
        if (a == "space") tokens.push_back({TokenKind::Space, "space"});
        else if (is_punct_atom(a)) tokens.push_back({TokenKind::Punct, a});
        else if (is_param_atom(a)) tokens.push_back({TokenKind::Param, a});
        else if (a == "message") tokens.push_back({TokenKind::Message, "message"});
        else if (a == "*repeat*") tokens.push_back({TokenKind::Repeat, "*repeat*"});
        else if (a == "<CR>" || a == "<LF>" || a == "<none>")
            throw GenSpecError("terminator atom inside state: '" + std::string(state) + "'");
        else tokens.push_back({TokenKind::Word, a});
    }
    if (term) tokens.push_back({TokenKind::Terminator, *term});
    return tokens;
}

namespace {

enum class StateShape { ClientLine, ServerReply, MessageBody, RepeatMarker };

struct ParsedState {
    std::vector<Token> tokens;
    StateShape shape = StateShape::ClientLine;
};

ParsedState shape_state(const std::string& canonical) {
    ParsedState ps;
    ps.tokens = parse_canonical_state(canonical);
    if (ps.tokens.size() == 1 && ps.tokens[0].kind == TokenKind::Message)
        ps.shape = StateShape::MessageBody;
    else if (ps.tokens.size() == 1 && ps.tokens[0].kind == TokenKind::Repeat)
        ps.shape = StateShape::RepeatMarker;
    else if (ps.tokens.back().kind == TokenKind::Terminator)
        ps.shape = StateShape::ClientLine;
    else
        ps.shape = StateShape::ServerReply;
    return ps;
}

class ParamSource {
public:
    explicit ParamSource(std::uint64_t seed) : rng_(seed) {}

    std::string word(size_t min_len = 4, size_t max_len = 8) {
        for (;;) {
            size_t len = min_len + rng_() % (max_len - min_len + 1);
            std::string w;
            for (size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng_() % 26);
            // must stay a plain parameter, not collide with protocol keywords
            Token t = classify_word(w);
            if (t.kind == TokenKind::Param && t.text == "text") return w;
        }
    }

    std::string domain() { return word(3, 7) + "." + word(2, 4); }
    std::string email() { return word(4, 7) + "@" + domain(); }

    std::string ipv4() {
        std::ostringstream out;
        out << rng_() % 256 << '.' << rng_() % 256 << '.' << rng_() % 256 << '.' << rng_() % 256;
        return out.str();
    }

    std::string value_for(const std::string& param) {
        if (param == "email") return email();
        if (param == "IPv4") return ipv4();
        if (param == "domain") return domain();
        return word();
    }

private:
    std::mt19937_64 rng_;
};

std::string terminator_bytes(const std::string& canonical_term) {
    if (canonical_term == "<CR> <LF>") return "\r\n";
    if (canonical_term == "<LF>") return "\n";
    return "";
}

std::string render_client_line(const std::vector<Token>& tokens, ParamSource& params) {
    std::string line;
    for (const Token& t : tokens) {
        switch (t.kind) {
            case TokenKind::Word: line += t.text; break;
            case TokenKind::Space: line += ' '; break;
            case TokenKind::Punct: line += t.text; break;
            case TokenKind::Param: line += params.value_for(t.text); break;
            case TokenKind::Terminator: line += terminator_bytes(t.text); break;
            default:
                throw GenSpecError("client state contains a non-line token");
        }
    }
    return line;
}

bool is_reply_code_word(const Token& t) {
    return t.kind == TokenKind::Word && t.text.size() == 3 &&
           std::all_of(t.text.begin(), t.text.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

std::string render_server_line(const std::vector<Token>& tokens, ParamSource& params) {
    if (tokens.empty() || !is_reply_code_word(tokens[0]))
        throw GenSpecError("server state does not start with a reply code");
    std::string line = tokens[0].text;
    if (tokens.size() == 1) return line + "\r\n";
    if (tokens[1].kind == TokenKind::Punct && tokens[1].text == "-") {
        line += '-';
        for (size_t i = 2; i < tokens.size(); ++i) {
            const Token& t = tokens[i];
            switch (t.kind) {
                case TokenKind::Word: line += t.text; break;
                case TokenKind::Space: line += ' '; break;
                case TokenKind::Punct: line += t.text; break;
                case TokenKind::Param: line += params.value_for(t.text); break;
                default: throw GenSpecError("unrenderable continuation state");
            }
        }
        return line + "\r\n";
    }
    if (tokens.size() == 2 && tokens[1].kind == TokenKind::Word)
        return line + " " + tokens[1].text + "\r\n"; // enhanced status code
    throw GenSpecError("unrenderable server state");
}

std::string render_body(const ImfSpec& imf, const std::string& term, ParamSource& params) {
    std::string body;
    auto add = [&](const std::string& l) { body += l + term; };
    for (size_t i = 0; i < imf.received_count; ++i)
        add("Received: from " + params.domain() + " by mx.dlktr.test; Thu, 1 Jan 2015 00:0" +
            std::to_string(i % 10) + ":00 +0000");
    add("Date: Thu, 1 Jan 2015 00:00:00 +0000");
    add("From: <" + params.email() + ">");
    add("To: <" + params.email() + ">");
    if (imf.mailer) add((imf.use_x_mailer ? "X-Mailer: " : "User-Agent: ") + *imf.mailer);
    add("");
    add("This is a generated test message.");
    return body;
}

bool first_word_is_verb(const std::vector<Token>& tokens, std::string_view verb) {
    for (const Token& t : tokens) {
        if (t.kind == TokenKind::Space) continue;
        return t.kind == TokenKind::Word && lower(t.text) == verb;
    }
    return false;
}

} // namespace

Conversation generate(const GenSpec& spec, std::uint64_t seed) {
    if (spec.entry.states.empty()) throw GenSpecError("entry has no states to generate from");
    if (spec.transaction_count < 1) throw GenSpecError("transaction_count must be >= 1");

    std::vector<ParsedState> parsed;
    parsed.reserve(spec.entry.states.size());
    std::optional<size_t> repeat_idx;
    for (const std::string& s : spec.entry.states) {
        parsed.push_back(shape_state(s));
        if (parsed.back().shape == StateShape::RepeatMarker) {
            if (repeat_idx) throw GenSpecError("entry has more than one *repeat* state");
            repeat_idx = parsed.size() - 1;
        }
    }
    if (repeat_idx && spec.transaction_count < 2)
        throw GenSpecError("entry contains *repeat* but transaction_count is 1");

    // Locate the mail transaction span: first MAIL command through the server
    // reply right after the message.
    std::optional<size_t> span_start, span_end;
    if (repeat_idx || spec.transaction_count > 1) {
        size_t scan_limit = repeat_idx ? *repeat_idx : parsed.size();
        for (size_t i = 0; i < scan_limit; ++i) {
            if (parsed[i].shape == StateShape::ClientLine &&
                first_word_is_verb(parsed[i].tokens, "mail")) {
                span_start = i;
                break;
            }
        }
        if (span_start) {
            bool saw_message = false;
            for (size_t i = *span_start; i < scan_limit; ++i) {
                if (parsed[i].shape == StateShape::MessageBody) saw_message = true;
                else if (saw_message && parsed[i].shape == StateShape::ServerReply) {
                    span_end = i;
                    break;
                }
            }
        }
        if (!span_start || !span_end)
            throw GenSpecError("cannot replay transactions: no complete mail transaction in entry");
    }

    // Plan the rendered state sequence (indices into parsed).
    std::vector<size_t> plan;
    if (repeat_idx) {
        for (size_t i = 0; i <= *span_end; ++i) plan.push_back(i);
        for (size_t t = 1; t < spec.transaction_count; ++t) {
            for (size_t i = *span_end + 1; i < *repeat_idx; ++i) plan.push_back(i); // gap replay
            for (size_t i = *span_start; i <= *span_end; ++i) plan.push_back(i);
        }
        for (size_t i = *repeat_idx + 1; i < parsed.size(); ++i) plan.push_back(i);
    } else if (spec.transaction_count > 1) {
        for (size_t i = 0; i <= *span_end; ++i) plan.push_back(i);
        for (size_t t = 1; t < spec.transaction_count; ++t)
            for (size_t i = *span_start; i <= *span_end; ++i) plan.push_back(i);
        for (size_t i = *span_end + 1; i < parsed.size(); ++i) plan.push_back(i);
    } else {
        for (size_t i = 0; i < parsed.size(); ++i) plan.push_back(i);
    }

    ParamSource params(seed);
    ImfSpec imf = spec.imf.value_or(ImfSpec{});

    Conversation conv;
    conv.stream_id = spec.stream_id.empty() ? "gen-" + std::to_string(seed) : spec.stream_id;
    conv.src_ip = spec.src_ip;

    std::string last_client_term = "\r\n";
    std::string last_server_code;
    for (size_t idx : plan) {
        const ParsedState& ps = parsed[idx];
        switch (ps.shape) {
            case StateShape::ClientLine: {
                std::string line = render_client_line(ps.tokens, params);
                last_client_term = terminator_bytes(ps.tokens.back().text);
                if (last_client_term.empty()) last_client_term = "\r\n"; // body fallback
                conv.segments.push_back({Direction::Client, std::move(line)});
                break;
            }
            case StateShape::ServerReply: {
                std::string line = render_server_line(ps.tokens, params);
                last_server_code = line.substr(0, 3);
                conv.segments.push_back({Direction::Server, std::move(line)});
                break;
            }
            case StateShape::MessageBody: {
                if (last_server_code != "354")
                    throw GenSpecError("message state is not preceded by a 354 reply");
                std::string body = render_body(imf, last_client_term, params);
                body += "." + last_client_term;
                conv.segments.push_back({Direction::Client, std::move(body)});
                break;
            }
            case StateShape::RepeatMarker:
                throw GenSpecError("repeat marker left in render plan"); // unreachable
        }
    }
    return conv;
}

// ---------------------------------------------------------------------------
// Shipped client inventory and fixtures
// ---------------------------------------------------------------------------

namespace {

std::string fill_placeholders(std::string line) {
    auto replace_all = [&](std::string_view key, std::string_view value) {
        size_t pos;
        while ((pos = line.find(key)) != std::string::npos)
            line.replace(pos, key.size(), value);
    };
    replace_all("{domain}", "client.example.org");
    replace_all("{ip}", "198.51.100.23");
    replace_all("{email}", "sender@example.org");
    replace_all("{email2}", "user@example.net");
    replace_all("{word}", "recipient");
    replace_all("{n}", "20480");
    return line;
}

bool greets_with_ehlo(const ClientProfile& p) {
    return lower(p.greeting).starts_with("ehlo");
}

} // namespace

const std::vector<ClientProfile>& client_profiles() {
    using SK = SourceKind;
    using Cat = Category;
    static const std::vector<ClientProfile> profiles = [] {
        std::vector<ClientProfile> v;
        auto add = [&](ClientProfile p) { v.push_back(std::move(p)); };

        // Benign mail user agents.
        add({.name = "Mozilla Thunderbird", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"thunderbird"}, .greeting = "EHLO [{ip}]",
             .mail_line = "MAIL FROM:<{email}>", .rcpt_line = "RCPT TO:<{email2}>",
             .quit_line = "QUIT"});
        add({.name = "Microsoft Outlook", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"outlook"}, .greeting = "EHLO {domain}",
             .mail_line = "MAIL FROM: <{email}>", .rcpt_line = "RCPT TO: <{email2}>",
             .quit_line = "QUIT"});
        add({.name = "Clawmails", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"claws"}, .greeting = "EHLO {domain}",
             .mail_line = "MAIL FROM:<{email}>", .rcpt_line = "RCPT TO:<{email2}>",
             .quit_line = "QUIT"});
        add({.name = "Evolution", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"evolution"}, .greeting = "EHLO {domain}",
             .mail_line = "MAIL From:<{email}>", .rcpt_line = "RCPT To:<{email2}>",
             .quit_line = "QUIT"});
        add({.name = "Windows LiveMail", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"live mail"}, .greeting = "EHLO {domain}",
             .mail_line = "MAIL FROM: <{email}>", .rcpt_line = "RCPT TO: <{email2}>",
             .quit_line = "quit"});
        add({.name = "Opera Mail", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"opera"}, .greeting = "EHLO {domain}",
             .mail_line = "Mail FROM:<{email}>", .rcpt_line = "Rcpt TO:<{email2}>",
             .quit_line = "QUIT"});
        add({.name = "The Bat!", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"the bat"}, .greeting = "HELO {domain}",
             .mail_line = "MAIL FROM:<{email}>", .rcpt_line = "RCPT TO:<{email2}>",
             .quit_line = "QUIT"});
        add({.name = "Pegasus Mail", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"pegasus"}, .greeting = "HELO {domain}",
             .mail_line = "MAIL FROM: <{email}>", .rcpt_line = "RCPT TO: <{email2}>",
             .quit_line = "QUIT"});
        add({.name = "Apple Mail", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"apple mail", "iphone mail", "ipad mail", "ipod mail"},
             .greeting = "EHLO [{ip}]", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "quit"});
        add({.name = "iPhone/iPad Mail", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"iphone mail", "ipad mail"}, .greeting = "EHLO [{ip}]",
             .mail_line = "Mail FROM:<{email}>", .rcpt_line = "Rcpt To:<{email2}>",
             .quit_line = "quit"});
        add({.name = "PHPMailer", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"phpmailer"}, .greeting = "EHLO {domain}",
             .mail_line = "MAIL FROM:<{email}>", .rcpt_line = "RCPT TO:<{email2}>",
             .quit_line = "quit"});
        add({.name = "Google Android Mail Client", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"android"}, .greeting = "EHLO [{ip}]",
             .mail_line = "MAIL FROM:<{email}>", .rcpt_line = "RCPT TO:<{email2}>",
             .quit_line = "QUIT", .rset_before_quit = true});

        // Benign mail transfer agents (relay-side dialects).
        add({.name = "Postfix", .kind = SK::MTA, .category = Cat::Benign,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM:<{email}> SIZE={n} BODY=8BITMIME",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT"});
        add({.name = "Windows Exchange Server", .kind = SK::MTA, .category = Cat::Benign,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM: <{email}> SIZE={n}",
             .rcpt_line = "RCPT TO: <{email2}>", .quit_line = "QUIT"});
        add({.name = "Gmail", .kind = SK::MTA, .category = Cat::Benign,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM:<{email}> SIZE={n}",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT"});
        add({.name = "Zimbra", .kind = SK::MTA, .category = Cat::Benign,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT", .rset_before_quit = true});

        // Suspicious: generic SMTP client libraries.
        add({.name = "Python smtplib", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "ehlo {domain}", .mail_line = "mail FROM:<{email}>",
             .rcpt_line = "rcpt TO:<{email2}>", .data_line = "data", .quit_line = "quit"});
        add({.name = "C/C++ libcurl", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>"});
        add({.name = "C/C++ poco", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM: {email}",
             .rcpt_line = "RCPT TO: {email2}", .quit_line = "QUIT"});
        add({.name = "JavaMail", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT", .noop_before_quit = true});
        add({.name = "C# net.mail", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "HELO {domain}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "quit"});
        add({.name = "Perl NET::SMTP", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "HELO {domain}", .mail_line = "mail from:<{email}>",
             .rcpt_line = "rcpt to:<{email2}>", .data_line = "data", .quit_line = "quit"});
        add({.name = "AutoIt InetSmtMail", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "HELO {ip}", .mail_line = "MAIL FROM: <{email}>",
             .rcpt_line = "RCPT TO: <{email2}>", .quit_line = "QUIT"});
        add({.name = "Powershell Send-MailMessage", .kind = SK::Library,
             .category = Cat::Suspicious, .greeting = "EHLO {domain}",
             .mail_line = "MAIL FROM: <{email}>", .rcpt_line = "RCPT TO: <{email2}>"});
        add({.name = "VBA SMTP library", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "HELO {domain}", .mail_line = "MAIL FROM: <{email}>",
             .rcpt_line = "RCPT TO: <{email2}>", .quit_line = "quit"});

        // Malicious: bot families.
        add({.name = "Geodo/Feodo", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "HELO {ip}", .mail_line = "MAIL FROM: <{email}>",
             .rcpt_line = "RCPT TO: <{email2}>"});
        add({.name = "Htbot", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "EHLO {ip}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT"});
        add({.name = "Kelihos", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM :<{email}>",
             .rcpt_line = "RCPT TO :<{email2}>", .quit_line = "QUIT"});
        add({.name = "Sality", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "HELO {domain}", .mail_line = "MAIL FROM:{email}",
             .rcpt_line = "RCPT TO:{email2}"});
        add({.name = "Upatre", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "HELO {domain}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT",
             .rset_after_greeting = true});
        add({.name = "Vawtrak", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "HELO {ip}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT"});
        add({.name = "Zbot", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "HELO {domain}", .mail_line = "MAIL From: <{email}>",
             .rcpt_line = "RCPT To: <{email2}>", .quit_line = "quit"});

        // Extras beyond the base inventory.
        add({.name = "reference-client", .kind = SK::MUA, .category = Cat::Benign,
             .mailer_patterns = {"reference"}, .greeting = "EHLO [{ip}]",
             .mail_line = "Mail FROM:<{email}>", .rcpt_line = "Rcpt To: <{word}>",
             .quit_line = "quit"});
        add({.name = "eFax campaign", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "HELO {domain}", .mail_line = "MAIL FROM: <{email}>",
             .rcpt_line = "RCPT TO: <{email2}>"});
        add({.name = "unknown-quitspace", .kind = SK::Bot, .category = Cat::Malicious,
             .greeting = "EHLO {domain}", .mail_line = "MAIL FROM:<{email}>",
             .rcpt_line = "RCPT TO:<{email2}>", .quit_line = "QUIT "});
        add({.name = "Python smtplib bulk", .kind = SK::Library, .category = Cat::Suspicious,
             .greeting = "ehlo {domain}", .mail_line = "mail FROM:<{email}>",
             .rcpt_line = "rcpt TO:<{email2}>", .data_line = "data", .quit_line = "quit",
             .repeat_entry = true});
        return v;
    }();
    return profiles;
}

namespace {

void add_line(Conversation& conv, Direction dir, std::string text, const std::string& term) {
    conv.segments.push_back({dir, std::move(text) + term});
}

void add_transaction_lines(Conversation& conv, const ClientProfile& p) {
    const std::string crlf = "\r\n";
    add_line(conv, Direction::Client, fill_placeholders(p.mail_line), p.terminator);
    add_line(conv, Direction::Server, "250 2.1.0 Ok", crlf);
    add_line(conv, Direction::Client, fill_placeholders(p.rcpt_line), p.terminator);
    add_line(conv, Direction::Server, "250 2.1.5 Ok", crlf);
    add_line(conv, Direction::Client, fill_placeholders(p.data_line), p.terminator);
    add_line(conv, Direction::Server, "354 End data with <CR><LF>.<CR><LF>", crlf);
    std::string body;
    for (const char* l : {"Date: Thu, 1 Jan 2015 00:00:00 +0000", "From: <sender@example.org>",
                          "To: <user@example.net>", "", "Reference message body."})
        body += std::string(l) + p.terminator;
    body += "." + p.terminator;
    conv.segments.push_back({Direction::Client, std::move(body)});
    add_line(conv, Direction::Server, "250 2.0.0 Ok", crlf);
}

} // namespace

Conversation reference_conversation(const ClientProfile& p, size_t transaction_count) {
    const std::string crlf = "\r\n";
    Conversation conv;
    conv.stream_id = "ref-" + p.name;
    add_line(conv, Direction::Server, "220 mx.dlktr.test ESMTP ready", crlf);
    add_line(conv, Direction::Client, fill_placeholders(p.greeting), p.terminator);
    if (greets_with_ehlo(p)) {
        add_line(conv, Direction::Server,
                 "250-mx.dlktr.test\r\n250-PIPELINING\r\n250-SIZE 10240000\r\n250 8BITMIME", "");
    } else {
        add_line(conv, Direction::Server, "250 mx.dlktr.test", crlf);
    }
    if (p.rset_after_greeting) {
        add_line(conv, Direction::Client, "RSET", p.terminator);
        add_line(conv, Direction::Server, "250 2.0.0 Ok", crlf);
    }
    for (size_t t = 0; t < transaction_count; ++t) {
        if (t > 0) {
            add_line(conv, Direction::Client, p.data_line == "data" ? "rset" : "RSET",
                     p.terminator);
            add_line(conv, Direction::Server, "250 2.0.0 Ok", crlf);
        }
        add_transaction_lines(conv, p);
    }
    if (p.noop_before_quit) {
        add_line(conv, Direction::Client, "NOOP", p.terminator);
        add_line(conv, Direction::Server, "250 2.0.0 Ok", crlf);
    }
    if (p.rset_before_quit) {
        add_line(conv, Direction::Client, "RSET", p.terminator);
        add_line(conv, Direction::Server, "250 2.0.0 Ok", crlf);
    }
    if (!p.quit_line.empty()) {
        add_line(conv, Direction::Client, fill_placeholders(p.quit_line), p.terminator);
        add_line(conv, Direction::Server, "221 2.0.0 Bye", crlf);
    }
    return conv;
}

KnowledgeBase fixture_kb() {
    KnowledgeBase kb;
    for (Mode mode : {Mode::M0, Mode::M1, Mode::M2}) {
        for (const ClientProfile& p : client_profiles()) {
            Conversation conv = reference_conversation(p, p.repeat_entry ? 3 : 1);
            TokenizedConversation tok = tokenize_conversation(conv, mode);
            KbEntry e;
            e.mode = mode;
            e.category = p.category;
            e.source_name = p.name;
            e.source_kind = p.kind;
            e.mailer_patterns = p.mailer_patterns;
            e.states = canonical_states(tok.states);
            e.hash = hash_dialect(mode, e.states);
            if (kb.find(mode, e.hash)) continue; // shallower modes merge dialects; first wins
            kb.add(std::move(e), /*allow_unknown_promotion=*/true);
        }
    }
    return kb;
}

namespace {

const ClientProfile& profile_by_name(const std::string& name) {
    for (const ClientProfile& p : client_profiles())
        if (p.name == name) return p;
    throw GenSpecError("no such client profile: " + name);
}

const KbEntry& entry_by_name(const KnowledgeBase& kb, const std::string& name, Mode mode) {
    for (const KbEntry& e : kb.entries())
        if (e.source_name == name && e.mode == mode) return e;
    throw GenSpecError("no fixture KB entry for: " + name);
}

} // namespace

std::vector<FixtureCase> fixture_corpus() {
    KnowledgeBase kb = fixture_kb();
    std::vector<FixtureCase> cases;

    auto gen = [&](const std::string& name, const std::string& id, std::uint64_t seed,
                   std::optional<ImfSpec> imf, size_t txns = 1,
                   std::optional<std::string> ip = std::nullopt) {
        GenSpec spec;
        spec.entry = entry_by_name(kb, name, Mode::M1);
        spec.transaction_count = txns;
        spec.imf = std::move(imf);
        spec.stream_id = id;
        spec.src_ip = std::move(ip);
        return generate(spec, seed);
    };

    // (a) Campaign dialect vs the client it impersonates: same claimed
    // mailer, different hashes, only the campaign alerts.
    cases.push_back({"efax-campaign-claiming-iphone",
                     gen("eFax campaign", "fx-a1", 101,
                         ImfSpec{.mailer = "iPhone Mail (14E304)", .use_x_mailer = true},
                         1, "203.0.113.10"),
                     VerdictCategory::Malicious, "eFax campaign",
                     {AlertKind::MailerMismatch}});
    cases.push_back({"genuine-apple-iphone",
                     gen("Apple Mail", "fx-a2", 102,
                         ImfSpec{.mailer = "iPhone Mail (14E304)", .use_x_mailer = true},
                         1, "203.0.113.11"),
                     VerdictCategory::Known, "Apple Mail", {}});

    // (b) Bare-LF line terminators: a dialect shape no stored client has.
    {
        ClientProfile lf_bot{.name = "lf-terminator-bot", .kind = SourceKind::Bot,
                             .category = Category::Malicious, .greeting = "HELO {domain}",
                             .mail_line = "MAIL FROM:<{email}>",
                             .rcpt_line = "RCPT TO:<{email2}>", .terminator = "\n"};
        Conversation conv = reference_conversation(lf_bot);
        conv.stream_id = "fx-b";
        conv.src_ip = "203.0.113.12";
        cases.push_back({"lf-only-terminators", std::move(conv), VerdictCategory::Malicious,
                         std::nullopt, {}, /*expect_novel_states=*/true});
    }

    // (c) Trailing space after QUIT, stored as a promoted malicious dialect.
    cases.push_back({"quit-trailing-space",
                     gen("unknown-quitspace", "fx-c", 103, std::nullopt, 1, "203.0.113.13"),
                     VerdictCategory::Malicious, "unknown-quitspace", {}});

    // (d) Scan: probes STARTTLS support, never transfers a message.
    {
        Conversation conv;
        conv.stream_id = "fx-d";
        conv.src_ip = "203.0.113.14";
        conv.segments.push_back({Direction::Server, "220 mx.dlktr.test ESMTP ready\r\n"});
        conv.segments.push_back({Direction::Client, "EHLO scanner.example.org\r\n"});
        conv.segments.push_back(
            {Direction::Server,
             "250-mx.dlktr.test\r\n250-PIPELINING\r\n250-SIZE 10240000\r\n250 8BITMIME\r\n"});
        conv.segments.push_back({Direction::Client, "STARTTLS\r\n"});
        conv.segments.push_back({Direction::Server, "220 2.0.0 Ready to start TLS\r\n"});
        cases.push_back({"starttls-probe-scan", std::move(conv), VerdictCategory::Scan,
                         std::nullopt, {}});
    }

    // (e) Fully consistent benign session.
    cases.push_back({"thunderbird-consistent",
                     gen("Mozilla Thunderbird", "fx-e", 105,
                         ImfSpec{.mailer = "Mozilla Thunderbird 45.0"}, 1, "203.0.113.15"),
                     VerdictCategory::Known, "Mozilla Thunderbird", {}});

    // (f) Plain bot delivery.
    cases.push_back({"kelihos-delivery",
                     gen("Kelihos", "fx-f", 106, std::nullopt, 1, "203.0.113.16"),
                     VerdictCategory::Malicious, "Kelihos", {}});

    // (g) Known states, never-stored sequence: a Thunderbird-shaped session
    // with a NOOP inserted, claiming a mailer nobody can verify.
    {
        const ClientProfile& tb = profile_by_name("Mozilla Thunderbird");
        ClientProfile oddball = tb;
        oddball.name = "oddball";
        oddball.noop_before_quit = true;
        Conversation conv = reference_conversation(oddball);
        conv.stream_id = "fx-g";
        conv.src_ip = "203.0.113.17";
        // claim a mailer in the body: regenerate the body segment
        for (auto& seg : conv.segments) {
            if (seg.dir == Direction::Client && seg.bytes.find("Date:") != std::string::npos) {
                std::string body;
                for (const char* l :
                     {"Date: Thu, 1 Jan 2015 00:00:00 +0000", "From: <sender@example.org>",
                      "To: <user@example.net>", "User-Agent: Mozilla Thunderbird 45.0", "",
                      "Reference message body."})
                    body += std::string(l) + "\r\n";
                body += ".\r\n";
                seg.bytes = std::move(body);
            }
        }
        cases.push_back({"known-states-unknown-sequence", std::move(conv),
                         VerdictCategory::Unknown, std::nullopt,
                         {AlertKind::MailerMismatch}});
    }

    // (h) Relay dialect delivering with no Received trace.
    cases.push_back({"postfix-without-trace",
                     gen("Postfix", "fx-h", 108, ImfSpec{}, 1, "203.0.113.18"),
                     VerdictCategory::Known, "Postfix", {AlertKind::TraceSpoofClient}});

    // (i) Client dialect carrying a forged Received trace.
    cases.push_back({"thunderbird-forged-trace",
                     gen("Mozilla Thunderbird", "fx-i", 109,
                         ImfSpec{.mailer = "Mozilla Thunderbird 45.0", .received_count = 1}, 1,
                         "203.0.113.19"),
                     VerdictCategory::Known, "Mozilla Thunderbird",
                     {AlertKind::TraceSpoofServer}});

    // (j) Right dialect, wrong claimed client.
    cases.push_back({"thunderbird-claiming-outlook",
                     gen("Mozilla Thunderbird", "fx-j", 110,
                         ImfSpec{.mailer = "Microsoft Outlook 14.0", .use_x_mailer = true}, 1,
                         "203.0.113.20"),
                     VerdictCategory::Known, "Mozilla Thunderbird",
                     {AlertKind::MailerMismatch}});

    // (k) Bulk sender: repeated transactions collapse onto the stored
    // *repeat* dialect.
    cases.push_back({"smtplib-bulk-three-transactions",
                     gen("Python smtplib bulk", "fx-k", 111, std::nullopt, 3, "203.0.113.21"),
                     VerdictCategory::Known, "Python smtplib bulk", {}});

    // (l) Polite scan: greets and quits, no delivery attempt.
    {
        Conversation conv;
        conv.stream_id = "fx-l";
        conv.src_ip = "203.0.113.22";
        conv.segments.push_back({Direction::Server, "220 mx.dlktr.test ESMTP ready\r\n"});
        conv.segments.push_back({Direction::Client, "EHLO client.example.org\r\n"});
        conv.segments.push_back(
            {Direction::Server,
             "250-mx.dlktr.test\r\n250-PIPELINING\r\n250-SIZE 10240000\r\n250 8BITMIME\r\n"});
        conv.segments.push_back({Direction::Client, "QUIT\r\n"});
        conv.segments.push_back({Direction::Server, "221 2.0.0 Bye\r\n"});
        cases.push_back({"greet-and-quit-scan", std::move(conv), VerdictCategory::Scan,
                         std::nullopt, {}});
    }

    return cases;
}

std::vector<Conversation> botnet_corpus(const KnowledgeBase& kb) {
    struct BotShape {
        const char* name;
        size_t messages;
        size_t ips;
    };
    // Published per-bot rollup shape the fingerprint report is checked against.
    const BotShape shapes[] = {
        {"Vawtrak", 3872, 2}, {"Kelihos", 2816, 627}, {"Htbot", 879, 669}, {"Zbot", 1, 1}};

    std::vector<Conversation> corpus;
    size_t bot_index = 0;
    for (const BotShape& shape : shapes) {
        const KbEntry& entry = entry_by_name(kb, shape.name, Mode::M1);
        for (size_t i = 0; i < shape.messages; ++i) {
            size_t ip_slot = i % shape.ips;
            GenSpec spec;
            spec.entry = entry;
            spec.stream_id = std::string(shape.name) + "-" + std::to_string(i);
            spec.src_ip = "10." + std::to_string(bot_index) + "." + std::to_string(ip_slot / 250) +
                          "." + std::to_string(ip_slot % 250);
            corpus.push_back(generate(spec, 1000003ULL * bot_index + i));
        }
        ++bot_index;
    }
    return corpus;
}

} // namespace dialektor
