#include "dialektor/imf.hpp"

#include <algorithm>
#include <cctype>

namespace dialektor {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Field names are printable US-ASCII excluding colon (RFC 5322 ftext).
bool valid_field_name(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(),
                       [](unsigned char c) { return c >= 33 && c <= 126 && c != ':'; });
}

std::vector<std::string> split_body_lines(std::string_view body) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < body.size()) {
        auto nl = body.find('\n', pos);
        std::string_view raw =
            body.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        lines.emplace_back(raw);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return lines;
}

} // namespace

std::optional<std::string> ImfHeader::first(std::string_view name_ci) const {
    std::string want = lower(name_ci);
    for (const auto& [name, value] : fields)
        if (lower(name) == want) return value;
    return std::nullopt;
}

ImfHeader parse_imf(std::string_view body_bytes) {
    ImfHeader hdr;
    std::vector<std::string> lines = split_body_lines(body_bytes);

    for (auto& line : lines)
        if (line.starts_with("..")) line.erase(0, 1); // transparency unstuffing

    for (const std::string& line : lines) {
        if (line.empty()) break; // header/body separator
        if (line.front() == ' ' || line.front() == '\t') {
            // folded continuation: belongs to the previous field
            if (hdr.fields.empty()) {
                ++hdr.malformed_count;
            } else {
                hdr.fields.back().second += line;
            }
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos || !valid_field_name(std::string_view(line).substr(0, colon))) {
            ++hdr.malformed_count;
            continue;
        }
        std::string name = line.substr(0, colon);
        std::string value(trim(std::string_view(line).substr(colon + 1)));
        hdr.fields.emplace_back(std::move(name), std::move(value));
    }

    for (const auto& [name, value] : hdr.fields)
        if (lower(name) == "received") ++hdr.received_count;
    hdr.mailer = hdr.first("User-Agent");
    if (!hdr.mailer) hdr.mailer = hdr.first("X-Mailer");
    if (hdr.mailer) {
        std::string trimmed(trim(*hdr.mailer));
        hdr.mailer = std::move(trimmed);
    }
    return hdr;
}

std::string_view alert_kind_tag(AlertKind k) {
    switch (k) {
        case AlertKind::MailerMismatch: return "MailerMismatch";
        case AlertKind::TraceSpoofServer: return "TraceSpoofServer";
        case AlertKind::TraceSpoofClient: return "TraceSpoofClient";
    }
    return "MailerMismatch";
}

std::optional<AlertKind> alert_kind_from_string(std::string_view tag) {
    if (tag == "MailerMismatch") return AlertKind::MailerMismatch;
    if (tag == "TraceSpoofServer") return AlertKind::TraceSpoofServer;
    if (tag == "TraceSpoofClient") return AlertKind::TraceSpoofClient;
    return std::nullopt;
}

bool mailer_matches(const std::vector<std::string>& patterns, std::string_view mailer) {
    std::string hay = lower(mailer);
    for (const auto& p : patterns)
        if (!p.empty() && hay.find(lower(p)) != std::string::npos) return true;
    return false;
}

std::vector<Alert> check_consistency(const MatchResult& match, const ImfHeader& header) {
    std::vector<Alert> alerts;

    if (match.kind == MatchKind::Exact && match.entry) {
        const KbEntry& e = *match.entry;
        bool client_side = e.source_kind != SourceKind::MTA;
        if (client_side) {
            bool mismatch;
            if (e.source_kind == SourceKind::MUA) {
                mismatch = !header.mailer || !mailer_matches(e.mailer_patterns, *header.mailer);
            } else {
                mismatch = header.mailer && !mailer_matches(e.mailer_patterns, *header.mailer);
            }
            if (mismatch) {
                std::string detail = header.mailer
                                         ? "mailer '" + *header.mailer + "' does not fit dialect '" +
                                               e.source_name + "'"
                                         : "no mailer field despite MUA dialect '" + e.source_name +
                                               "'";
                alerts.push_back({AlertKind::MailerMismatch, std::move(detail)});
            }
            if (header.received_count > 0)
                alerts.push_back({AlertKind::TraceSpoofServer,
                                  "client dialect '" + e.source_name + "' forged " +
                                      std::to_string(header.received_count) +
                                      " Received trace(s)"});
        } else {
            if (header.received_count == 0)
                alerts.push_back({AlertKind::TraceSpoofClient,
                                  "relay dialect '" + e.source_name +
                                      "' delivered a message with no Received trace"});
        }
        return alerts;
    }

    // No entry to verify against: a claimed mailer is unverifiable.
    if (header.mailer)
        alerts.push_back({AlertKind::MailerMismatch,
                          "mailer '" + *header.mailer + "' claimed by an unrecognized dialect"});
    return alerts;
}

} // namespace dialektor
