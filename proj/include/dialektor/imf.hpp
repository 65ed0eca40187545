#pragma once

#include "dialektor/dialect.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dialektor {

/// Parsed message header block (RFC 5322 shape, tolerantly).
struct ImfHeader {
    std::vector<std::pair<std::string, std::string>> fields; // original order, name as written
    std::optional<std::string> mailer; // first User-Agent, else first X-Mailer
    size_t received_count = 0;
    size_t malformed_count = 0; // header lines skipped as unparsable

    std::optional<std::string> first(std::string_view name_ci) const;
};

/// Parses the header block from captured DATA body bytes. Dot-stuffed lines
/// are unstuffed first; folded values are unfolded. Total: garbage in, empty
/// header out.
ImfHeader parse_imf(std::string_view body_bytes);

enum class AlertKind { MailerMismatch, TraceSpoofServer, TraceSpoofClient };

std::string_view alert_kind_tag(AlertKind k);
std::optional<AlertKind> alert_kind_from_string(std::string_view tag);

struct Alert {
    AlertKind kind = AlertKind::MailerMismatch;
    std::string detail;

    bool operator==(const Alert&) const = default;
};

/// Dialect/IMF consistency rules. Given an Exact match the matched entry's
/// source_kind picks the rules: client-side kinds (MUA, Bot, Library) check
/// the mailer field and that no server trace was forged; MTA checks that a
/// trace exists. A missing mailer alerts only for MUA entries (bots and
/// libraries rarely set one). Without an Exact match the only checkable
/// claim is a mailer we cannot verify: present → MailerMismatch.
/// At most one alert per kind.
std::vector<Alert> check_consistency(const MatchResult& match, const ImfHeader& header);

/// Case-insensitive substring test of `mailer` against any of the patterns.
bool mailer_matches(const std::vector<std::string>& patterns, std::string_view mailer);

} // namespace dialektor
