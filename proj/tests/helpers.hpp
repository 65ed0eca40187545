#pragma once

#include "dialektor/transcript.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dialektor::test {

inline Conversation make_conv(std::vector<std::pair<char, std::string>> segs,
                              std::string id = "t-0") {
    Conversation c;
    c.stream_id = std::move(id);
    for (auto& [d, bytes] : segs)
        c.segments.push_back({d == 'C' ? Direction::Client : Direction::Server, bytes});
    return c;
}

// The conversation behind the golden 13-state reference dialect.
inline Conversation reference_listing() {
    return make_conv({
        {'S', "220 hostname\r\n"},
        {'C', "EHLO [127.0.0.1]\r\n"},
        {'S', "250 Ok\r\n"},
        {'C', "Mail FROM:<send@mail.pl>\r\n"},
        {'S', "250 2.1.0 Ok\r\n"},
        {'C', "Rcpt To: <recipient>\r\n"},
        {'S', "250 2.1.5 Ok\r\n"},
        {'C', "DATA\r\n"},
        {'S', "354 Ok\r\n"},
        {'C', "My test message.\r\n.\r\n"},
        {'S', "250 2.0.0 Ok\r\n"},
        {'C', "quit\r\n"},
        {'S', "221 2.0.0 Bye\r\n"},
    });
}

inline const std::vector<std::string>& reference_states_m1() {
    static const std::vector<std::string> states = {
        "220",
        "EHLO space [ IPv4 ] <CR> <LF>",
        "250",
        "Mail space FROM : < email > <CR> <LF>",
        "250 2.1.0",
        "Rcpt space To : space < text > <CR> <LF>",
        "250 2.1.5",
        "DATA <CR> <LF>",
        "354",
        "message",
        "250 2.0.0",
        "quit <CR> <LF>",
        "221 2.0.0",
    };
    return states;
}

} // namespace dialektor::test
