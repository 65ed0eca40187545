#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialektor {

enum class Direction { Client, Server };

/// One captured chunk of one side of the TCP stream. Bytes are verbatim wire
/// octets, line terminators included; this layer never normalizes them.
struct Segment {
    Direction dir = Direction::Client;
    std::string bytes;

    bool operator==(const Segment&) const = default;
};

struct Conversation {
    std::string stream_id;
    std::optional<std::string> src_ip;
    std::optional<std::int64_t> ts; // UTC seconds
    std::vector<Segment> segments;

    bool operator==(const Conversation&) const = default;
};

/// A protocol line re-framed out of the segment stream. `bytes` keeps the
/// terminator (CRLF or bare LF); a line cut off by the capture has none.
struct Line {
    Direction dir = Direction::Client;
    std::string bytes;

    bool unterminated() const { return bytes.empty() || bytes.back() != '\n'; }

    /// Line without its terminator bytes.
    std::string_view content() const {
        std::string_view v(bytes);
        if (v.ends_with("\r\n")) return v.substr(0, v.size() - 2);
        if (v.ends_with("\n")) return v.substr(0, v.size() - 1);
        return v;
    }
};

// JSONL capture format, one conversation per line:
//   {"stream_id": str, "src_ip": str?, "ts": int?,
//    "segments": [{"dir": "C"|"S", "b64": base64-of-raw-bytes}, ...]}
// Unknown keys are ignored.
std::vector<Conversation> load_jsonl(const std::filesystem::path& path);
std::vector<Conversation> parse_jsonl(std::string_view text, const std::string& origin);
void save_jsonl(const std::vector<Conversation>& convs, const std::filesystem::path& path);
std::string to_jsonl(const std::vector<Conversation>& convs);

// `.smtp` human-editable fixture format: `@meta key value` lines,
// `C: `/`S: ` segment lines with \r \n \\ escapes, `---` separators.
std::vector<Conversation> load_text(const std::filesystem::path& path);
std::vector<Conversation> parse_text(std::string_view text, const std::string& origin);
void save_text(const std::vector<Conversation>& convs, const std::filesystem::path& path);
std::string to_text(const std::vector<Conversation>& convs);

/// Merge consecutive same-direction segments, then split on LF boundaries.
/// Total: never drops or duplicates a byte.
std::vector<Line> split_lines(const Conversation& conv);

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view data); // throws ParseError

/// Write-then-rename so readers never observe a half-written file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace dialektor
