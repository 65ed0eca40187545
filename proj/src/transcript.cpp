#include "dialektor/transcript.hpp"
#include "dialektor/errors.hpp"

#include "json.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace dialektor {

using nlohmann::json;

namespace {

constexpr std::string_view kB64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void check_unique_ids(const std::vector<Conversation>& convs, const std::string& origin) {
    std::unordered_set<std::string_view> seen;
    for (const auto& c : convs) {
        if (!seen.insert(c.stream_id).second)
            throw ValidationError(origin + ": duplicate stream_id \"" + c.stream_id + "\"");
    }
}

} // namespace

std::string base64_encode(std::string_view data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= data.size()) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8) |
                     static_cast<unsigned char>(data[i + 2]);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
        i += 3;
    }
    size_t rest = data.size() - i;
    if (rest == 1) {
        unsigned v = static_cast<unsigned char>(data[i]) << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view data) {
    static const std::array<int, 256> rev = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kB64Alphabet[i])] = i;
        return t;
    }();
    if (data.size() % 4 != 0) throw ParseError("invalid base64: length not a multiple of 4");
    std::string out;
    out.reserve(data.size() / 4 * 3);
    for (size_t i = 0; i < data.size(); i += 4) {
        int pad = 0;
        unsigned v = 0;
        for (size_t j = 0; j < 4; ++j) {
            char c = data[i + j];
            if (c == '=') {
                if (i + 4 != data.size() || j < 2) throw ParseError("invalid base64: misplaced padding");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0 || rev[static_cast<unsigned char>(c)] < 0)
                throw ParseError("invalid base64: bad character");
            v = (v << 6) | static_cast<unsigned>(rev[static_cast<unsigned char>(c)]);
        }
        out += static_cast<char>((v >> 16) & 0xFF);
        if (pad < 2) out += static_cast<char>((v >> 8) & 0xFF);
        if (pad < 1) out += static_cast<char>(v & 0xFF);
    }
    return out;
}

std::vector<Conversation> parse_jsonl(std::string_view text, const std::string& origin) {
    std::vector<Conversation> out;
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const std::string where = origin + ":" + std::to_string(lineno);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(where + ": malformed record: " + e.what());
        }
        if (!rec.is_object()) throw ParseError(where + ": record is not a JSON object");

        Conversation conv;
        if (!rec.contains("stream_id") || !rec["stream_id"].is_string())
            throw ParseError(where + ": missing or non-string \"stream_id\"");
        conv.stream_id = rec["stream_id"].get<std::string>();
        if (rec.contains("src_ip") && !rec["src_ip"].is_null()) {
            if (!rec["src_ip"].is_string()) throw ParseError(where + ": \"src_ip\" must be a string");
            conv.src_ip = rec["src_ip"].get<std::string>();
        }
        if (rec.contains("ts") && !rec["ts"].is_null()) {
            if (!rec["ts"].is_number_integer()) throw ParseError(where + ": \"ts\" must be an integer");
            conv.ts = rec["ts"].get<std::int64_t>();
        }
        if (!rec.contains("segments") || !rec["segments"].is_array())
            throw ParseError(where + ": missing or non-array \"segments\"");
        for (const auto& s : rec["segments"]) {
            if (!s.is_object() || !s.contains("dir") || !s.contains("b64"))
                throw ParseError(where + ": segment needs \"dir\" and \"b64\"");
            Segment seg;
            const std::string dir = s["dir"].get<std::string>();
            if (dir == "C") seg.dir = Direction::Client;
            else if (dir == "S") seg.dir = Direction::Server;
            else throw ParseError(where + ": segment dir must be \"C\" or \"S\"");
            try {
                seg.bytes = base64_decode(s["b64"].get<std::string>());
            } catch (const ParseError& e) {
                throw ParseError(where + ": " + e.what());
            }
            if (seg.bytes.empty()) throw ValidationError(where + ": segment bytes must be non-empty");
            conv.segments.push_back(std::move(seg));
        }
        out.push_back(std::move(conv));
    }
    check_unique_ids(out, origin);
    return out;
}

std::vector<Conversation> load_jsonl(const std::filesystem::path& path) {
    return parse_jsonl(read_file(path), path.string());
}

std::string to_jsonl(const std::vector<Conversation>& convs) {
    std::string out;
    for (const auto& c : convs) {
        json rec;
        rec["stream_id"] = c.stream_id;
        if (c.src_ip) rec["src_ip"] = *c.src_ip;
        if (c.ts) rec["ts"] = *c.ts;
        rec["segments"] = json::array();
        for (const auto& s : c.segments) {
            rec["segments"].push_back(
                {{"dir", s.dir == Direction::Client ? "C" : "S"}, {"b64", base64_encode(s.bytes)}});
        }
        out += rec.dump();
        out += '\n';
    }
    return out;
}

void save_jsonl(const std::vector<Conversation>& convs, const std::filesystem::path& path) {
    write_atomic(path, to_jsonl(convs));
}

namespace {

std::string decode_escapes(std::string_view payload, const std::string& where) {
    std::string out;
    out.reserve(payload.size());
    for (size_t i = 0; i < payload.size(); ++i) {
        char c = payload[i];
        if (c != '\\') {
            out += c;
            continue;
        }
        if (i + 1 >= payload.size()) throw ParseError(where + ": dangling backslash");
        char e = payload[++i];
        switch (e) {
            case 'r': out += '\r'; break;
            case 'n': out += '\n'; break;
            case '\\': out += '\\'; break;
            default: throw ParseError(where + ": bad escape \"\\" + std::string(1, e) + "\"");
        }
    }
    return out;
}

std::string encode_escapes(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    for (char c : bytes) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\r': out += "\\r"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::vector<Conversation> parse_text(std::string_view text, const std::string& origin) {
    std::vector<Conversation> out;
    Conversation cur;
    bool cur_has_content = false;
    size_t auto_index = 0;

    auto flush = [&] {
        if (!cur_has_content) return;
        ++auto_index;
        if (cur.stream_id.empty())
            cur.stream_id = origin + ":" + std::to_string(auto_index);
        out.push_back(std::move(cur));
        cur = Conversation{};
        cur_has_content = false;
    };

    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (line.ends_with('\r')) line.remove_suffix(1); // tolerate CRLF fixture files
        const std::string where = origin + ":" + std::to_string(lineno);

        if (line.empty() || line.front() == '#') continue;
        if (line == "---") {
            flush();
            continue;
        }
        if (line.starts_with("@meta ")) {
            std::string_view rest = line.substr(6);
            size_t sp = rest.find(' ');
            if (sp == std::string_view::npos) throw ParseError(where + ": @meta needs a key and a value");
            std::string_view key = rest.substr(0, sp);
            std::string value(rest.substr(sp + 1));
            if (key == "stream_id") cur.stream_id = value;
            else if (key == "src_ip") cur.src_ip = value;
            else if (key == "ts") {
                try {
                    cur.ts = std::stoll(value);
                } catch (...) {
                    throw ParseError(where + ": @meta ts must be an integer");
                }
            } else throw ParseError(where + ": unknown @meta key \"" + std::string(key) + "\"");
            cur_has_content = true;
            continue;
        }
        if (line.starts_with("C: ") || line.starts_with("S: ")) {
            Segment seg;
            seg.dir = line.front() == 'C' ? Direction::Client : Direction::Server;
            seg.bytes = decode_escapes(line.substr(3), where);
            if (seg.bytes.empty()) throw ParseError(where + ": segment bytes must be non-empty");
            cur.segments.push_back(std::move(seg));
            cur_has_content = true;
            continue;
        }
        throw ParseError(where + ": unknown line prefix");
    }
    flush();
    check_unique_ids(out, origin);
    return out;
}

std::vector<Conversation> load_text(const std::filesystem::path& path) {
    return parse_text(read_file(path), path.string());
}

std::string to_text(const std::vector<Conversation>& convs) {
    std::string out;
    bool first = true;
    for (const auto& c : convs) {
        if (!first) out += "---\n";
        first = false;
        out += "@meta stream_id " + c.stream_id + "\n";
        if (c.src_ip) out += "@meta src_ip " + *c.src_ip + "\n";
        if (c.ts) out += "@meta ts " + std::to_string(*c.ts) + "\n";
        for (const auto& s : c.segments) {
            out += s.dir == Direction::Client ? "C: " : "S: ";
            out += encode_escapes(s.bytes);
            out += '\n';
        }
    }
    return out;
}

void save_text(const std::vector<Conversation>& convs, const std::filesystem::path& path) {
    write_atomic(path, to_text(convs));
}

std::vector<Line> split_lines(const Conversation& conv) {
    std::vector<Line> out;
    size_t i = 0;
    while (i < conv.segments.size()) {
        const Direction dir = conv.segments[i].dir;
        std::string run;
        while (i < conv.segments.size() && conv.segments[i].dir == dir) {
            run += conv.segments[i].bytes;
            ++i;
        }
        size_t start = 0;
        while (start < run.size()) {
            size_t nl = run.find('\n', start);
            if (nl == std::string::npos) {
                out.push_back({dir, run.substr(start)}); // capture cut the line short
                break;
            }
            out.push_back({dir, run.substr(start, nl - start + 1)});
            start = nl + 1;
        }
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write file: " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace dialektor
