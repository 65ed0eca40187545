#include "dialektor/errors.hpp"
#include "dialektor/transcript.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <filesystem>
#include <fstream>

using namespace dialektor;
using dialektor::test::make_conv;

TEST_CASE("base64 round trip, padding variants, binary bytes") {
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_decode("Zm9vYg==") == "foob");

    std::string raw;
    for (int i = 0; i < 256; ++i) raw += static_cast<char>(i);
    CHECK(base64_decode(base64_encode(raw)) == raw);
}

TEST_CASE("base64 rejects malformed input") {
    CHECK_THROWS_AS(base64_decode("abc"), ParseError);     // not a multiple of 4
    CHECK_THROWS_AS(base64_decode("ab!c"), ParseError);    // bad character
    CHECK_THROWS_AS(base64_decode("=abc"), ParseError);    // padding up front
    CHECK_THROWS_AS(base64_decode("ab==cdef"), ParseError); // padding mid-stream
}

TEST_CASE("jsonl round trip keeps bytes, ids and metadata") {
    Conversation c = make_conv({{'S', "220 x\r\n"}, {'C', "QUIT\r\n"}}, "s-1");
    c.src_ip = "203.0.113.9";
    c.ts = 1700000000;
    Conversation d = make_conv({{'C', std::string("\x00\xff\r\n", 4)}}, "s-2");

    std::string text = to_jsonl({c, d});
    auto back = parse_jsonl(text, "mem");
    REQUIRE(back.size() == 2);
    CHECK(back[0].stream_id == "s-1");
    CHECK(back[0].src_ip == "203.0.113.9");
    CHECK(back[0].ts == 1700000000);
    REQUIRE(back[0].segments.size() == 2);
    CHECK(back[0].segments[0].dir == Direction::Server);
    CHECK(back[0].segments[0].bytes == "220 x\r\n");
    CHECK(back[1].segments[0].bytes == std::string("\x00\xff\r\n", 4));
    CHECK_FALSE(back[1].src_ip.has_value());
}

TEST_CASE("jsonl parse errors carry file and line") {
    CHECK_THROWS_WITH_AS(parse_jsonl("{\"segments\":[]}\n", "f.jsonl"),
                         doctest::Contains("f.jsonl:1"), ParseError);
    CHECK_THROWS_AS(parse_jsonl("not json\n", "f.jsonl"), ParseError);
    CHECK_THROWS_AS(parse_jsonl("[1,2]\n", "f.jsonl"), ParseError);
    // second line bad: the error names line 2
    std::string two = to_jsonl({make_conv({{'C', "x\r\n"}}, "a")}) +
                      "{\"stream_id\":\"b\",\"segments\":[{\"dir\":\"X\",\"b64\":\"\"}]}\n";
    CHECK_THROWS_WITH_AS(parse_jsonl(two, "f.jsonl"), doctest::Contains("f.jsonl:2"), ParseError);
    // duplicate ids rejected
    std::string dup = to_jsonl({make_conv({{'C', "x\r\n"}}, "a"), make_conv({{'C', "y\r\n"}}, "a")});
    CHECK_THROWS_AS(parse_jsonl(dup, "f.jsonl"), ValidationError);
    // empty segment bytes rejected
    CHECK_THROWS_AS(
        parse_jsonl("{\"stream_id\":\"a\",\"segments\":[{\"dir\":\"C\",\"b64\":\"\"}]}\n", "f"),
        ValidationError);
}

TEST_CASE("text fixture format round trips with escapes") {
    Conversation c = make_conv({{'S', "220 x\r\n"}, {'C', "a\\b\r\n"}}, "fx-1");
    c.src_ip = "198.51.100.7";
    std::string text = to_text({c, make_conv({{'C', "HELO\n"}}, "fx-2")});
    auto back = parse_text(text, "mem");
    REQUIRE(back.size() == 2);
    CHECK(back[0].stream_id == "fx-1");
    CHECK(back[0].src_ip == "198.51.100.7");
    CHECK(back[0].segments[1].bytes == "a\\b\r\n");
    CHECK(back[1].segments[0].bytes == "HELO\n");
}

TEST_CASE("text fixture parsing: comments, blanks, meta, errors") {
    auto convs = parse_text("# comment\n\n@meta stream_id one\nC: EHLO x\\r\\n\nS: 250 ok\\r\\n\n",
                            "mem");
    REQUIRE(convs.size() == 1);
    CHECK(convs[0].stream_id == "one");
    CHECK(convs[0].segments[0].bytes == "EHLO x\r\n");

    // an id is synthesized when @meta stream_id is absent
    auto anon = parse_text("C: x\\r\\n\n---\nC: y\\r\\n\n", "corp.smtp");
    REQUIRE(anon.size() == 2);
    CHECK(anon[0].stream_id == "corp.smtp:1");
    CHECK(anon[1].stream_id == "corp.smtp:2");

    CHECK_THROWS_WITH_AS(parse_text("C: bad \\x esc\n", "m"), doctest::Contains("bad escape"),
                         ParseError);
    CHECK_THROWS_AS(parse_text("C: trailing\\\n", "m"), ParseError);
    CHECK_THROWS_AS(parse_text("X: nope\n", "m"), ParseError);
    CHECK_THROWS_AS(parse_text("@meta nosuch v\n", "m"), ParseError);
    CHECK_THROWS_AS(parse_text("@meta ts abc\n", "m"), ParseError);
    CHECK_THROWS_AS(parse_text("C: \n", "m"), ParseError); // empty segment
}

TEST_CASE("split_lines merges same-direction runs and keeps every byte") {
    Conversation c = make_conv({
        {'C', "MAIL FR"},
        {'C', "OM:<a@b.pl>\r\nRCPT"},
        {'C', " TO:<c@d.pl>\r\n"},
        {'S', "250 ok\r\n250 ok\r\n"},
        {'C', "DATA"}, // cut off by the capture
    });
    auto lines = split_lines(c);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0].bytes == "MAIL FROM:<a@b.pl>\r\n");
    CHECK(lines[1].bytes == "RCPT TO:<c@d.pl>\r\n");
    CHECK(lines[2].dir == Direction::Server);
    CHECK(lines[3].bytes == "250 ok\r\n");
    CHECK(lines[4].bytes == "DATA");
    CHECK(lines[4].unterminated());
    CHECK(lines[4].content() == "DATA");
    CHECK(lines[0].content() == "MAIL FROM:<a@b.pl>");

    std::string total;
    for (const auto& l : lines) total += l.bytes;
    std::string original;
    for (const auto& s : c.segments) original += s.bytes;
    CHECK(total == original);
}

TEST_CASE("file io: save and load both formats, atomic write") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "dlktr-transcript-test";
    fs::create_directories(dir);

    std::vector<Conversation> convs = {make_conv({{'S', "220 a\r\n"}, {'C', "QUIT\r\n"}}, "io-1")};
    save_jsonl(convs, dir / "c.jsonl");
    save_text(convs, dir / "c.smtp");
    CHECK(load_jsonl(dir / "c.jsonl") == std::vector<Conversation>{convs[0]});
    CHECK(load_text(dir / "c.smtp") == std::vector<Conversation>{convs[0]});
    CHECK_FALSE(fs::exists(dir / "c.jsonl.tmp"));

    CHECK_THROWS_AS(load_jsonl(dir / "missing.jsonl"), ParseError);
    fs::remove_all(dir);
}
