// Acceptance gate: one criterion per [PASS]/[FAIL] line, nonzero exit on any
// failure. Time budgets are part of the pass condition where stated.

#include "dialektor/analysis.hpp"
#include "dialektor/dialect.hpp"
#include "dialektor/errors.hpp"
#include "dialektor/synth.hpp"
#include "dialektor/tokenizer.hpp"
#include "dialektor/transcript.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

using namespace dialektor;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(DIALEKTOR_FIXTURE_DIR) + "/" + name;
}

struct Check {
    std::vector<std::string> problems;
    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
};

int g_failures = 0;

template <typename Body>
void criterion(int n, const std::string& label, double budget_s, Body&& body) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("unexpected exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "over time budget: %.2fs > %.0fs", secs, budget_s);
        c.expect(false, buf);
    }
    bool pass = c.problems.empty();
    std::printf("[%s] criterion %d: %s (%.2fs)\n", pass ? "PASS" : "FAIL", n, label.c_str(), secs);
    for (const std::string& p : c.problems) std::printf("        - %s\n", p.c_str());
    if (!pass) ++g_failures;
}

const std::vector<std::string>& golden_states() {
    static const std::vector<std::string> g = {
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
    return g;
}

std::vector<std::string> states_of(const Conversation& conv, Mode mode) {
    return canonical_states(tokenize_conversation(conv, mode).states);
}

bool is_prefix(const std::vector<std::string>& pre, const std::vector<std::string>& full) {
    return pre.size() <= full.size() && std::equal(pre.begin(), pre.end(), full.begin());
}

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& full) {
    size_t i = 0;
    for (const std::string& s : full)
        if (i < sub.size() && sub[i] == s) ++i;
    return i == sub.size();
}

std::string join_states(const std::vector<std::string>& v) {
    return canonical_serialization(v);
}

// ---------------------------------------------------------------------------

void c1_golden_sequence(Check& c) {
    std::vector<Conversation> convs = load_text(fixture_path("table2_reference.smtp"));
    c.expect(convs.size() == 1, "reference capture holds one conversation");
    if (convs.empty()) return;

    auto m1 = states_of(convs[0], Mode::M1);
    c.expect(m1 == golden_states(), "M1 tokenization = the published 13-state sequence");
    if (m1 != golden_states()) {
        for (size_t i = 0; i < m1.size(); ++i) c.expect(false, "  got[" + std::to_string(i) + "] = " + m1[i]);
    }

    auto m0 = states_of(convs[0], Mode::M0);
    std::vector<std::string> prefix(golden_states().begin(), golden_states().begin() + 9);
    c.expect(m0 == prefix, "M0 tokenization = the prefix ending DATA/354");
}

void c2_roundtrip_oracle(Check& c) {
    KnowledgeBase kb = KnowledgeBase::load(fixture_path("kb.jsonl"));
    c.expect(!kb.entries().empty(), "fixture KB is non-empty");

    size_t runs = 0, failures = 0;
    std::string first_failure;
    for (const KbEntry& e : kb.entries()) {
        GenSpec spec;
        spec.entry = e;
        bool repeats = std::find(e.states.begin(), e.states.end(), "*repeat*") != e.states.end();
        spec.transaction_count = repeats ? 3 : 1;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            ++runs;
            if (states_of(generate(spec, seed), e.mode) != e.states) {
                ++failures;
                if (first_failure.empty())
                    first_failure = e.source_name + " (" + std::string(mode_tag(e.mode)) +
                                    ", seed " + std::to_string(seed) + ")";
            }
        }
    }
    c.expect(failures == 0, "all " + std::to_string(runs) +
                                " generate→tokenize round trips reproduce entry states" +
                                (failures ? "; first failure: " + first_failure : ""));
}

void c3_published_arithmetic(Check& c) {
    RawCounts rc;
    rc.unknown_samples = 95;
    rc.malicious_samples = 11459;
    rc.known_samples = 7899;
    rc.unknown_alerts = 87;
    rc.malicious_alerts = 6711;
    rc.known_alerts = 3792;
    CorpusReport rep = aggregate_counts(rc, /*ground_truth_all_spam=*/true);

    c.expect(rep.total == 19453, "non-scan total = 19453");
    auto near = [&](double got, double want, const std::string& what) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s: got %.3f, published %.1f (tolerance 0.1)",
                      what.c_str(), got, want);
        c.expect(std::fabs(got - want) <= 0.1 + 1e-9, buf);
    };
    near(rep.unknown.ratio_of_total, 0.5, "unknown ratio");
    near(rep.malicious.ratio_of_total, 58.9, "malicious ratio");
    near(rep.known.ratio_of_total, 40.6, "known ratio");
    near(rep.unknown.ratio_of_alerts, 91.6, "unknown alert ratio");
    near(rep.malicious.ratio_of_alerts, 58.6, "malicious alert ratio");
    near(rep.known.ratio_of_alerts, 48.0, "known alert ratio");
    c.expect(rep.tp_pct.has_value(), "classification block present");
    if (!rep.tp_pct) return;
    near(*rep.tp_pct, 59.4, "TP");
    near(*rep.fn_pct, 40.6, "FN");
    near(*rep.tp_pct_with_imf, 78.9, "TP with header extension");
    near(*rep.fn_pct_with_imf, 21.1, "FN with header extension");
}

void c4_botnet_rollup(Check& c) {
    KnowledgeBase kb = KnowledgeBase::load(fixture_path("kb.jsonl"));
    std::vector<Conversation> corpus = botnet_corpus(kb);

    AnalysisOptions opts;
    opts.mode = Mode::M1;
    std::vector<Verdict> verdicts = analyze_corpus(corpus, kb, opts);
    std::vector<BotRollup> rollup = fingerprint(verdicts);

    const std::vector<BotRollup> expected = {
        {"Vawtrak", 3872, 2},
        {"Kelihos", 2816, 627},
        {"Htbot", 879, 669},
        {"Zbot", 1, 1},
    };
    c.expect(rollup == expected, "rollup = Vawtrak(3872,2) Kelihos(2816,627) Htbot(879,669) Zbot(1,1)");
    if (rollup != expected)
        for (const auto& b : rollup)
            c.expect(false, "  got: " + b.name + " " + std::to_string(b.messages) + " " +
                                std::to_string(b.distinct_ips));

    std::set<std::string> rolled;
    for (const auto& b : rollup) rolled.insert(b.name);
    for (const std::string& quiet : {"Geodo/Feodo", "Sality", "Upatre"}) {
        bool in_kb = false;
        for (const KbEntry& e : kb.entries())
            if (e.mode == Mode::M1 && e.source_name == quiet && e.category == Category::Malicious)
                in_kb = true;
        c.expect(in_kb, quiet + " is a malicious dialect in the KB");
        c.expect(!rolled.count(quiet), quiet + " stays out of the rollup (never seen)");
    }
}

void c5_anomaly_discrimination(Check& c) {
    KnowledgeBase kb = KnowledgeBase::load(fixture_path("kb.jsonl"));
    std::vector<Conversation> corpus = load_text(fixture_path("corpus.smtp"));

    AnalysisOptions opts;
    opts.mode = Mode::M1;
    opts.imf_ext = true;
    std::map<std::string, Verdict> by_id;
    for (Verdict& v : analyze_corpus(corpus, kb, opts)) by_id[v.stream_id] = std::move(v);

    auto has = [&](const std::string& id) { return by_id.count(id) != 0; };
    for (const std::string& id : {"fx-a1", "fx-a2", "fx-b", "fx-c", "fx-d"})
        c.expect(has(id), "corpus carries conversation " + id);
    if (!has("fx-a1") || !has("fx-a2") || !has("fx-b") || !has("fx-c") || !has("fx-d")) return;

    // (a) campaign vs the client it impersonates
    const Verdict& bot = by_id["fx-a1"];
    const Verdict& genuine = by_id["fx-a2"];
    c.expect(!bot.hash.empty() && bot.hash != genuine.hash,
             "(a) campaign and impersonated client hash differently");
    c.expect(bot.category == VerdictCategory::Malicious, "(a) campaign classifies Malicious");
    bool mismatch = std::any_of(bot.alerts.begin(), bot.alerts.end(), [](const Alert& a) {
        return a.kind == AlertKind::MailerMismatch;
    });
    c.expect(mismatch, "(a) claimed mailer raises MailerMismatch");
    c.expect(genuine.category == VerdictCategory::Known && genuine.alerts.empty(),
             "(a) the genuine client stays Known and silent");

    // (b) LF-only terminators against a CRLF-only KB
    const Verdict& lf = by_id["fx-b"];
    c.expect(lf.category == VerdictCategory::Malicious, "(b) LF-only dialect classifies Malicious");
    c.expect(!lf.novel_states.empty(), "(b) novelty is surfaced as never-seen states");

    // (c) trailing space after QUIT
    const KbEntry* twin = nullptr;
    for (const KbEntry& e : kb.entries())
        if (e.mode == Mode::M1 && e.source_name == "Clawmails") twin = &e;
    c.expect(twin != nullptr, "(c) the space-free twin dialect is in the KB");
    if (twin)
        c.expect(by_id["fx-c"].hash != twin->hash,
                 "(c) QUIT-with-space hashes apart from its space-free twin");

    // (d) STARTTLS probe
    c.expect(by_id["fx-d"].category == VerdictCategory::Scan, "(d) STARTTLS probe yields Scan");
}

void c6_invariant_suite(Check& c) {
    KnowledgeBase kb = KnowledgeBase::load(fixture_path("kb.jsonl"));

    std::vector<Conversation> corpus;
    size_t id = 0;
    auto add_from = [&](Mode mode, std::uint64_t seeds) {
        for (const KbEntry& e : kb.entries()) {
            if (e.mode != mode) continue;
            bool repeats =
                std::find(e.states.begin(), e.states.end(), "*repeat*") != e.states.end();
            for (std::uint64_t s = 0; s < seeds; ++s) {
                GenSpec spec;
                spec.entry = e;
                spec.transaction_count = repeats ? 2 + s % 3 : 1;
                if (s % 4 == 0)
                    spec.imf = ImfSpec{.mailer = "Probe Agent 1.0",
                                       .use_x_mailer = s % 8 == 0,
                                       .received_count = s % 3};
                spec.stream_id = "prop-" + std::to_string(id);
                spec.src_ip = "198.51.100." + std::to_string(id % 250);
                corpus.push_back(generate(spec, 7000 + id));
                ++id;
            }
        }
    };
    add_from(Mode::M1, 18);
    add_from(Mode::M2, 12); // multi-line replies exercise the extension states
    c.expect(corpus.size() >= 1000,
             "generated corpus holds >= 1000 conversations (got " +
                 std::to_string(corpus.size()) + ")");

    size_t prefix_bad = 0, subseq_bad = 0;
    std::unordered_map<std::string, std::string> hash_of_serial, serial_of_hash;
    size_t nondet = 0, collisions = 0;
    for (const Conversation& conv : corpus) {
        auto s0 = states_of(conv, Mode::M0);
        auto s1 = states_of(conv, Mode::M1);
        auto s2 = states_of(conv, Mode::M2);
        if (!is_prefix(s0, s1)) ++prefix_bad;
        if (!is_subsequence(s1, s2)) ++subseq_bad;

        for (Mode m : {Mode::M0, Mode::M1, Mode::M2}) {
            const auto& s = (m == Mode::M0 ? s0 : m == Mode::M1 ? s1 : s2);
            if (s.empty()) continue;
            std::string key = std::string(mode_tag(m)) + "\n" + join_states(s);
            std::string h = hash_dialect(m, s);
            if (h != hash_dialect(m, s)) ++nondet;
            auto [it, fresh] = hash_of_serial.emplace(key, h);
            if (!fresh && it->second != h) ++nondet;
            auto [jt, fresh2] = serial_of_hash.emplace(h, key);
            if (!fresh2 && jt->second != key) ++collisions;
        }
    }
    c.expect(prefix_bad == 0, "shallow-mode states are a prefix of full-mode states (" +
                                  std::to_string(prefix_bad) + " violations)");
    c.expect(subseq_bad == 0, "full-mode states are a subsequence of extension-mode states (" +
                                  std::to_string(subseq_bad) + " violations)");
    c.expect(nondet == 0, "hashing is deterministic");
    c.expect(collisions == 0, "no hash collisions across distinct serializations");

    AnalysisOptions opts;
    opts.mode = Mode::M1;
    opts.imf_ext = true;
    std::vector<Verdict> verdicts = analyze_corpus(corpus, kb, opts);

    size_t known = 0, unknown = 0, malicious = 0, scan = 0;
    for (const Verdict& v : verdicts) {
        switch (v.category) {
            case VerdictCategory::Known: ++known; break;
            case VerdictCategory::Unknown: ++unknown; break;
            case VerdictCategory::Malicious: ++malicious; break;
            case VerdictCategory::Scan: ++scan; break;
        }
    }
    c.expect(known + unknown + malicious + scan == corpus.size(),
             "every verdict falls in exactly one category");

    CorpusReport rep = aggregate(verdicts);
    c.expect(rep.total + rep.scan_count == corpus.size(), "report partitions scans from the rest");
    c.expect(rep.unknown.samples + rep.malicious.samples + rep.known.samples == rep.total,
             "category samples sum to the non-scan total");
    c.expect(rep.tp_pct && rep.tp_pct_with_imf && *rep.tp_pct_with_imf >= *rep.tp_pct - 1e-9,
             "header extension never lowers the true-positive rate");

    std::string baseline_report = rep.to_json_string();
    std::vector<BotRollup> baseline_rollup = fingerprint(verdicts);
    std::mt19937_64 rng(42);
    for (int round = 0; round < 3; ++round) {
        std::shuffle(verdicts.begin(), verdicts.end(), rng);
        c.expect(aggregate(verdicts).to_json_string() == baseline_report,
                 "aggregation is permutation-invariant (round " + std::to_string(round) + ")");
        c.expect(fingerprint(verdicts) == baseline_rollup,
                 "fingerprinting is permutation-invariant (round " + std::to_string(round) + ")");
    }
}

void c7_totality_fuzz(Check& c) {
    KnowledgeBase kb = KnowledgeBase::load(fixture_path("kb.jsonl"));

    std::mt19937_64 rng(0xD1A7EC70ULL);
    auto byte = [&]() -> char {
        switch (rng() % 10) {
            case 0: case 1: case 2:                    // any byte at all
                return static_cast<char>(rng() % 256);
            case 3: case 4: case 5: case 6:            // printable-ish
                return static_cast<char>(' ' + rng() % 95);
            case 7: return "\r\n"[rng() % 2];          // terminator bytes
            case 8: return static_cast<char>('0' + rng() % 10);
            default: return ":<>. "[rng() % 5];
        }
    };

    size_t errors = 0;
    std::string first_error;
    size_t counts[4] = {0, 0, 0, 0};
    for (size_t i = 0; i < 10000; ++i) {
        Conversation conv;
        conv.stream_id = "fuzz-" + std::to_string(i);
        size_t nseg = 1 + rng() % 6;
        for (size_t s = 0; s < nseg; ++s) {
            Segment seg;
            seg.dir = (rng() % 2) ? Direction::Client : Direction::Server;
            size_t len = 1 + rng() % 200;
            seg.bytes.reserve(len);
            for (size_t b = 0; b < len; ++b) seg.bytes.push_back(byte());
            conv.segments.push_back(std::move(seg));
        }
        AnalysisOptions opts;
        opts.mode = static_cast<Mode>(i % 3);
        opts.imf_ext = i % 2 == 0;
        try {
            Verdict v = analyze_conversation(conv, kb, opts);
            ++counts[static_cast<size_t>(v.category)];
        } catch (const std::exception& e) {
            ++errors;
            if (first_error.empty())
                first_error = conv.stream_id + ": " + e.what();
        }
    }
    c.expect(errors == 0, "10000 random byte-stream conversations analyze without error" +
                              (errors ? "; first: " + first_error : ""));
    c.expect(counts[0] + counts[1] + counts[2] + counts[3] == 10000 - errors,
             "every fuzz verdict lands in the four-way partition");
}

} // namespace

int main() {
    criterion(1, "published 13-state golden sequence and its shallow-mode prefix", 1.0,
              c1_golden_sequence);
    criterion(2, "generate→tokenize round trip over every KB entry × 100 seeds", 30.0,
              c2_roundtrip_oracle);
    criterion(3, "published-table arithmetic reproduction (±0.1 pp)", 0.0,
              c3_published_arithmetic);
    criterion(4, "botnet fingerprint rollup on the shaped corpus", 0.0, c4_botnet_rollup);
    criterion(5, "anomaly discrimination: impersonation, terminators, QUIT space, scan", 0.0,
              c5_anomaly_discrimination);
    criterion(6, "invariant suite over >= 1000 generated conversations", 120.0,
              c6_invariant_suite);
    criterion(7, "totality fuzz: 10000 random byte streams", 120.0, c7_totality_fuzz);

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
