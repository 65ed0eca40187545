#include "dialektor/cli.hpp"

#include "dialektor/analysis.hpp"
#include "dialektor/errors.hpp"
#include "dialektor/synth.hpp"
#include "dialektor/transcript.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace dialektor {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitKbError = 1;
constexpr int kExitInputError = 2;
constexpr int kExitKbConflict = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Mode parse_mode_flag(const std::string& text) {
    auto mode = mode_from_string(text);
    if (!mode) throw UsageError("invalid --mode '" + text + "' (expected m0, m1 or m2)");
    return *mode;
}

bool parse_bool_flag(const std::string& text, const std::string& flag) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw UsageError("invalid " + flag + " '" + text + "' (expected true or false)");
}

std::string default_kb_path(const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (const char* env = std::getenv("DIALEKTOR_KB"); env && *env) return env;
    throw UsageError("no knowledge base given: pass --kb or set DIALEKTOR_KB");
}

// derive/add may bootstrap a brand-new KB file; readers must not.
KnowledgeBase load_kb_or_empty(const std::string& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) return KnowledgeBase{};
    return KnowledgeBase::load(path);
}

std::vector<std::string> expand_input_paths(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const std::string& p : paths) {
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(p, ec)) {
                if (!entry.is_regular_file()) continue;
                std::string ext = entry.path().extension().string();
                if (ext == ".smtp" || ext == ".jsonl") found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

std::vector<Conversation> load_capture_file(const std::string& path) {
    if (fs::path(path).extension() == ".jsonl") return load_jsonl(path);
    return load_text(path);
}

std::vector<Conversation> load_corpus(const std::vector<std::string>& input_paths) {
    std::vector<std::string> files = expand_input_paths(input_paths);
    if (files.empty()) throw UsageError("no capture files found in the given inputs");
    std::vector<Conversation> corpus;
    std::unordered_set<std::string> ids;
    for (const std::string& f : files) {
        std::vector<Conversation> convs = load_capture_file(f);
        for (auto& c : convs) {
            if (!ids.insert(c.stream_id).second)
                throw ValidationError(f + ": duplicate stream_id across inputs: '" + c.stream_id +
                                      "'");
            corpus.push_back(std::move(c));
        }
    }
    if (corpus.empty()) throw UsageError("inputs contain no conversations");
    return corpus;
}

void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) out << content;
    else write_atomic(out_path, content);
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string kb_path;
    std::string mode = "m1";
    bool imf_ext = false;
    std::string universe_suspicious = "true";
    std::string out_path;
    std::string format = "table";
    std::string verdicts_path;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
    AnalysisOptions opts;
    opts.mode = parse_mode_flag(args.mode);
    opts.imf_ext = args.imf_ext;
    opts.universe_includes_suspicious =
        parse_bool_flag(args.universe_suspicious, "--universe-suspicious");
    if (args.format != "json" && args.format != "table")
        throw UsageError("invalid --format '" + args.format + "' (expected json or table)");

    KnowledgeBase kb = KnowledgeBase::load(default_kb_path(args.kb_path));
    std::vector<Conversation> corpus = load_corpus(args.inputs);

    std::vector<Verdict> verdicts = analyze_corpus(corpus, kb, opts);
    CorpusReport report = aggregate(verdicts, /*ground_truth_all_spam=*/true);
    report.imf_ext = opts.imf_ext;
    if (report.mode.empty()) report.mode = mode_tag(opts.mode);

    if (!args.verdicts_path.empty()) save_verdicts(verdicts, args.verdicts_path);
    emit(args.format == "json" ? report.to_json_string() : report.to_table(), args.out_path, out);
    return kExitOk;
}

// --- kb --------------------------------------------------------------------

std::string three_mode_stats_table(const KnowledgeBase& kb) {
    auto stats = kb.stats();
    auto get = [&](const char* mode) {
        auto it = stats.find(mode);
        return it == stats.end() ? KnowledgeBase::ModeStats{} : it->second;
    };
    KnowledgeBase::ModeStats m0 = get("M0"), m1 = get("M1"), m2 = get("M2");
    std::ostringstream os;
    auto row = [&](const std::string& label, size_t a, size_t b, size_t c) {
        os << label;
        for (size_t i = label.size(); i < 18; ++i) os << ' ';
        auto cell = [&](size_t v) {
            std::string s = std::to_string(v);
            for (size_t i = s.size(); i < 6; ++i) os << ' ';
            os << s;
        };
        cell(a);
        cell(b);
        cell(c);
        os << '\n';
    };
    os << "Operation mode        M0    M1    M2\n";
    row("Known benign", m0.benign, m1.benign, m2.benign);
    row("Known suspicious", m0.suspicious, m1.suspicious, m2.suspicious);
    row("Known malicious", m0.malicious, m1.malicious, m2.malicious);
    row("Total", m0.total(), m1.total(), m2.total());
    return os.str();
}

struct KbCommonArgs {
    std::string kb_path;
};

struct KbDeriveArgs {
    std::string input;
    std::string modes = "m0,m1,m2";
    std::string category;
    std::string name;
    std::string kind;
    std::vector<std::string> mailer_patterns;
    bool promote_unknown = false;
};

KbEntry build_entry(const KnowledgeBase&, Mode mode, const std::vector<std::string>& states,
                    const KbDeriveArgs& meta) {
    KbEntry e;
    e.mode = mode;
    auto cat = category_from_string(meta.category);
    if (!cat) throw UsageError("invalid --category '" + meta.category + "'");
    e.category = *cat;
    auto kind = source_kind_from_string(meta.kind);
    if (!kind) throw UsageError("invalid --kind '" + meta.kind + "' (MUA, MTA, Bot or Library)");
    e.source_kind = *kind;
    if (meta.name.empty()) throw UsageError("--name must not be empty");
    e.source_name = meta.name;
    e.mailer_patterns = meta.mailer_patterns;
    e.states = states;
    e.hash = hash_dialect(mode, states);
    return e;
}

int cmd_kb_list(const KbCommonArgs& args, std::ostream& out) {
    KnowledgeBase kb = KnowledgeBase::load(default_kb_path(args.kb_path));
    out << three_mode_stats_table(kb);
    return kExitOk;
}

int cmd_kb_derive(const KbCommonArgs& common, const KbDeriveArgs& args, std::ostream& out) {
    std::string kb_path = default_kb_path(common.kb_path);
    KnowledgeBase kb = load_kb_or_empty(kb_path);

    std::vector<Conversation> convs = load_capture_file(args.input);
    if (convs.size() != 1)
        throw ValidationError(args.input + ": derive expects exactly one conversation, got " +
                              std::to_string(convs.size()));

    std::vector<Mode> modes;
    std::stringstream ss(args.modes);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        modes.push_back(parse_mode_flag(part));
    }
    if (modes.empty()) throw UsageError("--modes names no modes");

    size_t added = 0;
    for (Mode mode : modes) {
        TokenizedConversation tok = tokenize_conversation(convs[0], mode);
        KbEntry e = build_entry(kb, mode, canonical_states(tok.states), args);
        kb.add(std::move(e), args.promote_unknown);
        ++added;
    }
    kb.save(kb_path);
    out << "added " << added << " entr" << (added == 1 ? "y" : "ies") << " for '" << args.name
        << "'\n";
    return kExitOk;
}

struct KbAddArgs {
    std::string verdicts_path;
    std::string stream_id;
    std::string category;
    std::string name;
    std::string kind;
    std::vector<std::string> mailer_patterns;
    bool promote_unknown = false;
};

int cmd_kb_add(const KbCommonArgs& common, const KbAddArgs& args, std::ostream& out) {
    std::string kb_path = default_kb_path(common.kb_path);
    KnowledgeBase kb = load_kb_or_empty(kb_path);

    std::vector<Verdict> verdicts = load_verdicts(args.verdicts_path);
    const Verdict* picked = nullptr;
    for (const Verdict& v : verdicts)
        if (v.stream_id == args.stream_id) {
            picked = &v;
            break;
        }
    if (!picked)
        throw ValidationError(args.verdicts_path + ": no verdict for stream_id '" +
                              args.stream_id + "'");
    if (picked->states.empty())
        throw ValidationError("verdict '" + args.stream_id + "' carries no states");

    KbDeriveArgs meta;
    meta.category = args.category;
    meta.name = args.name;
    meta.kind = args.kind;
    meta.mailer_patterns = args.mailer_patterns;
    KbEntry e = build_entry(kb, picked->mode, picked->states, meta);
    kb.add(std::move(e), args.promote_unknown);
    kb.save(kb_path);
    out << "added dialect of stream '" << args.stream_id << "' as '" << args.name << "'\n";
    return kExitOk;
}

// --- fingerprint -------------------------------------------------------------

struct FingerprintArgs {
    std::string verdicts_path;
    std::vector<std::string> inputs;
    std::string kb_path;
    std::string mode = "m1";
    std::string out_path;
    std::string format = "table";
};

int cmd_fingerprint(const FingerprintArgs& args, std::ostream& out) {
    if (args.format != "json" && args.format != "table")
        throw UsageError("invalid --format '" + args.format + "' (expected json or table)");

    std::vector<Verdict> verdicts;
    if (!args.verdicts_path.empty()) {
        verdicts = load_verdicts(args.verdicts_path);
    } else if (!args.inputs.empty()) {
        AnalysisOptions opts;
        opts.mode = parse_mode_flag(args.mode);
        KnowledgeBase kb = KnowledgeBase::load(default_kb_path(args.kb_path));
        verdicts = analyze_corpus(load_corpus(args.inputs), kb, opts);
    } else {
        throw UsageError("fingerprint needs --verdicts or capture inputs");
    }

    std::vector<BotRollup> rollup = fingerprint(verdicts);
    std::string content;
    if (args.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& b : rollup)
            arr.push_back({{"name", b.name},
                           {"messages", b.messages},
                           {"distinct_src_ips", b.distinct_ips}});
        content = arr.dump(2) + "\n";
    } else {
        std::ostringstream os;
        for (const auto& b : rollup)
            os << b.name << ' ' << b.messages << ' ' << b.distinct_ips << '\n';
        content = os.str();
    }
    emit(content, args.out_path, out);
    return kExitOk;
}

// --- fixtures ----------------------------------------------------------------

int cmd_fixtures(const std::string& out_dir, std::ostream& out) {
    if (out_dir.empty()) throw UsageError("--out-dir is required");
    fs::create_directories(out_dir);
    fs::path dir(out_dir);

    fixture_kb().save((dir / "kb.jsonl").string());

    std::vector<Conversation> corpus;
    for (const FixtureCase& fc : fixture_corpus()) corpus.push_back(fc.conv);
    save_text(corpus, (dir / "corpus.smtp").string());

    Conversation table2;
    table2.stream_id = "table2-reference";
    table2.segments = {
        {Direction::Server, "220 hostname\r\n"},
        {Direction::Client, "EHLO [127.0.0.1]\r\n"},
        {Direction::Server, "250 Ok\r\n"},
        {Direction::Client, "Mail FROM:<send@mail.pl>\r\n"},
        {Direction::Server, "250 2.1.0 Ok\r\n"},
        {Direction::Client, "Rcpt To: <recipient>\r\n"},
        {Direction::Server, "250 2.1.5 Ok\r\n"},
        {Direction::Client, "DATA\r\n"},
        {Direction::Server, "354 Ok\r\n"},
        {Direction::Client, "My test message.\r\n.\r\n"},
        {Direction::Server, "250 2.0.0 Ok\r\n"},
        {Direction::Client, "quit\r\n"},
        {Direction::Server, "221 2.0.0 Bye\r\n"},
    };
    save_text({table2}, (dir / "table2_reference.smtp").string());

    out << "fixtures written to " << out_dir << '\n';
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SMTP dialect fingerprinting toolkit"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    CLI::App* analyze = app.add_subcommand("analyze", "classify captured conversations");
    analyze->add_option("inputs", an.inputs, "capture files or directories")->required();
    analyze->add_option("--kb", an.kb_path, "knowledge base path (default: $DIALEKTOR_KB)");
    analyze->add_option("--mode", an.mode, "operation mode: m0, m1 or m2");
    analyze->add_flag("--imf-ext", an.imf_ext, "let IMF alerts flip matched conversations to spam");
    analyze->add_option("--universe-suspicious", an.universe_suspicious,
                        "count suspicious dialect states as legitimate (true/false)");
    analyze->add_option("--out", an.out_path, "report file (default: stdout)");
    analyze->add_option("--format", an.format, "report format: json or table");
    analyze->add_option("--verdicts", an.verdicts_path, "write per-conversation verdict JSONL");

    KbCommonArgs kbc;
    CLI::App* kb = app.add_subcommand("kb", "knowledge base management");
    kb->require_subcommand(1);
    kb->add_option("--kb", kbc.kb_path, "knowledge base path (default: $DIALEKTOR_KB)");

    CLI::App* kb_list = kb->add_subcommand("list", "per-mode dialect counts");

    KbDeriveArgs kbd;
    CLI::App* kb_derive =
        kb->add_subcommand("derive", "tokenize a reference capture into KB entries");
    kb_derive->add_option("--input", kbd.input, "capture file with exactly one conversation")
        ->required();
    kb_derive->add_option("--modes", kbd.modes, "comma-separated modes (default m0,m1,m2)");
    kb_derive->add_option("--category", kbd.category, "benign, suspicious or malicious")
        ->required();
    kb_derive->add_option("--name", kbd.name, "source name")->required();
    kb_derive->add_option("--kind", kbd.kind, "MUA, MTA, Bot or Library")->required();
    kb_derive->add_option("--mailer-pattern", kbd.mailer_patterns,
                          "expected mailer substring (repeatable)");
    kb_derive->add_flag("--promote-unknown", kbd.promote_unknown,
                        "allow malicious entries that are not Bot-sourced");

    KbAddArgs kba;
    CLI::App* kb_add = kb->add_subcommand("add", "promote an analyzed dialect into the KB");
    kb_add->add_option("--from-verdicts", kba.verdicts_path, "verdict JSONL from analyze")
        ->required();
    kb_add->add_option("--stream-id", kba.stream_id, "conversation whose dialect to add")
        ->required();
    kb_add->add_option("--category", kba.category, "benign, suspicious or malicious")->required();
    kb_add->add_option("--name", kba.name, "source name")->required();
    kb_add->add_option("--kind", kba.kind, "MUA, MTA, Bot or Library")->required();
    kb_add->add_option("--mailer-pattern", kba.mailer_patterns,
                       "expected mailer substring (repeatable)");
    kb_add->add_flag("--promote-unknown", kba.promote_unknown,
                     "allow malicious entries that are not Bot-sourced");

    FingerprintArgs fp;
    CLI::App* fingerprint_cmd = app.add_subcommand("fingerprint", "per-bot message/IP rollup");
    fingerprint_cmd->add_option("--verdicts", fp.verdicts_path, "verdict JSONL from analyze");
    fingerprint_cmd->add_option("inputs", fp.inputs, "capture files or directories");
    fingerprint_cmd->add_option("--kb", fp.kb_path, "knowledge base path (default: $DIALEKTOR_KB)");
    fingerprint_cmd->add_option("--mode", fp.mode, "operation mode when analyzing raw inputs");
    fingerprint_cmd->add_option("--out", fp.out_path, "output file (default: stdout)");
    fingerprint_cmd->add_option("--format", fp.format, "json or table");

    std::string fixtures_dir;
    CLI::App* fixtures_cmd = app.add_subcommand("fixtures", "write the shipped fixture corpus");
    fixtures_cmd->add_option("--out-dir", fixtures_dir, "target directory")->required();

    // CLI11's vector overload consumes arguments from the back.
    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream sink;
        int code = app.exit(e, out, sink);
        if (code == 0) return kExitOk; // --help and friends
        err << "usage error: " << (sink.str().empty() ? e.what() : sink.str());
        if (sink.str().empty()) err << '\n';
        return kExitUsage;
    }

    try {
        if (*analyze) return cmd_analyze(an, out);
        if (*kb_list) return cmd_kb_list(kbc, out);
        if (*kb_derive) return cmd_kb_derive(kbc, kbd, out);
        if (*kb_add) return cmd_kb_add(kbc, kba, out);
        if (*fingerprint_cmd) return cmd_fingerprint(fp, out);
        if (*fixtures_cmd) return cmd_fixtures(fixtures_dir, out);
        err << "usage error: no subcommand given\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const KbConflictError& e) {
        err << "kb conflict: " << e.what() << '\n';
        return kExitKbConflict;
    } catch (const KbError& e) {
        err << "kb error: " << e.what() << '\n';
        return kExitKbError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const ValidationError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const GenSpecError& e) {
        err << "generation error: " << e.what() << '\n';
        return kExitInputError;
    }
}

} // namespace dialektor
