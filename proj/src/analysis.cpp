#include "dialektor/analysis.hpp"

#include "dialektor/errors.hpp"
#include "dialektor/imf.hpp"
#include "dialektor/tokenizer.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace dialektor {

using nlohmann::json;

Verdict analyze_conversation(const Conversation& conv, const KnowledgeBase& kb,
                             const AnalysisOptions& opts) {
    TokenizedConversation tok = tokenize_conversation(conv, opts.mode);
    std::vector<std::string> states = canonical_states(tok.states);

    MatchResult match = kb.match(opts.mode, states, opts.universe_includes_suspicious);

    std::vector<Alert> alerts;
    if (tok.message_body) alerts = check_consistency(match, parse_imf(*tok.message_body));

    Verdict v = classify(match, tok.scan, std::move(alerts), opts.imf_ext);
    v.stream_id = conv.stream_id;
    v.mode = opts.mode;
    v.src_ip = conv.src_ip;
    v.states = std::move(states);
    if (!v.states.empty()) v.hash = hash_dialect(opts.mode, v.states);
    return v;
}

std::vector<Verdict> analyze_corpus_serial(std::span<const Conversation> corpus,
                                           const KnowledgeBase& kb, const AnalysisOptions& opts) {
    std::vector<Verdict> out(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) out[i] = analyze_conversation(corpus[i], kb, opts);
    return out;
}

std::vector<Verdict> analyze_corpus(std::span<const Conversation> corpus, const KnowledgeBase& kb,
                                    const AnalysisOptions& opts) {
    std::vector<Verdict> out(corpus.size());
    const std::int64_t n = static_cast<std::int64_t>(corpus.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<size_t>(i)] = analyze_conversation(corpus[static_cast<size_t>(i)], kb, opts);
    return out;
}

namespace {

json verdict_to_json(const Verdict& v) {
    json j{{"stream_id", v.stream_id},
           {"mode", std::string(mode_tag(v.mode))},
           {"category", std::string(verdict_category_tag(v.category))},
           {"treated_as_spam", v.treated_as_spam},
           {"hash", v.hash},
           {"states", v.states}};
    if (v.matched_source) {
        j["matched_source"] =
            json{{"name", v.matched_source->name},
                 {"kind", std::string(source_kind_tag(v.matched_source->kind))},
                 {"kb_category", std::string(category_tag(v.matched_source->kb_category))}};
    } else {
        j["matched_source"] = nullptr;
    }
    json alerts = json::array();
    for (const Alert& a : v.alerts)
        alerts.push_back(json{{"kind", std::string(alert_kind_tag(a.kind))}, {"detail", a.detail}});
    j["alerts"] = alerts;
    if (!v.novel_states.empty()) j["novel_states"] = v.novel_states;
    if (v.src_ip) j["src_ip"] = *v.src_ip;
    return j;
}

Verdict verdict_from_json(const json& j, const std::string& where) {
    Verdict v;
    try {
        v.stream_id = j.at("stream_id").get<std::string>();
        auto mode = mode_from_string(j.at("mode").get<std::string>());
        if (!mode) throw ParseError(where + ": bad mode");
        v.mode = *mode;
        auto cat = verdict_category_from_string(j.at("category").get<std::string>());
        if (!cat) throw ParseError(where + ": bad category '" +
                                   j["category"].get<std::string>() + "'");
        v.category = *cat;
        v.treated_as_spam = j.at("treated_as_spam").get<bool>();
        v.hash = j.value("hash", std::string{});
        v.states = j.value("states", std::vector<std::string>{});
        if (j.contains("matched_source") && !j["matched_source"].is_null()) {
            const json& ms = j["matched_source"];
            MatchedSource src;
            src.name = ms.at("name").get<std::string>();
            auto kind = source_kind_from_string(ms.at("kind").get<std::string>());
            if (!kind) throw ParseError(where + ": bad matched_source.kind");
            src.kind = *kind;
            auto kc = category_from_string(ms.at("kb_category").get<std::string>());
            if (!kc) throw ParseError(where + ": bad matched_source.kb_category");
            src.kb_category = *kc;
            v.matched_source = std::move(src);
        }
        for (const json& a : j.value("alerts", json::array())) {
            auto kind = alert_kind_from_string(a.at("kind").get<std::string>());
            if (!kind) throw ParseError(where + ": bad alert kind");
            v.alerts.push_back({*kind, a.value("detail", std::string{})});
        }
        v.novel_states = j.value("novel_states", std::vector<std::string>{});
        if (j.contains("src_ip") && !j["src_ip"].is_null())
            v.src_ip = j["src_ip"].get<std::string>();
    } catch (const json::exception& ex) {
        throw ParseError(where + ": " + ex.what());
    }
    return v;
}

} // namespace

std::string verdicts_to_jsonl(std::span<const Verdict> verdicts) {
    std::string out;
    for (const Verdict& v : verdicts) {
        out += verdict_to_json(v).dump();
        out += '\n';
    }
    return out;
}

std::vector<Verdict> parse_verdicts_jsonl(std::string_view text, const std::string& origin) {
    std::vector<Verdict> out;
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            std::string where = origin + ":" + std::to_string(lineno);
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::exception& ex) {
                throw ParseError(where + ": invalid JSON: " + ex.what());
            }
            out.push_back(verdict_from_json(rec, where));
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

void save_verdicts(std::span<const Verdict> verdicts, const std::string& path) {
    write_atomic(path, verdicts_to_jsonl(verdicts));
}

std::vector<Verdict> load_verdicts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open verdict file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_verdicts_jsonl(buf.str(), path);
}

} // namespace dialektor
