#include "dialektor/classifier.hpp"

#include "dialektor/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace dialektor {

using nlohmann::json;

std::string_view verdict_category_tag(VerdictCategory c) {
    switch (c) {
        case VerdictCategory::Known: return "known";
        case VerdictCategory::Unknown: return "unknown";
        case VerdictCategory::Malicious: return "malicious";
        case VerdictCategory::Scan: return "scan";
    }
    return "known";
}

std::optional<VerdictCategory> verdict_category_from_string(std::string_view tag) {
    if (tag == "known") return VerdictCategory::Known;
    if (tag == "unknown") return VerdictCategory::Unknown;
    if (tag == "malicious") return VerdictCategory::Malicious;
    if (tag == "scan") return VerdictCategory::Scan;
    return std::nullopt;
}

Verdict classify(const MatchResult& match, bool scan, std::vector<Alert> alerts, bool imf_ext) {
    Verdict v;
    if (match.kind == MatchKind::Exact && match.entry) {
        v.matched_source = MatchedSource{match.entry->source_name, match.entry->source_kind,
                                         match.entry->category};
    }
    if (scan) {
        // nothing was delivered: no alerts to raise, no novelty worth learning
        v.category = VerdictCategory::Scan;
        v.treated_as_spam = false;
        return v;
    }
    v.novel_states = match.novel_states;
    v.alerts = std::move(alerts);

    if (match.kind == MatchKind::NovelStates ||
        (match.kind == MatchKind::Exact && match.entry &&
         match.entry->category == Category::Malicious)) {
        v.category = VerdictCategory::Malicious;
    } else if (match.kind == MatchKind::UnknownSequence) {
        v.category = VerdictCategory::Unknown;
    } else {
        v.category = VerdictCategory::Known;
    }

    v.treated_as_spam =
        v.category == VerdictCategory::Unknown || v.category == VerdictCategory::Malicious ||
        (v.category == VerdictCategory::Known && imf_ext && !v.alerts.empty());
    return v;
}

std::string format_pct(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

namespace {

double pct(std::uint64_t part, std::uint64_t whole) {
    if (whole == 0) return 0.0;
    return 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

CategoryRow make_row(std::uint64_t samples, std::uint64_t alerts, std::uint64_t total) {
    CategoryRow row;
    row.samples = samples;
    row.ratio_of_total = round1(pct(samples, total));
    row.imf_inconsistency = alerts;
    row.ratio_of_alerts = round1(pct(alerts, samples));
    return row;
}

} // namespace

CorpusReport aggregate_counts(const RawCounts& c, bool ground_truth_all_spam) {
    CorpusReport rep;
    rep.total = c.unknown_samples + c.malicious_samples + c.known_samples;
    rep.scan_count = c.scan_count;
    rep.unknown = make_row(c.unknown_samples, c.unknown_alerts, rep.total);
    rep.malicious = make_row(c.malicious_samples, c.malicious_alerts, rep.total);
    rep.known = make_row(c.known_samples, c.known_alerts, rep.total);

    if (ground_truth_all_spam) {
        std::uint64_t spam = c.unknown_samples + c.malicious_samples;
        std::uint64_t flips = std::min(c.known_flips.value_or(c.known_alerts), c.known_samples);
        rep.tp_pct = round1(pct(spam, rep.total));
        rep.fn_pct = round1(pct(rep.total - spam, rep.total));
        rep.tp_pct_with_imf = round1(pct(spam + flips, rep.total));
        rep.fn_pct_with_imf = round1(pct(rep.total - spam - flips, rep.total));
    }
    return rep;
}

CorpusReport aggregate(std::span<const Verdict> verdicts, bool ground_truth_all_spam) {
    RawCounts c;
    std::optional<Mode> mode;
    for (const Verdict& v : verdicts) {
        if (!mode) {
            mode = v.mode;
        } else if (*mode != v.mode) {
            throw ValidationError("aggregate: verdicts mix modes " +
                                  std::string(mode_tag(*mode)) + " and " +
                                  std::string(mode_tag(v.mode)));
        }
        bool alerted = !v.alerts.empty();
        switch (v.category) {
            case VerdictCategory::Scan: ++c.scan_count; break;
            case VerdictCategory::Unknown:
                ++c.unknown_samples;
                if (alerted) ++c.unknown_alerts;
                break;
            case VerdictCategory::Malicious:
                ++c.malicious_samples;
                if (alerted) ++c.malicious_alerts;
                break;
            case VerdictCategory::Known:
                ++c.known_samples;
                if (alerted) ++c.known_alerts;
                break;
        }
    }
    CorpusReport rep = aggregate_counts(c, ground_truth_all_spam);
    if (mode) rep.mode = std::string(mode_tag(*mode));
    rep.fingerprints = fingerprint(verdicts);
    return rep;
}

std::vector<BotRollup> fingerprint(std::span<const Verdict> verdicts) {
    std::map<std::string, std::pair<std::uint64_t, std::set<std::string>>> by_bot;
    for (const Verdict& v : verdicts) {
        if (v.category != VerdictCategory::Malicious) continue;
        if (!v.matched_source || v.matched_source->kind != SourceKind::Bot) continue;
        auto& [count, ips] = by_bot[v.matched_source->name];
        ++count;
        if (v.src_ip) ips.insert(*v.src_ip);
    }
    std::vector<BotRollup> out;
    out.reserve(by_bot.size());
    for (auto& [name, data] : by_bot)
        out.push_back({name, data.first, static_cast<std::uint64_t>(data.second.size())});
    std::sort(out.begin(), out.end(), [](const BotRollup& a, const BotRollup& b) {
        if (a.messages != b.messages) return a.messages > b.messages;
        return a.name < b.name;
    });
    return out;
}

namespace {

json row_to_json(const CategoryRow& row) {
    return json{{"samples", row.samples},
                {"ratio_of_total_pct", row.ratio_of_total},
                {"imf_inconsistency", row.imf_inconsistency},
                {"ratio_of_alerts_pct", row.ratio_of_alerts}};
}

} // namespace

std::string CorpusReport::to_json_string() const {
    json j{{"mode", mode},
           {"imf_ext", imf_ext},
           {"total", total},
           {"scan_count", scan_count},
           {"categories",
            json{{"unknown", row_to_json(unknown)},
                 {"malicious", row_to_json(malicious)},
                 {"known", row_to_json(known)}}}};
    if (tp_pct) {
        j["classification"] = json{{"tp_pct", *tp_pct},
                                   {"fn_pct", *fn_pct},
                                   {"tp_pct_with_imf", *tp_pct_with_imf},
                                   {"fn_pct_with_imf", *fn_pct_with_imf}};
    }
    json bots = json::array();
    for (const auto& b : fingerprints)
        bots.push_back(json{{"name", b.name}, {"messages", b.messages},
                            {"distinct_src_ips", b.distinct_ips}});
    j["fingerprints"] = bots;
    return j.dump(2) + "\n";
}

std::string CorpusReport::to_table() const {
    std::ostringstream out;
    auto line = [&](const std::string& label, const std::string& value) {
        out << "  " << label;
        for (size_t i = label.size(); i < 28; ++i) out << ' ';
        out << value << '\n';
    };
    out << "Corpus report (" << (mode.empty() ? "-" : mode) << ", IMF ext. "
        << (imf_ext ? "on" : "off") << ")\n";
    out << "  Conversations: " << (total + scan_count) << " (" << scan_count
        << " scans excluded)\n\n";
    auto row = [&](const std::string& name, const CategoryRow& r) {
        out << name << '\n';
        line("Number of samples", std::to_string(r.samples));
        line("Ratio of samples (%)", format_pct(r.ratio_of_total));
        line("IMF inconsistency", std::to_string(r.imf_inconsistency));
        line("Ratio of alerts (%)", format_pct(r.ratio_of_alerts));
    };
    row("UNKNOWN", unknown);
    row("MALICIOUS", malicious);
    row("KNOWN", known);
    if (tp_pct) {
        out << "CLASSIFICATION\n";
        line("TP (%)", format_pct(*tp_pct));
        line("FN (%)", format_pct(*fn_pct));
        line("TP with IMF ext. (%)", format_pct(*tp_pct_with_imf));
        line("FN with IMF ext. (%)", format_pct(*fn_pct_with_imf));
    }
    if (!fingerprints.empty()) {
        out << "FINGERPRINTS\n";
        for (const auto& b : fingerprints)
            line(b.name, std::to_string(b.messages) + " messages, " +
                             std::to_string(b.distinct_ips) + " IP addr.");
    }
    return out.str();
}

} // namespace dialektor
