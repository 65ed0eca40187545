#include "dialektor/dialect.hpp"

#include "dialektor/errors.hpp"
#include "dialektor/transcript.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace dialektor {

using nlohmann::json;

std::string_view category_tag(Category c) {
    switch (c) {
        case Category::Benign: return "benign";
        case Category::Suspicious: return "suspicious";
        case Category::Malicious: return "malicious";
    }
    return "benign";
}

std::optional<Category> category_from_string(std::string_view tag) {
    if (tag == "benign") return Category::Benign;
    if (tag == "suspicious") return Category::Suspicious;
    if (tag == "malicious") return Category::Malicious;
    return std::nullopt;
}

std::string_view source_kind_tag(SourceKind k) {
    switch (k) {
        case SourceKind::MUA: return "MUA";
        case SourceKind::MTA: return "MTA";
        case SourceKind::Bot: return "Bot";
        case SourceKind::Library: return "Library";
    }
    return "MUA";
}

std::optional<SourceKind> source_kind_from_string(std::string_view tag) {
    if (tag == "MUA") return SourceKind::MUA;
    if (tag == "MTA") return SourceKind::MTA;
    if (tag == "Bot") return SourceKind::Bot;
    if (tag == "Library") return SourceKind::Library;
    return std::nullopt;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256: digest computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string hash_dialect(Mode mode, std::span<const std::string> state_strings) {
    if (state_strings.empty())
        throw ValidationError("hash_dialect: empty state list, nothing to fingerprint");
    std::string payload(mode_tag(mode));
    payload += '\n';
    payload += canonical_serialization(state_strings);
    return sha256_hex(payload);
}

namespace {

std::string entry_key(Mode mode, const std::string& hash) {
    std::string k(mode_tag(mode));
    k += ':';
    k += hash;
    return k;
}

bool valid_hash_format(const std::string& h) {
    return h.size() == 64 && std::all_of(h.begin(), h.end(), [](unsigned char c) {
               return std::isdigit(c) || (c >= 'a' && c <= 'f');
           });
}

void verify_entry(const KbEntry& e, const std::string& where) {
    if (!valid_hash_format(e.hash))
        throw KbError(where + ": hash is not 64 lowercase hex chars: '" + e.hash + "'");
    if (e.states.empty()) throw KbError(where + ": entry has no states");
    std::string recomputed = hash_dialect(e.mode, e.states);
    if (recomputed != e.hash)
        throw KbError(where + ": corrupt entry '" + e.source_name + "': stored hash " + e.hash +
                      " does not match recomputed " + recomputed);
    if (e.source_name.empty()) throw KbError(where + ": entry has empty source_name");
    if (e.category == Category::Malicious && e.source_kind != SourceKind::Bot &&
        !e.source_name.starts_with("unknown-"))
        throw KbError(where + ": malicious entry '" + e.source_name +
                      "' must be Bot-sourced or named 'unknown-*'");
}

KbEntry entry_from_json(const json& rec, const std::string& where) {
    KbEntry e;
    try {
        e.hash = rec.at("hash").get<std::string>();
        auto mode = mode_from_string(rec.at("mode").get<std::string>());
        if (!mode) throw KbError(where + ": bad mode '" + rec["mode"].get<std::string>() + "'");
        e.mode = *mode;
        auto cat = category_from_string(rec.at("category").get<std::string>());
        if (!cat)
            throw KbError(where + ": bad category '" + rec["category"].get<std::string>() + "'");
        e.category = *cat;
        e.source_name = rec.at("source_name").get<std::string>();
        auto kind = source_kind_from_string(rec.at("source_kind").get<std::string>());
        if (!kind)
            throw KbError(where + ": bad source_kind '" + rec["source_kind"].get<std::string>() +
                          "'");
        e.source_kind = *kind;
        e.mailer_patterns = rec.value("mailer_patterns", std::vector<std::string>{});
        e.states = rec.at("states").get<std::vector<std::string>>();
    } catch (const json::exception& ex) {
        throw KbError(where + ": " + ex.what());
    }
    return e;
}

json entry_to_json(const KbEntry& e) {
    return json{{"hash", e.hash},
                {"mode", std::string(mode_tag(e.mode))},
                {"category", std::string(category_tag(e.category))},
                {"source_name", e.source_name},
                {"source_kind", std::string(source_kind_tag(e.source_kind))},
                {"mailer_patterns", e.mailer_patterns},
                {"states", e.states}};
}

} // namespace

KnowledgeBase KnowledgeBase::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KbError("cannot open knowledge base: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

KnowledgeBase KnowledgeBase::parse(std::string_view text, const std::string& origin) {
    KnowledgeBase kb;
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            std::string where = origin + ":" + std::to_string(lineno);
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::exception& ex) {
                throw KbError(where + ": invalid JSON: " + ex.what());
            }
            KbEntry e = entry_from_json(rec, where);
            verify_entry(e, where);
            std::string key = entry_key(e.mode, e.hash);
            if (auto it = kb.by_key_.find(key); it != kb.by_key_.end())
                throw KbError(where + ": duplicate (hash, mode) already held by '" +
                              kb.entries_[it->second].source_name + "'");
            kb.entries_.push_back(std::move(e));
            kb.index_entry(kb.entries_.size() - 1);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return kb;
}

std::string KnowledgeBase::to_jsonl() const {
    std::vector<const KbEntry*> sorted;
    sorted.reserve(entries_.size());
    for (const auto& e : entries_) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const KbEntry* a, const KbEntry* b) {
        if (a->hash != b->hash) return a->hash < b->hash;
        return mode_tag(a->mode) < mode_tag(b->mode);
    });
    std::string out;
    for (const KbEntry* e : sorted) {
        out += entry_to_json(*e).dump();
        out += '\n';
    }
    return out;
}

void KnowledgeBase::save(const std::string& path) const { write_atomic(path, to_jsonl()); }

void KnowledgeBase::add(KbEntry entry, bool allow_unknown_promotion) {
    verify_entry(entry, "kb add");
    if (entry.category == Category::Malicious && entry.source_kind != SourceKind::Bot &&
        !allow_unknown_promotion)
        throw KbError("kb add: promoting a non-Bot dialect to malicious requires explicit "
                      "confirmation (source '" +
                      entry.source_name + "')");
    std::string key = entry_key(entry.mode, entry.hash);
    if (auto it = by_key_.find(key); it != by_key_.end())
        throw KbConflictError("knowledge base already has this dialect for mode " +
                                  std::string(mode_tag(entry.mode)) + " (source '" +
                                  entries_[it->second].source_name + "')",
                              entries_[it->second].source_name);
    entries_.push_back(std::move(entry));
    index_entry(entries_.size() - 1);
}

void KnowledgeBase::index_entry(size_t idx) {
    const KbEntry& e = entries_[idx];
    by_key_[entry_key(e.mode, e.hash)] = idx;
    std::string mode(mode_tag(e.mode));
    if (e.category == Category::Benign)
        for (const auto& s : e.states) benign_universe_[mode].insert(s);
    if (e.category == Category::Benign || e.category == Category::Suspicious)
        for (const auto& s : e.states) legit_universe_[mode].insert(s);
}

const KbEntry* KnowledgeBase::find(Mode mode, const std::string& hash) const {
    auto it = by_key_.find(entry_key(mode, hash));
    return it == by_key_.end() ? nullptr : &entries_[it->second];
}

bool KnowledgeBase::universe_contains(Mode mode, const std::string& state,
                                      bool include_suspicious) const {
    const auto& uni = include_suspicious ? legit_universe_ : benign_universe_;
    auto it = uni.find(std::string(mode_tag(mode)));
    return it != uni.end() && it->second.contains(state);
}

MatchResult KnowledgeBase::match(Mode mode, std::span<const std::string> state_strings,
                                 bool universe_includes_suspicious) const {
    MatchResult res;
    if (!state_strings.empty()) {
        std::string h = hash_dialect(mode, state_strings);
        if (const KbEntry* e = find(mode, h)) {
            res.kind = MatchKind::Exact;
            res.entry = e;
            return res;
        }
    }
    std::vector<std::string> novel;
    std::unordered_set<std::string> seen;
    for (const auto& s : state_strings) {
        if (!universe_contains(mode, s, universe_includes_suspicious) && seen.insert(s).second)
            novel.push_back(s);
    }
    if (novel.empty()) {
        res.kind = MatchKind::UnknownSequence;
    } else {
        res.kind = MatchKind::NovelStates;
        res.novel_states = std::move(novel);
    }
    return res;
}

std::map<std::string, KnowledgeBase::ModeStats> KnowledgeBase::stats() const {
    std::map<std::string, ModeStats> out;
    for (const auto& e : entries_) {
        ModeStats& st = out[std::string(mode_tag(e.mode))];
        switch (e.category) {
            case Category::Benign: ++st.benign; break;
            case Category::Suspicious: ++st.suspicious; break;
            case Category::Malicious: ++st.malicious; break;
        }
    }
    return out;
}

} // namespace dialektor
