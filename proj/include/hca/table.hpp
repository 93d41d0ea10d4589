#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hca {

enum class CellState : std::uint8_t { W, Y, B, R, M, V };

inline constexpr int state_count = 6;

inline int rank(CellState s) { return static_cast<int>(s); }
inline char state_letter(CellState s) { return "WYBRMV"[rank(s)]; }

inline std::optional<CellState> parse_state(char c) {
    switch (c) {
        case 'W': case '0': return CellState::W;
        case 'Y': case '1': return CellState::Y;
        case 'B': case '2': return CellState::B;
        case 'R': case '3': return CellState::R;
        case 'M': case '4': return CellState::M;
        case 'V': case '5': return CellState::V;
        default: return std::nullopt;
    }
}

struct WeightScheme {
    std::array<int, state_count> weight;
    // how many neighbors of each state a listed entry may show (W unused)
    std::array<int, state_count> cap;

    static WeightScheme standard() { return {{0, 1, 4, 12, 29, 34}, {7, 3, 3, 2, 3, 3}}; }
    int operator()(CellState s) const { return weight[rank(s)]; }
};

// counts of Y, B, R, M, V among the seven neighbors
using Profile = std::array<int, 5>;

inline int profile_sigma(const Profile& p, const WeightScheme& w) {
    int s = 0;
    for (int i = 0; i < 5; ++i) s += p[i] * w.weight[i + 1];
    return s;
}

inline std::string profile_string(const Profile& p) {
    std::string s;
    for (int v : p) s += static_cast<char>('0' + v);
    return s;
}

struct TransitionEntry {
    int id = 0;
    CellState current = CellState::W;
    Profile profile{};
    int sigma = 0;
    CellState next = CellState::W;
};

inline std::string to_string(const TransitionEntry& e) {
    return std::to_string(e.id) + " " + std::to_string(rank(e.current)) + "-" + profile_string(e.profile) + ":" +
           std::to_string(rank(e.next)) + " " + std::to_string(e.sigma);
}

struct TableParseError : std::runtime_error {
    int line;
    TableParseError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

class TransitionTable {
public:
    TransitionTable() = default;

    // throws TableParseError when the entry would make the table ambiguous
    void add(const TransitionEntry& e, int line_no = 0) {
        for (const auto& o : entries_)
            if (o.id == e.id) throw TableParseError(line_no, "duplicate entry id " + std::to_string(e.id));
        auto key = std::make_pair(e.current, e.sigma);
        auto it = index_.find(key);
        if (it != index_.end()) {
            const auto& o = entries_[it->second];
            if (o.next != e.next)
                throw TableParseError(line_no, "determinism violation: entries " + std::to_string(o.id) + " and " +
                                                   std::to_string(e.id) + " map (" + state_letter(e.current) +
                                                   ", " + std::to_string(e.sigma) + ") to different states");
        } else {
            index_[key] = entries_.size();
        }
        entries_.push_back(e);
    }

    const std::vector<TransitionEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    // first listed entry for the key
    const TransitionEntry* find(CellState current, int sigma) const {
        auto it = index_.find({current, sigma});
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    std::optional<CellState> lookup(CellState current, int sigma) const {
        if (auto e = find(current, sigma)) return e->next;
        return std::nullopt;
    }

    const TransitionEntry* by_id(int id) const {
        for (const auto& e : entries_)
            if (e.id == id) return &e;
        return nullptr;
    }

private:
    std::vector<TransitionEntry> entries_;
    std::map<std::pair<CellState, int>, std::size_t> index_;
};

inline TransitionEntry parse_entry(const std::string& text, int line_no, const WeightScheme& w) {
    std::istringstream in(text);
    std::string id_s, body, sig_s, extra;
    if (!(in >> id_s >> body >> sig_s) || (in >> extra))
        throw TableParseError(line_no, "expected `<id> <c>-<YBRMV>:<n> <sigma>`, got `" + text + "`");
    auto digits = [&](const std::string& s, const char* what) {
        if (s.empty() || s.size() > 6 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw TableParseError(line_no, std::string("bad ") + what + " `" + s + "`");
        return std::stoi(s);
    };
    TransitionEntry e;
    e.id = digits(id_s, "entry id");
    e.sigma = digits(sig_s, "sigma");
    if (body.size() != 9 || body[1] != '-' || body[7] != ':')
        throw TableParseError(line_no, "bad entry body `" + body + "` (column " + std::to_string(id_s.size() + 2) + ")");
    auto cur = body[0] >= '0' && body[0] <= '5' ? parse_state(body[0]) : std::nullopt;
    auto nxt = body[8] >= '0' && body[8] <= '5' ? parse_state(body[8]) : std::nullopt;
    if (!cur || !nxt) throw TableParseError(line_no, "state digits must be 0..5 in `" + body + "`");
    e.current = *cur;
    e.next = *nxt;
    int total = 0;
    for (int i = 0; i < 5; ++i) {
        char c = body[2 + i];
        if (c < '0' || c > '7') throw TableParseError(line_no, "bad neighbor count in `" + body + "`");
        e.profile[i] = c - '0';
        total += e.profile[i];
    }
    if (total > 7) throw TableParseError(line_no, "more than 7 neighbors in `" + body + "`");
    int want = profile_sigma(e.profile, w);
    if (want != e.sigma)
        throw TableParseError(line_no, "sigma mismatch in entry " + std::to_string(e.id) + ": listed " +
                                           std::to_string(e.sigma) + ", profile gives " + std::to_string(want));
    return e;
}

inline TransitionTable parse_table(std::istream& in, const WeightScheme& w = WeightScheme::standard()) {
    TransitionTable t;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        t.add(parse_entry(line, no, w), no);
    }
    return t;
}

struct Finding {
    enum class Severity { error, documented };
    Severity severity;
    std::string code;
    std::string message;
};

struct TableReport {
    std::size_t entry_count = 0;
    std::size_t distinct_sigmas = 0;
    int max_sigma = 0;
    std::vector<int> sigma_mismatches;  // entry ids
    bool ids_contiguous = false;
    // pairs of entries with the same (state, sigma); same outcome, so lookup stays a function
    std::vector<std::pair<int, int>> shared_keys;
    std::vector<std::pair<int, int>> determinism_conflicts;
    std::array<int, 5> max_counts{};  // Y, B, R, M, V
    int max_profile_total = 0;
    int max_r_with_m = 0;  // largest R count among entries showing at least one M
    bool quiescent_anchor = false;
    std::vector<Finding> findings;

    bool ok() const {
        return std::none_of(findings.begin(), findings.end(),
                            [](const Finding& f) { return f.severity == Finding::Severity::error; });
    }
};

// w(0)=0, w(1)=1, w(i) = 1 + sum_{j<i} caps(j) w(j); caps[k-1] is the cap of rank k
inline std::vector<long long> derive_weights(const std::vector<int>& caps) {
    std::vector<long long> w{0, 1};
    for (std::size_t i = 2; i <= caps.size() + 1; ++i) {
        long long v = 1;
        for (std::size_t j = 1; j < i; ++j) v += caps[j - 1] * w[j];
        w.push_back(v);
    }
    return w;
}

struct SigmaCollision {
    int sigma;
    Profile a, b;
};

// all pairs of distinct profiles within the caps (and at most 7 neighbors) sharing a weighted sum
inline std::vector<SigmaCollision> find_sigma_collisions(const std::array<int, 5>& weights, const std::array<int, 5>& caps) {
    std::map<int, std::vector<Profile>> by_sum;
    Profile p{};
    for (p[0] = 0; p[0] <= caps[0]; ++p[0])
        for (p[1] = 0; p[1] <= caps[1]; ++p[1])
            for (p[2] = 0; p[2] <= caps[2]; ++p[2])
                for (p[3] = 0; p[3] <= caps[3]; ++p[3])
                    for (p[4] = 0; p[4] <= caps[4]; ++p[4]) {
                        if (p[0] + p[1] + p[2] + p[3] + p[4] > 7) continue;
                        int s = 0;
                        for (int i = 0; i < 5; ++i) s += p[i] * weights[i];
                        by_sum[s].push_back(p);
                    }
    std::vector<SigmaCollision> out;
    for (auto& [s, ps] : by_sum)
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j) out.push_back({s, ps[i], ps[j]});
    return out;
}

inline std::vector<SigmaCollision> find_sigma_collisions(const WeightScheme& w) {
    return find_sigma_collisions({w.weight[1], w.weight[2], w.weight[3], w.weight[4], w.weight[5]},
                                 {w.cap[1], w.cap[2], w.cap[3], w.cap[4], w.cap[5]});
}

// the statistics the table is claimed to have
struct TableClaims {
    std::size_t entries = 137;
    std::size_t distinct_sigmas = 69;
    int max_sigma = 156;
    std::vector<long long> stated_weights{1, 4, 14, 30};  // ranks 1..4 as quoted for the recurrence
};

inline TableReport validate_table(const TransitionTable& t, const WeightScheme& w = WeightScheme::standard(),
                                  const TableClaims& claims = {}) {
    using S = Finding::Severity;
    TableReport r;
    r.entry_count = t.size();
    std::set<int> sig;
    std::set<int> ids;
    std::map<std::pair<CellState, int>, std::vector<const TransitionEntry*>> keys;
    for (const auto& e : t.entries()) {
        sig.insert(e.sigma);
        ids.insert(e.id);
        r.max_sigma = std::max(r.max_sigma, e.sigma);
        if (profile_sigma(e.profile, w) != e.sigma) r.sigma_mismatches.push_back(e.id);
        int total = 0;
        for (int i = 0; i < 5; ++i) {
            r.max_counts[i] = std::max(r.max_counts[i], e.profile[i]);
            total += e.profile[i];
        }
        r.max_profile_total = std::max(r.max_profile_total, total);
        if (e.profile[3] > 0) r.max_r_with_m = std::max(r.max_r_with_m, e.profile[2]);
        keys[{e.current, e.sigma}].push_back(&e);
    }
    r.distinct_sigmas = sig.size();
    r.ids_contiguous = !ids.empty() && *ids.begin() == 0 && *ids.rbegin() == static_cast<int>(ids.size()) - 1 &&
                       ids.size() == t.size();
    for (auto& [k, es] : keys)
        for (std::size_t i = 0; i < es.size(); ++i)
            for (std::size_t j = i + 1; j < es.size(); ++j) {
                if (es[i]->next == es[j]->next)
                    r.shared_keys.push_back({es[i]->id, es[j]->id});
                else
                    r.determinism_conflicts.push_back({es[i]->id, es[j]->id});
            }
    r.quiescent_anchor = t.lookup(CellState::W, 0) == CellState::W;

    auto add = [&](S s, std::string code, std::string msg) { r.findings.push_back({s, std::move(code), std::move(msg)}); };
    if (r.entry_count != claims.entries)
        add(S::error, "entry-count", "table has " + std::to_string(r.entry_count) + " entries, expected " +
                                         std::to_string(claims.entries));
    if (r.distinct_sigmas != claims.distinct_sigmas)
        add(S::error, "distinct-sigmas", "table shows " + std::to_string(r.distinct_sigmas) +
                                             " distinct sigma values, the stated count is " +
                                             std::to_string(claims.distinct_sigmas));
    if (r.max_sigma != claims.max_sigma)
        add(S::error, "max-sigma", "max sigma is " + std::to_string(r.max_sigma) + ", expected " +
                                       std::to_string(claims.max_sigma));
    for (int id : r.sigma_mismatches) add(S::error, "sigma-mismatch", "entry " + std::to_string(id) + " sigma disagrees with its profile");
    if (!r.ids_contiguous) add(S::error, "ids", "entry ids are not exactly 0..n-1");
    for (auto [a, b] : r.determinism_conflicts)
        add(S::error, "determinism", "entries " + std::to_string(a) + " and " + std::to_string(b) +
                                         " share (state, sigma) with different new states");
    for (auto [a, b] : r.shared_keys)
        add(S::documented, "shared-key", "entries " + std::to_string(a) + " and " + std::to_string(b) +
                                              " share (state, sigma) and agree on the new state");
    if (!r.quiescent_anchor) add(S::error, "quiescence", "(W, 0) does not map to W");
    for (int i = 0; i < 5; ++i)
        if (r.max_counts[i] > w.cap[i + 1])
            add(S::error, "cap", std::string("entries show ") + std::to_string(r.max_counts[i]) + " neighbors in state " +
                                     state_letter(static_cast<CellState>(i + 1)) + " above the cap " +
                                     std::to_string(w.cap[i + 1]));
    add(r.max_r_with_m <= 2 ? S::documented : S::error, "r-given-m",
        "at most " + std::to_string(r.max_r_with_m) + " R neighbors in entries that show an M neighbor");

    std::vector<int> caps{w.cap[1], w.cap[2], w.cap[3]};
    auto derived = derive_weights(caps);
    std::vector<long long> ranks(derived.begin() + 1, derived.end());
    if (ranks != claims.stated_weights) {
        std::string a, b;
        for (auto v : ranks) a += (a.empty() ? "" : ",") + std::to_string(v);
        for (auto v : claims.stated_weights) b += (b.empty() ? "" : ",") + std::to_string(v);
        add(S::documented, "weight-recurrence", "recurrence with caps Y3 B3 R2 gives (" + a + ") for ranks 1..4, stated (" + b + ")");
    }
    return r;
}

}  // namespace hca
