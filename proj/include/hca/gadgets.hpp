#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "engine.hpp"
#include "heptagrid.hpp"
#include "table.hpp"

#ifndef HCA_DEFAULT_DATA_DIR
#define HCA_DEFAULT_DATA_DIR "data"
#endif

namespace hca {

inline std::filesystem::path data_dir() {
    if (const char* e = std::getenv("HCA_DATA_DIR"); e && *e) return e;
    return HCA_DEFAULT_DATA_DIR;
}

// windows are immutable, so one per radius is shared
inline std::shared_ptr<const DiscWindow> shared_window(int radius) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const DiscWindow>> cache;
    std::lock_guard lk(mu);
    auto& w = cache[radius];
    if (!w) w = std::make_shared<const DiscWindow>(radius);
    return w;
}

struct Injection {
    std::string name;
    TileAddress rear, front;
};

// one traced experiment: a locomotive at an injection point, optional cell overrides on the idle layout
struct TraceRun {
    std::string trace;
    std::string inject;
    CellState color = CellState::B;
    std::vector<std::pair<TileAddress, CellState>> overrides;
};

struct ExpectedTrace {
    std::string name;
    std::vector<TraceRow> rows;
};

struct GadgetLayout {
    std::string name;
    int radius = 0;
    DefaultRule mode = DefaultRule::quiescent;
    std::vector<std::pair<TileAddress, CellState>> cells;
    // inbound tracks, ordered in the direction of motion
    std::vector<std::pair<std::string, std::vector<TileAddress>>> paths;
    std::vector<Injection> injections;
    std::optional<TileAddress> observe;
    std::vector<std::pair<std::string, TileAddress>> probes;
    std::vector<TraceRun> runs;
    std::vector<ExpectedTrace> expected;

    const Injection& injection(const std::string& n) const {
        for (const auto& i : injections)
            if (i.name == n) return i;
        throw std::invalid_argument("gadget " + name + " has no injection point `" + n + "`");
    }
    const std::vector<TileAddress>& path(const std::string& n) const {
        for (const auto& [k, v] : paths)
            if (k == n) return v;
        throw std::invalid_argument("gadget " + name + " has no path `" + n + "`");
    }
    std::optional<TileAddress> probe(const std::string& n) const {
        for (const auto& [k, v] : probes)
            if (k == n) return v;
        return std::nullopt;
    }
    const ExpectedTrace* expected_trace(const std::string& n) const {
        for (const auto& e : expected)
            if (e.name == n) return &e;
        return nullptr;
    }
    CellState idle_state(TileAddress t) const {
        for (const auto& [a, s] : cells)
            if (a == t) return s;
        return CellState::W;
    }
};

struct GadgetFormatError : std::runtime_error {
    GadgetFormatError(const std::string& src, int line, const std::string& what)
        : std::runtime_error(src + ":" + std::to_string(line) + ": " + what) {}
};

inline std::optional<CellState> parse_color(std::string_view s) {
    if (s == "blue" || s == "B") return CellState::B;
    if (s == "mauve" || s == "M") return CellState::M;
    return std::nullopt;
}

inline GadgetLayout parse_gadget(std::istream& in, const std::string& source = "<gadget>") {
    GadgetLayout g;
    std::string line;
    int no = 0;
    auto addr = [&](const std::string& s) {
        auto a = parse_address(s);
        if (!a) throw GadgetFormatError(source, no, "bad tile address `" + s + "`");
        return *a;
    };
    auto state = [&](const std::string& s) {
        auto st = s.size() == 1 ? parse_state(s[0]) : std::nullopt;
        if (!st || (s[0] >= '0' && s[0] <= '9')) throw GadgetFormatError(source, no, "bad state `" + s + "`");
        return *st;
    };
    auto integer = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw GadgetFormatError(source, no, "bad number `" + s + "`");
        return std::stoi(s);
    };
    std::set<TileAddress> seen;
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::vector<std::string> w;
        for (std::string t; ls >> t;) w.push_back(t);
        if (w.empty()) continue;
        const std::string& k = w[0];
        auto need = [&](std::size_t n) {
            if (w.size() != n) throw GadgetFormatError(source, no, "`" + k + "` takes " + std::to_string(n - 1) + " fields");
        };
        if (k == "gadget") {
            need(2);
            g.name = w[1];
        } else if (k == "radius") {
            need(2);
            g.radius = integer(w[1]);
        } else if (k == "mode") {
            need(2);
            auto m = parse_rule(w[1]);
            if (!m) throw GadgetFormatError(source, no, "unknown mode `" + w[1] + "`");
            g.mode = *m;
        } else if (k == "cell") {
            need(3);
            TileAddress a = addr(w[1]);
            if (!seen.insert(a).second) throw GadgetFormatError(source, no, "cell " + to_string(a) + " listed twice");
            g.cells.push_back({a, state(w[2])});
        } else if (k == "path") {
            if (w.size() < 4) throw GadgetFormatError(source, no, "a path needs a name and at least two cells");
            std::vector<TileAddress> p;
            for (std::size_t i = 2; i < w.size(); ++i) p.push_back(addr(w[i]));
            g.paths.push_back({w[1], std::move(p)});
        } else if (k == "inject") {
            need(4);
            g.injections.push_back({w[1], addr(w[2]), addr(w[3])});
        } else if (k == "observe") {
            need(2);
            g.observe = addr(w[1]);
        } else if (k == "probe") {
            need(3);
            g.probes.push_back({w[1], addr(w[2])});
        } else if (k == "run") {
            if (w.size() < 4) throw GadgetFormatError(source, no, "`run` takes a trace, an injection and a colour");
            TraceRun r{w[1], w[2], CellState::B, {}};
            auto c = parse_color(w[3]);
            if (!c) throw GadgetFormatError(source, no, "unknown colour `" + w[3] + "`");
            r.color = *c;
            for (std::size_t i = 4; i < w.size(); ++i) {
                auto eq = w[i].find('=');
                if (eq == std::string::npos) throw GadgetFormatError(source, no, "override must read s,n=STATE");
                r.overrides.push_back({addr(w[i].substr(0, eq)), state(w[i].substr(eq + 1))});
            }
            g.runs.push_back(std::move(r));
        } else if (k == "expect") {
            need(3);
            std::vector<std::string> f;
            std::stringstream fs(w[2]);
            for (std::string t; std::getline(fs, t, ':');) f.push_back(t);
            if (f.size() != 4) throw GadgetFormatError(source, no, "expect row must read time:STATE:sigma:entry");
            TraceRow row{integer(f[0]), state(f[1]), integer(f[2]), integer(f[3])};
            ExpectedTrace* e = nullptr;
            for (auto& x : g.expected)
                if (x.name == w[1]) e = &x;
            if (!e) e = &g.expected.emplace_back(ExpectedTrace{w[1], {}});
            if (row.time != static_cast<int>(e->rows.size()))
                throw GadgetFormatError(source, no, "expect rows of " + w[1] + " must be listed in time order from 0");
            e->rows.push_back(row);
        } else {
            throw GadgetFormatError(source, no, "unknown directive `" + k + "`");
        }
    }
    if (g.name.empty()) throw GadgetFormatError(source, no, "missing `gadget` line");
    if (g.radius <= 0) throw GadgetFormatError(source, no, "missing or non-positive `radius`");
    return g;
}

inline GadgetLayout load_gadget(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open gadget file " + p.string());
    return parse_gadget(in, p.string());
}

inline const std::vector<std::string>& gadget_kinds() {
    static const std::vector<std::string> k{"track-line",    "track-arc",     "joined-path", "fork",
                                            "converter-b2m", "converter-m2b", "filter-blue", "filter-mauve",
                                            "fixed-switch",  "filter-flip"};
    return k;
}

inline GadgetLayout build_gadget(const std::string& kind, const std::filesystem::path& dir = data_dir()) {
    if (std::find(gadget_kinds().begin(), gadget_kinds().end(), kind) == gadget_kinds().end())
        throw std::invalid_argument("unknown gadget kind `" + kind + "`");
    return load_gadget(dir / "gadgets" / (kind + ".gad"));
}

inline bool adjacent(const DiscWindow& w, TileAddress a, TileAddress b) {
    for (auto& n : w.neighbors(a))
        if (n && *n == b) return true;
    return false;
}

// structural problems of a layout; empty when sound
inline std::vector<std::string> check_layout(const GadgetLayout& g) {
    std::vector<std::string> out;
    auto w = shared_window(g.radius);
    auto inside = [&](TileAddress t, const std::string& what) {
        auto s = w->slot(t);
        if (!s) {
            out.push_back(what + " " + to_string(t) + " is outside the frame");
            return false;
        }
        // two rings of margin keep the rim frozen W without artifacts
        if (w->tile(*s).ring > g.radius - 2) out.push_back(what + " " + to_string(t) + " is too close to the rim");
        return true;
    };
    for (auto& [a, s] : g.cells) inside(a, "cell");
    for (auto& i : g.injections) {
        if (!inside(i.rear, "injection") || !inside(i.front, "injection")) continue;
        if (g.idle_state(i.rear) != CellState::Y || g.idle_state(i.front) != CellState::Y)
            out.push_back("injection " + i.name + " is not on Y track cells");
        if (!adjacent(*w, i.rear, i.front)) out.push_back("injection " + i.name + " cells are not adjacent");
    }
    for (auto& [n, p] : g.paths)
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (!inside(p[k], "path cell")) continue;
            if (g.idle_state(p[k]) != CellState::Y) out.push_back("path " + n + " leaves the track at " + to_string(p[k]));
            if (k && w->contains(p[k - 1]) && !adjacent(*w, p[k - 1], p[k]))
                out.push_back("path " + n + " breaks between " + to_string(p[k - 1]) + " and " + to_string(p[k]));
        }
    if (g.observe) inside(*g.observe, "observation cell");
    for (auto& [n, p] : g.probes) inside(p, "probe");
    return out;
}

inline Configuration idle_configuration(const GadgetLayout& g,
                                        const std::vector<std::pair<TileAddress, CellState>>& overrides = {}) {
    Configuration c(shared_window(g.radius));
    for (auto& [a, s] : g.cells) c.set(a, s);
    for (auto& [a, s] : overrides) c.set(a, s);
    return c;
}

inline void place_locomotive(Configuration& c, TileAddress rear, TileAddress front, CellState color) {
    if (color != CellState::B && color != CellState::M) throw std::invalid_argument("locomotive front must be B or M");
    c.set(rear, CellState::R);
    c.set(front, color);
}

inline Configuration inject(const GadgetLayout& g, const std::string& point, CellState color,
                            const std::vector<std::pair<TileAddress, CellState>>& overrides = {}) {
    const Injection& i = g.injection(point);
    Configuration c = idle_configuration(g, overrides);
    place_locomotive(c, i.rear, i.front, color);
    return c;
}

struct TraceDiff {
    int time;
    std::string field;  // state | sigma | entry | row
    std::string expected, actual;
};

inline std::vector<TraceDiff> compare_trace(const std::vector<TraceRow>& sim, const std::vector<TraceRow>& want) {
    std::vector<TraceDiff> d;
    std::size_t n = std::max(sim.size(), want.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (k >= sim.size() || k >= want.size()) {
            d.push_back({static_cast<int>(k), "row", k < want.size() ? "present" : "absent",
                         k < sim.size() ? "present" : "absent"});
            continue;
        }
        const auto& a = sim[k];
        const auto& b = want[k];
        if (a.state != b.state) d.push_back({b.time, "state", std::string(1, state_letter(b.state)), std::string(1, state_letter(a.state))});
        if (a.sigma != b.sigma) d.push_back({b.time, "sigma", std::to_string(b.sigma), std::to_string(a.sigma)});
        if (a.entry != b.entry) d.push_back({b.time, "entry", entry_label(b.entry), entry_label(a.entry)});
    }
    return d;
}

// simulated rows for a run, as many as the expected trace has (8 when none)
inline std::vector<TraceRow> simulate_run(const GadgetLayout& g, const TraceRun& r, const TransitionTable& t) {
    if (!g.observe) throw std::invalid_argument("gadget " + g.name + " has no observation cell");
    Configuration c = inject(g, r.inject, r.color, r.overrides);
    const ExpectedTrace* e = g.expected_trace(r.trace);
    int steps = e ? static_cast<int>(e->rows.size()) - 1 : 7;
    return run_trace(c, t, *g.observe, steps, g.mode);
}

struct Locomotive {
    TileAddress front, rear;
    CellState color;
    bool intact;  // exactly one rear next to the front
};

// fronts and rears are cells in B/M or R that differ from the idle layout
inline std::vector<Locomotive> find_locomotives(const Configuration& c, const Configuration& idle) {
    std::vector<Locomotive> out;
    const DiscWindow& w = c.window();
    for (std::size_t s = 0; s < c.states().size(); ++s) {
        CellState x = c.at(static_cast<int>(s));
        if ((x != CellState::B && x != CellState::M) || idle.at(static_cast<int>(s)) == x) continue;
        Locomotive l{w.tile(s).address, {}, x, false};
        int rears = 0;
        for (int nb : w.tile(s).neighbors)
            if (nb >= 0 && c.at(nb) == CellState::R && idle.at(nb) != CellState::R) {
                l.rear = w.tile(nb).address;
                ++rears;
            }
        l.intact = rears == 1;
        out.push_back(l);
    }
    return out;
}

// cells whose state differs from idle
inline std::vector<TileAddress> changed_cells(const Configuration& c, const Configuration& idle) {
    std::vector<TileAddress> out;
    for (std::size_t s = 0; s < c.states().size(); ++s)
        if (c.at(static_cast<int>(s)) != idle.at(static_cast<int>(s))) out.push_back(c.window().tile(s).address);
    return out;
}

inline constexpr int absorption_horizon = 20;

struct FilterVerdict {
    CellState filter = CellState::W, loco = CellState::W;
    bool passed = false;     // a front reached the exit probe
    int restored_at = -1;    // first step back at the idle layout, -1 if never
    bool expected() const { return passed == (filter == loco); }
};

inline FilterVerdict check_filter_semantics(const GadgetLayout& g, CellState loco, const TransitionTable& t,
                                            int horizon = absorption_horizon) {
    auto colour = g.probe("colour");
    auto exit = g.probe("exit");
    if (!colour || !exit) throw std::invalid_argument("gadget " + g.name + " is not a filter");
    FilterVerdict v{g.idle_state(*colour), loco};
    Configuration idle = idle_configuration(g);
    Configuration c = inject(g, "in", loco);
    for (int k = 1; k <= horizon; ++k) {
        c = step(c, t, g.mode);
        if (c.get(*exit) == loco) v.passed = true;
        if (v.restored_at < 0 && c.same_states(idle)) v.restored_at = k;
    }
    return v;
}

struct ForkVerdict {
    bool duplicated = false;  // two intact locomotives, one at each branch probe, at the same tick
    int at = -1;
    CellState left = CellState::W, right = CellState::W;
};

inline ForkVerdict check_fork(const GadgetLayout& g, CellState loco, const TransitionTable& t,
                              int horizon = absorption_horizon) {
    auto l = g.probe("left"), r = g.probe("right");
    if (!l || !r) throw std::invalid_argument("gadget " + g.name + " is not a fork");
    ForkVerdict v;
    Configuration idle = idle_configuration(g);
    Configuration c = inject(g, "in", loco);
    for (int k = 1; k <= horizon && !v.duplicated; ++k) {
        c = step(c, t, g.mode);
        auto locos = find_locomotives(c, idle);
        bool ok = locos.size() == 2 && locos[0].intact && locos[1].intact;
        if (ok && c.get(*l) != CellState::Y && c.get(*r) != CellState::Y && c.get(*l) == c.get(*r) &&
            c.get(*l) != CellState::R) {
            v.duplicated = true;
            v.at = k;
            v.left = c.get(*l);
            v.right = c.get(*r);
        }
    }
    return v;
}

struct ConverterVerdict {
    CellState in = CellState::W, out = CellState::W;  // front colours before and after
    bool clean = false;  // at exit, only the two locomotive cells differ from idle
    int at = -1;
};

inline ConverterVerdict check_converter(const GadgetLayout& g, CellState loco, const TransitionTable& t,
                                        int horizon = absorption_horizon) {
    auto exit = g.probe("exit");
    if (!exit) throw std::invalid_argument("gadget " + g.name + " has no exit probe");
    ConverterVerdict v{loco};
    Configuration idle = idle_configuration(g);
    Configuration c = inject(g, "in", loco);
    for (int k = 1; k <= horizon; ++k) {
        c = step(c, t, g.mode);
        CellState x = c.get(*exit);
        if (x == CellState::B || x == CellState::M) {
            v.out = x;
            v.at = k;
            auto locos = find_locomotives(c, idle);
            v.clean = locos.size() == 1 && locos[0].intact && changed_cells(c, idle).size() == 2;
            break;
        }
    }
    return v;
}

struct SwitchVerdict {
    bool exited = false;
    bool other_branch_clear = true;  // no front ever on another inbound path
};

inline SwitchVerdict check_fixed_switch(const GadgetLayout& g, const std::string& point, CellState loco,
                                        const TransitionTable& t, int horizon = absorption_horizon) {
    auto exit = g.probe("exit");
    if (!exit) throw std::invalid_argument("gadget " + g.name + " has no exit probe");
    SwitchVerdict v;
    Configuration c = inject(g, point, loco);
    for (int k = 1; k <= horizon; ++k) {
        c = step(c, t, g.mode);
        if (c.get(*exit) == loco) v.exited = true;
        for (auto& [n, p] : g.paths) {
            if (n == point) continue;
            for (auto a : p)
                if (c.get(a) == CellState::B || c.get(a) == CellState::M) v.other_branch_clear = false;
        }
    }
    return v;
}

struct FlipVerdict {
    CellState before = CellState::W, after = CellState::W;
    std::optional<int> entry;  // entry applied at the colour cell on the tick it changed
    int settled_at = -1;       // first step at the idle layout with the new colour
};

// one mauve signal on a filter whose colour cell starts at `start`
inline FlipVerdict check_filter_flip(const GadgetLayout& g, CellState start, const TransitionTable& t,
                                     int horizon = absorption_horizon) {
    auto colour = g.probe("colour");
    if (!colour) throw std::invalid_argument("gadget " + g.name + " has no colour probe");
    FlipVerdict v{start};
    CellState other = start == CellState::B ? CellState::M : CellState::B;
    Configuration target = idle_configuration(g, {{*colour, other}});
    Configuration c = inject(g, "signal", CellState::M, {{*colour, start}});
    int slot = c.window().require(*colour);
    std::vector<CellUpdate> ups;
    for (int k = 1; k <= horizon; ++k) {
        Configuration n = step(c, t, g.mode, 1, &ups);
        if (n.at(slot) != c.at(slot) && !v.entry && ups[slot].entry) v.entry = ups[slot].entry->id;
        c = std::move(n);
        if (c.same_states(target)) {
            v.after = other;
            v.settled_at = k;
            break;
        }
    }
    if (v.settled_at < 0) v.after = c.at(slot);
    return v;
}

struct TraceErratum {
    std::string trace;
    int time;
    std::string field;
    std::string expected, sim;
};

struct ClaimErratum {
    std::string code;
    std::string stated, data;
};

struct Errata {
    std::vector<TraceErratum> traces;
    std::vector<ClaimErratum> claims;

    const TraceErratum* find(const std::string& trace, const TraceDiff& d) const {
        for (const auto& e : traces)
            if (e.trace == trace && e.time == d.time && e.field == d.field && e.expected == d.expected && e.sim == d.actual)
                return &e;
        return nullptr;
    }
    const ClaimErratum* claim(const std::string& code) const {
        for (const auto& c : claims)
            if (c.code == code) return &c;
        return nullptr;
    }
};

// lines: `trace <name> <time> <field> <expected> <simulated>` and `claim <code> <stated> <data>`
inline Errata parse_errata(std::istream& in, const std::string& source = "<errata>") {
    Errata e;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::vector<std::string> w;
        for (std::string t; ls >> t;) w.push_back(t);
        if (w.empty()) continue;
        if (w[0] == "trace" && w.size() == 6 && w[2].find_first_not_of("0123456789") == std::string::npos)
            e.traces.push_back({w[1], std::stoi(w[2]), w[3], w[4], w[5]});
        else if (w[0] == "claim" && w.size() == 4)
            e.claims.push_back({w[1], w[2], w[3]});
        else
            throw GadgetFormatError(source, no, "unrecognized errata line");
    }
    return e;
}

inline Errata load_errata(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open errata file " + p.string());
    return parse_errata(in, p.string());
}

inline TransitionTable load_table(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open table file " + p.string());
    return parse_table(in);
}

// the entry that put the failing cell into its state, found by replaying the run
inline std::optional<int> state_source(const GadgetLayout& g, const TraceRun& r, const TransitionTable& t,
                                       const StepError& err) {
    if (err.generation < 1) return std::nullopt;
    Configuration c = inject(g, r.inject, r.color, r.overrides);
    int slot = c.window().require(err.cell);
    std::vector<CellUpdate> ups;
    for (long k = 0; k < err.generation; ++k) c = step(c, t, g.mode, 1, &ups);
    if (const TransitionEntry* e = ups[slot].entry) return e->id;
    return std::nullopt;
}

struct GoldenLine {
    std::string gadget, trace;
    std::vector<TraceRow> rows;
    std::vector<TraceDiff> diffs;
    std::vector<bool> listed;  // per diff: covered by errata
    std::string error;         // step failure
};

struct GoldenReport {
    std::vector<GoldenLine> lines;
    std::vector<std::string> failures;
    std::vector<std::string> documented;
    bool ok() const { return failures.empty(); }
};

// every traced run of every gadget against its expected rows; divergences must be listed in the errata
inline GoldenReport run_golden(const TransitionTable& t, const Errata& errata, const std::filesystem::path& dir = data_dir()) {
    GoldenReport rep;
    std::set<const TraceErratum*> used;
    for (const auto& kind : gadget_kinds()) {
        GadgetLayout g = build_gadget(kind, dir);
        for (auto& p : check_layout(g)) rep.failures.push_back(kind + ": " + p);
        for (const auto& r : g.runs) {
            GoldenLine gl{kind, r.trace};
            const ExpectedTrace* e = g.expected_trace(r.trace);
            if (!e) {
                rep.failures.push_back(kind + ": run " + r.trace + " has no expected rows");
                continue;
            }
            try {
                gl.rows = simulate_run(g, r, t);
            } catch (const StepError& ex) {
                gl.error = ex.what();
                std::string msg = r.trace + ": " + ex.what();
                if (auto via = state_source(g, r, t, ex)) msg += " (the cell got there via entry " + std::to_string(*via) + ")";
                rep.failures.push_back(msg);
                rep.lines.push_back(gl);
                continue;
            }
            gl.diffs = compare_trace(gl.rows, e->rows);
            for (const auto& d : gl.diffs) {
                const TraceErratum* x = errata.find(r.trace, d);
                gl.listed.push_back(x != nullptr);
                std::string msg = r.trace + " time " + std::to_string(d.time) + " " + d.field + ": expected " +
                                  d.expected + ", simulated " + d.actual;
                if (d.time > 0 && d.time <= static_cast<int>(gl.rows.size()))
                    msg += " (after entry " + entry_label(gl.rows[d.time - 1].entry) + ")";
                if (x) {
                    used.insert(x);
                    rep.documented.push_back(msg);
                } else {
                    rep.failures.push_back(msg);
                }
            }
            rep.lines.push_back(std::move(gl));
        }
    }
    for (const auto& x : errata.traces)
        if (!used.count(&x))
            rep.failures.push_back("errata line for " + x.trace + " time " + std::to_string(x.time) + " " + x.field +
                                   " does not match any divergence");
    return rep;
}

}  // namespace hca
