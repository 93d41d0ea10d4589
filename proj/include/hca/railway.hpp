#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Railway circuits at graph level. Every switch is assembled from the same
// four parts the tiles provide: forks, filters, converters and fixed merges.
// A locomotive is a token; a fork copies it, a filter of the other colour
// absorbs the copy, and mauve copies reprogram filters.

namespace hca::railway {

enum class Color { blue, mauve };

inline const char* to_string(Color c) { return c == Color::blue ? "blue" : "mauve"; }
inline Color other(Color c) { return c == Color::blue ? Color::mauve : Color::blue; }

enum class ElementKind { fork, filter, converter, merge, terminal };

// input port of an element
struct PortRef {
    int element = -1;
    int port = 0;
};

// output port of an element
struct OutRef {
    int element = -1;
    int port = 0;
};

struct Element {
    ElementKind kind;
    std::string name;
    std::string owner;  // composite this part belongs to
    Color color = Color::blue;  // filter colour or converter target
    std::array<PortRef, 2> out{};
};

struct Event {
    long seq;
    std::string kind;
    std::string element;
    std::string owner;
    Color color;
    std::string detail;
};

inline void write_tsv(std::ostream& os, const std::vector<Event>& log) {
    os << "seq\tkind\telement\towner\tcolor\tdetail\n";
    for (const auto& e : log)
        os << e.seq << '\t' << e.kind << '\t' << e.element << '\t' << e.owner << '\t' << to_string(e.color) << '\t'
           << e.detail << '\n';
}

struct CircuitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FuelExhausted : std::runtime_error {
    FuelExhausted() : std::runtime_error("fuel exhausted") {}
};

// signals_first drains mauve tokens before any blue one moves;
// fifo moves tokens in creation order and exists to exercise the ordering check
enum class Policy { signals_first, fifo };

struct Fuel {
    long left;
    long used = 0;
    void burn() {
        if (left <= 0) throw FuelExhausted();
        --left;
        ++used;
    }
};

struct RunResult {
    int terminal = -1;
    std::string terminal_name;
    // blue tokens that reached a part of a composite while a signal still heading there was in flight
    std::vector<std::string> violations;
};

class Circuit {
public:
    // called when a token reaches a terminal; may grow the circuit and redirect the token
    using Hook = std::function<std::optional<PortRef>(Circuit&, int terminal)>;

    int add(ElementKind k, std::string name, std::string owner = {}, Color c = Color::blue) {
        elements_.push_back({k, std::move(name), std::move(owner), c, {}});
        return static_cast<int>(elements_.size()) - 1;
    }
    int fork(std::string name, std::string owner = {}) { return add(ElementKind::fork, std::move(name), std::move(owner)); }
    int filter(std::string name, std::string owner, Color c) { return add(ElementKind::filter, std::move(name), std::move(owner), c); }
    int converter(std::string name, std::string owner, Color to) {
        return add(ElementKind::converter, std::move(name), std::move(owner), to);
    }
    int merge(std::string name, std::string owner = {}) { return add(ElementKind::merge, std::move(name), std::move(owner)); }
    int terminal(std::string name) { return add(ElementKind::terminal, std::move(name)); }

    void connect(OutRef from, PortRef to) {
        auto& slot = elements_.at(from.element).out.at(from.port);
        if (slot.element >= 0) throw CircuitError("output " + elements_[from.element].name + " is already connected");
        slot = to;
    }
    void reconnect(OutRef from, PortRef to) { elements_.at(from.element).out.at(from.port) = to; }

    Element& element(int i) { return elements_.at(i); }
    const Element& element(int i) const { return elements_.at(i); }
    std::size_t size() const { return elements_.size(); }

    void set_hook(Hook h) { hook_ = std::move(h); }
    void set_log(std::vector<Event>* log) { log_ = log; }
    std::vector<Event>* log() const { return log_; }

    void note(const std::string& kind, const std::string& element, const std::string& owner, Color c,
              const std::string& detail = {}) {
        if (log_) log_->push_back({static_cast<long>(log_->size()), kind, element, owner, c, detail});
    }

    // one locomotive enters at `entry`; runs until no token is left
    RunResult run(PortRef entry, Color c, Fuel& fuel, Policy policy = Policy::signals_first) {
        struct Token {
            Color color;
            PortRef at;
        };
        std::deque<Token> blue, mauve, all;
        auto push = [&](Token t) {
            if (policy == Policy::fifo)
                all.push_back(t);
            else
                (t.color == Color::mauve ? mauve : blue).push_back(t);
        };
        auto pending = [&]() { return !blue.empty() || !mauve.empty() || !all.empty(); };
        RunResult res;
        push({c, entry});
        while (pending()) {
            Token t;
            if (policy == Policy::fifo) {
                t = all.front();
                all.pop_front();
            } else if (!mauve.empty()) {
                t = mauve.front();
                mauve.pop_front();
            } else {
                t = blue.front();
                blue.pop_front();
            }
            fuel.burn();
            if (t.at.element < 0) throw CircuitError("a locomotive ran off an unconnected track");
            Element& e = elements_.at(t.at.element);
            if (t.color == Color::blue && !e.owner.empty()) {
                std::deque<Token>& q = policy == Policy::fifo ? all : mauve;
                for (const Token& s : q)
                    if (s.color == Color::mauve && reaches_owner(s.at, e.owner))
                        res.violations.push_back("blue locomotive at " + e.name + " before the signal for " + e.owner);
            }
            auto forward = [&](int port, Color col) {
                const PortRef& to = e.out[port];
                if (to.element < 0) throw CircuitError("track ends after " + e.name);
                push({col, to});
            };
            switch (e.kind) {
                case ElementKind::fork:
                    note("duplicate", e.name, e.owner, t.color);
                    forward(0, t.color);
                    forward(1, t.color);
                    break;
                case ElementKind::filter:
                    if (t.at.port == 1) {
                        if (t.color != Color::mauve) throw CircuitError("a blue locomotive reached the programming input of " + e.name);
                        e.color = other(e.color);
                        note("toggle", e.name, e.owner, t.color, std::string("filter now ") + to_string(e.color));
                    } else if (t.color == e.color) {
                        forward(0, t.color);
                    } else {
                        note("absorb", e.name, e.owner, t.color);
                    }
                    break;
                case ElementKind::converter:
                    if (t.color == e.color)
                        throw CircuitError("converter " + e.name + " received a locomotive already " + to_string(e.color));
                    note("convert", e.name, e.owner, e.color);
                    forward(0, e.color);
                    break;
                case ElementKind::merge:
                    forward(0, t.color);
                    break;
                case ElementKind::terminal: {
                    if (hook_) {
                        int term = t.at.element;
                        if (auto to = hook_(*this, term)) {
                            // the hook may have grown elements_; e is stale from here on
                            push({t.color, *to});
                            break;
                        }
                    }
                    const Element& te = elements_.at(t.at.element);
                    if (t.color != Color::blue) throw CircuitError("a signal reached terminal " + te.name);
                    if (res.terminal >= 0)
                        throw CircuitError("two locomotives left the circuit, at " + res.terminal_name + " and " + te.name);
                    res.terminal = t.at.element;
                    res.terminal_name = te.name;
                    note("exit", te.name, {}, t.color);
                    break;
                }
            }
        }
        if (res.terminal < 0) throw CircuitError("the locomotive was absorbed inside the circuit");
        return res;
    }

private:
    // can a mauve token at p reprogram a filter of the given owner?
    bool reaches_owner(PortRef p, const std::string& owner) const {
        std::vector<PortRef> stack{p};
        std::set<std::pair<int, int>> seen;
        while (!stack.empty()) {
            PortRef q = stack.back();
            stack.pop_back();
            if (q.element < 0 || !seen.insert({q.element, q.port}).second) continue;
            const Element& e = elements_[q.element];
            switch (e.kind) {
                case ElementKind::filter:
                    if (q.port == 1) {
                        if (e.owner == owner) return true;
                    } else if (e.color == Color::mauve) {
                        stack.push_back(e.out[0]);
                    }
                    break;
                case ElementKind::fork:
                    stack.push_back(e.out[0]);
                    stack.push_back(e.out[1]);
                    break;
                case ElementKind::merge:
                    stack.push_back(e.out[0]);
                    break;
                default:
                    break;
            }
        }
        return false;
    }

    std::vector<Element> elements_;
    Hook hook_;
    std::vector<Event>* log_ = nullptr;
};

// Active crossing a -> b|c. The fork copies the locomotive onto both branches;
// the blue filter sits on the selected one. Past it, a second fork sends a copy
// through a converter, and the mauve copy swaps both filter colours.
struct FlipFlop {
    std::string name;
    int entry = -1;
    std::array<int, 2> filter{};
    PortRef in;
    std::array<OutRef, 2> out;

    int selected(const Circuit& c) const { return c.element(filter[0]).color == Color::blue ? 0 : 1; }
};

inline FlipFlop build_flipflop(Circuit& c, const std::string& name, int selected) {
    FlipFlop f;
    f.name = name;
    f.entry = c.fork(name + ".fork", name);
    int merge = c.merge(name + ".xi-merge", name);
    int xi = c.fork(name + ".xi", name);
    for (int b = 0; b < 2; ++b) {
        std::string s = std::to_string(b);
        f.filter[b] = c.filter(name + ".filter" + s, name, b == selected ? Color::blue : Color::mauve);
        int phi = c.fork(name + ".phi" + s, name);
        int conv = c.converter(name + ".conv" + s, name, Color::mauve);
        c.connect({f.entry, b}, {f.filter[b], 0});
        c.connect({f.filter[b], 0}, {phi, 0});
        c.connect({phi, 1}, {conv, 0});
        c.connect({conv, 0}, {merge, b});
        c.connect({xi, b}, {f.filter[b], 1});
        f.out[b] = {phi, 0};
    }
    c.connect({merge, 0}, {xi, 0});
    f.in = {f.entry, 0};
    return f;
}

// Active part of a memory switch: a fork, a blue filter on the selected branch,
// and a fork S distributing the mauve signal sent by the passive part.
struct MemoryActive {
    std::string name;
    std::array<int, 2> filter{};
    PortRef in;
    PortRef signal;
    std::array<OutRef, 2> out;

    int selected(const Circuit& c) const { return c.element(filter[0]).color == Color::blue ? 0 : 1; }
};

// Passive part: a fork on each branch, one copy joining the exit, the other
// meeting a filter. The filter on the selected branch is mauve and absorbs the
// copy; on the other branch it is blue, and the copy, turned mauve, reprograms
// every active part of the group and both passive filters.
struct MemoryPassive {
    std::string name;
    std::array<int, 2> filter{};
    std::array<PortRef, 2> in;
    OutRef exit;

    int selected(const Circuit& c) const { return c.element(filter[0]).color == Color::mauve ? 0 : 1; }
};

struct MemoryGroup {
    MemoryPassive passive;
    std::vector<MemoryActive> actives;

    int selected(const Circuit& c) const { return passive.selected(c); }
    bool consistent(const Circuit& c) const {
        int s = passive.selected(c);
        return std::all_of(actives.begin(), actives.end(), [&](const MemoryActive& a) { return a.selected(c) == s; });
    }
};

inline MemoryActive build_memory_active(Circuit& c, const std::string& name, int selected) {
    MemoryActive a;
    a.name = name;
    int f = c.fork(name + ".fork", name);
    int s = c.fork(name + ".S", name);
    for (int b = 0; b < 2; ++b) {
        a.filter[b] = c.filter(name + ".filter" + std::to_string(b), name, b == selected ? Color::blue : Color::mauve);
        c.connect({f, b}, {a.filter[b], 0});
        c.connect({s, b}, {a.filter[b], 1});
        a.out[b] = {a.filter[b], 0};
    }
    a.in = {f, 0};
    a.signal = {s, 0};
    return a;
}

// a passive part driving the named active parts; all start on `selected`
inline MemoryGroup build_memory_group(Circuit& c, const std::string& name, int selected,
                                      const std::vector<std::string>& active_names) {
    MemoryGroup g;
    MemoryPassive& p = g.passive;
    p.name = name;
    int exit = c.merge(name + ".F", name);
    int gather = c.merge(name + ".G", name);
    int u = c.fork(name + ".U", name);
    for (int b = 0; b < 2; ++b) {
        std::string s = std::to_string(b);
        int fk = c.fork(name + ".P" + s, name);
        p.filter[b] = c.filter(name + ".filter" + s, name, b == selected ? Color::mauve : Color::blue);
        int conv = c.converter(name + ".conv" + s, name, Color::mauve);
        c.connect({fk, 0}, {exit, b});
        c.connect({fk, 1}, {p.filter[b], 0});
        c.connect({p.filter[b], 0}, {conv, 0});
        c.connect({conv, 0}, {gather, b});
        c.connect({u, b}, {p.filter[b], 1});
        p.in[b] = {fk, 0};
    }
    p.exit = {exit, 0};
    for (const auto& an : active_names) g.actives.push_back(build_memory_active(c, an, selected));
    // the signal reaches U and every S through a chain of forks
    std::vector<PortRef> targets{{u, 0}};
    for (auto& a : g.actives) targets.push_back(a.signal);
    OutRef src{gather, 0};
    for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
        int fk = c.fork(name + ".T" + std::to_string(i), name);
        c.connect(src, {fk, 0});
        c.connect({fk, 0}, targets[i]);
        src = {fk, 1};
    }
    c.connect(src, targets.back());
    return g;
}

// One bit: a flip-flop at W whose branches reach the passive part at E on the
// opposite branches, and the paired active part at R choosing out0 or out1.
struct OneBitMemory {
    std::string name;
    FlipFlop w;
    MemoryGroup e;  // passive at E, active at R
    PortRef W, R;
    OutRef E;
    std::array<OutRef, 2> out;

    int bit(const Circuit& c) const { return w.selected(c); }
    bool consistent(const Circuit& c) const {
        int b = w.selected(c);
        return e.passive.selected(c) == b && e.actives[0].selected(c) == b;
    }
};

inline OneBitMemory build_one_bit_memory(Circuit& c, const std::string& name, int bit) {
    OneBitMemory m;
    m.name = name;
    m.w = build_flipflop(c, name + ".W", bit);
    m.e = build_memory_group(c, name + ".E", bit, {name + ".R"});
    c.connect(m.w.out[0], m.e.passive.in[1]);
    c.connect(m.w.out[1], m.e.passive.in[0]);
    m.W = m.w.in;
    m.E = m.e.passive.exit;
    m.R = m.e.actives[0].in;
    m.out = m.e.actives[0].out;
    return m;
}

// Crossing of two tracks: one of them is turned mauve, both are merged by a
// fixed switch, and a fork with a blue and a mauve filter separates them again.
struct Crossing {
    PortRef a_in, d_in;  // a exits at c, d exits at b
    OutRef c_out, b_out;
};

inline Crossing build_crossing(Circuit& cir, const std::string& name) {
    Crossing x;
    int conv_in = cir.converter(name + ".to-mauve", name, Color::mauve);
    int merge = cir.merge(name + ".merge", name);
    int fork = cir.fork(name + ".fork", name);
    int fb = cir.filter(name + ".blue", name, Color::blue);
    int fm = cir.filter(name + ".mauve", name, Color::mauve);
    int conv_out = cir.converter(name + ".to-blue", name, Color::blue);
    cir.connect({conv_in, 0}, {merge, 1});
    cir.connect({merge, 0}, {fork, 0});
    cir.connect({fork, 0}, {fb, 0});
    cir.connect({fork, 1}, {fm, 0});
    cir.connect({fm, 0}, {conv_out, 0});
    x.a_in = {merge, 0};
    x.d_in = {conv_in, 0};
    x.c_out = {fb, 0};
    x.b_out = {conv_out, 0};
    return x;
}

// ---- single-component benches -------------------------------------------------

enum class Gate { out0, out1, E };

inline const char* to_string(Gate g) { return g == Gate::out0 ? "out0" : g == Gate::out1 ? "out1" : "E"; }

struct OneBitMemoryBench {
    Circuit c;
    OneBitMemory m;
    int t0, t1, te;
    Fuel fuel{1'000'000};

    explicit OneBitMemoryBench(int bit) {
        m = build_one_bit_memory(c, "m", bit);
        t0 = c.terminal("out0");
        t1 = c.terminal("out1");
        te = c.terminal("E");
        c.connect(m.out[0], {t0, 0});
        c.connect(m.out[1], {t1, 0});
        c.connect(m.E, {te, 0});
    }
    int bit() const { return m.bit(c); }
    Gate gate(int t) const { return t == t0 ? Gate::out0 : t == t1 ? Gate::out1 : Gate::E; }
};

inline Gate obm_read(OneBitMemoryBench& b) { return b.gate(b.c.run(b.m.R, Color::blue, b.fuel).terminal); }
inline Gate obm_write(OneBitMemoryBench& b) { return b.gate(b.c.run(b.m.W, Color::blue, b.fuel).terminal); }

struct FlipFlopBench {
    Circuit c;
    FlipFlop f;
    std::array<int, 2> t{};
    Fuel fuel{1'000'000};

    explicit FlipFlopBench(int selected) {
        f = build_flipflop(c, "ff", selected);
        for (int b = 0; b < 2; ++b) {
            t[b] = c.terminal("branch" + std::to_string(b));
            c.connect(f.out[b], {t[b], 0});
        }
    }
    int selected() const { return f.selected(c); }
};

// returns the branch taken; the selection toggles
inline int flipflop_cross(FlipFlopBench& b) { return b.c.run(b.f.in, Color::blue, b.fuel).terminal == b.t[0] ? 0 : 1; }

struct MemorySwitchBench {
    Circuit c;
    MemoryGroup g;
    std::array<int, 2> t{};
    int exit;
    Fuel fuel{1'000'000};

    explicit MemorySwitchBench(int selected) {
        g = build_memory_group(c, "sw", selected, {"sw.active"});
        for (int b = 0; b < 2; ++b) {
            t[b] = c.terminal("branch" + std::to_string(b));
            c.connect(g.actives[0].out[b], {t[b], 0});
        }
        exit = c.terminal("a");
        c.connect(g.passive.exit, {exit, 0});
    }
    int active_selected() const { return g.actives[0].selected(c); }
    int passive_selected() const { return g.passive.selected(c); }
    void passive_cross(int branch) { c.run(g.passive.in.at(branch), Color::blue, fuel); }
    int active_cross() { return c.run(g.actives[0].in, Color::blue, fuel).terminal == t[0] ? 0 : 1; }
};

// a passive crossing through `passive_entry`, then an active crossing; returns the branch it took
inline int memory_pair_cross(MemorySwitchBench& b, int passive_entry) {
    b.passive_cross(passive_entry);
    return b.active_cross();
}

// ---- register machine ------------------------------------------------------------

enum class Op { inc, dec, halt };

struct Instruction {
    Op op = Op::halt;
    int reg = 0;
    int next = -1;
    int on_zero = -1;
    std::string label;
};

struct ProgramError : std::runtime_error {
    ProgramError(int line, const std::string& what) : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

struct MachineProgram {
    std::vector<Instruction> code;
};

// INC r<k> -> <label> | DEC r<k> -> <label> | Z:<label> | HALT, with `name:` labels
inline MachineProgram parse_program(std::istream& in) {
    struct Raw {
        Instruction ins;
        std::string next, zero;
        int line;
    };
    std::vector<Raw> raw;
    std::map<std::string, int> labels;
    std::vector<std::string> waiting;
    std::string line;
    int no = 0;
    auto is_name = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '-'; });
    };
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::vector<std::string> w;
        for (std::string t; ls >> t;) w.push_back(t);
        while (!w.empty() && w[0].size() > 1 && w[0].back() == ':') {
            std::string l = w[0].substr(0, w[0].size() - 1);
            if (!is_name(l)) throw ProgramError(no, "bad label `" + l + "`");
            if (labels.count(l) || std::count(waiting.begin(), waiting.end(), l)) throw ProgramError(no, "label `" + l + "` defined twice");
            waiting.push_back(l);
            w.erase(w.begin());
        }
        if (w.empty()) continue;
        Raw r{{}, {}, {}, no};
        auto reg = [&](const std::string& s) {
            if (s == "r0") return 0;
            if (s == "r1") return 1;
            throw ProgramError(no, "register must be r0 or r1, got `" + s + "`");
        };
        if (w[0] == "HALT" && w.size() == 1) {
            r.ins.op = Op::halt;
        } else if (w[0] == "INC" && w.size() == 4 && w[2] == "->") {
            r.ins.op = Op::inc;
            r.ins.reg = reg(w[1]);
            r.next = w[3];
        } else if (w[0] == "DEC" && w.size() == 6 && w[2] == "->" && w[4] == "|" && w[5].rfind("Z:", 0) == 0) {
            r.ins.op = Op::dec;
            r.ins.reg = reg(w[1]);
            r.next = w[3];
            r.zero = w[5].substr(2);
        } else {
            throw ProgramError(no, "cannot read `" + line + "`");
        }
        int idx = static_cast<int>(raw.size());
        for (auto& l : waiting) labels[l] = idx;
        if (!waiting.empty()) r.ins.label = waiting.front();
        waiting.clear();
        raw.push_back(std::move(r));
    }
    if (!waiting.empty()) throw ProgramError(no, "label `" + waiting.front() + "` is not followed by an instruction");
    if (raw.empty()) throw ProgramError(no, "empty program");
    MachineProgram p;
    for (auto& r : raw) {
        auto target = [&](const std::string& l) {
            auto it = labels.find(l);
            if (it == labels.end()) throw ProgramError(r.line, "unknown label `" + l + "`");
            return it->second;
        };
        if (r.ins.op != Op::halt) r.ins.next = target(r.next);
        if (r.ins.op == Op::dec) r.ins.on_zero = target(r.zero);
        p.code.push_back(r.ins);
    }
    return p;
}

inline std::string format_program(const MachineProgram& p) {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.code.size(); ++i) {
        const auto& in = p.code[i];
        os << "L" << i << ": ";
        if (in.op == Op::halt) os << "HALT";
        if (in.op == Op::inc) os << "INC r" << in.reg << " -> L" << in.next;
        if (in.op == Op::dec) os << "DEC r" << in.reg << " -> L" << in.next << " | Z:L" << in.on_zero;
        os << "\n";
    }
    return os.str();
}

struct InterpreterResult {
    bool halted = false;
    long long r0 = 0, r1 = 0;
    long steps = 0;
    int pc = 0;
};

// the plain semantics, for comparison
inline InterpreterResult interpret(const MachineProgram& p, long long r0, long long r1, long max_steps) {
    InterpreterResult s{false, r0, r1, 0, 0};
    while (s.steps < max_steps) {
        const Instruction& in = p.code.at(s.pc);
        if (in.op == Op::halt) {
            s.halted = true;
            return s;
        }
        long long& r = in.reg == 0 ? s.r0 : s.r1;
        if (in.op == Op::inc) {
            ++r;
            s.pc = in.next;
        } else if (r > 0) {
            --r;
            s.pc = in.next;
        } else {
            s.pc = in.on_zero;
        }
        ++s.steps;
    }
    return s;
}

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InstrType { inc, dec };

// D_S, the D_I and D_D unit chains and the register units of one register
class RegisterSide {
public:
    struct DUnit {
        int instr;
        OneBitMemory m;
        FlipFlop a;      // outbound to the register first, then back to the program
        PortRef entry;   // arrival from the program
        MemoryGroup zd;  // D_D only: passive Z/D with actives B and C
    };
    struct RegUnit {
        OneBitMemory m;
        MemoryGroup p;  // passive Ii/Di with actives S0 and So
        int write_merge;
        int ret_merge;
        std::array<int, 2> next_term;  // placeholders for the unit after this one
    };

    RegisterSide(Circuit& c, int reg, const std::vector<int>& incs, const std::vector<int>& decs, long long value,
                 std::size_t max_units)
        : c_(c), reg_(reg), max_units_(max_units) {
        std::string n = "r" + std::to_string(reg);
        name_ = n;
        // D_S: passive part at the I/D entries, active A, B, C, E; M holds 1 while the last type is increment
        ds_ = build_memory_group(c, n + ".DS", 0, {n + ".DS.A", n + ".DS.B", n + ".DS.C", n + ".DS.E"});
        dsm_ = build_one_bit_memory(c, n + ".DS.M", 1);
        c.connect(ds_.passive.exit, dsm_.R);
        auto& A = ds_.actives[0];
        auto& B = ds_.actives[1];
        auto& C = ds_.actives[2];
        auto& E = ds_.actives[3];
        c.connect(dsm_.out[1], A.in);
        c.connect(dsm_.out[0], B.in);
        int wm = c.merge(n + ".DS.W-merge", n + ".DS");
        c.connect(A.out[1], {wm, 0});
        c.connect(B.out[0], {wm, 1});
        c.connect({wm, 0}, dsm_.W);
        int s1 = c.merge(n + ".DS.sigma1", n + ".DS");
        int s2 = c.merge(n + ".DS.sigma2", n + ".DS");
        c.connect(A.out[0], {s1, 0});
        c.connect(B.out[1], {s1, 1});
        c.connect({s1, 0}, {s2, 0});
        c.connect(dsm_.E, {s2, 1});
        c.connect({s2, 0}, C.in);

        // register units
        ds_c_out_ = C.out;
        ds_e_in_ = E.in;
        long long need = std::max<long long>(value + 1, 1);
        for (long long k = 0; k < need; ++k) add_reg_unit(k < value ? 1 : 0);

        // D_I
        std::optional<OutRef> to_reg;
        PortRef ret_in = {-1, 0};
        for (std::size_t u = 0; u < incs.size(); ++u) {
            DUnit d = build_dunit(n + ".DI" + std::to_string(u), incs[u], false);
            if (u == 0) ret_in = d.m.R;
            di_.push_back(std::move(d));
        }
        chain_dunits(di_, ds_.passive.in[0]);
        for (std::size_t u = 0; u < di_.size(); ++u) {
            int out_prog = c.terminal("prog:" + std::to_string(di_[u].instr) + ":next");
            c.connect(di_[u].a.out[1], {out_prog, 0});
            if (u + 1 < di_.size()) c.connect(di_[u].m.out[0], di_[u + 1].m.R);
            else c.connect(di_[u].m.out[0], {c.terminal(n + ".DI.end"), 0});
        }
        if (!di_.empty()) c.connect(E.out[0], di_[0].m.R);
        else c.connect(E.out[0], {c.terminal(n + ".DI.missing"), 0});

        // D_D
        for (std::size_t u = 0; u < decs.size(); ++u) dd_.push_back(build_dunit(n + ".DD" + std::to_string(u), decs[u], true));
        chain_dunits(dd_, ds_.passive.in[1]);
        for (std::size_t u = 0; u < dd_.size(); ++u) {
            auto& d = dd_[u];
            c.connect(d.a.out[1], d.zd.actives[1].in);
            c.connect(d.zd.actives[1].out[0], {c.terminal("prog:" + std::to_string(d.instr) + ":zero"), 0});
            c.connect(d.zd.actives[1].out[1], {c.terminal("prog:" + std::to_string(d.instr) + ":next"), 0});
            if (u + 1 < dd_.size()) {
                c.connect(d.zd.actives[0].out[0], dd_[u + 1].zd.passive.in[0]);
                c.connect(d.zd.actives[0].out[1], dd_[u + 1].zd.passive.in[1]);
            } else {
                int end = c.terminal(n + ".DD.end");
                c.connect(d.zd.actives[0].out[0], {end, 0});
                c.connect(d.zd.actives[0].out[1], {end, 0});
            }
        }
        if (!dd_.empty()) {
            c.connect(E.out[1], dd_[0].zd.passive.in[1]);
            c.connect(z_track_, dd_[0].zd.passive.in[0]);
        } else {
            c.connect(E.out[1], {c.terminal(n + ".DD.missing"), 0});
            c.connect(z_track_, {c.terminal(n + ".Z.missing"), 0});
        }
        (void)ret_in;
    }

    // entry port of the D_I or D_D unit of an instruction
    PortRef entry(int instr) const {
        for (auto& d : di_)
            if (d.instr == instr) return d.entry;
        for (auto& d : dd_)
            if (d.instr == instr) return d.entry;
        throw std::out_of_range("no dispatcher unit for instruction " + std::to_string(instr));
    }

    // grows the register when a token reaches the placeholder past the last unit
    std::optional<PortRef> on_terminal(int term) {
        for (int b = 0; b < 2; ++b)
            if (!units_.empty() && units_.back().next_term[b] == term) {
                add_reg_unit(0);
                c_.note("extend", name_ + ".U" + std::to_string(units_.size() - 1), name_, Color::blue,
                        "register unit added");
                return units_.back().p.passive.in[b];
            }
        return std::nullopt;
    }

    long long value() const {
        long long v = 0;
        while (v < static_cast<long long>(units_.size()) && units_[v].m.bit(c_) == 1) ++v;
        return v;
    }

    // 1s then 0s, every memory self-consistent
    bool prefix_valid() const {
        bool zero = false;
        for (auto& u : units_) {
            if (!u.m.consistent(c_) || !u.p.consistent(c_)) return false;
            if (u.m.bit(c_) == 0) zero = true;
            else if (zero) return false;
        }
        return true;
    }

    std::vector<int> bits() const {
        std::vector<int> b;
        for (auto& u : units_) b.push_back(u.m.bit(c_));
        return b;
    }

    // every dispatcher unit at 0 with its flip-flop towards the register; D_S agrees with one type
    std::vector<std::string> dispatcher_problems() const {
        std::vector<std::string> out;
        for (auto* chain : {&di_, &dd_})
            for (auto& d : *chain) {
                if (d.m.bit(c_) != 0) out.push_back(d.m.name + " holds 1");
                if (!d.m.consistent(c_)) out.push_back(d.m.name + " is inconsistent");
                if (d.a.selected(c_) != 0) out.push_back(d.a.name + " does not point to the register");
                if (chain == &dd_ && !d.zd.consistent(c_)) out.push_back(d.zd.passive.name + " disagrees with B/C");
            }
        if (!ds_.consistent(c_)) out.push_back(name_ + ".DS actives disagree with the passive part");
        if (!dsm_.consistent(c_)) out.push_back(dsm_.name + " is inconsistent");
        if (dsm_.bit(c_) != (ds_.selected(c_) == 0 ? 1 : 0)) out.push_back(dsm_.name + " disagrees with the last type");
        return out;
    }

    InstrType last_type() const { return ds_.selected(c_) == 0 ? InstrType::inc : InstrType::dec; }
    std::size_t unit_count() const { return units_.size(); }
    const std::vector<DUnit>& inc_units() const { return di_; }
    const std::vector<DUnit>& dec_units() const { return dd_; }
    const std::string& name() const { return name_; }

    // named selections of every switch, for change logging
    void snapshot(std::map<std::string, int>& s) const {
        auto mem = [&](const OneBitMemory& m) { s[m.name] = m.bit(c_); };
        auto grp = [&](const MemoryGroup& g) {
            s[g.passive.name] = g.passive.selected(c_);
            for (auto& a : g.actives) s[a.name] = a.selected(c_);
        };
        grp(ds_);
        mem(dsm_);
        for (auto* chain : {&di_, &dd_})
            for (auto& d : *chain) {
                mem(d.m);
                s[d.a.name] = d.a.selected(c_);
                if (chain == &dd_) grp(d.zd);
            }
        for (auto& u : units_) {
            mem(u.m);
            grp(u.p);
        }
    }

private:
    DUnit build_dunit(const std::string& n, int instr, bool dec) {
        DUnit d{instr, build_one_bit_memory(c_, n + ".M", 0), build_flipflop(c_, n + ".A", 0), {}, {}};
        int wm = c_.merge(n + ".W-merge", n);
        c_.connect({wm, 0}, d.m.W);
        c_.connect(d.m.out[1], {wm, 1});
        c_.connect(d.m.E, d.a.in);
        d.entry = {wm, 0};
        if (dec) {
            d.zd = build_memory_group(c_, n + ".ZD", 1, {n + ".B", n + ".C"});
            c_.connect(d.zd.passive.exit, d.m.R);
            // the zero/done memory feeds the unit's R gate, so the chain enters through it
            c_.connect(d.m.out[0], d.zd.actives[0].in);
        }
        return d;
    }

    // outbound: every unit's flip-flop towards the register joins one track to D_S
    void chain_dunits(std::vector<DUnit>& units, PortRef ds_entry) {
        if (units.empty()) return;
        OutRef prev{-1, 0};
        for (std::size_t u = units.size(); u-- > 0;) {
            if (prev.element < 0) {
                prev = units[u].a.out[0];
                continue;
            }
            int m = c_.merge(units[u].m.name + ".to-register", name_);
            c_.connect(units[u].a.out[0], {m, 0});
            c_.connect(prev, {m, 1});
            prev = {m, 0};
        }
        c_.connect(prev, ds_entry);
    }

    void add_reg_unit(int bit) {
        if (units_.size() >= max_units_) throw CapacityError("register " + name_ + " exceeds " + std::to_string(max_units_) + " units");
        std::size_t k = units_.size();
        std::string n = name_ + ".U" + std::to_string(k);
        RegUnit u{build_one_bit_memory(c_, n + ".M", bit), build_memory_group(c_, n + ".P", 0, {n + ".S0", n + ".So"}), -1, -1, {}};
        auto& S0 = u.p.actives[0];
        auto& So = u.p.actives[1];
        c_.connect(u.p.passive.exit, u.m.R);
        c_.connect(u.m.out[0], S0.in);
        c_.connect(u.m.out[1], So.in);
        u.write_merge = c_.merge(n + ".W-merge", n);
        c_.connect({u.write_merge, 0}, u.m.W);
        c_.connect(S0.out[0], {u.write_merge, 0});
        u.ret_merge = c_.merge(n + ".return", n);
        c_.connect(u.m.E, {u.ret_merge, 0});
        for (int b = 0; b < 2; ++b) {
            u.next_term[b] = c_.terminal(n + ".next" + std::to_string(b));
            c_.connect(So.out[b], {u.next_term[b], 0});
        }
        if (k == 0) {
            // unit 0 is entered from C of D_S; its decrement-on-zero branch is the Z-track
            c_.connect(ds_c_out_[0], u.p.passive.in[0]);
            c_.connect(ds_c_out_[1], u.p.passive.in[1]);
            z_track_ = S0.out[1];
            c_.connect({u.ret_merge, 0}, ds_e_in_);
        } else {
            RegUnit& prev = units_[k - 1];
            // the previous unit's placeholders now lead here
            c_.reconnect(prev.p.actives[1].out[0], u.p.passive.in[0]);
            c_.reconnect(prev.p.actives[1].out[1], u.p.passive.in[1]);
            c_.connect(S0.out[1], {prev.write_merge, 1});
            c_.connect({u.ret_merge, 0}, {prev.ret_merge, 1});
        }
        units_.push_back(std::move(u));
    }

    Circuit& c_;
    int reg_;
    std::string name_;
    std::size_t max_units_;
    MemoryGroup ds_;
    OneBitMemory dsm_;
    std::array<OutRef, 2> ds_c_out_;
    PortRef ds_e_in_;
    OutRef z_track_;
    std::vector<DUnit> di_, dd_;
    std::vector<RegUnit> units_;
};

struct MachineResult {
    bool halted = false;
    long long r0 = 0, r1 = 0;
    long instructions = 0;
    long events = 0;
    int pc = 0;
    std::string verdict;
    std::vector<std::string> problems;  // invariant or ordering failures seen between instructions
    std::vector<Event> log;
};

struct MachineOptions {
    long fuel = 1'000'000;
    bool keep_log = false;
    bool check = true;
    Policy policy = Policy::signals_first;
    std::size_t max_units = 1u << 16;
};

// the whole circuit of a program: one RegisterSide per register, program tracks as terminals
class Machine {
public:
    Machine(const MachineProgram& p, long long r0, long long r1, const MachineOptions& o = {})
        : prog_(p), opt_(o), fuel_{o.fuel} {
        if (r0 < 0 || r1 < 0) throw std::invalid_argument("register values must be >= 0");
        for (int r = 0; r < 2; ++r) {
            std::vector<int> incs, decs;
            for (std::size_t i = 0; i < p.code.size(); ++i) {
                const auto& in = p.code[i];
                if (in.op == Op::halt || in.reg != r) continue;
                (in.op == Op::inc ? incs : decs).push_back(static_cast<int>(i));
            }
            sides_.push_back(std::make_unique<RegisterSide>(c_, r, incs, decs, r == 0 ? r0 : r1, o.max_units));
        }
        c_.set_hook([this](Circuit&, int term) -> std::optional<PortRef> {
            for (auto& s : sides_)
                if (auto p = s->on_terminal(term)) return p;
            return std::nullopt;
        });
        if (o.keep_log) c_.set_log(&log_);
    }

    struct Route {
        int instr;
        bool zero;
    };

    // one instruction through its dispatcher unit, D_S, the register and back
    Route execute(int instr) {
        const Instruction& in = prog_.code.at(instr);
        if (in.op == Op::halt) throw std::invalid_argument("HALT has no circuit");
        std::map<std::string, int> before;
        if (opt_.keep_log) snapshot(before);
        RunResult r = c_.run(sides_[in.reg]->entry(instr), Color::blue, fuel_, opt_.policy);
        for (auto& v : r.violations) problems_.push_back("instruction " + std::to_string(instr) + ": " + v);
        if (opt_.keep_log) {
            std::map<std::string, int> after;
            snapshot(after);
            for (auto& [k, v] : after) {
                auto it = before.find(k);
                if (it == before.end() || it->second != v)
                    c_.note("switch", k, {}, Color::blue,
                            (it == before.end() ? std::string("new") : std::to_string(it->second)) + "->" + std::to_string(v));
            }
        }
        const std::string& t = r.terminal_name;
        auto a = t.find(':'), b = t.rfind(':');
        if (t.rfind("prog:", 0) != 0 || a == b) throw CircuitError("locomotive left at " + t);
        return {std::stoi(t.substr(a + 1, b - a - 1)), t.substr(b + 1) == "zero"};
    }

    MachineResult run() {
        MachineResult res;
        int pc = 0;
        // values after the last completed instruction; a run cut mid-instruction reports these
        long long done0 = sides_[0]->value(), done1 = sides_[1]->value();
        try {
            while (true) {
                const Instruction& in = prog_.code.at(pc);
                if (in.op == Op::halt) {
                    res.halted = true;
                    res.verdict = "halted";
                    break;
                }
                Route route = execute(pc);
                if (route.instr != pc) problems_.push_back("instruction " + std::to_string(pc) + " returned to " + std::to_string(route.instr));
                pc = route.zero ? in.on_zero : in.next;
                ++res.instructions;
                done0 = sides_[0]->value();
                done1 = sides_[1]->value();
                if (opt_.check) check_between(pc);
            }
        } catch (const FuelExhausted&) {
            res.verdict = "fuel exhausted";
        }
        res.pc = pc;
        res.r0 = done0;
        res.r1 = done1;
        res.events = fuel_.used;
        res.problems = problems_;
        res.log = log_;
        return res;
    }

    const RegisterSide& side(int r) const { return *sides_.at(r); }
    const Circuit& circuit() const { return c_; }
    long events() const { return fuel_.used; }
    const std::vector<std::string>& problems() const { return problems_; }

private:
    void snapshot(std::map<std::string, int>& s) const {
        for (auto& side : sides_) side->snapshot(s);
    }
    void check_between(int pc) {
        for (auto& s : sides_) {
            for (auto& p : s->dispatcher_problems()) problems_.push_back("before L" + std::to_string(pc) + ": " + p);
            if (!s->prefix_valid()) problems_.push_back("before L" + std::to_string(pc) + ": register " + s->name() + " is not a prefix of 1s");
        }
    }

    MachineProgram prog_;
    MachineOptions opt_;
    Fuel fuel_;
    Circuit c_;
    std::vector<std::unique_ptr<RegisterSide>> sides_;
    std::vector<Event> log_;
    std::vector<std::string> problems_;
};

inline MachineResult run_machine(const MachineProgram& p, long long r0, long long r1, const MachineOptions& o = {}) {
    Machine m(p, r0, r1, o);
    return m.run();
}

// ---- register-only bench --------------------------------------------------------

enum class DecOutcome { done, zero };

// a register with D_S and stub dispatchers: one increment and one decrement instruction
struct RegisterBench {
    MachineProgram prog;
    Machine machine;

    explicit RegisterBench(long long value)
        : prog{{Instruction{Op::inc, 0, 2, -1, "inc"}, Instruction{Op::dec, 0, 2, 2, "dec"}, Instruction{Op::halt, 0, -1, -1, "end"}}},
          machine(prog, value, 0) {}

    long long value() const { return machine.side(0).value(); }
    bool prefix_valid() const { return machine.side(0).prefix_valid(); }
    std::vector<int> bits() const { return machine.side(0).bits(); }
};

// returns the index of the unit that went from 0 to 1
inline long long register_increment(RegisterBench& b) {
    auto before = b.bits();
    b.machine.execute(0);
    auto after = b.bits();
    for (std::size_t k = 0; k < after.size(); ++k)
        if (after[k] == 1 && (k >= before.size() || before[k] == 0)) return static_cast<long long>(k);
    throw std::logic_error("increment changed no unit");
}

inline DecOutcome register_decrement(RegisterBench& b) {
    return b.machine.execute(1).zero ? DecOutcome::zero : DecOutcome::done;
}

}  // namespace hca::railway
