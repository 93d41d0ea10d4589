#pragma once

#include <algorithm>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "heptagrid.hpp"
#include "table.hpp"

namespace hca {

// What happens to a cell whose (state, sigma) is not listed.
//   strict     every unlisted pair is an error
//   quiescent  W stays W, anything else is an error
//   vanish     every unlisted cell becomes W (the table never lists a transition into W)
enum class DefaultRule { strict, quiescent, vanish };

inline const char* to_string(DefaultRule m) {
    switch (m) {
        case DefaultRule::strict: return "strict";
        case DefaultRule::quiescent: return "quiescent";
        case DefaultRule::vanish: return "vanish";
    }
    return "?";
}

inline std::optional<DefaultRule> parse_rule(std::string_view s) {
    if (s == "strict") return DefaultRule::strict;
    if (s == "quiescent") return DefaultRule::quiescent;
    if (s == "vanish") return DefaultRule::vanish;
    return std::nullopt;
}

struct StepError : std::runtime_error {
    TileAddress cell;
    CellState state;
    int sigma;
    long generation;
    StepError(TileAddress c, CellState s, int sig, long gen)
        : std::runtime_error("no entry for cell " + to_string(c) + " in state " + state_letter(s) + " with sigma " +
                             std::to_string(sig) + " at generation " + std::to_string(gen)),
          cell(c), state(s), sigma(sig), generation(gen) {}
};

// a dense state vector over the tiles of a shared window; tiles outside are W forever
class Configuration {
public:
    explicit Configuration(std::shared_ptr<const DiscWindow> w)
        : window_(std::move(w)), states_(window_->size(), CellState::W) {}

    const DiscWindow& window() const { return *window_; }
    std::shared_ptr<const DiscWindow> window_ptr() const { return window_; }
    long generation() const { return generation_; }
    void set_generation(long g) { generation_ = g; }

    CellState get(TileAddress t) const {
        auto s = window_->slot(t);
        return s ? states_[*s] : CellState::W;
    }
    void set(TileAddress t, CellState s) { states_[window_->require(t)] = s; }

    CellState at(int slot) const { return states_[slot]; }
    void set_at(int slot, CellState s) { states_[slot] = s; }
    const std::vector<CellState>& states() const { return states_; }
    std::vector<CellState>& states() { return states_; }

    // non-W cells, in slot order
    std::vector<std::pair<TileAddress, CellState>> support() const {
        std::vector<std::pair<TileAddress, CellState>> out;
        for (std::size_t i = 0; i < states_.size(); ++i)
            if (states_[i] != CellState::W) out.push_back({window_->tile(i).address, states_[i]});
        return out;
    }

    bool same_states(const Configuration& o) const { return states_ == o.states_; }

private:
    std::shared_ptr<const DiscWindow> window_;
    std::vector<CellState> states_;
    long generation_ = 0;
};

inline int neighborhood_weight(const Configuration& c, int slot, const WeightScheme& w = WeightScheme::standard()) {
    int s = 0;
    for (int nb : c.window().tile(slot).neighbors)
        if (nb >= 0) s += w(c.at(nb));
    return s;
}

inline int neighborhood_weight(const Configuration& c, TileAddress t, const WeightScheme& w = WeightScheme::standard()) {
    return neighborhood_weight(c, c.window().require(t), w);
}

// outcome of one cell for one tick; entry is null for the implicit completion
struct CellUpdate {
    CellState next = CellState::W;
    int sigma = 0;
    const TransitionEntry* entry = nullptr;
};

inline CellUpdate update_cell(const Configuration& c, int slot, const TransitionTable& t, DefaultRule rule,
                              const WeightScheme& w = WeightScheme::standard()) {
    CellState cur = c.at(slot);
    int sig = neighborhood_weight(c, slot, w);
    if (const TransitionEntry* e = t.find(cur, sig)) return {e->next, sig, e};
    if (rule == DefaultRule::strict || (rule == DefaultRule::quiescent && cur != CellState::W))
        throw StepError(c.window().tile(slot).address, cur, sig, c.generation());
    return {CellState::W, sig, nullptr};
}

// one synchronous generation, cells visited in the given order
inline Configuration step_in_order(const Configuration& c, const TransitionTable& t, DefaultRule rule,
                                   std::span<const int> order, std::vector<CellUpdate>* updates = nullptr) {
    Configuration n = c;
    if (updates) updates->assign(c.states().size(), {});
    for (int s : order) {
        CellUpdate u = update_cell(c, s, t, rule);
        n.set_at(s, u.next);
        if (updates) (*updates)[s] = u;
    }
    n.set_generation(c.generation() + 1);
    return n;
}

// workers > 1 splits the slots into contiguous blocks; output does not depend on it
inline Configuration step(const Configuration& c, const TransitionTable& t, DefaultRule rule = DefaultRule::quiescent,
                          unsigned workers = 1, std::vector<CellUpdate>* updates = nullptr) {
    const int n = static_cast<int>(c.states().size());
    Configuration out = c;
    if (updates) updates->assign(n, {});
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    std::vector<std::exception_ptr> errs(workers);
    auto run = [&](unsigned k) {
        int lo = static_cast<int>(static_cast<long long>(n) * k / workers);
        int hi = static_cast<int>(static_cast<long long>(n) * (k + 1) / workers);
        try {
            for (int s = lo; s < hi; ++s) {
                CellUpdate u = update_cell(c, s, t, rule);
                out.set_at(s, u.next);
                if (updates) (*updates)[s] = u;
            }
        } catch (...) {
            errs[k] = std::current_exception();
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < workers; ++k) pool.emplace_back(run, k);
        for (auto& th : pool) th.join();
    }
    // lowest failing block first, so the reported error does not depend on thread timing
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    out.set_generation(c.generation() + 1);
    return out;
}

struct TraceRow {
    int time = 0;
    CellState state = CellState::W;
    int sigma = 0;
    std::optional<int> entry;  // empty: implicit completion, no listed entry
};

inline std::string entry_label(const std::optional<int>& e) { return e ? std::to_string(*e) : std::string("w*"); }

// rows for times 0..steps at one cell; c is advanced steps+1 generations
inline std::vector<TraceRow> run_trace(Configuration& c, const TransitionTable& t, TileAddress cell, int steps,
                                       DefaultRule rule = DefaultRule::quiescent) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    int slot = c.window().require(cell);
    std::vector<TraceRow> rows;
    std::vector<CellUpdate> ups;
    for (int k = 0; k <= steps; ++k) {
        CellState cur = c.at(slot);
        Configuration n = step(c, t, rule, 1, &ups);
        const auto& u = ups[slot];
        rows.push_back({k, cur, u.sigma, u.entry ? std::optional<int>(u.entry->id) : std::nullopt});
        c = std::move(n);
    }
    return rows;
}

// keeps the last `depth` generations
class History {
public:
    explicit History(std::size_t depth) : depth_(depth) {}
    void push(const Configuration& c) {
        if (depth_ == 0) return;
        if (buf_.size() == depth_) buf_.pop_front();
        buf_.push_back(c);
    }
    std::size_t size() const { return buf_.size(); }
    const Configuration& operator[](std::size_t i) const { return buf_.at(i); }
    const Configuration& back() const { return buf_.back(); }

private:
    std::size_t depth_;
    std::deque<Configuration> buf_;
};

// largest ring holding a non-W cell, -1 when all W
inline int support_radius(const Configuration& c) {
    int r = -1;
    for (std::size_t i = 0; i < c.states().size(); ++i)
        if (c.at(static_cast<int>(i)) != CellState::W) r = std::max(r, c.window().tile(i).ring);
    return r;
}

}  // namespace hca
