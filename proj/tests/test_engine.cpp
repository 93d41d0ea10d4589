#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hca/engine.hpp"
#include "hca/gadgets.hpp"

using namespace hca;

namespace {
const TransitionTable& table() {
    static TransitionTable t = load_table(data_dir() / "table.txt");
    return t;
}
std::vector<int> entries(const std::vector<TraceRow>& rows) {
    std::vector<int> out;
    for (auto& r : rows) out.push_back(r.entry ? *r.entry : -1);
    return out;
}
std::vector<int> sigmas(const std::vector<TraceRow>& rows) {
    std::vector<int> out;
    for (auto& r : rows) out.push_back(r.sigma);
    return out;
}
}  // namespace

TEST(NeighborhoodWeight, AllWhite) {
    Configuration c(shared_window(2));
    EXPECT_EQ(neighborhood_weight(c, TileAddress::center()), 0);
}

TEST(NeighborhoodWeight, IdleTrackCell) {
    auto g = build_gadget("joined-path");
    auto c = idle_configuration(g);
    EXPECT_EQ(neighborhood_weight(c, *g.observe), 2);
}

TEST(NeighborhoodWeight, FixedSwitchCenter) {
    auto g = build_gadget("fixed-switch");
    auto c = idle_configuration(g);
    EXPECT_EQ(neighborhood_weight(c, TileAddress::center()), 37);
}

TEST(Step, AllWhiteIsFixed) {
    Configuration c(shared_window(3));
    auto n = step(c, table(), DefaultRule::strict);
    EXPECT_TRUE(n.same_states(c));
    EXPECT_EQ(n.generation(), 1);
}

TEST(Step, IdleGadgetsAreFixpoints) {
    for (const auto& k : gadget_kinds()) {
        auto c = idle_configuration(build_gadget(k));
        EXPECT_TRUE(step(c, table(), DefaultRule::quiescent).same_states(c)) << k;
    }
}

TEST(Step, LocomotiveAdvancesOneCell) {
    for (const char* kind : {"track-line", "track-arc"}) {
        auto g = build_gadget(kind);
        for (auto& [name, path] : g.paths) {
            const auto& inj = g.injection(name);
            auto it = std::find(path.begin(), path.end(), inj.front);
            ASSERT_NE(it, path.end());
            ASSERT_EQ(*(it - 1), inj.rear);
            ASSERT_NE(it + 1, path.end());
            auto c = inject(g, name, CellState::B);
            auto n = step(c, table(), g.mode);
            EXPECT_EQ(n.get(*(it + 1)), CellState::B) << kind << " " << name;
            EXPECT_EQ(n.get(*it), CellState::R) << kind << " " << name;
            EXPECT_EQ(n.get(inj.rear), CellState::Y) << kind << " " << name;
        }
    }
}

TEST(RunTrace, ForkCenterBlue) {
    auto g = build_gadget("fork");
    auto c = inject(g, "in", CellState::B);
    auto rows = run_trace(c, table(), {4, 1}, 7, g.mode);
    EXPECT_EQ(entries(rows), (std::vector<int>{11, 11, 12, 13, 14, 15, 11, 11}));
}

TEST(RunTrace, FixedSwitchMauveSums) {
    auto g = build_gadget("fixed-switch");
    auto c = inject(g, "left", CellState::M);
    auto rows = run_trace(c, table(), TileAddress::center(), 5, g.mode);
    EXPECT_EQ(sigmas(rows), (std::vector<int>{37, 37, 65, 76, 48, 37}));
}

TEST(RunTrace, IdleTrackCellIsConstant) {
    auto g = build_gadget("joined-path");
    auto c = idle_configuration(g);
    for (auto& r : run_trace(c, table(), *g.observe, 7)) {
        EXPECT_EQ(r.state, CellState::Y);
        EXPECT_EQ(r.sigma, 2);
        EXPECT_EQ(r.entry, 1);
    }
}

TEST(RunTrace, AdvancesStepsPlusOne) {
    Configuration c(shared_window(1));
    run_trace(c, table(), TileAddress::center(), 3);
    EXPECT_EQ(c.generation(), 4);
    EXPECT_THROW(run_trace(c, table(), TileAddress::center(), -1), std::invalid_argument);
}

TEST(DefaultRules, UnlistedCells) {
    Configuration c(shared_window(2));
    c.set({1, 1}, CellState::V);  // lone V: (V, 0) is not listed; its neighbours see (W, 34)
    EXPECT_THROW(step(c, table(), DefaultRule::strict), StepError);
    EXPECT_THROW(step(c, table(), DefaultRule::quiescent), StepError);
    auto n = step(c, table(), DefaultRule::vanish);
    EXPECT_EQ(n.get({1, 1}), CellState::W);
}

TEST(DefaultRules, StepErrorNamesTheCell) {
    Configuration c(shared_window(2));
    c.set({1, 1}, CellState::V);
    try {
        step(c, table(), DefaultRule::quiescent);
        FAIL();
    } catch (const StepError& e) {
        EXPECT_EQ(e.cell, (TileAddress{1, 1}));
        EXPECT_EQ(e.state, CellState::V);
        EXPECT_EQ(e.sigma, 0);
    }
}

TEST(DefaultRules, QuiescentKeepsWhiteWhite) {
    // a W cell next to an idle Y track sees (W, 1) or (W, 2); unlisted ones stay W in quiescent mode
    auto g = build_gadget("track-line");
    auto c = idle_configuration(g);
    EXPECT_NO_THROW(step(c, table(), DefaultRule::quiescent));
}

TEST(Parallel, WorkersGiveTheSameResult) {
    auto g = build_gadget("fork");
    auto a = inject(g, "in", CellState::M);
    auto b = a;
    for (int k = 0; k < 12; ++k) {
        a = step(a, table(), g.mode, 1);
        b = step(b, table(), g.mode, 4);
        ASSERT_TRUE(a.same_states(b)) << "step " << k;
    }
}

TEST(Parallel, LowestBlockErrorIsReported) {
    Configuration c(shared_window(3));
    c.set({1, 1}, CellState::V);
    c.set({5, 9}, CellState::V);
    TileAddress first, again;
    try { step(c, table(), DefaultRule::quiescent, 1); } catch (const StepError& e) { first = e.cell; }
    try { step(c, table(), DefaultRule::quiescent, 8); } catch (const StepError& e) { again = e.cell; }
    EXPECT_EQ(first, again);
}

TEST(Order, PermutedEvaluationMatches) {
    auto g = build_gadget("filter-blue");
    auto c = inject(g, "in", CellState::B);
    std::vector<int> order(c.states().size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(3);
    for (int k = 0; k < 10; ++k) {
        std::shuffle(order.begin(), order.end(), rng);
        auto a = step(c, table(), g.mode);
        auto b = step_in_order(c, table(), g.mode, order);
        ASSERT_TRUE(a.same_states(b));
        c = a;
    }
}

TEST(History, KeepsLastGenerations) {
    History h(2);
    Configuration c(shared_window(1));
    for (int k = 0; k < 5; ++k) {
        c.set_generation(k);
        h.push(c);
    }
    ASSERT_EQ(h.size(), 2u);
    EXPECT_EQ(h[0].generation(), 3);
    EXPECT_EQ(h.back().generation(), 4);
    History none(0);
    none.push(c);
    EXPECT_EQ(none.size(), 0u);
}

TEST(Support, Radius) {
    Configuration c(shared_window(3));
    EXPECT_EQ(support_radius(c), -1);
    c.set({2, 5}, CellState::Y);
    EXPECT_EQ(support_radius(c), 3);
    EXPECT_EQ(c.support().size(), 1u);
}
