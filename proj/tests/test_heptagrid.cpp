#include <gtest/gtest.h>

#include <set>

#include "hca/heptagrid.hpp"

using namespace hca;

TEST(Fibonacci, BaseCasesAndUnroll) {
    EXPECT_EQ(fibonacci(0), 1u);
    EXPECT_EQ(fibonacci(1), 1u);
    EXPECT_EQ(fibonacci(5), 8u);
    EXPECT_THROW(fibonacci(92), std::overflow_error);
}

TEST(CircleSize, SmallRadii) {
    EXPECT_EQ(circle_size(0), 1u);
    EXPECT_EQ(circle_size(2), 21u);
    EXPECT_EQ(circle_size(3), 56u);
}

TEST(SectorTree, SonsFromTheTable) {
    EXPECT_EQ(sons(1), (std::vector<std::int64_t>{2, 3, 4}));
    EXPECT_EQ(sons(2), (std::vector<std::int64_t>{5, 6}));
    EXPECT_EQ(sons(33), (std::vector<std::int64_t>{86, 87, 88}));
}

TEST(SectorTree, Colors) {
    EXPECT_EQ(color_of(1), NodeColor::G);
    EXPECT_EQ(color_of(6), NodeColor::O);
    EXPECT_EQ(color_of(13), NodeColor::B);
}

TEST(SectorTree, LevelsFollowFibonacci) {
    const auto& t = sector_tree();
    for (int L = 0; L < 8; ++L) {
        std::int64_t lo = SectorTree::level_start(L), n = SectorTree::level_size(L);
        std::int64_t sons_total = 0;
        for (std::int64_t i = lo; i < lo + n; ++i) {
            EXPECT_EQ(SectorTree::level_of(i), L);
            sons_total += static_cast<std::int64_t>(t.sons(i).size());
            for (auto s : t.sons(i)) EXPECT_EQ(t.father(s), i);
        }
        EXPECT_EQ(sons_total, SectorTree::level_size(L + 1));
    }
}

TEST(SectorTree, SonsAreConsecutive) {
    std::int64_t next = 2;
    for (std::int64_t i = 1; i < 200; ++i)
        for (auto s : sons(i)) EXPECT_EQ(s, next++);
}

TEST(Address, Parse) {
    EXPECT_EQ(parse_address("0"), TileAddress::center());
    EXPECT_EQ(parse_address("3,8"), (TileAddress{3, 8}));
    EXPECT_EQ(parse_address("(7,1)"), (TileAddress{7, 1}));
    EXPECT_FALSE(parse_address("8,1"));
    EXPECT_FALSE(parse_address("1,0"));
    EXPECT_FALSE(parse_address("x"));
}

TEST(Window, RadiusZeroIsOneTile) {
    DiscWindow w(0);
    EXPECT_EQ(w.size(), 1u);
    for (int n : w.tile(0).neighbors) EXPECT_EQ(n, -1);
}

TEST(Window, RadiusOneCenterNeighbours) {
    DiscWindow w(1);
    EXPECT_EQ(w.size(), 8u);
    std::set<TileAddress> got;
    for (auto& n : w.neighbors(TileAddress::center())) {
        ASSERT_TRUE(n);
        got.insert(*n);
    }
    std::set<TileAddress> want;
    for (int s = 1; s <= 7; ++s) want.insert({s, 1});
    EXPECT_EQ(got, want);
}

TEST(Window, RadiusThreeHas85Tiles) { EXPECT_EQ(DiscWindow(3).size(), 85u); }

TEST(Window, RingSizes) {
    DiscWindow w(8);
    const std::size_t want[] = {1, 7, 21, 56, 147, 385, 1008, 2639, 6909};
    for (int r = 0; r <= 8; ++r) EXPECT_EQ(w.ring(r).size(), want[r]) << "ring " << r;
}

TEST(Window, HeadNeighbours) {
    DiscWindow w(3);
    auto n = w.neighbors({1, 1});
    std::vector<TileAddress> got;
    for (auto& a : n) got.push_back(*a);
    std::vector<TileAddress> want{TileAddress::center(), {7, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 2}, {2, 1}};
    EXPECT_EQ(got, want);
}

TEST(Window, BlueNodeHasTwoUpperNeighbours) {
    DiscWindow w(3);
    // (3,2) is a B node: father (3,1) and the father's predecessor (2,1)
    auto n = w.neighbors({3, 2});
    std::vector<TileAddress> got;
    for (auto& a : n) got.push_back(*a);
    std::vector<TileAddress> want{{3, 1}, {2, 1}, {2, 4}, {3, 5}, {3, 6}, {3, 7}, {3, 3}};
    EXPECT_EQ(got, want);
}

TEST(Window, AdjacencyIsSymmetric) {
    DiscWindow w(5);
    for (std::size_t i = 0; i < w.size(); ++i)
        for (int j : w.tile(i).neighbors) {
            if (j < 0) continue;
            const auto& nb = w.tile(j).neighbors;
            EXPECT_NE(std::find(nb.begin(), nb.end(), static_cast<int>(i)), nb.end())
                << to_string(w.tile(i).address) << " / " << to_string(w.tile(j).address);
        }
}

TEST(Window, InnerTilesHaveSevenNeighbours) {
    DiscWindow w(4);
    for (int r = 0; r < 4; ++r)
        for (int s : w.ring(r))
            for (int j : w.tile(s).neighbors) EXPECT_GE(j, 0);
}

TEST(Window, NeighbourRingsDifferByAtMostOne) {
    DiscWindow w(5);
    for (std::size_t i = 0; i < w.size(); ++i)
        for (int j : w.tile(i).neighbors)
            if (j >= 0) EXPECT_LE(std::abs(w.tile(i).ring - w.tile(j).ring), 1);
}

TEST(Window, Distances) {
    DiscWindow w(4);
    EXPECT_EQ(w.distance({2, 5}, {2, 5}), 0);
    EXPECT_EQ(w.distance(TileAddress::center(), {4, 1}), 1);
    EXPECT_EQ(w.distance(TileAddress::center(), {3, 8}), 3);
    EXPECT_EQ(w.distance({3, 8}, TileAddress::center()), 3);
}

TEST(Window, VerticesOnTheHyperboloid) {
    DiscWindow w(6);
    for (const auto& t : w.tiles()) {
        EXPECT_NEAR(minkowski(t.center, t.center), -1.0, 1e-9 * t.center.z * t.center.z);
        for (const auto& v : t.vertices) {
            auto p = to_poincare(v);
            EXPECT_LT(std::hypot(p[0], p[1]), 1.0);
        }
    }
}

TEST(Window, OutsideAddressesAreRejected) {
    DiscWindow w(2);
    EXPECT_FALSE(w.contains({1, 5}));
    EXPECT_THROW(w.require({1, 5}), std::out_of_range);
    EXPECT_THROW(DiscWindow(max_window_radius + 1), CapacityError);
}
