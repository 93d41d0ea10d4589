#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hca {

// (sector, index); sector 0 is the central tile, whose index is 0
struct TileAddress {
    int sector = 0;
    std::int64_t index = 0;

    static constexpr TileAddress center() { return {}; }
    constexpr bool is_center() const { return sector == 0; }
    auto operator<=>(const TileAddress&) const = default;
};

inline std::string to_string(TileAddress t) {
    if (t.is_center()) return "0";
    return "(" + std::to_string(t.sector) + "," + std::to_string(t.index) + ")";
}

// accepts "0", "s,n" and "(s,n)"
inline std::optional<TileAddress> parse_address(std::string_view s) {
    auto trim = [](std::string_view v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
        return v;
    };
    s = trim(s);
    if (s == "0") return TileAddress::center();
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
    auto comma = s.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    auto num = [](std::string_view v, std::int64_t& out) {
        if (v.empty()) return false;
        std::int64_t r = 0;
        for (char c : v) {
            if (c < '0' || c > '9') return false;
            if (r > (INT64_MAX - 9) / 10) return false;
            r = r * 10 + (c - '0');
        }
        out = r;
        return true;
    };
    std::int64_t sec = 0, idx = 0;
    if (!num(trim(s.substr(0, comma)), sec) || !num(trim(s.substr(comma + 1)), idx)) return std::nullopt;
    if (sec < 1 || sec > 7 || idx < 1) return std::nullopt;
    return TileAddress{static_cast<int>(sec), idx};
}

struct TileAddressHash {
    std::size_t operator()(const TileAddress& t) const noexcept {
        return std::hash<std::int64_t>{}(t.index * 8 + t.sector);
    }
};

// f(0) = f(1) = 1
inline std::uint64_t fibonacci(unsigned n) {
    if (n > 91) throw std::overflow_error("fibonacci: f(" + std::to_string(n) + ") exceeds 64 bits");
    std::uint64_t a = 1, b = 1;
    for (unsigned i = 0; i < n; ++i) {
        std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return a;
}

// number of tiles at distance r from the central tile
inline std::uint64_t circle_size(unsigned r) {
    return r == 0 ? 1 : 7 * fibonacci(2 * r - 1);
}

enum class NodeColor : std::uint8_t { B, O, Y, G };

inline char color_letter(NodeColor c) { return "BOYG"[static_cast<int>(c)]; }

// The tree spanning one sector. Level L holds indices [f(2L), f(2L+2)).
// Grown on demand; safe to query from several threads.
class SectorTree {
public:
    SectorTree() {
        color_ = {NodeColor::G, NodeColor::G};  // slot 0 unused
        father_ = {0, 0};
        level_ = {0, 0};
    }

    static std::int64_t level_start(int level) { return static_cast<std::int64_t>(fibonacci(2 * level)); }
    static std::int64_t level_size(int level) { return static_cast<std::int64_t>(fibonacci(2 * level + 1)); }

    static int level_of(std::int64_t index) {
        if (index < 1) throw std::out_of_range("sector tree index must be >= 1");
        int L = 0;
        while (level_start(L + 1) <= index) ++L;
        return L;
    }

    NodeColor color(std::int64_t index) const {
        std::lock_guard lk(mu_);
        ensure(index);
        return color_[index];
    }

    std::int64_t father(std::int64_t index) const {
        std::lock_guard lk(mu_);
        ensure(index);
        return father_[index];
    }

    std::vector<std::int64_t> sons(std::int64_t index) const {
        std::lock_guard lk(mu_);
        ensure(index);
        // sons of the last materialized level live one level further down
        ensure(level_start(level_[index] + 1));
        std::int64_t first = first_son_[index];
        int n = color_[index] == NodeColor::B ? 2 : 3;
        std::vector<std::int64_t> out;
        for (int i = 0; i < n; ++i) out.push_back(first + i);
        return out;
    }

private:
    static constexpr std::array<std::string_view, 4> rules{"BO", "BYO", "BYG", "BYG"};

    void ensure(std::int64_t index) const {
        if (index < 1) throw std::out_of_range("sector tree index must be >= 1");
        while (static_cast<std::int64_t>(color_.size()) <= index) grow();
    }

    // materialize the level after the last complete one
    void grow() const {
        int L = level_.back();
        std::int64_t begin = level_start(L), end = level_start(L + 1);
        first_son_.resize(end, 0);
        for (std::int64_t n = begin; n < end; ++n) {
            first_son_[n] = static_cast<std::int64_t>(color_.size());
            for (char c : rules[static_cast<int>(color_[n])]) {
                color_.push_back(c == 'B' ? NodeColor::B : c == 'O' ? NodeColor::O : c == 'Y' ? NodeColor::Y : NodeColor::G);
                father_.push_back(n);
                level_.push_back(L + 1);
            }
        }
    }

    mutable std::mutex mu_;
    mutable std::vector<NodeColor> color_;
    mutable std::vector<std::int64_t> father_;
    mutable std::vector<int> level_;
    mutable std::vector<std::int64_t> first_son_;
};

inline const SectorTree& sector_tree() {
    static SectorTree tree;
    return tree;
}

inline NodeColor color_of(std::int64_t index) { return sector_tree().color(index); }
inline std::vector<std::int64_t> sons(std::int64_t index) { return sector_tree().sons(index); }

struct HyperPoint {
    double x = 0, y = 0, z = 1;
};

inline double minkowski(const HyperPoint& a, const HyperPoint& b) { return a.x * b.x + a.y * b.y - a.z * b.z; }

inline std::array<double, 2> to_poincare(const HyperPoint& p) { return {p.x / (1 + p.z), p.y / (1 + p.z)}; }

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int max_window_radius = 10;

struct WindowTile {
    TileAddress address;
    int ring = 0;
    HyperPoint center;
    // counterclockwise in the disc; side k joins vertex k and k+1
    std::array<HyperPoint, 7> vertices;
    // slot of the tile across side k, -1 when outside the window.
    // side 0 faces the father (the center for heads); for the central tile side 0 faces sector 1.
    std::array<int, 7> neighbors{};
};

namespace detail {

struct LPoint {
    long double x, y, z;
};

inline long double lmink(const LPoint& a, const LPoint& b) { return a.x * b.x + a.y * b.y - a.z * b.z; }

using Mat3 = std::array<std::array<long double, 3>, 3>;

inline Mat3 identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline Mat3 mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

inline LPoint apply(const Mat3& m, const LPoint& p) {
    return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z, m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
}

// reflection in the geodesic through a and b: p - 2<p,n>/<n,n> n with n orthogonal to both
inline Mat3 mirror_matrix(const LPoint& a, const LPoint& b) {
    LPoint n{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, -(a.x * b.y - a.y * b.x)};
    long double nn = lmink(n, n);
    std::array<long double, 3> nv{n.x, n.y, n.z}, jn{n.x, n.y, -n.z};
    Mat3 m = identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] -= 2 * nv[i] * jn[j] / nn;
    return m;
}

inline long double signed_area(const std::array<LPoint, 7>& v) {
    long double s = 0;
    for (int i = 0; i < 7; ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % 7];
        long double px = p.x / (1 + p.z), py = p.y / (1 + p.z), qx = q.x / (1 + q.z), qy = q.y / (1 + q.z);
        s += px * qy - py * qx;
    }
    return s;
}

}  // namespace detail

class DiscWindow {
public:
    explicit DiscWindow(int radius) : radius_(radius) {
        if (radius < 0) throw std::invalid_argument("window radius must be >= 0");
        if (radius > max_window_radius)
            throw CapacityError("window radius " + std::to_string(radius) + " exceeds the supported maximum " +
                                std::to_string(max_window_radius));
        build();
    }

    int radius() const { return radius_; }
    std::size_t size() const { return tiles_.size(); }
    const WindowTile& tile(std::size_t slot) const { return tiles_.at(slot); }
    const std::vector<WindowTile>& tiles() const { return tiles_; }
    const std::vector<int>& ring(int r) const { return rings_.at(r); }

    std::optional<int> slot(TileAddress t) const {
        auto it = index_.find(t);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    bool contains(TileAddress t) const { return index_.count(t) != 0; }

    int require(TileAddress t) const {
        auto s = slot(t);
        if (!s) throw std::out_of_range("tile " + to_string(t) + " is outside the radius-" + std::to_string(radius_) + " window");
        return *s;
    }

    // nullopt marks a neighbor outside the window
    std::array<std::optional<TileAddress>, 7> neighbors(TileAddress t) const {
        const auto& w = tiles_[require(t)];
        std::array<std::optional<TileAddress>, 7> out;
        for (int k = 0; k < 7; ++k)
            if (w.neighbors[k] >= 0) out[k] = tiles_[w.neighbors[k]].address;
        return out;
    }

    int distance(TileAddress a, TileAddress b) const {
        int sa = require(a), sb = require(b);
        if (sa == sb) return 0;
        std::vector<int> d(tiles_.size(), -1);
        std::deque<int> q{sa};
        d[sa] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : tiles_[u].neighbors) {
                if (v < 0 || d[v] >= 0) continue;
                d[v] = d[u] + 1;
                if (v == sb) return d[v];
                q.push_back(v);
            }
        }
        throw std::logic_error("window graph is disconnected");
    }

private:
    using LP = detail::LPoint;

    struct Proto {
        detail::Mat3 m;
        bool flipped = false;
        std::array<int, 7> base_side;
        std::array<LP, 7> v;
        LP c;
        std::array<int, 7> nb;
        int ring;
    };

    int radius_;
    std::vector<WindowTile> tiles_;
    std::vector<std::vector<int>> rings_;
    std::unordered_map<TileAddress, int, TileAddressHash> index_;

    void build() {
        using M3 = detail::Mat3;
        const long double pi = std::numbers::pi_v<long double>;
        // circumradius of the {7,3} heptagon: cosh R = cot(pi/7) cot(pi/3)
        long double R = std::acosh(1 / (std::tan(pi / 7) * std::tan(pi / 3)));
        std::array<LP, 7> base;
        for (int k = 0; k < 7; ++k) {
            long double a = pi / 2 + (k - 0.5L) * 2 * pi / 7;
            base[k] = {std::sinh(R) * std::cos(a), std::sinh(R) * std::sin(a), std::cosh(R)};
        }
        // mirror of base side k; every tile is the image of the base tile under a product of these
        std::array<M3, 7> mirror;
        for (int k = 0; k < 7; ++k) mirror[k] = detail::mirror_matrix(base[k], base[(k + 1) % 7]);

        std::vector<Proto> pr;
        auto make = [&](const M3& m, bool flipped, int ring) {
            Proto t;
            t.m = m;
            t.flipped = flipped;
            std::array<LP, 7> img;
            for (int j = 0; j < 7; ++j) img[j] = detail::apply(m, base[j]);
            for (int k = 0; k < 7; ++k) {
                // a reflected copy runs clockwise, so read its vertices backwards
                t.v[k] = flipped ? img[6 - k] : img[k];
                t.base_side[k] = flipped ? (12 - k) % 7 : k;
            }
            t.c = detail::apply(m, LP{0, 0, 1});
            t.nb.fill(-1);
            t.ring = ring;
            return t;
        };
        pr.push_back(make(detail::identity(), false, 0));

        // centers hashed on a grid of cell 1/2; distinct centers are more than 1 apart
        std::unordered_map<std::int64_t, std::vector<int>> grid;
        auto cell = [](long long gx, long long gy) { return static_cast<std::int64_t>((gx << 32) ^ (gy & 0xffffffff)); };
        auto tol = [](const LP& p) { return 1e-9L * std::max<long double>(1, p.z); };
        auto gap = [](const LP& p, const LP& q) { return std::fabs(p.x - q.x) + std::fabs(p.y - q.y) + std::fabs(p.z - q.z); };
        auto find = [&](const LP& p) -> int {
            long long gx = std::llround(p.x * 2), gy = std::llround(p.y * 2);
            for (long long dx = -1; dx <= 1; ++dx)
                for (long long dy = -1; dy <= 1; ++dy) {
                    auto it = grid.find(cell(gx + dx, gy + dy));
                    if (it == grid.end()) continue;
                    for (int s : it->second) {
                        long double d = gap(p, pr[s].c);
                        if (d < 0.25L) {
                            if (d > tol(p)) throw std::logic_error("hyperboloid dedup drift beyond tolerance");
                            return s;
                        }
                    }
                }
            return -1;
        };
        grid[cell(0, 0)].push_back(0);

        std::vector<int> frontier{0};
        for (int r = 0; r <= radius_; ++r) {
            std::vector<int> next;
            for (int s : frontier) {
                for (int k = 0; k < 7; ++k) {
                    if (pr[s].nb[k] >= 0) continue;
                    M3 m = detail::mul(pr[s].m, mirror[pr[s].base_side[k]]);
                    LP c = detail::apply(m, LP{0, 0, 1});
                    int t = find(c);
                    if (t < 0) {
                        if (r == radius_) continue;  // beyond the rim
                        t = static_cast<int>(pr.size());
                        pr.push_back(make(m, !pr[s].flipped, r + 1));
                        grid[cell(std::llround(c.x * 2), std::llround(c.y * 2))].push_back(t);
                        next.push_back(t);
                    }
                    pr[s].nb[k] = t;
                    // side of t running from b back to a
                    const LP a = pr[s].v[k], b = pr[s].v[(k + 1) % 7];
                    int back = -1;
                    for (int j = 0; j < 7 && back < 0; ++j)
                        if (gap(pr[t].v[j], b) < tol(b) && gap(pr[t].v[(j + 1) % 7], a) < tol(a)) back = j;
                    if (back < 0) throw std::logic_error("adjacent tiles do not share a side");
                    pr[t].nb[back] = s;
                }
            }
            frontier = std::move(next);
        }
        for (auto& p : pr)
            if (detail::signed_area(p.v) <= 0) throw std::logic_error("tile orientation is not counterclockwise");

        label(pr);
    }

    // ring order, addresses and father-first side rotation; checked against the sector tree
    void label(std::vector<Proto>& pr) {
        const SectorTree& tree = sector_tree();
        std::vector<TileAddress> addr(pr.size());
        std::vector<int> father(pr.size(), -1);
        std::vector<std::vector<int>> rings(radius_ + 1);
        rings[0] = {0};
        if (radius_ >= 1)
            for (int k = 0; k < 7; ++k) {
                int t = pr[0].nb[k];
                rings[1].push_back(t);
                addr[t] = {k + 1, 1};
                father[t] = 0;
            }
        for (int r = 1; r < radius_; ++r) {
            const auto& cur = rings[r];
            int n = static_cast<int>(cur.size());
            std::array<std::int64_t, 8> counter{};
            for (int i = 0; i < n; ++i) {
                int x = cur[i], prev = cur[(i + n - 1) % n], nxt = cur[(i + 1) % n];
                const auto& nb = pr[x].nb;
                int kp = static_cast<int>(std::find(nb.begin(), nb.end(), prev) - nb.begin());
                if (kp == 7) throw std::logic_error("ring neighbors are not adjacent at " + to_string(addr[x]));
                std::vector<int> lower;
                for (int j = 1; j < 7; ++j) {
                    int y = nb[(kp + j) % 7];
                    if (y == nxt) break;
                    lower.push_back(y);
                }
                if (lower.empty() || lower.back() < 0 || pr[lower.back()].ring != r + 1)
                    throw std::logic_error("unexpected neighbor layout at " + to_string(addr[x]));
                lower.pop_back();  // first son of the successor
                auto expect = tree.sons(addr[x].index);
                if (lower.size() != expect.size())
                    throw std::logic_error("son count disagrees with the sector tree at " + to_string(addr[x]));
                int sec = addr[x].sector;
                for (std::size_t j = 0; j < lower.size(); ++j) {
                    int y = lower[j];
                    if (y < 0 || pr[y].ring != r + 1 || father[y] >= 0)
                        throw std::logic_error("bad son at " + to_string(addr[x]));
                    std::int64_t idx = SectorTree::level_start(r) + counter[sec]++;
                    if (idx != expect[j]) throw std::logic_error("son numbering disagrees with the sector tree");
                    addr[y] = {sec, idx};
                    father[y] = x;
                    rings[r + 1].push_back(y);
                }
            }
        }
        for (int r = 0; r <= radius_; ++r)
            if (rings[r].size() != circle_size(r)) throw std::logic_error("ring " + std::to_string(r) + " has the wrong size");

        // upper neighbor count must be 2 exactly for color B
        for (int r = 2; r <= radius_; ++r)
            for (int y : rings[r]) {
                int up = 0;
                for (int z : pr[y].nb)
                    if (z >= 0 && pr[z].ring == r - 1) ++up;
                if ((up == 2) != (tree.color(addr[y].index) == NodeColor::B))
                    throw std::logic_error("upper neighbors disagree with the tree color at " + to_string(addr[y]));
            }

        // renumber slots in ring order
        std::vector<int> order;
        for (auto& rg : rings) order.insert(order.end(), rg.begin(), rg.end());
        std::vector<int> slot_of(pr.size());
        for (std::size_t i = 0; i < order.size(); ++i) slot_of[order[i]] = static_cast<int>(i);
        tiles_.resize(order.size());
        rings_.assign(radius_ + 1, {});
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Proto& p = pr[order[i]];
            int rot = 0;
            if (order[i] != 0) {
                rot = static_cast<int>(std::find(p.nb.begin(), p.nb.end(), father[order[i]]) - p.nb.begin());
                if (rot == 7) throw std::logic_error("father is not adjacent");
            }
            WindowTile& w = tiles_[i];
            w.address = addr[order[i]];
            w.ring = p.ring;
            w.center = {static_cast<double>(p.c.x), static_cast<double>(p.c.y), static_cast<double>(p.c.z)};
            for (int k = 0; k < 7; ++k) {
                const LP& v = p.v[(k + rot) % 7];
                w.vertices[k] = {static_cast<double>(v.x), static_cast<double>(v.y), static_cast<double>(v.z)};
                int nb = p.nb[(k + rot) % 7];
                w.neighbors[k] = nb < 0 ? -1 : slot_of[nb];
            }
            index_[w.address] = static_cast<int>(i);
            rings_[w.ring].push_back(static_cast<int>(i));
        }
    }
};

inline DiscWindow build_window(int radius) { return DiscWindow(radius); }

}  // namespace hca
