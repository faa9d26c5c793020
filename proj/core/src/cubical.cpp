#include "topo/cubical.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace topo {
namespace {

// Union-find with path halving and union by size. Birth bookkeeping lives
// outside, keyed by root.
struct Dsu {
    std::vector<std::size_t> parent;
    std::vector<std::size_t> size;

    explicit Dsu(std::size_t n) : parent(n), size(n, 1) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    std::size_t unite(std::size_t a, std::size_t b) {
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        return a;
    }
};

const auto kCanonicalOrder = [](const PersistencePair& a,
                                const PersistencePair& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    if (a.birth != b.birth) return a.birth > b.birth;
    if (a.death != b.death) return a.death > b.death;
    return a.essential && !b.essential;
};

}  // namespace

CubicalComplex::CubicalComplex(const ScalarGrid& grid)
    : rows_(grid.rows), cols_(grid.cols) {
    if (rows_ < 1 || cols_ < 1 ||
        grid.values.size() != static_cast<std::size_t>(rows_) * cols_) {
        throw std::invalid_argument("build_complex: empty or inconsistent grid");
    }
    const int H = rows_, W = cols_;
    vertex_values_ = grid.values;
    edge_values_.resize(static_cast<std::size_t>(H) * (W - 1) +
                        static_cast<std::size_t>(H - 1) * W);
    square_values_.resize(static_cast<std::size_t>(H - 1) * (W - 1));

    for (int r = 0; r < H; ++r) {
        for (int c = 0; c + 1 < W; ++c) {
            edge_values_[static_cast<std::size_t>(r) * (W - 1) + c] =
                std::min(grid.at(r, c), grid.at(r, c + 1));
        }
    }
    const std::size_t horiz = static_cast<std::size_t>(H) * (W - 1);
    for (int r = 0; r + 1 < H; ++r) {
        for (int c = 0; c < W; ++c) {
            edge_values_[horiz + static_cast<std::size_t>(r) * W + c] =
                std::min(grid.at(r, c), grid.at(r + 1, c));
        }
    }
    for (int r = 0; r + 1 < H; ++r) {
        for (int c = 0; c + 1 < W; ++c) {
            square_values_[static_cast<std::size_t>(r) * (W - 1) + c] =
                std::min(std::min(grid.at(r, c), grid.at(r, c + 1)),
                         std::min(grid.at(r + 1, c), grid.at(r + 1, c + 1)));
        }
    }
}

std::array<std::size_t, 2> CubicalComplex::edge_vertices(std::size_t e) const {
    const std::size_t H = rows_, W = cols_;
    const std::size_t horiz = H * (W - 1);
    if (e < horiz) {
        const std::size_t r = e / (W - 1), c = e % (W - 1);
        return {r * W + c, r * W + c + 1};
    }
    const std::size_t v = e - horiz;
    const std::size_t r = v / W, c = v % W;
    return {r * W + c, (r + 1) * W + c};
}

std::array<std::size_t, 4> CubicalComplex::square_edges(std::size_t s) const {
    const std::size_t H = rows_, W = cols_;
    const std::size_t horiz = H * (W - 1);
    const std::size_t r = s / (W - 1), c = s % (W - 1);
    const std::size_t top = r * (W - 1) + c;
    const std::size_t bottom = (r + 1) * (W - 1) + c;
    const std::size_t left = horiz + r * W + c;
    const std::size_t right = horiz + r * W + c + 1;
    return {top, bottom, left, right};
}

double CubicalComplex::max_vertex_value() const {
    return *std::max_element(vertex_values_.begin(), vertex_values_.end());
}

double CubicalComplex::min_vertex_value() const {
    return *std::min_element(vertex_values_.begin(), vertex_values_.end());
}

CubicalComplex build_complex(const ScalarGrid& grid) {
    return CubicalComplex(grid);
}

std::size_t PersistenceDiagram::count_dim(int dim) const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(),
                      [dim](const PersistencePair& p) { return p.dim == dim; }));
}

std::vector<PersistencePair> persistence_h0(const CubicalComplex& cx) {
    const std::size_t V = cx.vertex_count(), E = cx.edge_count();

    // Sweep edges from high to low; vertices are implicitly present once the
    // sweep reaches their value, so each vertex starts as its own component
    // born at its own value.
    std::vector<std::size_t> order(E);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cx.edge_value(a) != cx.edge_value(b)) {
            return cx.edge_value(a) > cx.edge_value(b);
        }
        return a < b;
    });

    Dsu dsu(V);
    std::vector<double> birth(V);   // component max, keyed by root
    std::vector<std::size_t> creator(V);  // vertex that holds that max
    for (std::size_t v = 0; v < V; ++v) {
        birth[v] = cx.vertex_value(v);
        creator[v] = v;
    }

    std::vector<PersistencePair> pairs;
    for (std::size_t e : order) {
        const auto [u, v] = cx.edge_vertices(e);
        std::size_t ra = dsu.find(u), rb = dsu.find(v);
        if (ra == rb) continue;
        // Elder rule: the component with the larger maximum survives; on a
        // tie, the one whose maximum sits at the smaller vertex id.
        const bool a_elder = birth[ra] != birth[rb]
                                 ? birth[ra] > birth[rb]
                                 : creator[ra] < creator[rb];
        const std::size_t elder = a_elder ? ra : rb;
        const std::size_t younger = a_elder ? rb : ra;
        const double ev = cx.edge_value(e);
        if (birth[younger] > ev) {
            pairs.push_back({0, birth[younger], ev, false});
        }
        const std::size_t root = dsu.unite(ra, rb);
        birth[root] = birth[elder];
        creator[root] = creator[elder];
    }

    pairs.push_back({0, cx.max_vertex_value(), cx.min_vertex_value(), true});
    return pairs;
}

std::vector<PersistencePair> persistence_h1(const CubicalComplex& cx) {
    const int H = cx.rows(), W = cx.cols();
    if (H < 2 || W < 2) return {};
    const std::size_t F = cx.square_count();
    const std::size_t outside = F;  // virtual complement node, active from -inf

    // A 1-cycle of the super-level set corresponds to a complement region:
    // it is born when the edge separating that region from the rest enters
    // the sweep, and dies when the region's last (minimum-value) square
    // does. Running union-find over the complement — squares plus the
    // outside node, connected through primal edges in ascending value order
    // — pairs each separating edge with its region's minimum.
    std::vector<std::size_t> order(cx.edge_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cx.edge_value(a) != cx.edge_value(b)) {
            return cx.edge_value(a) < cx.edge_value(b);
        }
        return a < b;
    });

    const double minus_inf = -std::numeric_limits<double>::infinity();
    Dsu dsu(F + 1);
    std::vector<double> node_min(F + 1);
    std::vector<std::size_t> creator(F + 1);
    for (std::size_t s = 0; s < F; ++s) {
        node_min[s] = cx.square_value(s);
        creator[s] = s;
    }
    node_min[outside] = minus_inf;
    creator[outside] = outside;

    const std::size_t horiz = static_cast<std::size_t>(H) * (W - 1);
    const auto dual_ends = [&](std::size_t e) -> std::array<std::size_t, 2> {
        if (e < horiz) {  // horizontal edge at pixel row r
            const std::size_t r = e / (W - 1), c = e % (W - 1);
            const std::size_t above =
                r == 0 ? outside : (r - 1) * (W - 1) + c;
            const std::size_t below =
                r == static_cast<std::size_t>(H) - 1 ? outside
                                                     : r * (W - 1) + c;
            return {above, below};
        }
        const std::size_t v = e - horiz;
        const std::size_t r = v / W, c = v % W;
        const std::size_t left = c == 0 ? outside : r * (W - 1) + c - 1;
        const std::size_t right =
            c == static_cast<std::size_t>(W) - 1 ? outside : r * (W - 1) + c;
        return {left, right};
    };

    std::vector<PersistencePair> pairs;
    for (std::size_t e : order) {
        const auto [a, b] = dual_ends(e);
        std::size_t ra = dsu.find(a), rb = dsu.find(b);
        if (ra == rb) continue;
        // Ascending elder rule: the component with the smaller minimum is
        // older (the outside node, at -inf, is elder to everything).
        const bool a_elder = node_min[ra] != node_min[rb]
                                 ? node_min[ra] < node_min[rb]
                                 : creator[ra] < creator[rb];
        const std::size_t elder = a_elder ? ra : rb;
        const std::size_t younger = a_elder ? rb : ra;
        const double ev = cx.edge_value(e);
        if (ev > node_min[younger]) {
            pairs.push_back({1, ev, node_min[younger], false});
        }
        const std::size_t root = dsu.unite(ra, rb);
        node_min[root] = node_min[elder];
        creator[root] = creator[elder];
    }
    // The surviving component holds the outside node; it never emits a pair.
    return pairs;
}

PersistenceDiagram compute_diagram(const ScalarGrid& grid) {
    const CubicalComplex cx(grid);
    PersistenceDiagram d;
    d.pairs = persistence_h0(cx);
    auto h1 = persistence_h1(cx);
    d.pairs.insert(d.pairs.end(), h1.begin(), h1.end());
    std::sort(d.pairs.begin(), d.pairs.end(), kCanonicalOrder);
    return d;
}

PersistenceDiagram oracle_diagram(const CubicalComplex& cx) {
    constexpr std::size_t kMaxCells = 10'000;
    if (cx.cell_count() > kMaxCells) {
        throw std::invalid_argument(
            fmt::format("oracle_diagram: {} cells exceeds the {}-cell guard",
                        cx.cell_count(), kMaxCells));
    }

    struct Cell {
        double value;
        int dim;
        std::size_t id;
    };
    std::vector<Cell> cells;
    cells.reserve(cx.cell_count());
    for (std::size_t v = 0; v < cx.vertex_count(); ++v) {
        cells.push_back({cx.vertex_value(v), 0, v});
    }
    for (std::size_t e = 0; e < cx.edge_count(); ++e) {
        cells.push_back({cx.edge_value(e), 1, e});
    }
    for (std::size_t s = 0; s < cx.square_count(); ++s) {
        cells.push_back({cx.square_value(s), 2, s});
    }
    // Filtration order of the descending sweep. Faces carry values >= their
    // cofaces' and dimension breaks value ties, so faces always precede.
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.dim != b.dim) return a.dim < b.dim;
        return a.id < b.id;
    });

    const std::size_t n = cells.size();
    std::vector<std::size_t> vertex_pos(cx.vertex_count());
    std::vector<std::size_t> edge_pos(cx.edge_count());
    for (std::size_t p = 0; p < n; ++p) {
        if (cells[p].dim == 0) vertex_pos[cells[p].id] = p;
        if (cells[p].dim == 1) edge_pos[cells[p].id] = p;
    }

    // Z/2 boundary columns in filtration order, kept as sorted position lists.
    std::vector<std::vector<std::size_t>> reduced(n);
    for (std::size_t p = 0; p < n; ++p) {
        const Cell& cell = cells[p];
        if (cell.dim == 1) {
            const auto [u, v] = cx.edge_vertices(cell.id);
            reduced[p] = {vertex_pos[u], vertex_pos[v]};
        } else if (cell.dim == 2) {
            const auto es = cx.square_edges(cell.id);
            reduced[p] = {edge_pos[es[0]], edge_pos[es[1]], edge_pos[es[2]],
                          edge_pos[es[3]]};
        }
        std::sort(reduced[p].begin(), reduced[p].end());
    }

    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pivot_owner(n, kNone);
    std::vector<bool> paired(n, false);
    PersistenceDiagram d;
    std::vector<std::size_t> scratch;

    for (std::size_t j = 0; j < n; ++j) {
        auto& col = reduced[j];
        while (!col.empty() && pivot_owner[col.back()] != kNone) {
            const auto& other = reduced[pivot_owner[col.back()]];
            scratch.clear();
            std::set_symmetric_difference(col.begin(), col.end(),
                                          other.begin(), other.end(),
                                          std::back_inserter(scratch));
            col.swap(scratch);
        }
        if (col.empty()) continue;
        const std::size_t low = col.back();
        pivot_owner[low] = j;
        paired[low] = paired[j] = true;
        const double birth = cells[low].value, death = cells[j].value;
        if (birth > death) {
            d.pairs.push_back({cells[low].dim, birth, death, false});
        }
    }

    for (std::size_t p = 0; p < n; ++p) {
        if (paired[p] || !reduced[p].empty()) continue;
        if (cells[p].dim != 0) {
            throw std::runtime_error(
                "oracle_diagram: unexpected essential class above dimension 0");
        }
        d.pairs.push_back(
            {0, cells[p].value, cx.min_vertex_value(), true});
    }

    std::sort(d.pairs.begin(), d.pairs.end(), kCanonicalOrder);
    return d;
}

std::pair<int, int> betti_at(const PersistenceDiagram& d, double tau) {
    int b0 = 0, b1 = 0;
    for (const PersistencePair& p : d.pairs) {
        const bool alive = p.essential ? p.birth >= tau && tau >= p.death
                                       : p.birth >= tau && tau > p.death;
        if (!alive) continue;
        (p.dim == 0 ? b0 : b1) += 1;
    }
    return {b0, b1};
}

namespace {

// Exact min-cost perfect matching on a square cost matrix (Hungarian
// algorithm with potentials, O(n^3)).
double hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

}  // namespace

double wasserstein1(const PersistenceDiagram& a, const PersistenceDiagram& b,
                    int dim) {
    constexpr std::size_t kMaxPoints = 64;
    std::vector<std::array<double, 2>> pa, pb;
    for (const auto& p : a.pairs) {
        if (p.dim == dim) pa.push_back({p.birth, p.death});
    }
    for (const auto& p : b.pairs) {
        if (p.dim == dim) pb.push_back({p.birth, p.death});
    }
    if (pa.size() > kMaxPoints || pb.size() > kMaxPoints) {
        throw std::invalid_argument(fmt::format(
            "wasserstein1: diagrams hold {} and {} dim-{} points; the exact "
            "matcher accepts at most {} each",
            pa.size(), pb.size(), dim, kMaxPoints));
    }
    const std::size_t na = pa.size(), nb = pb.size(), n = na + nb;
    if (n == 0) return 0.0;

    // Augment both sides with diagonal projections: matching a real point to
    // the diagonal costs half its persistence (L-inf distance to (m,m) at
    // m = (b+d)/2); diagonal-to-diagonal is free.
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i < na && j < nb) {
                cost[i][j] = std::max(std::abs(pa[i][0] - pb[j][0]),
                                      std::abs(pa[i][1] - pb[j][1]));
            } else if (i < na) {
                cost[i][j] = (pa[i][0] - pa[i][1]) / 2.0;
            } else if (j < nb) {
                cost[i][j] = (pb[j][0] - pb[j][1]) / 2.0;
            }
        }
    }
    return hungarian(cost);
}

std::string format_diagram(const PersistenceDiagram& d) {
    std::string out;
    for (const PersistencePair& p : d.pairs) {
        out += fmt::format("{} {} {} {}\n", p.dim, p.birth, p.death,
                           p.essential ? 1 : 0);
    }
    return out;
}

}  // namespace topo
