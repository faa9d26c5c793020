#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "topo/filtration.hpp"

namespace topo {

/// 2D cubical complex over a pixel grid in the V-construction: pixels are
/// vertices, 4-adjacent pixels span edges, 2x2 pixel blocks span squares.
/// Each cell carries the minimum of its vertices' values, so the super-level
/// set at threshold t contains exactly the cells whose vertices all sit at
/// or above t.
///
/// Cell indexing (row-major, fixed for determinism):
///   vertex  v(r,c)            -> r*W + c
///   edge    horizontal h(r,c) -> r*(W-1) + c            (v(r,c) - v(r,c+1))
///           vertical   u(r,c) -> H*(W-1) + r*W + c      (v(r,c) - v(r+1,c))
///   square  s(r,c)            -> r*(W-1) + c
class CubicalComplex {
  public:
    explicit CubicalComplex(const ScalarGrid& grid);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t vertex_count() const { return vertex_values_.size(); }
    std::size_t edge_count() const { return edge_values_.size(); }
    std::size_t square_count() const { return square_values_.size(); }
    std::size_t cell_count() const {
        return vertex_count() + edge_count() + square_count();
    }

    double vertex_value(std::size_t v) const { return vertex_values_[v]; }
    double edge_value(std::size_t e) const { return edge_values_[e]; }
    double square_value(std::size_t s) const { return square_values_[s]; }

    /// Vertex ids of an edge's two endpoints.
    std::array<std::size_t, 2> edge_vertices(std::size_t e) const;
    /// Edge ids of a square's four sides (top, bottom, left, right).
    std::array<std::size_t, 4> square_edges(std::size_t s) const;

    double max_vertex_value() const;
    double min_vertex_value() const;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> vertex_values_;
    std::vector<double> edge_values_;
    std::vector<double> square_values_;
};

CubicalComplex build_complex(const ScalarGrid& grid);

/// One birth/death event of the super-level filtration (birth >= death, the
/// sweep runs from high values down). `essential` marks the component that
/// never dies; its death is reported as the global minimum.
struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;
    bool essential = false;

    double persistence() const { return birth - death; }
    friend bool operator==(const PersistencePair&,
                           const PersistencePair&) = default;
};

/// All pairs of a grid, canonically ordered: dim ascending, then birth
/// descending, then death descending, essential pairs before finite ones on
/// full ties. Finite zero-persistence pairs are dropped; the essential pair
/// is always present (a constant grid yields exactly one pair (c, c)).
struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;

    std::size_t count_dim(int dim) const;
};

/// Dimension-0 pairs by union-find over edges in descending value order with
/// the elder rule: the component with the larger maximum survives a merge
/// (ties: the component whose maximum appeared at the smaller vertex id).
std::vector<PersistencePair> persistence_h0(const CubicalComplex& cx);

/// Dimension-1 pairs via the complement sweep: dual nodes are squares plus a
/// virtual outside node, dual connections are the primal edges, processed in
/// ascending value order. A merge of two dual components emits the primal
/// pair (edge value, younger component's minimum).
std::vector<PersistencePair> persistence_h1(const CubicalComplex& cx);

/// Full diagram of a grid: persistence_h0 + persistence_h1 over its complex,
/// canonically ordered.
PersistenceDiagram compute_diagram(const ScalarGrid& grid);

/// Independent reference: textbook Z/2 boundary-matrix column reduction over
/// all cells ordered by (value desc, dim asc, cell id asc). Same output
/// conventions as compute_diagram; intended for cross-checks, so it refuses
/// complexes with more than 10^4 cells.
PersistenceDiagram oracle_diagram(const CubicalComplex& cx);

/// Betti numbers (beta0, beta1) of the super-level set at threshold tau:
/// a finite pair is alive iff birth >= tau > death, the essential pair iff
/// birth >= tau >= death.
std::pair<int, int> betti_at(const PersistenceDiagram& d, double tau);

/// 1-Wasserstein distance between the dim-`dim` points of two diagrams under
/// the L-inf ground metric, with diagonal projections (cost |b-d|/2) as the
/// usual add-on points. Exact optimal matching (Hungarian algorithm); each
/// diagram may hold at most 64 points of the requested dimension.
double wasserstein1(const PersistenceDiagram& a, const PersistenceDiagram& b,
                    int dim);

/// Debug dump: one line per pair, "dim birth death essential_flag", in the
/// diagram's canonical order.
std::string format_diagram(const PersistenceDiagram& d);

}  // namespace topo
