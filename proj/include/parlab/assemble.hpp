#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "parlab/coefficients.hpp"
#include "parlab/grid.hpp"

namespace parlab {

/// Spatial part of L at a fixed time, acting on interior-node vectors.
/// Absent stencil neighbours are structural zeros (lateral Dirichlet data),
/// so rows near the boundary simply drop those couplings.
struct DiscreteOperator {
  Eigen::SparseMatrix<double> A;
  double t = 0.0;
  OperatorForm form = OperatorForm::nondivergence;
  bool m_matrix = false;
};

namespace detail {

/// Sign-pattern predicate for the discrete maximum principle: positive
/// diagonal, nonpositive off-diagonal (up to a relative rounding slack).
inline bool is_m_matrix(const Eigen::SparseMatrix<double>& A) {
  double scale = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  const double slack = 1e-12 * std::max(1.0, scale);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (it.row() == it.col()) {
        if (!(it.value() > 0.0)) return false;
      } else if (it.value() > slack) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Assembles the discrete spatial operator at time t.
///
/// Non-divergence form: central second differences for the a-terms, the
/// sign-adapted 7-point stencil for the mixed term, first-order upwind for
/// b, c on the diagonal. Divergence form: conservative half-node flux
/// differencing for the diagonal a-terms (mixed term shares the 7-point
/// stencil so the sign pattern survives), upwind b, diagonal c. The two
/// assemblies coincide entrywise for constant coefficients.
inline DiscreteOperator assemble(const CoefficientSpec& spec, const Grid& grid, double t) {
  const int n = grid.size();
  const int d = grid.dim();
  const auto h = grid.spacing();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (d == 1 ? 3 : 7));

  auto add = [&](int row, int col, double v) {
    if (col >= 0)
      trip.emplace_back(row, col, v);
    // col < 0: boundary neighbour, structural zero
  };

  for (int row = 0; row < n; ++row) {
    const Point& y = grid.node(row);
    const auto ij = grid.lattice_of(row);
    const int i = ij[0], j = ij[1];

    const int east = grid.index_of(i + 1, j);
    const int west = grid.index_of(i - 1, j);
    const int north = d == 2 ? grid.index_of(i, j + 1) : -1;
    const int south = d == 2 ? grid.index_of(i, j - 1) : -1;

    double diag = 0.0;

    // second-order terms
    if (spec.form == OperatorForm::nondivergence) {
      double a11 = spec.a_at(0, 0, y, t);
      diag += 2.0 * a11 / (h[0] * h[0]);
      add(row, east, -a11 / (h[0] * h[0]));
      add(row, west, -a11 / (h[0] * h[0]));
      if (d == 2) {
        double a22 = spec.a_at(1, 1, y, t);
        diag += 2.0 * a22 / (h[1] * h[1]);
        add(row, north, -a22 / (h[1] * h[1]));
        add(row, south, -a22 / (h[1] * h[1]));
      }
    } else {
      // flux form: a at half nodes
      double aE = spec.a_at(0, 0, {y[0] + 0.5 * h[0], y[1]}, t);
      double aW = spec.a_at(0, 0, {y[0] - 0.5 * h[0], y[1]}, t);
      diag += (aE + aW) / (h[0] * h[0]);
      add(row, east, -aE / (h[0] * h[0]));
      add(row, west, -aW / (h[0] * h[0]));
      if (d == 2) {
        double aN = spec.a_at(1, 1, {y[0], y[1] + 0.5 * h[1]}, t);
        double aS = spec.a_at(1, 1, {y[0], y[1] - 0.5 * h[1]}, t);
        diag += (aN + aS) / (h[1] * h[1]);
        add(row, north, -aN / (h[1] * h[1]));
        add(row, south, -aS / (h[1] * h[1]));
      }
    }

    // mixed term -2 a12 u_{y1 y2}: 7-point stencil, corner pair picked by the
    // sign of a12 so every off-diagonal entry stays nonpositive whenever
    // |a12| <= min(a11, a22)
    if (d == 2) {
      double a12 = 0.5 * (spec.a_at(0, 1, y, t) + spec.a_at(1, 0, y, t));
      if (a12 != 0.0) {
        double w = a12 / (h[0] * h[1]);
        if (a12 > 0.0) {
          int ne = grid.index_of(i + 1, j + 1);
          int sw = grid.index_of(i - 1, j - 1);
          diag += -2.0 * w;
          add(row, ne, -w);
          add(row, sw, -w);
          add(row, east, w);
          add(row, west, w);
          add(row, north, w);
          add(row, south, w);
        } else {
          int nw = grid.index_of(i - 1, j + 1);
          int se = grid.index_of(i + 1, j - 1);
          diag += 2.0 * w;  // w < 0
          add(row, nw, w);
          add(row, se, w);
          add(row, east, -w);
          add(row, west, -w);
          add(row, north, -w);
          add(row, south, -w);
        }
      }
    }

    // first-order terms, upwinded
    for (int ax = 0; ax < d; ++ax) {
      double bv = spec.b_at(ax, y, t);
      if (bv == 0.0) continue;
      int fwd = ax == 0 ? east : north;
      int bwd = ax == 0 ? west : south;
      if (bv > 0.0) {
        diag += bv / h[ax];
        add(row, bwd, -bv / h[ax]);
      } else {
        diag += -bv / h[ax];
        add(row, fwd, bv / h[ax]);
      }
    }

    diag += spec.c_at(y, t);
    trip.emplace_back(row, row, diag);
  }

  DiscreteOperator op;
  op.A.resize(n, n);
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  op.t = t;
  op.form = spec.form;
  op.m_matrix = detail::is_m_matrix(op.A);
  return op;
}

}  // namespace parlab
