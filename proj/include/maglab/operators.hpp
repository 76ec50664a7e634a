#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/gauge.hpp"
#include "maglab/geometry.hpp"

namespace maglab {

using VectorXcd = Eigen::VectorXcd;

/// Sparse Hermitian matrix for Box_k = -grad*grad - k*Tr+K in a fixed basis.
/// Torus: magnetic 5-point stencil on the grid, CSR storage.  Sphere: exact
/// diagonal representation in the monopole-harmonic basis.
struct DiscreteOperator {
  enum class Basis { torus_grid, sphere_monopole_diagonal };

  Basis basis = Basis::torus_grid;
  long M = 0;
  int k = 1;
  ManifoldModel model;
  GridDims dims;            // torus only
  double h1 = 0.0, h2 = 0.0;

  // CSR
  std::vector<long> row_ptr;
  std::vector<long> col_idx;
  std::vector<Complex> vals;

  // Sphere block structure: (eigenvalue, multiplicity) per oscillator index nu.
  struct Level {
    double value;
    long multiplicity;
  };
  std::vector<Level> levels;

  bool diagonal() const { return basis == Basis::sphere_monopole_diagonal; }

  long site_index(int i, int j) const { return i + static_cast<long>(dims.n1) * j; }
  Vec2 site_coords(long idx) const {
    const int i = static_cast<int>(idx % dims.n1);
    const int j = static_cast<int>(idx / dims.n1);
    return {i * h1, j * h2};
  }

  /// y = Op * x.  Const and safe to call concurrently on the same operator.
  void matvec(const VectorXcd& x, VectorXcd& y) const {
    if (x.size() != M) throw InvalidInput("matvec: vector length mismatch");
    y.resize(M);
    for (long r = 0; r < M; ++r) {
      Complex acc{0.0, 0.0};
      for (long p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += vals[p] * x[col_idx[p]];
      y[r] = acc;
    }
  }

  VectorXcd matvec(const VectorXcd& x) const {
    VectorXcd y;
    matvec(x, y);
    return y;
  }

  /// Gershgorin bounds on the spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (long r = 0; r < M; ++r) {
      double diag = 0.0, off = 0.0;
      for (long p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
        if (col_idx[p] == r)
          diag += vals[p].real();
        else
          off += std::abs(vals[p]);
      }
      lo = first ? diag - off : std::min(lo, diag - off);
      hi = first ? diag + off : std::max(hi, diag + off);
      first = false;
    }
    return {lo, hi};
  }
};

namespace detail {

struct CsrBuilder {
  long M;
  std::vector<std::vector<std::pair<long, Complex>>> rows;
  explicit CsrBuilder(long m) : M(m), rows(m) {}
  void add(long r, long c, Complex v) { rows[r].emplace_back(c, v); }
  void finalize(DiscreteOperator& op) const {
    op.M = M;
    op.row_ptr.assign(M + 1, 0);
    for (long r = 0; r < M; ++r) op.row_ptr[r + 1] = op.row_ptr[r] + rows[r].size();
    op.col_idx.resize(op.row_ptr[M]);
    op.vals.resize(op.row_ptr[M]);
    for (long r = 0; r < M; ++r) {
      auto entries = rows[r];
      std::sort(entries.begin(), entries.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      long p = op.row_ptr[r];
      for (const auto& [c, v] : entries) {
        op.col_idx[p] = c;
        op.vals[p] = v;
        ++p;
      }
    }
  }
};

}  // namespace detail

/// Magnetic 5-point operator on the torus grid with Peierls link phases:
/// diagonal 2/h1^2 + 2/h2^2 - k*Tr+K(x), off-diagonal -U/h^2 per directed
/// edge.  Refuses grids where any |k*flux(p)| exceeds pi/4 (aliasing regime).
inline DiscreteOperator assemble_torus(const ManifoldModel& model, const GaugeData& gauge) {
  if (!model.is_torus()) throw InvalidInput("assemble_torus: torus models only");
  const GridDims dims = gauge.dims;
  const double max_plaq = (gauge.k == 0)
                              ? 0.0
                              : (gauge.k * gauge.plaq_flux.abs().maxCoeff());
  if (max_plaq > pi / 4.0)
    throw GridTooCoarse("assemble_torus: flux per plaquette " + std::to_string(max_plaq) +
                        " exceeds pi/4; refine the grid");

  DiscreteOperator op;
  op.basis = DiscreteOperator::Basis::torus_grid;
  op.k = gauge.k;
  op.model = model;
  op.dims = dims;
  op.h1 = gauge.h1;
  op.h2 = gauge.h2;

  const double ax = 1.0 / (gauge.h1 * gauge.h1);
  const double ay = 1.0 / (gauge.h2 * gauge.h2);
  const long M = dims.sites();
  detail::CsrBuilder b(M);
  for (int j = 0; j < dims.n2; ++j) {
    for (int i = 0; i < dims.n1; ++i) {
      const long r = op.site_index(i, j);
      const double kappa = (gauge.k == 0)
                               ? 0.0
                               : field_geometry_at(model, i * gauge.h1, j * gauge.h2).kappa;
      b.add(r, r, Complex{2.0 * ax + 2.0 * ay - gauge.k * kappa, 0.0});
      const int ip = (i + 1) % dims.n1, im = (i - 1 + dims.n1) % dims.n1;
      const int jp = (j + 1) % dims.n2, jm = (j - 1 + dims.n2) % dims.n2;
      b.add(r, op.site_index(ip, j), -ax * gauge.link_x(i, j));
      b.add(r, op.site_index(im, j), -ax * std::conj(gauge.link_x(im, j)));
      b.add(r, op.site_index(i, jp), -ay * gauge.link_y(i, j));
      b.add(r, op.site_index(i, jm), -ay * std::conj(gauge.link_y(i, jm)));
    }
  }
  b.finalize(op);
  return op;
}

/// Box_k on the charge-N sphere in its exact eigenbasis: diagonal entries
/// nu*(N*k + nu + 1) with multiplicity N*k + 2*nu + 1, nu = 0..nu_max.
inline DiscreteOperator assemble_sphere(int N, int k, int nu_max) {
  if (N < 1 || k < 1 || static_cast<long>(N) * k < 1)
    throw InvalidInput("assemble_sphere: need N*k >= 1");
  if (nu_max < 1) throw InvalidInput("assemble_sphere: nu_max must be >= 1");

  DiscreteOperator op;
  op.basis = DiscreteOperator::Basis::sphere_monopole_diagonal;
  op.k = k;
  op.model = ManifoldModel::sphere(N);

  const long Nk = static_cast<long>(N) * k;
  long M = 0;
  for (int nu = 0; nu <= nu_max; ++nu) {
    const long mult = Nk + 2L * nu + 1;
    op.levels.push_back({static_cast<double>(nu) * (Nk + nu + 1), mult});
    M += mult;
  }
  op.M = M;
  op.row_ptr.resize(M + 1);
  op.col_idx.resize(M);
  op.vals.resize(M);
  long idx = 0;
  for (const auto& lv : op.levels)
    for (long m = 0; m < lv.multiplicity; ++m) {
      op.row_ptr[idx] = idx;
      op.col_idx[idx] = idx;
      op.vals[idx] = Complex{lv.value, 0.0};
      ++idx;
    }
  op.row_ptr[M] = M;
  return op;
}

/// MatrixMarket coordinate export (complex hermitian, lower triangle).
inline void write_matrix_market(const DiscreteOperator& op, std::ostream& os) {
  long nnz_lower = 0;
  for (long r = 0; r < op.M; ++r)
    for (long p = op.row_ptr[r]; p < op.row_ptr[r + 1]; ++p)
      if (op.col_idx[p] <= r) ++nnz_lower;
  os << "%%MatrixMarket matrix coordinate complex hermitian\n";
  os << op.M << " " << op.M << " " << nnz_lower << "\n";
  char buf[96];
  for (long r = 0; r < op.M; ++r)
    for (long p = op.row_ptr[r]; p < op.row_ptr[r + 1]; ++p) {
      if (op.col_idx[p] > r) continue;
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g %.17g\n", r + 1, op.col_idx[p] + 1,
                    op.vals[p].real(), op.vals[p].imag());
      os << buf;
    }
}

}  // namespace maglab
