#pragma once

// Singular (pure Neumann) linear systems with the zero weighted-mean constraint
// sum_K |K| u_K = 0 that fixes the additive constant of u_e.

#include <cstdint>
#include <span>
#include <vector>

namespace bidomain {

/// Compressed sparse row matrix.
class CsrMatrix {
 public:
  struct Triplet {
    std::int32_t row;
    std::int32_t col;
    double value;
  };

  CsrMatrix() = default;
  /// Duplicate (row, col) entries are summed; columns are sorted within each row.
  CsrMatrix(std::size_t n, std::vector<Triplet> triplets);

  std::size_t size() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return cols_.size(); }

  void apply(std::span<const double> x, std::span<double> y) const;
  double at(std::size_t row, std::size_t col) const;
  const std::vector<double>& diagonal() const { return diag_; }
  /// Exact structural and numerical symmetry (A == A^T entrywise).
  bool is_symmetric() const;
  std::vector<double> row_sums() const;
  std::vector<std::vector<double>> to_dense() const;

  std::span<const std::int32_t> row_ptr() const { return row_ptr_; }
  std::span<const std::int32_t> cols() const { return cols_; }
  std::span<const double> values() const { return vals_; }

 private:
  std::vector<std::int32_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;
  std::vector<double> diag_;
};

/// Non-owning view of A u = b with cell weights |K|.
struct LinearSystem {
  const CsrMatrix& matrix;
  std::span<const double> rhs;
  std::span<const double> weights;
  bool symmetric = true;
};

struct SolverOptions {
  double tolerance = 1e-8;  // relative to ||rhs||_2
  int max_iterations = 0;   // 0 selects 10 * (number of unknowns)

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;       // final ||b - A u||_2
  double rhs_norm = 0.0;
  double rhs_imbalance = 0.0;  // sum of rhs before projection
  bool rhs_projected = false;  // imbalance exceeded 1e-8 relative and was removed
};

double weighted_sum(std::span<const double> u, std::span<const double> weights);

/// P(u) = u - (sum |K| u / sum |K|) 1.
void project_zero_mean(std::span<double> u, std::span<const double> weights);

/// Solve A u = b on the complement of the constants, returning the
/// zero-weighted-mean representative. `u` carries the initial guess in and the
/// solution out. Symmetric systems use Jacobi-preconditioned CG; otherwise
/// Jacobi-preconditioned BiCGStab. Throws ConvergenceError at the iteration cap.
SolveReport solve_zero_mean(const LinearSystem& system, std::span<double> u,
                            const SolverOptions& options = {});

}  // namespace bidomain
