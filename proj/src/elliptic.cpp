#include "bidomain/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(n + 1, 0);
  diag_.assign(n, 0.0);
  cols_.reserve(triplets.size());
  vals_.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size();) {
    const auto [row, col, _] = triplets[k];
    if (row < 0 || std::size_t(row) >= n || col < 0 || std::size_t(col) >= n) {
      throw IndexError("matrix entry outside the system size");
    }
    double sum = 0.0;
    while (k < triplets.size() && triplets[k].row == row && triplets[k].col == col) {
      sum += triplets[k].value;
      ++k;
    }
    cols_.push_back(col);
    vals_.push_back(sum);
    ++row_ptr_[std::size_t(row) + 1];
    if (row == col) diag_[std::size_t(row)] = sum;
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
}

void CsrMatrix::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sum += vals_[k] * x[cols_[k]];
    y[r] = sum;
  }
}

double CsrMatrix::at(std::size_t row, std::size_t col) const {
  const auto first = cols_.begin() + row_ptr_[row];
  const auto last = cols_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(first, last, std::int32_t(col));
  if (it == last || *it != std::int32_t(col)) return 0.0;
  return vals_[std::size_t(it - cols_.begin())];
}

bool CsrMatrix::is_symmetric() const {
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (at(std::size_t(cols_[k]), r) != vals_[k]) return false;
    }
  }
  return true;
}

std::vector<double> CsrMatrix::row_sums() const {
  std::vector<double> sums(size(), 0.0);
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sums[r] += vals_[k];
  }
  return sums;
}

std::vector<std::vector<double>> CsrMatrix::to_dense() const {
  std::vector<std::vector<double>> dense(size(), std::vector<double>(size(), 0.0));
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::int32_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) dense[r][cols_[k]] = vals_[k];
  }
  return dense;
}

double weighted_sum(std::span<const double> u, std::span<const double> weights) {
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += weights[k] * u[k];
  return sum;
}

void project_zero_mean(std::span<double> u, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double mean = weighted_sum(u, weights) / total;
  for (double& value : u) value -= mean;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Remove the component along the weights so that sum r = 0 (range of a flux-form operator).
void project_range(std::span<double> r, std::span<const double> weights, double total_weight) {
  const double sum = std::accumulate(r.begin(), r.end(), 0.0);
  if (sum == 0.0) return;
  const double scale = sum / total_weight;
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= scale * weights[k];
}

// Scratch vectors reused across solves of the same size.
struct Workspace {
  std::vector<double> b, r, inv, z, p, q, r_hat, v, s, t, y;

  void resize(std::size_t n) {
    for (auto* w : {&b, &r, &inv, &z, &p, &q, &r_hat, &v, &s, &t, &y}) w->resize(n);
  }
};

Workspace& workspace(std::size_t n) {
  thread_local Workspace ws;
  ws.resize(n);
  return ws;
}

void inverse_diagonal(const CsrMatrix& a, std::vector<double>& inv) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = std::abs(a.diagonal()[k]);
    inv[k] = d > 0.0 ? 1.0 / d : 1.0;
  }
}

int pcg(const CsrMatrix& a, std::span<double> u, Workspace& ws, double target,
        int max_iterations, std::span<const double> weights, double total_weight) {
  const std::size_t n = a.size();
  auto &r = ws.r, &inv = ws.inv, &z = ws.z, &p = ws.p, &q = ws.q;
  if (norm2(r) <= target) return 0;
  inverse_diagonal(a, inv);
  for (std::size_t k = 0; k < n; ++k) z[k] = inv[k] * r[k];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (norm2(r) > target) {
    if (it >= max_iterations) return -it;
    a.apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) return -(it + 1);
    const double alpha = rz / pq;
    for (std::size_t k = 0; k < n; ++k) {
      u[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    project_range(r, weights, total_weight);
    for (std::size_t k = 0; k < n; ++k) z[k] = inv[k] * r[k];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    ++it;
  }
  return it;
}

int bicgstab(const CsrMatrix& a, std::span<double> u, Workspace& ws, double target,
             int max_iterations, std::span<const double> weights, double total_weight) {
  const std::size_t n = a.size();
  auto &b = ws.b, &r = ws.r, &inv = ws.inv, &z = ws.z, &p = ws.p, &r_hat = ws.r_hat;
  auto &v = ws.v, &s = ws.s, &t = ws.t, &y = ws.y;
  if (norm2(r) <= target) return 0;
  inverse_diagonal(a, inv);
  r_hat = r;
  std::fill(p.begin(), p.end(), 0.0);
  std::fill(v.begin(), v.end(), 0.0);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  while (norm2(r) > target) {
    if (it >= max_iterations) return -it;
    const double rho_next = dot(r_hat, r);
    if (rho_next == 0.0 || omega == 0.0) {
      // Breakdown: restart from the true residual.
      a.apply(u, t);
      for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - t[k];
      project_range(r, weights, total_weight);
      r_hat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      ++it;
      continue;
    }
    const double beta = (rho_next / rho) * (alpha / omega);
    rho = rho_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
    for (std::size_t k = 0; k < n; ++k) y[k] = inv[k] * p[k];
    a.apply(y, v);
    const double rv = dot(r_hat, v);
    if (rv == 0.0) {
      omega = 0.0;
      ++it;
      continue;
    }
    alpha = rho / rv;
    for (std::size_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
    if (norm2(s) <= target) {
      for (std::size_t k = 0; k < n; ++k) u[k] += alpha * y[k];
      std::copy(s.begin(), s.end(), r.begin());
      ++it;
      break;
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = inv[k] * s[k];
    a.apply(z, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      u[k] += alpha * y[k] + omega * z[k];
      r[k] = s[k] - omega * t[k];
    }
    project_range(r, weights, total_weight);
    ++it;
  }
  return it;
}

}  // namespace

SolveReport solve_zero_mean(const LinearSystem& system, std::span<double> u,
                            const SolverOptions& options) {
  const CsrMatrix& a = system.matrix;
  const std::size_t n = a.size();
  const std::span<const double> w = system.weights;
  SolveReport report;

  Workspace& ws = workspace(n);
  std::vector<double>& b = ws.b;
  double total_weight = 0.0, abs_sum = 0.0, imbalance = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total_weight += w[k];
    imbalance += system.rhs[k];
    abs_sum += std::abs(system.rhs[k]);
  }
  report.rhs_imbalance = imbalance;
  if (std::abs(imbalance) > 1e-8 * abs_sum) report.rhs_projected = true;
  const double shift = imbalance / total_weight;
  double bb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    b[k] = system.rhs[k] - shift * w[k];
    bb += b[k] * b[k];
  }
  report.rhs_norm = std::sqrt(bb);

  if (report.rhs_norm == 0.0) {
    std::fill(u.begin(), u.end(), 0.0);
    return report;
  }

  std::vector<double>& r = ws.r;
  const auto row_ptr = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  double r_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double au = 0.0;
    for (std::int32_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) au += vals[k] * u[cols[k]];
    r[i] = b[i] - au;
    r_sum += r[i];
  }
  if (r_sum != 0.0) {
    const double scale = r_sum / total_weight;
    for (std::size_t k = 0; k < n; ++k) r[k] -= scale * w[k];
  }

  const double target = options.tolerance * report.rhs_norm;
  const int cap = options.max_iterations > 0 ? options.max_iterations : int(10 * n);
  const int it = system.symmetric
                     ? pcg(a, u, ws, target, cap, system.weights, total_weight)
                     : bicgstab(a, u, ws, target, cap, system.weights, total_weight);
  report.residual = norm2(r);
  if (it < 0) {
    report.iterations = -it;
    throw ConvergenceError(fmt::format("elliptic solve did not converge in {} iterations "
                                       "(residual {:.3e}, target {:.3e})",
                                       -it, report.residual, target),
                           -it, report.residual);
  }
  report.iterations = it;
  const double mean = weighted_sum(u, w) / total_weight;
  for (double& value : u) value -= mean;
  return report;
}

}  // namespace bidomain
