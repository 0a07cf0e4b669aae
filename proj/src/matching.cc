// SPDX-License-Identifier: Apache-2.0

#include "ipd/matching.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipd/errors.h"

namespace ipd {
namespace {

// Rows <= cols. a is 1-based in the classic formulation; here p[j] holds the
// row (1-based) assigned to column j, 0 for free.
std::vector<int> hungarian(const std::vector<double>& a, int n, int m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<std::pair<int, int>> assignment_min_cost(std::span<const double> cost,
                                                     int n_rows, int n_cols) {
  if (n_rows < 0 || n_cols < 0 ||
      cost.size() != static_cast<std::size_t>(n_rows) * n_cols) {
    throw InputError("cost matrix size does not match its dimensions");
  }
  for (double c : cost) {
    if (!std::isfinite(c)) throw InputError("cost matrix has a non-finite entry");
    if (c < 0.0) throw InputError("cost matrix has a negative entry");
  }
  std::vector<std::pair<int, int>> out;
  if (n_rows == 0 || n_cols == 0) return out;

  const bool transposed = n_rows > n_cols;
  const int n = transposed ? n_cols : n_rows;
  const int m = transposed ? n_rows : n_cols;
  std::vector<double> a(static_cast<std::size_t>(n) * m);
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      const double v = cost[static_cast<std::size_t>(r) * n_cols + c];
      if (transposed) {
        a[static_cast<std::size_t>(c) * m + r] = v;
      } else {
        a[static_cast<std::size_t>(r) * m + c] = v;
      }
    }
  }
  const std::vector<int> assign = hungarian(a, n, m);
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (transposed) {
      out.emplace_back(assign[i], i);
    } else {
      out.emplace_back(i, assign[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

InstancePairing match_instances(const AffineTransform2D& transform,
                                std::span<const Point2> synth_centers,
                                std::span<const Point2> real_centers,
                                double gate_distance) {
  if (!(gate_distance > 0.0)) {
    throw InputError("gate_distance must be positive");
  }
  if (!transform.is_finite()) {
    throw InputError("transform has a non-finite entry");
  }
  const int n_real = static_cast<int>(real_centers.size());
  const int n_synth = static_cast<int>(synth_centers.size());

  // Costs are clipped at the gate: a pair beyond it is as good as no pair, so
  // an instance missing from one image cannot displace a close pair to shorten
  // its own forced, ultimately discarded, edge.
  std::vector<double> dist(static_cast<std::size_t>(n_real) * n_synth);
  std::vector<double> cost(dist.size());
  for (int s = 0; s < n_synth; ++s) {
    const Point2 q = apply_affine(transform, synth_centers[s]);
    for (int r = 0; r < n_real; ++r) {
      const std::size_t k = static_cast<std::size_t>(r) * n_synth + s;
      dist[k] = distance(real_centers[r], q);
      cost[k] = std::min(dist[k], gate_distance);
    }
  }

  InstancePairing out;
  out.gate_distance = gate_distance;
  std::vector<char> real_used(n_real, 0), synth_used(n_synth, 0);
  for (const auto& [r, s] : assignment_min_cost(cost, n_real, n_synth)) {
    const double d = dist[static_cast<std::size_t>(r) * n_synth + s];
    if (d > gate_distance) continue;
    out.pairs.push_back({r, s, d});
    real_used[r] = 1;
    synth_used[s] = 1;
  }
  for (int r = 0; r < n_real; ++r) {
    if (!real_used[r]) out.unmatched_real.push_back(r);
  }
  for (int s = 0; s < n_synth; ++s) {
    if (!synth_used[s]) out.unmatched_synth.push_back(s);
  }
  return out;
}

double default_gate_distance(std::span<const BBox> real_gt) {
  if (real_gt.empty()) return 0.0;
  std::vector<double> diag;
  diag.reserve(real_gt.size());
  for (const BBox& b : real_gt) diag.push_back(b.diagonal());
  std::sort(diag.begin(), diag.end());
  const std::size_t n = diag.size();
  const double median =
      n % 2 == 1 ? diag[n / 2] : 0.5 * (diag[n / 2 - 1] + diag[n / 2]);
  return 0.5 * median;
}

}  // namespace ipd
