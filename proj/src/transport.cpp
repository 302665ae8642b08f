#include "ienergy/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ienergy/error.hpp"

namespace ienergy {

namespace {

constexpr std::size_t kAssignmentCap = 1024;

double euclid(const AtomicMeasure& mu, std::size_t i, const AtomicMeasure& nu, std::size_t j) {
  double s = 0.0;
  for (int k = 0; k < mu.dim(); ++k) {
    const double diff = mu.point(i)[k] - nu.point(j)[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// Total order on measures, used to make the distance an exactly symmetric
// function of its two arguments.
bool canonical_less(const AtomicMeasure& a, const AtomicMeasure& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  if (a.weights() != b.weights()) return a.weights() < b.weights();
  return a.points() < b.points();
}

AtomicMeasure truncate_largest(const AtomicMeasure& mu, std::size_t cap, double& dropped) {
  dropped = 0.0;
  if (mu.size() <= cap) return mu;
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return mu.weights()[x] > mu.weights()[y]; });
  order.resize(cap);
  std::sort(order.begin(), order.end());
  std::vector<double> pts, wts;
  double kept = 0.0;
  for (std::size_t i : order) {
    const auto p = mu.point(i);
    pts.insert(pts.end(), p.begin(), p.end());
    wts.push_back(mu.weights()[i]);
    kept += mu.weights()[i];
  }
  dropped = 1.0 - kept;
  for (double& w : wts) w /= kept;
  return AtomicMeasure(mu.dim(), std::move(pts), std::move(wts));
}

}  // namespace

double wasserstein1_cdf(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw InvalidArgument("wasserstein1_cdf: measures must be one-dimensional");
  struct Event {
    double x;
    double dmu;
    double dnu;
  };
  std::vector<Event> ev;
  ev.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) ev.push_back({mu.points()[i], mu.weights()[i], 0.0});
  for (std::size_t i = 0; i < nu.size(); ++i) ev.push_back({nu.points()[i], 0.0, nu.weights()[i]});
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.dmu != b.dmu) return a.dmu < b.dmu;
    return a.dnu < b.dnu;
  });
  // F and G accumulate separately so swapping the arguments is exact.
  double f = 0.0, g = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    f += ev[k].dmu;
    g += ev[k].dnu;
    total += std::abs(f - g) * (ev[k + 1].x - ev[k].x);
  }
  return total;
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) throw InvalidArgument("solve_assignment: cost matrix must be n x n");
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting paths with row/column potentials (1-based, column 0 virtual).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

double solve_transportation(const std::vector<double>& supply, const std::vector<double>& demand,
                            const std::vector<double>& cost, std::vector<double>* plan) {
  const std::size_t n = supply.size(), m = demand.size();
  if (n == 0 || m == 0 || cost.size() != n * m) throw InvalidArgument("solve_transportation: bad problem size");
  const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (!(ts > 0.0) || std::abs(ts - td) > 1e-9 * ts) throw InvalidArgument("solve_transportation: unbalanced problem");

  struct Cell {
    std::size_t i, j;
    double flow;
  };
  // North-west corner basis: n + m - 1 cells forming a spanning tree.
  std::vector<Cell> basis;
  basis.reserve(n + m - 1);
  {
    std::vector<double> a = supply, b = demand;
    for (double& x : b) x *= ts / td;
    std::size_t i = 0, j = 0;
    while (true) {
      const double x = std::min(a[i], b[j]);
      basis.push_back({i, j, x});
      a[i] -= x;
      b[j] -= x;
      if (i == n - 1 && j == m - 1) break;
      if (j == m - 1 || (i < n - 1 && a[i] <= b[j])) {
        ++i;
      } else {
        ++j;
      }
    }
    // Rounding leftovers land on the last cell.
    basis.back().flow += std::max(0.0, std::min(a[n - 1], b[m - 1]));
  }

  double cmax = 0.0;
  for (double c : cost) cmax = std::max(cmax, std::abs(c));
  const double tol = 1e-12 * std::max(1.0, cmax);
  const std::size_t nodes = n + m;
  std::vector<double> pot(nodes);
  std::vector<std::size_t> parent(nodes), parent_cell(nodes), depth(nodes), queue(nodes);
  std::vector<std::vector<std::size_t>> adj(nodes);
  const std::size_t total_cells = n * m;
  const std::size_t block = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(static_cast<double>(total_cells))));
  std::size_t cursor = 0;
  const std::size_t max_pivots = 50 * total_cells + 1000;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  for (std::size_t pivot = 0;; ++pivot) {
    if (pivot > max_pivots) throw NumericError("solve_transportation: pivot limit exceeded");
    // Potentials u_i + v_j = c_ij on the tree, rooted at row 0.
    for (auto& a : adj) a.clear();
    for (std::size_t b = 0; b < basis.size(); ++b) {
      adj[basis[b].i].push_back(b);
      adj[n + basis[b].j].push_back(b);
    }
    std::fill(parent.begin(), parent.end(), kNone);
    pot[0] = 0.0;
    parent[0] = 0;
    depth[0] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = 0;
    while (head < tail) {
      const std::size_t v = queue[head++];
      for (std::size_t b : adj[v]) {
        const std::size_t w = v < n ? n + basis[b].j : basis[b].i;
        if (parent[w] != kNone) continue;
        const double c = cost[basis[b].i * m + basis[b].j];
        pot[w] = c - pot[v];
        parent[w] = v;
        parent_cell[w] = b;
        depth[w] = depth[v] + 1;
        queue[tail++] = w;
      }
    }
    if (tail != nodes) throw NumericError("solve_transportation: basis is not a spanning tree");

    // Block pricing.
    std::size_t enter = kNone;
    double best = -tol;
    for (std::size_t scanned = 0; scanned < total_cells && enter == kNone;) {
      const std::size_t stop = std::min(total_cells, scanned + block);
      for (; scanned < stop; ++scanned) {
        const std::size_t c = (cursor + scanned) % total_cells;
        const std::size_t i = c / m, j = c % m;
        const double rc = cost[c] - pot[i] - pot[n + j];
        if (rc < best) {
          best = rc;
          enter = c;
        }
      }
      if (enter != kNone) cursor = (cursor + scanned) % total_cells;
    }
    if (enter == kNone) break;

    const std::size_t ei = enter / m, ej = enter % m;
    // Tree path from column ej and from row ei up to their common ancestor.
    std::vector<std::size_t> from_col, from_row;
    std::size_t x = n + ej, y = ei;
    while (depth[x] > depth[y]) {
      from_col.push_back(parent_cell[x]);
      x = parent[x];
    }
    while (depth[y] > depth[x]) {
      from_row.push_back(parent_cell[y]);
      y = parent[y];
    }
    while (x != y) {
      from_col.push_back(parent_cell[x]);
      x = parent[x];
      from_row.push_back(parent_cell[y]);
      y = parent[y];
    }
    std::vector<std::size_t> cycle = from_col;
    cycle.insert(cycle.end(), from_row.rbegin(), from_row.rend());
    // Signs alternate -, +, -, ... starting next to the entering column.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = kNone;
    for (std::size_t t = 0; t < cycle.size(); t += 2) {
      if (basis[cycle[t]].flow < theta) {
        theta = basis[cycle[t]].flow;
        leave = t;
      }
    }
    for (std::size_t t = 0; t < cycle.size(); ++t) {
      Cell& c = basis[cycle[t]];
      if (t == leave) {
        c.flow = 0.0;
      } else if (t % 2 == 0) {
        c.flow = std::max(0.0, c.flow - theta);
      } else {
        c.flow += theta;
      }
    }
    basis[cycle[leave]] = {ei, ej, theta};
  }

  if (plan != nullptr) plan->assign(total_cells, 0.0);
  // Sum in row-major cell order so the value does not depend on pivot history.
  std::vector<std::pair<std::size_t, double>> flows;
  flows.reserve(basis.size());
  for (const Cell& c : basis) flows.emplace_back(c.i * m + c.j, c.flow);
  std::sort(flows.begin(), flows.end());
  double total = 0.0;
  for (const auto& [c, f] : flows) {
    total += f * cost[c];
    if (plan != nullptr) (*plan)[c] += f;
  }
  return total;
}

TransportResult wasserstein1_detailed(const AtomicMeasure& mu_in, const AtomicMeasure& nu_in) {
  if (mu_in.dim() != nu_in.dim()) throw InvalidArgument("wasserstein1: dimension mismatch");
  const bool swap = canonical_less(nu_in, mu_in);
  const AtomicMeasure& mu = swap ? nu_in : mu_in;
  const AtomicMeasure& nu = swap ? mu_in : nu_in;
  TransportResult out;
  if (mu.dim() == 1) {
    out.method = "cdf";
    out.value = wasserstein1_cdf(mu, nu);
    return out;
  }
  auto uniform = [](const AtomicMeasure& a) {
    return std::all_of(a.weights().begin(), a.weights().end(), [&](double w) { return w == a.weights().front(); });
  };
  const std::size_t n = mu.size();
  if (n == nu.size() && n <= kAssignmentCap && uniform(mu) && uniform(nu)) {
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = euclid(mu, i, nu, j);
    }
    const auto match = solve_assignment(cost, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + match[i]];
    out.method = "assignment";
    out.value = total / static_cast<double>(n);
    return out;
  }
  double drop_mu = 0.0, drop_nu = 0.0;
  const AtomicMeasure a = truncate_largest(mu, kTransportAtomCap, drop_mu);
  const AtomicMeasure b = truncate_largest(nu, kTransportAtomCap, drop_nu);
  out.quantised = a.size() != mu.size() || b.size() != nu.size();
  out.dropped_mass = std::max(drop_mu, drop_nu);
  std::vector<double> cost(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) cost[i * b.size() + j] = euclid(a, i, b, j);
  }
  out.method = "network_simplex";
  out.value = solve_transportation(a.weights(), b.weights(), cost);
  return out;
}

double wasserstein1(const AtomicMeasure& mu, const AtomicMeasure& nu) { return wasserstein1_detailed(mu, nu).value; }

}  // namespace ienergy
