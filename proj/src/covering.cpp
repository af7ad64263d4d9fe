#include "sensynth/covering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>

namespace sensynth::covering {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

CoveringProblem build_covering(const GridRegion& region,
                               std::span<const graphs::CellGraph> visibility,
                               const Demands& demands, int budget) {
  if (static_cast<int>(visibility.size()) != demands.types()) {
    throw std::invalid_argument("one visibility graph per sensor type");
  }
  if (budget < 0) throw std::invalid_argument("negative budget");
  CoveringProblem p;
  p.cells = region.open_cells();
  p.budget = budget;
  const int n = p.vertex_count();
  for (int t = 0; t < demands.types(); ++t) {
    const graphs::CellGraph& g = visibility[t];
    if (g.size() != n) throw std::invalid_argument("graph does not match region");
    std::vector<std::vector<int>> nb(n);
    std::vector<int> dem(n);
    for (int v = 0; v < n; ++v) {
      nb[v] = g.adjacency[v];
      if (g.self_cover[v]) nb[v].insert(std::lower_bound(nb[v].begin(), nb[v].end(), v), v);
      dem[v] = demands.at(t, region.index(p.cells[v]));
      if (dem[v] > 0 && nb[v].empty()) {
        const Cell c = p.cells[v];
        throw InfeasibleCover("no candidate covers cell (" + std::to_string(c.col) +
                                  ", " + std::to_string(c.row) + ") for type " +
                                  std::to_string(t),
                              c, t);
      }
    }
    p.neighborhoods.push_back(std::move(nb));
    p.demand.push_back(std::move(dem));
  }
  return p;
}

int IntegerPlacement::total() const {
  int s = 0;
  for (const auto& per_type : n) s += std::accumulate(per_type.begin(), per_type.end(), 0);
  return s;
}

bool satisfies(const CoveringProblem& problem, const IntegerPlacement& x) {
  if (static_cast<int>(x.n.size()) != problem.types()) return false;
  for (int t = 0; t < problem.types(); ++t) {
    for (int v = 0; v < problem.vertex_count(); ++v) {
      if (x.n[t][v] < 0) return false;
      int got = 0;
      for (int j : problem.neighborhoods[t][v]) got += x.n[t][j];
      if (got < problem.demand[t][v]) return false;
    }
  }
  return problem.budget == 0 || x.total() <= problem.budget;
}

namespace {

// Column j covers the vertices whose neighborhoods contain j.
std::vector<std::vector<int>> columns_of(const std::vector<std::vector<int>>& nb) {
  std::vector<std::vector<int>> cols(nb.size());
  for (size_t i = 0; i < nb.size(); ++i) {
    for (int j : nb[i]) cols[j].push_back(static_cast<int>(i));
  }
  return cols;
}

std::vector<int> greedy_type(const std::vector<std::vector<int>>& nb,
                             const std::vector<int>& demand) {
  const int n = static_cast<int>(nb.size());
  const auto cols = columns_of(nb);
  std::vector<int> residual = demand;
  std::vector<int> x(n, 0);
  while (true) {
    int best = -1, gain = 0;
    for (int j = 0; j < n; ++j) {
      int g = 0;
      for (int i : cols[j]) g += residual[i] > 0;
      if (g > gain) {
        gain = g;
        best = j;
      }
    }
    if (best < 0) break;
    ++x[best];
    for (int i : cols[best]) {
      if (residual[i] > 0) --residual[i];
    }
  }
  return x;
}

}  // namespace

IntegerPlacement greedy_cover(const CoveringProblem& problem) {
  IntegerPlacement x;
  for (int t = 0; t < problem.types(); ++t) {
    x.n.push_back(greedy_type(problem.neighborhoods[t], problem.demand[t]));
  }
  return x;
}

LpResult solve_covering_lp(const std::vector<std::vector<int>>& rows,
                           const std::vector<int>& rhs, int columns,
                           const std::vector<int>& lower,
                           const std::vector<int>& upper, Seconds budget) {
  constexpr double kCost = 1e-9;   // reduced-cost tolerance
  constexpr double kPivot = 1e-7;  // smallest usable pivot
  constexpr double kRatio = 1e-9;  // Harris relaxation of the ratio test
  const auto t0 = Clock::now();
  LpResult res;
  const int m = columns;
  for (int j = 0; j < m; ++j) {
    if (upper[j] >= 0 && upper[j] < lower[j]) return res;
  }
  // Feasibility is decided exactly: every column at its upper bound.
  for (size_t i = 0; i < rows.size(); ++i) {
    long most = 0;
    bool unbounded = false;
    for (int j : rows[i]) {
      if (upper[j] < 0) unbounded = true;
      else most += upper[j];
    }
    if (!unbounded && most < rhs[i]) return res;
  }
  // Dual variables: y for rows with positive residual demand, w for bounded
  // columns. One dual constraint (tableau row) per primal column.
  std::vector<int> ys;
  std::vector<double> b;
  for (size_t i = 0; i < rows.size(); ++i) {
    double bi = rhs[i];
    for (int j : rows[i]) bi -= lower[j];
    if (bi > 0.5) {
      ys.push_back(static_cast<int>(i));
      b.push_back(bi);
    }
  }
  std::vector<int> ws;
  for (int j = 0; j < m; ++j) {
    if (upper[j] >= 0) ws.push_back(j);
  }
  const int ny = static_cast<int>(ys.size());
  const int nw = static_cast<int>(ws.size());
  const int nv = ny + nw + m;
  const int width = nv + 1;
  std::vector<double> tab(static_cast<size_t>(m) * width, 0.0);
  auto at = [&](int r, int c) -> double& { return tab[static_cast<size_t>(r) * width + c]; };
  for (int k = 0; k < ny; ++k) {
    for (int j : rows[ys[k]]) at(j, k) += 1.0;
  }
  for (int k = 0; k < nw; ++k) at(ws[k], ny + k) = -1.0;
  // Dual right-hand sides (primal costs) are all 1, which is massively
  // degenerate; a tiny deterministic perturbation breaks the ties. The
  // reported bound below is certified against the unperturbed costs.
  for (int j = 0; j < m; ++j) {
    at(j, ny + nw + j) = 1.0;
    at(j, nv) = 1.0 + 1e-7 * (1.0 + static_cast<double>((j * 2654435761u) % 1009) / 1009.0);
  }
  // Objective row holds reduced costs; negative entries improve the max.
  std::vector<double> obj(width, 0.0);
  for (int k = 0; k < ny; ++k) obj[k] = -b[k];
  for (int k = 0; k < nw; ++k) obj[ny + k] = upper[ws[k]] - lower[ws[k]];
  std::vector<int> basis(m);
  for (int j = 0; j < m; ++j) basis[j] = ny + nw + j;

  bool bland = false;
  int stalled = 0;
  double last = 0.0;
  std::vector<int> nz;
  nz.reserve(width);
  for (long iter = 0;; ++iter) {
    if ((iter & 63) == 0 && seconds_since(t0) > budget.count()) {
      res.timed_out = true;
      return res;
    }
    int enter = -1;
    double best = -kCost;
    for (int c = 0; c < nv; ++c) {
      if (obj[c] < best) {
        enter = c;
        if (bland) break;
        best = obj[c];
      }
    }
    if (enter < 0) break;
    int leave = -1;
    if (bland) {
      double ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double a = at(r, enter);
        if (a <= kPivot) continue;
        const double q = std::max(0.0, at(r, nv)) / a;
        if (q < ratio - kRatio || (q <= ratio + kRatio && basis[r] < basis[leave])) {
          ratio = q;
          leave = r;
        }
      }
    } else {
      // Two passes: the relaxed bound, then the largest pivot under it.
      double bound = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double a = at(r, enter);
        if (a > kPivot) bound = std::min(bound, (std::max(0.0, at(r, nv)) + kRatio) / a);
      }
      double biggest = 0.0;
      for (int r = 0; r < m; ++r) {
        const double a = at(r, enter);
        if (a > kPivot && std::max(0.0, at(r, nv)) / a <= bound && a > biggest) {
          biggest = a;
          leave = r;
        }
      }
    }
    // The dual is bounded whenever the primal is feasible, checked above.
    if (leave < 0) throw std::runtime_error("covering LP lost numerical stability");
    const double piv = at(leave, enter);
    nz.clear();
    for (int c = 0; c < width; ++c) {
      double& v = at(leave, c);
      v /= piv;
      if (std::abs(v) < 1e-12) v = 0.0;
      if (v != 0.0) nz.push_back(c);
    }
    at(leave, enter) = 1.0;
    if (at(leave, nv) < 0.0) at(leave, nv) = 0.0;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (int c : nz) at(r, c) -= f * at(leave, c);
      at(r, enter) = 0.0;
      if (at(r, nv) < 0.0) at(r, nv) = 0.0;
    }
    const double f = obj[enter];
    for (int c : nz) obj[c] -= f * at(leave, c);
    obj[enter] = 0.0;
    basis[leave] = enter;
    if (obj[nv] <= last + kCost) {
      if (++stalled > 50) bland = true;
    } else {
      stalled = 0;
    }
    last = obj[nv];
  }
  res.feasible = true;
  res.x.resize(m);
  res.objective = 0.0;
  for (int j = 0; j < m; ++j) {
    res.x[j] = lower[j] + std::max(0.0, obj[ny + nw + j]);
    res.objective += res.x[j];
  }
  // Weak duality: repair the basic dual vector into an exactly feasible one
  // (y >= 0, A'y - w <= 1, w >= 0) and evaluate it.
  std::vector<double> y(ny, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] < ny) y[basis[r]] = std::max(0.0, at(r, nv));
  }
  std::vector<double> load(m, 0.0);
  for (int k = 0; k < ny; ++k) {
    for (int j : rows[ys[k]]) load[j] += y[k];
  }
  double scale = 1.0;
  for (int j = 0; j < m; ++j) {
    if (upper[j] < 0) scale = std::max(scale, load[j]);
  }
  double bound = 0.0;
  for (int k = 0; k < ny; ++k) bound += b[k] * y[k] / scale;
  for (int j = 0; j < m; ++j) {
    if (upper[j] >= 0) bound -= (upper[j] - lower[j]) * std::max(0.0, load[j] / scale - 1.0);
  }
  for (int j = 0; j < m; ++j) bound += lower[j];
  res.lower_bound = std::min(bound, res.objective);
  return res;
}

namespace {

struct TypeResult {
  std::vector<int> x;
  bool optimal = false;
  double bound = 0.0;
  long nodes = 0;
};

using Bits = std::vector<uint64_t>;

bool subset_of(const Bits& a, const Bits& b) {
  for (size_t w = 0; w < a.size(); ++w) {
    if (a[w] & ~b[w]) return false;
  }
  return true;
}

TypeResult solve_type(const std::vector<std::vector<int>>& nb,
                      const std::vector<int>& demand, Seconds budget) {
  const auto t0 = Clock::now();
  const int n = static_cast<int>(nb.size());
  TypeResult out;
  out.x = greedy_type(nb, demand);
  int incumbent = std::accumulate(out.x.begin(), out.x.end(), 0);

  // Rows: demanded vertices. Columns: candidates that cover some row and are
  // not dominated by another candidate.
  std::vector<int> row_ids;
  for (int i = 0; i < n; ++i) {
    if (demand[i] > 0) row_ids.push_back(i);
  }
  if (row_ids.empty()) {
    out.optimal = true;
    return out;
  }
  std::vector<int> row_of(n, -1);
  for (size_t r = 0; r < row_ids.size(); ++r) row_of[row_ids[r]] = static_cast<int>(r);
  const size_t words = (row_ids.size() + 63) / 64;
  std::vector<Bits> covers(n, Bits(words, 0));
  std::vector<int> weight(n, 0);
  for (int i : row_ids) {
    for (int j : nb[i]) {
      covers[j][row_of[i] / 64] |= uint64_t{1} << (row_of[i] % 64);
      ++weight[j];
    }
  }
  std::vector<int> cols;
  for (int j = 0; j < n; ++j) {
    if (weight[j] == 0) continue;
    bool dominated = false;
    for (int o = 0; o < n && !dominated; ++o) {
      if (o == j || weight[o] < weight[j]) continue;
      if (!subset_of(covers[j], covers[o])) continue;
      dominated = weight[o] > weight[j] || o < j;
    }
    if (!dominated) cols.push_back(j);
  }
  const int m = static_cast<int>(cols.size());
  std::vector<int> col_index(n, -1);
  for (int c = 0; c < m; ++c) col_index[cols[c]] = c;
  std::vector<std::vector<int>> rows(row_ids.size());
  std::vector<int> rhs(row_ids.size());
  for (size_t r = 0; r < row_ids.size(); ++r) {
    for (int j : nb[row_ids[r]]) {
      if (col_index[j] >= 0) rows[r].push_back(col_index[j]);
    }
    rhs[r] = demand[row_ids[r]];
  }

  auto feasible = [&](const std::vector<int>& x) {
    for (size_t r = 0; r < rows.size(); ++r) {
      int got = 0;
      for (int c : rows[r]) got += x[c];
      if (got < rhs[r]) return false;
    }
    return true;
  };
  auto adopt = [&](const std::vector<int>& x) {
    const int value = std::accumulate(x.begin(), x.end(), 0);
    if (value >= incumbent) return;
    incumbent = value;
    std::fill(out.x.begin(), out.x.end(), 0);
    for (int c = 0; c < m; ++c) out.x[cols[c]] = x[c];
  };

  struct Node {
    std::vector<int> lower, upper;
  };
  std::vector<Node> stack;
  stack.push_back({std::vector<int>(m, 0), std::vector<int>(m, -1)});
  bool root = true;
  bool complete = true;
  while (!stack.empty()) {
    if (seconds_since(t0) > budget.count()) {
      complete = false;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++out.nodes;
    const LpResult lp = solve_covering_lp(rows, rhs, m, node.lower, node.upper,
                                          Seconds(budget.count() - seconds_since(t0)));
    if (lp.timed_out) {
      complete = false;
      break;
    }
    if (!lp.feasible) continue;
    const int bound = static_cast<int>(std::ceil(lp.lower_bound - 1e-6));
    if (root) {
      out.bound = bound;
      root = false;
    }
    if (bound >= incumbent) continue;
    int branch = -1;
    double best_frac = 0.0;
    for (int c = 0; c < m; ++c) {
      const double f = lp.x[c] - std::floor(lp.x[c] + 1e-9);
      const double dist = std::min(f, 1.0 - f);
      if (dist > 1e-6 && dist > best_frac + 1e-12) {
        best_frac = dist;
        branch = c;
      }
    }
    if (branch < 0) {
      std::vector<int> x(m);
      for (int c = 0; c < m; ++c) x[c] = static_cast<int>(std::llround(lp.x[c]));
      if (feasible(x)) adopt(x);
      continue;
    }
    // Rounding heuristic: round up, then drop sensors that are not needed.
    std::vector<int> x(m);
    for (int c = 0; c < m; ++c) x[c] = static_cast<int>(std::ceil(lp.x[c] - 1e-9));
    for (int c = 0; c < m; ++c) {
      while (x[c] > node.lower[c]) {
        --x[c];
        if (!feasible(x)) {
          ++x[c];
          break;
        }
      }
    }
    if (feasible(x)) adopt(x);
    const int fl = static_cast<int>(std::floor(lp.x[branch]));
    Node down = node;
    down.upper[branch] = fl;
    Node up = std::move(node);
    up.lower[branch] = fl + 1;
    stack.push_back(std::move(down));
    stack.push_back(std::move(up));
  }
  out.optimal = complete;
  if (complete) out.bound = incumbent;
  return out;
}

}  // namespace

CoverResult solve_covering(const CoveringProblem& problem, Seconds budget) {
  const auto t0 = Clock::now();
  CoverResult res;
  res.optimal = true;
  for (int t = 0; t < problem.types(); ++t) {
    const double left = std::max(0.0, budget.count() - seconds_since(t0));
    const TypeResult tr = solve_type(problem.neighborhoods[t], problem.demand[t],
                                     Seconds(left / (problem.types() - t)));
    res.placement.n.push_back(tr.x);
    res.optimal = res.optimal && tr.optimal;
    res.lower_bound += tr.bound;
    res.nodes += tr.nodes;
  }
  res.objective = res.placement.total();
  res.feasible = problem.budget == 0 || res.objective <= problem.budget;
  return res;
}

Placement to_placement(const CoveringProblem& problem, const IntegerPlacement& x,
                       const GridRegion& region, std::span<const SensorSpec> specs) {
  Placement out;
  for (int t = 0; t < problem.types(); ++t) {
    for (int v = 0; v < problem.vertex_count(); ++v) {
      for (int c = 0; c < x.n[t][v]; ++c) {
        out.push_back({region.center(problem.cells[v]), specs[t].type_id, Role::kPrimary});
      }
    }
  }
  return out;
}

RepairResult connectivity_repair(const IntegerPlacement& x,
                                 const graphs::CellGraph& g_c) {
  RepairResult res{x, {}};
  std::vector<int> deployed;
  for (int v = 0; v < g_c.size(); ++v) {
    int count = 0;
    for (const auto& per_type : x.n) count += per_type[v];
    if (count > 0) deployed.push_back(v);
  }
  if (deployed.size() <= 1) return res;
  const graphs::CollapsedGraph cg = graphs::collapse(deployed, g_c);
  res.relay_vertices = graphs::steiner_repair(cg);
  for (int v : res.relay_vertices) ++res.placement.n[0][v];
  return res;
}

bool LinearConstraint::holds(const std::vector<int>& values) const {
  long lhs = 0;
  for (const LinearTerm& t : terms) lhs += static_cast<long>(t.coef) * values[t.var];
  switch (sense) {
    case Sense::kLe:
      return lhs <= rhs;
    case Sense::kGe:
      return lhs >= rhs;
    case Sense::kEq:
      return lhs == rhs;
  }
  return false;
}

DdSystem dd_connectivity_encoding(const graphs::CellGraph& g_v,
                                  const graphs::CellGraph& g_c, int k) {
  if (g_v.size() != g_c.size()) throw std::invalid_argument("graph size mismatch");
  DdSystem s;
  const int n = g_c.size();
  s.n = n;
  s.k = k;
  s.big_m = n + 1;
  s.big_n = 2 * n;
  int next = 0;
  for (int i = 0; i < n; ++i) s.c_var.push_back(next++);
  for (int i = 0; i < n; ++i) s.q_var.push_back(next++);
  s.a_var.assign(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) s.a_var[i][j] = s.a_var[j][i] = next++;
  }
  for (int i = 0; i < n; ++i) s.d_var.push_back(next++);
  s.var_count = next;
  s.edge.assign(static_cast<size_t>(n) * n, false);
  for (int i = 0; i < n; ++i) {
    for (int j : g_c.adjacency[i]) s.edge[static_cast<size_t>(i) * n + j] = true;
  }
  using Sense = LinearConstraint::Sense;
  for (int i = 0; i < n; ++i) {
    LinearConstraint cov{{}, Sense::kGe, k, "coverage"};
    if (g_v.self_cover[i]) cov.terms.push_back({s.c_var[i], 1});
    for (int j : g_v.adjacency[i]) cov.terms.push_back({s.c_var[j], 1});
    s.constraints.push_back(std::move(cov));
    s.constraints.push_back({{{s.q_var[i], 1}, {s.c_var[i], -1}}, Sense::kLe, 0, "q"});
    s.constraints.push_back(
        {{{s.c_var[i], 1}, {s.q_var[i], -s.big_m}}, Sense::kLe, 0, "q"});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int a = s.a_var[i][j];
      if (s.edge[static_cast<size_t>(i) * n + j]) {
        s.constraints.push_back(
            {{{s.q_var[i], 1}, {s.q_var[j], 1}, {a, -2}}, Sense::kGe, 0, "a1"});
        s.constraints.push_back(
            {{{s.q_var[i], 1}, {s.q_var[j], 1}, {a, -1}}, Sense::kLe, 1, "a1"});
      } else {
        s.constraints.push_back({{{a, 1}}, Sense::kEq, 0, "a2"});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    LinearConstraint deg{{{s.d_var[i], 1}}, Sense::kEq, 0, "degree"};
    for (int j = 0; j < n; ++j) {
      if (j != i) deg.terms.push_back({s.a_var[i][j], -1});
    }
    s.constraints.push_back(std::move(deg));
  }
  // 0 <= 2 d_i + 1 - sum_j q_j + N (1 - q_i)
  for (int i = 0; i < n; ++i) {
    LinearConstraint aff{{{s.d_var[i], 2}}, Sense::kGe, -1 - s.big_n, "aff_connect"};
    for (int j = 0; j < n; ++j) {
      aff.terms.push_back({s.q_var[j], j == i ? -1 - s.big_n : -1});
    }
    s.constraints.push_back(std::move(aff));
  }
  return s;
}

namespace {

bool deployed_connected(const std::vector<int>& q, const graphs::CellGraph& g) {
  const int n = static_cast<int>(q.size());
  int first = -1, total = 0;
  for (int i = 0; i < n; ++i) {
    if (q[i]) {
      ++total;
      if (first < 0) first = i;
    }
  }
  if (total <= 1) return true;
  std::vector<bool> seen(n, false);
  std::deque<int> queue{first};
  seen[first] = true;
  int reached = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : g.adjacency[u]) {
      if (q[v] && !seen[v]) {
        seen[v] = true;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  return reached == total;
}

}  // namespace

DdCheck check_dd_exhaustive(const DdSystem& s, const graphs::CellGraph& g_c) {
  const int n = s.n;
  if (n > 8) throw std::invalid_argument("exhaustive check is capped at 8 vertices");
  // Constraints touching only the listed variables, per variable group.
  auto only_over = [&](const LinearConstraint& c, std::initializer_list<int> vars) {
    for (const LinearTerm& t : c.terms) {
      if (std::find(vars.begin(), vars.end(), t.var) == vars.end()) return false;
    }
    return true;
  };
  DdCheck out;
  std::vector<int> values(s.var_count, 0);
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> q(n);
    for (int i = 0; i < n; ++i) {
      q[i] = (mask >> i) & 1;
      values[s.q_var[i]] = q[i];
    }
    // Allowed C_i values in [0, k] under constraints on (C_i, q_i) alone.
    std::vector<std::vector<int>> c_dom(n);
    for (int i = 0; i < n; ++i) {
      for (int v = 0; v <= s.k; ++v) {
        values[s.c_var[i]] = v;
        bool ok = true;
        for (const LinearConstraint& c : s.constraints) {
          if (only_over(c, {s.c_var[i], s.q_var[i]}) && !c.holds(values)) ok = false;
        }
        if (ok) c_dom[i].push_back(v);
      }
    }
    // Allowed a_ij values under constraints on (q_i, q_j, a_ij) alone.
    std::vector<std::pair<int, std::vector<int>>> a_dom;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int a = s.a_var[i][j];
        std::vector<int> dom;
        for (int v = 0; v <= 1; ++v) {
          values[a] = v;
          bool ok = true;
          for (const LinearConstraint& c : s.constraints) {
            if (only_over(c, {s.q_var[i], s.q_var[j], a}) && !c.holds(values)) ok = false;
          }
          if (ok) dom.push_back(v);
        }
        a_dom.push_back({a, std::move(dom)});
      }
    }
    bool empty = false;
    for (const auto& d : c_dom) empty = empty || d.empty();
    for (const auto& d : a_dom) empty = empty || d.second.empty();
    const bool connected = deployed_connected(q, g_c);
    bool cover_ok = false, full_ok = false;
    if (!empty) {
      // Odometer over C, then over a.
      std::vector<size_t> ci(n, 0);
      while (true) {
        for (int i = 0; i < n; ++i) values[s.c_var[i]] = c_dom[i][ci[i]];
        bool cov = true;
        for (const LinearConstraint& c : s.constraints) {
          if ((c.family == "coverage" || c.family == "q") && !c.holds(values)) cov = false;
        }
        if (cov) {
          cover_ok = true;
          std::vector<size_t> ai(a_dom.size(), 0);
          while (true) {
            for (size_t e = 0; e < a_dom.size(); ++e) {
              values[a_dom[e].first] = a_dom[e].second[ai[e]];
            }
            for (int i = 0; i < n; ++i) {
              int d = 0;
              for (int j = 0; j < n; ++j) {
                if (j != i) d += values[s.a_var[i][j]];
              }
              values[s.d_var[i]] = d;
            }
            bool all = true;
            for (const LinearConstraint& c : s.constraints) {
              if (!c.holds(values)) {
                all = false;
                break;
              }
            }
            if (all) {
              full_ok = true;
              ++out.feasible_assignments;
              if (!connected) ++out.disconnected_accepted;
            }
            size_t e = 0;
            while (e < ai.size() && ++ai[e] == a_dom[e].second.size()) ai[e++] = 0;
            if (e == ai.size()) break;
          }
        }
        int i = 0;
        while (i < n && ++ci[i] == c_dom[i].size()) ci[i++] = 0;
        if (i == n) break;
      }
    }
    if (connected && cover_ok && !full_ok) ++out.connected_rejected;
  }
  return out;
}

Recommendation select_method(double extent, double gamma, double beta,
                             int open_cells, int chi) {
  if (!(extent >= 0.0 && extent <= 1.0) || !(gamma >= 0.0 && gamma <= 8.0) ||
      !(beta > 0.0) || open_cells < 0) {
    throw std::invalid_argument("selection inputs out of range");
  }
  if (beta > 1.0) {
    return gamma > 3.0 ? Recommendation{Method::kMilp, 1} : Recommendation{Method::kSmc, 2};
  }
  if (extent < 0.15) return {Method::kSmc, 3};
  if (extent <= 0.25) {
    if (gamma > 3.0) {
      return {open_cells <= chi ? Method::kEither : Method::kSmc, 4};
    }
    return {Method::kSmc, 5};
  }
  return {Method::kSmc, 6};
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kSmc:
      return "smc";
    case Method::kMilp:
      return "milp";
    case Method::kEither:
      return "either";
  }
  return "?";
}

}  // namespace sensynth::covering
