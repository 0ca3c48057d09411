#include "cct/transport.hpp"

#include "cct/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace cct {

SimplexVector project_simplex(const Vector& v) {
  const Eigen::Index D = v.size();
  if (D == 0) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + D);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < D; ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  Vector p = (v.array() - theta).max(0.0).matrix();
  // Remove the last bit of round-off so the strict constructor accepts it.
  const double s = p.sum();
  if (s > 0.0) p /= s;
  return SimplexVector(p);
}

Vector project_ball(const Vector& g, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius must be positive");
  const double norm = g.norm();
  if (norm <= radius) return g;
  return g * (radius / norm);
}

Matrix squared_distance_costs(const Matrix& X, const Matrix& sites) {
  Matrix C(X.cols(), sites.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    for (Eigen::Index j = 0; j < sites.cols(); ++j) C(i, j) = (X.col(i) - sites.col(j)).squaredNorm();
  return C;
}

namespace {

// Column demands scaled by N; snapped to integers when they are integral up
// to round-off, which makes the simplex pivots exact.
std::vector<double> scaled_demands(const Vector& P, int N, bool& integral) {
  const int D = static_cast<int>(P.size());
  std::vector<double> b(D);
  integral = true;
  for (int j = 0; j < D; ++j) {
    const double x = P[j] * N;
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) {
      b[j] = r;
    } else {
      b[j] = x;
      integral = false;
    }
  }
  if (integral) {
    const double total = std::accumulate(b.begin(), b.end(), 0.0);
    if (total != N) integral = false;
  }
  return b;
}

TransportPlan finish_plan(const Matrix& costs, const Matrix& x, int N, bool integral) {
  TransportPlan plan;
  plan.gamma = x / static_cast<double>(N);
  plan.value = (costs.array() * plan.gamma.array()).sum();
  if (integral) {
    std::vector<int> lambda(N);
    for (int i = 0; i < N; ++i) {
      Eigen::Index j;
      x.row(i).maxCoeff(&j);
      lambda[i] = static_cast<int>(j);
    }
    plan.assignment = std::move(lambda);
  }
  return plan;
}

Matrix two_column_plan(const Matrix& costs, const std::vector<double>& b) {
  const int N = static_cast<int>(costs.rows());
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
    return costs(a, 0) - costs(a, 1) < costs(c, 0) - costs(c, 1);
  });
  Matrix x = Matrix::Zero(N, 2);
  double remaining = b[0];
  for (int r = 0; r < N; ++r) {
    const int i = order[r];
    const double take = std::clamp(remaining, 0.0, 1.0);
    x(i, 0) = take;
    x(i, 1) = 1.0 - take;
    remaining -= take;
  }
  return x;
}

class TransportationSimplex {
 public:
  TransportationSimplex(const Matrix& c, const std::vector<double>& demand, double eps)
      : c_(c), N_(static_cast<int>(c.rows())), D_(static_cast<int>(c.cols())), eps_(eps) {
    is_basic_.assign(static_cast<std::size_t>(N_) * D_, -1);
    adj_.resize(N_ + D_);
    northwest_corner(demand);
  }

  Matrix solve() {
    const double scale = std::max(1.0, c_.cwiseAbs().maxCoeff());
    const double tol = eps_ * scale;
    std::vector<double> u(N_), v(D_);
    int degenerate_run = 0;
    const int bland_after = 2 * (N_ + D_);
    for (long iter = 0;; ++iter) {
      potentials(u, v);
      int ei = -1, ej = -1;
      double best = -tol;
      const bool bland = degenerate_run > bland_after;
      for (int i = 0; i < N_ && !(bland && ei >= 0); ++i) {
        for (int j = 0; j < D_; ++j) {
          if (is_basic_[idx(i, j)] >= 0) continue;
          const double r = c_(i, j) - u[i] - v[j];
          if (r < best) {
            best = bland ? -tol : r;
            ei = i;
            ej = j;
            if (bland) break;
          }
        }
      }
      if (ei < 0) break;
      const double theta = pivot(ei, ej, bland);
      degenerate_run = theta == 0.0 ? degenerate_run + 1 : 0;
      if (iter > 100000000L) throw std::runtime_error("transportation simplex: iteration limit");
    }
    Matrix x = Matrix::Zero(N_, D_);
    for (const auto& cell : cells_)
      if (cell.alive) x(cell.i, cell.j) = cell.x;
    return x;
  }

 private:
  struct Cell {
    int i, j;
    double x;
    bool alive;
  };

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * D_ + j; }

  void add_cell(int i, int j, double x) {
    const int id = static_cast<int>(cells_.size());
    cells_.push_back({i, j, x, true});
    is_basic_[idx(i, j)] = id;
    adj_[i].push_back(id);
    adj_[N_ + j].push_back(id);
  }

  void remove_cell(int id) {
    Cell& cell = cells_[id];
    cell.alive = false;
    is_basic_[idx(cell.i, cell.j)] = -1;
    auto drop = [id](std::vector<int>& list) { list.erase(std::find(list.begin(), list.end(), id)); };
    drop(adj_[cell.i]);
    drop(adj_[N_ + cell.j]);
  }

  void northwest_corner(const std::vector<double>& demand) {
    std::vector<double> a(N_, 1.0), b = demand;
    int i = 0, j = 0;
    while (true) {
      const double x = std::max(0.0, std::min(a[i], b[j]));
      add_cell(i, j, x);
      a[i] -= x;
      b[j] -= x;
      if (i == N_ - 1 && j == D_ - 1) break;
      if (i == N_ - 1) {
        ++j;
      } else if (j == D_ - 1) {
        ++i;
      } else if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void potentials(std::vector<double>& u, std::vector<double>& v) const {
    std::vector<char> seen(N_ + D_, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    u[0] = 0.0;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (int id : adj_[node]) {
        const Cell& cell = cells_[id];
        const int other = node < N_ ? N_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < N_)
          v[cell.j] = c_(cell.i, cell.j) - u[cell.i];
        else
          u[cell.i] = c_(cell.i, cell.j) - v[cell.j];
        queue.push_back(other);
      }
    }
  }

  // Inserts (ei, ej) into the basis and returns the step length.
  double pivot(int ei, int ej, bool bland) {
    // Tree path from row ei to column ej.
    std::vector<int> parent_cell(N_ + D_, -2);
    std::deque<int> queue{ei};
    parent_cell[ei] = -1;
    const int target = N_ + ej;
    while (!queue.empty() && parent_cell[target] == -2) {
      const int node = queue.front();
      queue.pop_front();
      for (int id : adj_[node]) {
        const Cell& cell = cells_[id];
        const int other = node < N_ ? N_ + cell.j : cell.i;
        if (parent_cell[other] != -2) continue;
        parent_cell[other] = id;
        queue.push_back(other);
      }
    }
    // Walk back from the column: the first cell is a donor, then alternate.
    std::vector<int> path;
    for (int node = target; node != ei;) {
      const int id = parent_cell[node];
      path.push_back(id);
      const Cell& cell = cells_[id];
      node = node < N_ ? N_ + cell.j : cell.i;
    }
    int leave = -1;
    double theta = 0.0;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell& cell = cells_[path[k]];
      const bool better = leave < 0 || cell.x < theta ||
                          (bland && cell.x == theta &&
                           idx(cell.i, cell.j) < idx(cells_[leave].i, cells_[leave].j));
      if (better) {
        leave = path[k];
        theta = cell.x;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) cells_[path[k]].x += (k % 2 == 0 ? -theta : theta);
    remove_cell(leave);
    add_cell(ei, ej, theta);
    return theta;
  }

  const Matrix& c_;
  int N_, D_;
  double eps_;
  std::vector<Cell> cells_;
  std::vector<int> is_basic_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace

TransportPlan discrete_ot(const Matrix& costs, const Vector& col_marginals, const OtOptions& opts) {
  const int N = static_cast<int>(costs.rows());
  const int D = static_cast<int>(costs.cols());
  if (N < 1 || D < 1) throw std::invalid_argument("discrete_ot: empty cost matrix");
  if (col_marginals.size() != D) throw std::invalid_argument("discrete_ot: marginal size mismatch");
  if (!costs.allFinite()) throw std::invalid_argument("discrete_ot: non-finite costs");
  if ((col_marginals.array() < -1e-12).any() || std::abs(col_marginals.sum() - 1.0) > 1e-9)
    throw InfeasibleMarginals("column marginals must be nonnegative and sum to 1");

  bool integral = false;
  std::vector<double> b = scaled_demands(col_marginals.cwiseMax(0.0), N, integral);

  Matrix x;
  if (D == 1) {
    x = Matrix::Ones(N, 1);
  } else if (D == 2 && !opts.force_simplex) {
    x = two_column_plan(costs, b);
  } else {
    // Absorb any round-off so that supplies and demands balance exactly.
    if (!integral) {
      const double total = std::accumulate(b.begin(), b.end(), 0.0);
      b[D - 1] = std::max(0.0, b[D - 1] + (N - total));
    }
    x = TransportationSimplex(costs, b, opts.reduced_cost_eps).solve();
  }
  return finish_plan(costs, x, N, integral);
}

TransportPlan discrete_ot(const Matrix& costs, const SimplexVector& col_marginals,
                          const OtOptions& opts) {
  return discrete_ot(costs, col_marginals.values(), opts);
}

int default_nodes_per_axis(int n) {
  switch (n) {
    case 1: return 1 << 20;
    case 2: return 1024;
    case 3: return 101;
    default: return 0;
  }
}

namespace {

int resolve_nodes(int n, const QuadratureOptions& q) {
  if (n > q.max_dimension || n > 3 || n < 1)
    throw UnsupportedDimension("uniform-box quadrature supports dimensions 1.." +
                               std::to_string(std::min(3, q.max_dimension)) + ", got " +
                               std::to_string(n));
  const int G = q.nodes_per_axis > 0 ? q.nodes_per_axis : default_nodes_per_axis(n);
  if (G < 1) throw std::invalid_argument("quadrature: nodes_per_axis must be positive");
  return G;
}

void check_sites(int n, const Matrix& sites, const Vector& g) {
  if (sites.rows() != n || sites.cols() < 1 || g.size() != sites.cols())
    throw std::invalid_argument("power cells: site/weight dimension mismatch");
}

int power_argmin(const Matrix& sites, const Vector& g, const Vector& x) {
  int best = 0;
  double best_val = (x - sites.col(0)).squaredNorm() - g[0];
  for (Eigen::Index j = 1; j < sites.cols(); ++j) {
    const double val = (x - sites.col(j)).squaredNorm() - g[j];
    if (val < best_val) {
      best_val = val;
      best = static_cast<int>(j);
    }
  }
  return best;
}

CellEvaluation evaluate_empirical(const Empirical& e, const Matrix& sites, const Vector& g) {
  const Eigen::Index K = e.points.cols();
  CellEvaluation out;
  out.measures = Vector::Zero(sites.cols());
  for (Eigen::Index i = 0; i < K; ++i) {
    const Vector x = e.points.col(i);
    const int j = power_argmin(sites, g, x);
    out.measures[j] += 1.0;
    out.integral += (x - sites.col(j)).squaredNorm() - g[j];
  }
  out.measures /= static_cast<double>(K);
  out.integral /= static_cast<double>(K);
  return out;
}

// Enumerates the rows of the midpoint grid: every combination of the
// coordinates 1..n-1, with coordinate 0 left free.
template <class F>
void for_each_row(const UniformBox& box, int G, F&& f) {
  const int n = static_cast<int>(box.lower.size());
  const Vector h = (box.upper - box.lower) / static_cast<double>(G);
  Vector x(n);
  std::vector<int> idx(n, 0);
  while (true) {
    for (int k = 1; k < n; ++k) x[k] = box.lower[k] + (idx[k] + 0.5) * h[k];
    f(x);
    int k = 1;
    for (; k < n; ++k) {
      if (++idx[k] < G) break;
      idx[k] = 0;
    }
    if (k >= n) break;
  }
}

}  // namespace

CellEvaluation evaluate_cells(const InitialDistribution& dist, const Matrix& sites, const Vector& g,
                              const QuadratureOptions& q) {
  const int n = dimension(dist);
  check_sites(n, sites, g);
  if (const auto* e = std::get_if<Empirical>(&dist)) return evaluate_empirical(*e, sites, g);

  const auto& box = std::get<UniformBox>(dist);
  const int G = resolve_nodes(n, q);
  const int D = static_cast<int>(sites.cols());
  const double h0 = (box.upper[0] - box.lower[0]) / G;
  const double c0 = box.lower[0] + 0.5 * h0;
  Vector site_sq(D);
  for (int j = 0; j < D; ++j) site_sq[j] = sites.col(j).squaredNorm();

  std::vector<double> count(D, 0.0), value(D, 0.0);

  for_each_row(box, G, [&](Vector& x) {
    auto node_value = [&](int i, int j) {
      x[0] = c0 + h0 * i;
      return (x - sites.col(j)).squaredNorm() - g[j];
    };
    auto argmin_at = [&](int i) {
      x[0] = c0 + h0 * i;
      return power_argmin(sites, g, x);
    };
    // k takes node i from j: strictly smaller power, or equal with a smaller index.
    auto beats = [&](int k, int j, int i) {
      const double vk = node_value(i, k), vj = node_value(i, j);
      return vk < vj || (vk == vj && k < j);
    };

    int i = 0;
    while (i < G) {
      const int j = argmin_at(i);
      int next = G;
      for (int k = 0; k < D; ++k) {
        if (k == j) continue;
        // power_k - power_j = a + b * x0 along the row.
        const double b = -2.0 * (sites(0, k) - sites(0, j));
        if (b >= 0.0) continue;
        double a = site_sq[k] - site_sq[j] - g[k] + g[j];
        for (int r = 1; r < n; ++r) a -= 2.0 * x[r] * (sites(r, k) - sites(r, j));
        const double cross = -a / b;
        double est = std::ceil((cross - c0) / h0);
        est = std::clamp(est, static_cast<double>(i + 1), static_cast<double>(next));
        int first = static_cast<int>(est);
        // Round-off can move the switch by a node either way; settle it with
        // the same comparison the node-by-node evaluation uses.
        for (int guard = 0; guard < 4 && first > i + 1 && beats(k, j, first - 1); ++guard) --first;
        for (int guard = 0; guard < 4 && first < next && !beats(k, j, first); ++guard) ++first;
        if (first < next && !beats(k, j, first)) continue;
        next = std::min(next, first);
      }
      // Nodes i..next-1 belong to cell j.
      const double c = next - i;
      const double e = c0 + h0 * i - sites(0, j);
      const double s1 = c * (c - 1.0) / 2.0;
      const double s2 = (c - 1.0) * c * (2.0 * c - 1.0) / 6.0;
      double rest = -g[j];
      for (int r = 1; r < n; ++r) rest += (x[r] - sites(r, j)) * (x[r] - sites(r, j));
      count[j] += c;
      value[j] += c * e * e + 2.0 * e * h0 * s1 + h0 * h0 * s2 + c * rest;
      i = next;
    }
  });

  const double w = std::pow(static_cast<double>(G), -n);
  CellEvaluation out;
  out.measures.resize(D);
  for (int j = 0; j < D; ++j) {
    out.measures[j] = count[j] * w;
    out.integral += value[j];
  }
  out.integral *= w;
  return out;
}

CellEvaluation evaluate_cells_bruteforce(const InitialDistribution& dist, const Matrix& sites,
                                         const Vector& g, const QuadratureOptions& q) {
  const int n = dimension(dist);
  check_sites(n, sites, g);
  if (const auto* e = std::get_if<Empirical>(&dist)) return evaluate_empirical(*e, sites, g);
  const auto& box = std::get<UniformBox>(dist);
  const int G = resolve_nodes(n, q);
  const double h0 = (box.upper[0] - box.lower[0]) / G;
  const double c0 = box.lower[0] + 0.5 * h0;
  CellEvaluation out;
  out.measures = Vector::Zero(sites.cols());
  for_each_row(box, G, [&](Vector& x) {
    for (int i = 0; i < G; ++i) {
      x[0] = c0 + h0 * i;
      const int j = power_argmin(sites, g, x);
      out.measures[j] += 1.0;
      out.integral += (x - sites.col(j)).squaredNorm() - g[j];
    }
  });
  const double w = std::pow(static_cast<double>(G), -n);
  out.measures *= w;
  out.integral *= w;
  return out;
}

Vector cell_measures(const InitialDistribution& dist, const Matrix& sites, const Vector& g,
                     const QuadratureOptions& q) {
  return evaluate_cells(dist, sites, g, q).measures;
}

double dual_value(const InitialDistribution& dist, const Matrix& sites, const Vector& g,
                  const Vector& P, const QuadratureOptions& q) {
  if (P.size() != g.size()) throw std::invalid_argument("dual_value: P/g size mismatch");
  return evaluate_cells(dist, sites, g, q).integral + P.dot(g);
}

double dual_ball_radius(const InitialDistribution& dist, const Matrix& sites) {
  double r = 0.0;
  if (const auto* e = std::get_if<Empirical>(&dist)) {
    for (Eigen::Index i = 0; i < e->points.cols(); ++i)
      for (Eigen::Index j = 0; j < sites.cols(); ++j)
        r = std::max(r, (e->points.col(i) - sites.col(j)).squaredNorm());
  } else {
    const auto& box = std::get<UniformBox>(dist);
    const int n = static_cast<int>(box.lower.size());
    Vector corner(n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      for (int k = 0; k < n; ++k) corner[k] = ((mask >> k) & 1u) ? box.upper[k] : box.lower[k];
      for (Eigen::Index j = 0; j < sites.cols(); ++j)
        r = std::max(r, (corner - sites.col(j)).squaredNorm());
    }
  }
  return std::max(r, 1e-12);
}

SemidiscreteResult solve_semidiscrete(const InitialDistribution& dist, const Matrix& sites,
                                      const Vector& P, const SemidiscreteOptions& opts) {
  if (!(opts.s_in > 0.0) || !(opts.delta > 0.0))
    throw std::invalid_argument("solve_semidiscrete: s_in and delta must be positive");
  const Eigen::Index D = sites.cols();
  if (P.size() != D) throw std::invalid_argument("solve_semidiscrete: P size mismatch");
  const double radius = dual_ball_radius(dist, sites);
  Vector g = opts.g0 ? *opts.g0 : Vector::Zero(D);
  if (g.size() != D) throw std::invalid_argument("solve_semidiscrete: g0 size mismatch");
  g = project_ball(g, radius);

  Vector best_g = g;
  double best_res = std::numeric_limits<double>::infinity();
  for (long it = 0; it <= opts.max_iter; ++it) {
    const CellEvaluation ev = evaluate_cells(dist, sites, g, opts.quadrature);
    const Vector r = P - ev.measures;
    const double res = r.cwiseAbs().maxCoeff();
    if (res <= opts.delta) {
      SemidiscreteResult out;
      out.weights = {g, ev.measures};
      out.C = ev.integral + P.dot(g);
      out.iterations = it;
      return out;
    }
    if (res < best_res) {
      best_res = res;
      best_g = g;
    }
    g = project_ball(g + opts.s_in * r, radius);
  }
  throw MaxIterExceeded(std::vector<double>(best_g.data(), best_g.data() + D), best_res);
}

int assign_destination(const Matrix& sites, const Vector& g, const Vector& x) {
  if (sites.rows() != x.size() || g.size() != sites.cols())
    throw std::invalid_argument("assign_destination: dimension mismatch");
  return power_argmin(sites, g, x);
}

}  // namespace cct
