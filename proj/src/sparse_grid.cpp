#include "sceig/sparse_grid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "sceig/error.hpp"

namespace sceig {

MultiIndex::MultiIndex(const std::vector<unsigned>& dense) {
  for (std::size_t m = 0; m < dense.size(); ++m) set(m, dense[m]);
}

unsigned MultiIndex::operator[](std::size_t dim) const {
  auto it = entries_.find(dim);
  return it == entries_.end() ? 0u : it->second;
}

void MultiIndex::set(std::size_t dim, unsigned level) {
  if (level == 0) {
    entries_.erase(dim);
  } else {
    entries_[dim] = level;
  }
}

std::vector<std::size_t> MultiIndex::support() const {
  std::vector<std::size_t> out;
  out.reserve(entries_.size());
  for (const auto& [m, _] : entries_) out.push_back(m);
  return out;
}

unsigned MultiIndex::l1() const {
  unsigned s = 0;
  for (const auto& [_, v] : entries_) s += v;
  return s;
}

std::size_t MultiIndex::active_dims() const {
  return entries_.empty() ? 0 : entries_.rbegin()->first + 1;
}

std::size_t MultiIndexSet::active_dims() const {
  std::size_t d = 0;
  for (const auto& alpha : indices_) d = std::max(d, alpha.active_dims());
  return d;
}

double legendre(unsigned n, double t) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = t;
  for (unsigned k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

NodeSet compute_gauss_legendre_nodes(unsigned level) {
  const unsigned n = level + 1;
  NodeSet out;
  out.level = level;
  out.nodes.resize(n);
  for (unsigned i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (unsigned k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = L_n(x), p0 = L_{n-1}(x)
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    out.nodes[i] = x;
  }
  std::sort(out.nodes.begin(), out.nodes.end());
  for (unsigned k = 0; k < n / 2; ++k) {
    const double a = 0.5 * (out.nodes[n - 1 - k] - out.nodes[k]);
    out.nodes[k] = -a;
    out.nodes[n - 1 - k] = a;
  }
  if (n % 2 == 1) out.nodes[n / 2] = 0.0;

  out.bary_weights.assign(n, 1.0);
  for (unsigned k = 0; k < n; ++k) {
    for (unsigned j = 0; j < n; ++j) {
      if (j != k) out.bary_weights[k] /= (out.nodes[k] - out.nodes[j]);
    }
  }
  return out;
}

const NodeSet& gauss_legendre_nodes(unsigned level) {
  static std::mutex mutex;
  static std::map<unsigned, std::unique_ptr<const NodeSet>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[level];
  if (!slot) slot = std::make_unique<const NodeSet>(compute_gauss_legendre_nodes(level));
  return *slot;
}

void lagrange_basis_all(const NodeSet& nodes, double t, std::span<double> out) {
  const auto n = nodes.nodes.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (t == nodes.nodes[j]) {
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
      out[j] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = nodes.bary_weights[j] / (t - nodes.nodes[j]);
    denom += out[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
}

double lagrange_basis_eval(const NodeSet& nodes, unsigned k, double t) {
  std::vector<double> values(nodes.nodes.size());
  lagrange_basis_all(nodes, t, values);
  return values.at(k);
}

bool is_monotone(const MultiIndexSet& set) {
  if (set.empty()) return true;
  for (const auto& alpha : set) {
    for (const auto& [m, level] : alpha.entries()) {
      MultiIndex below = alpha;
      below.set(m, level - 1);
      if (!set.contains(below)) return false;
    }
  }
  return true;
}

MultiIndexSet downward_closure(const MultiIndexSet& set) {
  MultiIndexSet out;
  std::vector<MultiIndex> stack(set.begin(), set.end());
  while (!stack.empty()) {
    MultiIndex alpha = std::move(stack.back());
    stack.pop_back();
    if (out.contains(alpha)) continue;
    for (const auto& [m, level] : alpha.entries()) {
      MultiIndex below = alpha;
      below.set(m, level - 1);
      stack.push_back(std::move(below));
    }
    out.insert(alpha);
  }
  return out;
}

namespace {

constexpr std::size_t kMaxSetSize = 2'000'000;

void enumerate_budget(const std::vector<double>& costs, double budget, std::size_t dim,
                      double used, MultiIndex& current, MultiIndexSet& out) {
  if (dim == costs.size()) {
    out.insert(current);
    if (out.size() > kMaxSetSize) {
      throw Error(ErrorKind::Weight, "budget produces more than " +
                                         std::to_string(kMaxSetSize) + " multi-indices");
    }
    return;
  }
  for (unsigned level = 0;; ++level) {
    const double cost = used + level * costs[dim];
    if (cost > budget) break;
    current.set(dim, level);
    enumerate_budget(costs, budget, dim + 1, cost, current, out);
  }
  current.set(dim, 0);
}

void enumerate_degree(std::size_t dims, unsigned remaining, std::size_t dim, MultiIndex& current,
                      MultiIndexSet& out) {
  if (dim == dims) {
    out.insert(current);
    return;
  }
  for (unsigned level = 0; level <= remaining; ++level) {
    current.set(dim, level);
    enumerate_degree(dims, remaining - level, dim + 1, current, out);
  }
  current.set(dim, 0);
}

// Visits every point of the tensor grid prod_m nodes(gamma_m), embedded in
// `dims` coordinates.
template <typename Visit>
void for_each_tensor_point(const MultiIndex& gamma, std::size_t dims, Visit&& visit) {
  const auto support = gamma.support();
  std::vector<const NodeSet*> sets;
  sets.reserve(support.size());
  for (auto m : support) sets.push_back(&gauss_legendre_nodes(gamma[m]));
  std::vector<double> point(dims, 0.0);
  std::vector<std::size_t> k(support.size(), 0);
  for (std::size_t d = 0; d < support.size(); ++d) point[support[d]] = sets[d]->nodes[0];
  while (true) {
    visit(point);
    std::size_t d = support.size();
    while (d > 0) {
      --d;
      if (++k[d] < sets[d]->nodes.size()) {
        point[support[d]] = sets[d]->nodes[k[d]];
        break;
      }
      k[d] = 0;
      point[support[d]] = sets[d]->nodes[0];
      if (d == 0) return;
    }
    if (support.empty()) return;
  }
}

}  // namespace

MultiIndexSet anisotropic_set(const std::vector<double>& weights, double budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorKind::Parameter, "budget must be a finite nonnegative number");
  }
  std::vector<double> costs;
  costs.reserve(weights.size());
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (!(weights[m] > 1.0) || !std::isfinite(weights[m])) {
      throw Error(ErrorKind::Weight, "weight rho_" + std::to_string(m + 1) + " = " +
                                         std::to_string(weights[m]) + " must exceed 1");
    }
    costs.push_back(std::log(weights[m]));
  }
  // Budgets computed as multiples of log weights land exactly on the boundary;
  // admit them despite rounding.
  const double tol_budget = budget + 1e-12 * std::max(1.0, budget);
  MultiIndexSet out;
  MultiIndex current;
  enumerate_budget(costs, tol_budget, 0, 0.0, current, out);
  return out;
}

MultiIndexSet total_degree_set(std::size_t dims, unsigned degree) {
  MultiIndexSet out;
  MultiIndex current;
  enumerate_degree(dims, degree, 0, current, out);
  return out;
}

std::vector<CombinationTerm> combination_terms(const MultiIndexSet& set) {
  std::map<MultiIndex, long> acc;
  for (const auto& alpha : set) {
    const auto support = alpha.support();
    const std::size_t subsets = std::size_t{1} << support.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      MultiIndex gamma = alpha;
      int flips = 0;
      for (std::size_t d = 0; d < support.size(); ++d) {
        if (mask & (std::size_t{1} << d)) {
          gamma.set(support[d], alpha[support[d]] - 1);
          ++flips;
        }
      }
      acc[gamma] += (flips % 2 == 0) ? 1 : -1;
    }
  }
  std::vector<CombinationTerm> out;
  for (auto& [gamma, c] : acc) {
    if (c != 0) out.push_back({gamma, c});
  }
  return out;
}

std::vector<std::vector<double>> grid_points(const MultiIndexSet& set) {
  const auto dims = set.active_dims();
  std::set<std::vector<double>> unique;
  auto add_grid = [&](const MultiIndex& gamma) {
    for_each_tensor_point(gamma, dims, [&](const std::vector<double>& p) { unique.insert(p); });
  };
  if (is_monotone(set)) {
    for (const auto& alpha : set) add_grid(alpha);
  } else {
    std::set<MultiIndex> gammas;
    for (const auto& alpha : set) {
      const auto support = alpha.support();
      const std::size_t subsets = std::size_t{1} << support.size();
      for (std::size_t mask = 0; mask < subsets; ++mask) {
        MultiIndex gamma = alpha;
        for (std::size_t d = 0; d < support.size(); ++d) {
          if (mask & (std::size_t{1} << d)) gamma.set(support[d], alpha[support[d]] - 1);
        }
        gammas.insert(gamma);
      }
    }
    for (const auto& gamma : gammas) add_grid(gamma);
  }
  return {unique.begin(), unique.end()};
}

std::uint64_t point_count_bound(const MultiIndexSet& set) {
  if (!is_monotone(set)) {
    throw Error(ErrorKind::Precondition, "point count formula requires a monotone set");
  }
  std::uint64_t total = 0;
  for (const auto& alpha : set) {
    std::uint64_t prod = 1;
    for (const auto& [_, level] : alpha.entries()) prod *= level + 1;
    total += prod;
  }
  return total;
}

nlohmann::json to_json(const MultiIndexSet& set) {
  auto out = nlohmann::json::array();
  for (const auto& alpha : set) {
    auto obj = nlohmann::json::object();
    for (const auto& [m, level] : alpha.entries()) obj[std::to_string(m)] = level;
    out.push_back(std::move(obj));
  }
  return out;
}

MultiIndexSet multi_index_set_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(ErrorKind::Config, "multi-index set must be a JSON array");
  MultiIndexSet out;
  for (const auto& obj : doc) {
    if (!obj.is_object()) throw Error(ErrorKind::Config, "multi-index must be a JSON object");
    MultiIndex alpha;
    for (const auto& [key, value] : obj.items()) {
      std::size_t pos = 0;
      const auto dim = std::stoul(key, &pos);
      if (pos != key.size()) throw Error(ErrorKind::Config, "bad dimension key '" + key + "'");
      alpha.set(dim, value.get<unsigned>());
    }
    out.insert(alpha);
  }
  return out;
}

SparseInterpolant::SparseInterpolant(MultiIndexSet set)
    : set_(std::move(set)), terms_(combination_terms(set_)), points_(grid_points(set_)) {
  dims_ = set_.active_dims();
  for (std::size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i], i);
  layouts_.reserve(terms_.size());
  for (const auto& term : terms_) {
    TermLayout layout;
    layout.coefficient = term.coefficient;
    layout.dims = term.gamma.support();
    for (auto m : layout.dims) layout.levels.push_back(term.gamma[m]);
    for_each_tensor_point(term.gamma, dims_, [&](const std::vector<double>& p) {
      auto it = index_.find(p);
      if (it == index_.end()) {
        throw Error(ErrorKind::Precondition, "combination grid point missing from collocation grid");
      }
      layout.point_index.push_back(it->second);
    });
    layouts_.push_back(std::move(layout));
  }
}

std::ptrdiff_t SparseInterpolant::find_point(std::span<const double> point) const {
  std::vector<double> key(dims_, 0.0);
  for (std::size_t m = 0; m < std::min(dims_, point.size()); ++m) key[m] = point[m];
  for (std::size_t m = dims_; m < point.size(); ++m) {
    if (point[m] != 0.0) return -1;
  }
  auto it = index_.find(key);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::vector<double> SparseInterpolant::weights(std::span<const double> y) const {
  std::vector<double> coord(dims_, 0.0);
  for (std::size_t m = 0; m < std::min(dims_, y.size()); ++m) {
    if (!(y[m] >= -1.0 && y[m] <= 1.0)) {
      throw Error(ErrorKind::Domain, "coordinate " + std::to_string(m) + " = " +
                                         std::to_string(y[m]) + " outside [-1, 1]");
    }
    coord[m] = y[m];
  }
  std::vector<double> w(points_.size(), 0.0);
  std::vector<std::vector<double>> basis;
  std::vector<std::size_t> k;
  for (const auto& layout : layouts_) {
    const auto nd = layout.dims.size();
    basis.resize(nd);
    for (std::size_t d = 0; d < nd; ++d) {
      const auto& nodes = gauss_legendre_nodes(layout.levels[d]);
      basis[d].resize(nodes.nodes.size());
      lagrange_basis_all(nodes, coord[layout.dims[d]], basis[d]);
    }
    k.assign(nd, 0);
    for (std::size_t flat = 0; flat < layout.point_index.size(); ++flat) {
      double prod = static_cast<double>(layout.coefficient);
      for (std::size_t d = 0; d < nd; ++d) prod *= basis[d][k[d]];
      w[layout.point_index[flat]] += prod;
      for (std::size_t d = nd; d > 0; --d) {
        if (++k[d - 1] < basis[d - 1].size()) break;
        k[d - 1] = 0;
      }
    }
  }
  return w;
}

}  // namespace sceig
