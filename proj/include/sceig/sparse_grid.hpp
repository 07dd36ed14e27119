#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include <json.hpp>

namespace sceig {

/// Finitely supported multi-index; dimensions are 0-based and absent
/// dimensions hold level 0.
class MultiIndex {
 public:
  MultiIndex() = default;
  /// Dense constructor; zero entries are dropped.
  explicit MultiIndex(const std::vector<unsigned>& dense);

  unsigned operator[](std::size_t dim) const;
  void set(std::size_t dim, unsigned level);
  const std::map<std::size_t, unsigned>& entries() const { return entries_; }
  std::vector<std::size_t> support() const;
  unsigned l1() const;
  /// One past the largest active dimension (0 for the origin).
  std::size_t active_dims() const;
  bool is_zero() const { return entries_.empty(); }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) { return a.entries_ < b.entries_; }

 private:
  std::map<std::size_t, unsigned> entries_;
};

class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(std::initializer_list<MultiIndex> indices) : indices_(indices) {}

  void insert(const MultiIndex& alpha) { indices_.insert(alpha); }
  bool contains(const MultiIndex& alpha) const { return indices_.count(alpha) != 0; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  /// Greatest active dimension count over the set.
  std::size_t active_dims() const;

 private:
  std::set<MultiIndex> indices_;
};

struct CombinationTerm {
  MultiIndex gamma;
  long coefficient = 0;
};

/// Zeros of the Legendre polynomial L_{level+1}, ascending, with barycentric
/// weights for Lagrange evaluation.
struct NodeSet {
  unsigned level = 0;
  std::vector<double> nodes;
  std::vector<double> bary_weights;
};

/// Newton iteration on the three-term recurrence, followed by exact
/// symmetrization of +- pairs. Uncached.
NodeSet compute_gauss_legendre_nodes(unsigned level);

/// Cached, write-once node sets; references stay valid for the program
/// lifetime and are safe to share between threads.
const NodeSet& gauss_legendre_nodes(unsigned level);

/// Legendre polynomial L_n(t) by the three-term recurrence.
double legendre(unsigned n, double t);

/// l_k(t) of the node set; exactly delta_{kj} when t equals node j.
double lagrange_basis_eval(const NodeSet& nodes, unsigned k, double t);
/// All basis values at t, written to `out` (size level + 1).
void lagrange_basis_all(const NodeSet& nodes, double t, std::span<double> out);

bool is_monotone(const MultiIndexSet& set);

/// Smallest monotone superset.
MultiIndexSet downward_closure(const MultiIndexSet& set);

/// {alpha : sum_m alpha_m log(rho_m) <= budget}. Throws a weight error when
/// some rho_m <= 1.
MultiIndexSet anisotropic_set(const std::vector<double>& weights, double budget);

/// {alpha in N_0^dims : |alpha| <= degree}
MultiIndexSet total_degree_set(std::size_t dims, unsigned degree);

/// Signed full-tensor terms of the combination form, merged by gamma with
/// zero totals dropped, ordered by gamma.
std::vector<CombinationTerm> combination_terms(const MultiIndexSet& set);

/// Deduplicated collocation points, each of length set.active_dims(),
/// lexicographically ordered.
std::vector<std::vector<double>> grid_points(const MultiIndexSet& set);

/// sum_{alpha in A} prod_m (alpha_m + 1); precondition error unless monotone.
std::uint64_t point_count_bound(const MultiIndexSet& set);

nlohmann::json to_json(const MultiIndexSet& set);
MultiIndexSet multi_index_set_from_json(const nlohmann::json& doc);

/// Combination-technique interpolation operator on a fixed multi-index set.
///
/// Stores the collocation points and, per combination term, the point index
/// of every tensor-grid node, so evaluating the interpolant of arbitrary
/// nodal data reduces to a weighted sum over points.
class SparseInterpolant {
 public:
  explicit SparseInterpolant(MultiIndexSet set);

  const MultiIndexSet& set() const { return set_; }
  const std::vector<CombinationTerm>& terms() const { return terms_; }
  const std::vector<std::vector<double>>& points() const { return points_; }
  std::size_t active_dims() const { return dims_; }

  /// Index of a collocation point (bit-exact match), or -1.
  std::ptrdiff_t find_point(std::span<const double> point) const;

  /// Per-point weights w such that I_A f(y) = sum_i w_i f(x_i). Coordinates
  /// of y past active_dims() are ignored; active ones must lie in [-1, 1].
  std::vector<double> weights(std::span<const double> y) const;

 private:
  struct TermLayout {
    long coefficient = 0;
    std::vector<std::size_t> dims;
    std::vector<unsigned> levels;
    std::vector<std::size_t> point_index;  // row-major over the tensor grid, last dim fastest
  };

  MultiIndexSet set_;
  std::vector<CombinationTerm> terms_;
  std::vector<std::vector<double>> points_;
  std::map<std::vector<double>, std::size_t> index_;
  std::vector<TermLayout> layouts_;
  std::size_t dims_ = 0;
};

}  // namespace sceig
