#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "arbor/vertex.hpp"

namespace arbor {

/// A finite set of pairwise non-comparable vertices, sorted graded
/// lexicographically and duplicate-free.
class Antichain {
public:
  explicit Antichain(unsigned arity) : m_(arity) {}
  Antichain(unsigned arity, std::vector<Vertex> vertices);

  unsigned arity() const { return m_; }
  const std::vector<Vertex>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  std::size_t max_level() const;

  /// Exact measure sum over members with unit weights.
  mpq_class measure() const;

  std::string to_json() const;
  static Antichain from_json(const std::string& json, unsigned arity);

private:
  unsigned m_;
  std::vector<Vertex> v_;
};

/// Lazily enumerated antichain. `rule(k)` produces the k-th vertex (0-based)
/// or nullopt once the set is exhausted; `depth_floor(k)` is a non-decreasing
/// lower bound on the level of the k-th vertex that gains at least one level
/// every m-1 terms (strictly increasing when m = 2), which guarantees that
/// any level-bounded evaluation touches finitely many vertices. Both are
/// validated on the first 64 enumerated terms.
class AntichainSchema {
public:
  using Rule = std::function<std::optional<Vertex>(std::size_t)>;
  using DepthFloor = std::function<std::size_t(std::size_t)>;
  // optional sharp bound on the measure of the members deeper than `depth`
  using TailBound = std::function<mpq_class(std::size_t)>;

  AntichainSchema(unsigned arity, Rule rule, DepthFloor depth_floor, TailBound tail = nullptr);

  unsigned arity() const { return m_; }
  std::optional<Vertex> vertex(std::size_t k) const;
  std::size_t depth_floor(std::size_t k) const { return floor_(k); }
  std::optional<mpq_class> tail_bound(std::size_t depth) const;

  /// All enumerated vertices of level <= depth, as a finite antichain.
  Antichain prefix_below(std::size_t depth) const;
  /// True when the rule is exhausted once all vertices of level <= depth are
  /// enumerated (the schema is actually a finite antichain).
  bool exhausted_below(std::size_t depth) const;

private:
  void validate() const;
  unsigned m_;
  Rule rule_;
  DepthFloor floor_;
  TailBound tail_;
  mutable std::vector<std::optional<Vertex>> cache_;
};

/// Antichain (finite or schema-backed) with rational weights in [0,1].
/// Weights default to 1; finite bases may carry an explicit weight map.
class WeightedAntichain {
public:
  explicit WeightedAntichain(Antichain base);
  WeightedAntichain(Antichain base, std::map<Vertex, mpq_class> weights);
  explicit WeightedAntichain(AntichainSchema base);
  WeightedAntichain(AntichainSchema base, std::function<mpq_class(std::size_t)> weight);

  unsigned arity() const;
  bool is_finite() const { return finite_.has_value(); }
  const Antichain& finite() const { return *finite_; }
  const AntichainSchema& schema() const { return *schema_; }
  mpq_class weight_of(const Vertex& v, std::size_t index_hint) const;

private:
  std::optional<Antichain> finite_;
  std::optional<AntichainSchema> schema_;
  std::map<Vertex, mpq_class> weights_;
  std::function<mpq_class(std::size_t)> weight_fn_;
};

struct MuInterval {
  mpq_class lo;
  mpq_class hi;
  bool exact() const { return lo == hi; }
};

/// The omega-measure of the antichain, enclosed at the given evaluation
/// depth. For a finite antichain fully above `depth` the interval is exact;
/// for schemas the upper end adds the measure of the level-`depth` region not
/// yet covered by enumerated vertices.
MuInterval mu(const WeightedAntichain& V, std::size_t depth);

/// Greedy base-m expansion of gamma: descends into the leftmost unconsumed
/// subtree, emitting the first `digit` children at each step. The result is a
/// schema whose mu-interval at any depth contains gamma with width <= m^-depth.
AntichainSchema antichain_for_target(const mpq_class& gamma, unsigned arity);

/// True iff every vertex at `check_depth` has exactly one ancestor-or-self in
/// Y. Throws if check_depth is smaller than the deepest vertex of Y.
bool is_transversal(const Antichain& Y, std::size_t check_depth);

mpq_class parse_rational(const std::string& s);
std::string rational_str(const mpq_class& q);

}  // namespace arbor
