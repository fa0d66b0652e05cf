#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arbor/perm.hpp"
#include "arbor/vertex.hpp"

namespace arbor {

class NonEvaluable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class BoundExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class DepthBudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class NotInWreathImage : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A finite wreath-recursion system: named states, each with a root label in
/// Sym(m) and m child references (state index or -1 for the identity).
class MachineDef {
public:
  struct State {
    std::string name;
    Perm label;
    std::vector<int> children;
  };

  MachineDef(std::string name, unsigned arity, std::vector<State> states);

  const std::string& name() const { return name_; }
  unsigned arity() const { return m_; }
  const std::vector<State>& states() const { return states_; }
  int state_index(std::string_view state) const;  // -1 when absent

  /// {"m": 2, "states": {"a": {"perm": [1,0], "children": ["a", null]}}}
  static std::shared_ptr<const MachineDef> from_json(const std::string& json, std::string name = "");
  std::string to_json() const;

private:
  std::string name_;
  unsigned m_;
  std::vector<State> states_;
};

using MachinePtr = std::shared_ptr<const MachineDef>;

enum class ExprKind : std::uint8_t {
  Identity,
  Gen,
  Rooted,
  Product,
  Inverse,
  Graft,
  Truncate,
  InfGraft,
  SectionView,
  DeleteLevels,
  Inflate,
};

/// Handle into the global hash-consed expression store.
class Expr {
public:
  Expr() : id_(0) {}
  explicit Expr(std::uint32_t id) : id_(id) {}
  std::uint32_t id() const { return id_; }
  unsigned arity() const;
  ExprKind kind() const;
  bool operator==(const Expr& o) const { return id_ == o.id_; }
  bool operator!=(const Expr& o) const { return id_ != o.id_; }
  bool operator<(const Expr& o) const { return id_ < o.id_; }

private:
  std::uint32_t id_;
};

/// Factor stream of an infinite graft product. Vertices must be pairwise
/// non-comparable, at level >= 1, and `level_floor` must be a non-decreasing
/// diverging lower bound on factor vertex levels: enumeration for a level-n
/// evaluation stops at the first k with level_floor(k) >= n.
class GraftSchema {
public:
  virtual ~GraftSchema() = default;
  virtual std::optional<std::pair<Expr, Vertex>> factor(std::size_t k) const = 0;
  virtual std::size_t level_floor(std::size_t k) const = 0;
  /// Enumeration guard; exceeding it raises DepthBudgetExceeded.
  virtual std::size_t budget() const { return 1u << 16; }
};

using GraftSchemaPtr = std::shared_ptr<const GraftSchema>;

class FnGraftSchema : public GraftSchema {
public:
  using Factor = std::function<std::optional<std::pair<Expr, Vertex>>(std::size_t)>;
  using Floor = std::function<std::size_t(std::size_t)>;
  FnGraftSchema(Factor f, Floor fl, std::size_t budget = 1u << 16)
      : f_(std::move(f)), fl_(std::move(fl)), budget_(budget) {}
  std::optional<std::pair<Expr, Vertex>> factor(std::size_t k) const override { return f_(k); }
  std::size_t level_floor(std::size_t k) const override { return fl_(k); }
  std::size_t budget() const override { return budget_; }

private:
  Factor f_;
  Floor fl_;
  std::size_t budget_;
};

// Constructors (normalizing and hash-consed).
Expr identity(unsigned arity);
Expr gen(const MachinePtr& machine, std::string_view state);
Expr gen(const MachinePtr& machine, int state_index);
Expr rooted(const Perm& label);
Expr product(Expr a, Expr b);
Expr product(std::span<const Expr> factors, unsigned arity);
Expr inverse(Expr e);
Expr graft(Expr g, const Vertex& at);
Expr trunc(Expr g, std::size_t level);
Expr inf_graft(unsigned arity, GraftSchemaPtr schema);
Expr conjugate(Expr g, Expr by);    // by^{-1} g by
Expr commutator(Expr g, Expr h);    // g^{-1} h^{-1} g h
Expr power(Expr g, long long e);
/// Canonical embedding into Aut T_{m^n} by deletion of levels.
Expr delete_levels_embed(Expr e, unsigned nlevels);
/// Partial inverse of the embedding; throws NotInWreathImage when a label of
/// `e` does not respect the m-ary block structure.
Expr delete_levels_pullback(Expr e, unsigned arity_m, unsigned nlevels);

// Evaluation. All recursive evaluation is memoized in the global store;
// `*_uncached` variants recompute from scratch (used to cross-check caches).
Perm root_label(Expr e);
Expr section_letter(Expr e, unsigned letter);
unsigned act_letter(Expr e, unsigned letter);
Perm label_at(Expr e, const Vertex& v);
Vertex act(Expr e, const Vertex& v);
Expr section(Expr e, const Vertex& v);
Perm level_perm(Expr e, std::size_t n);
bool equal_up_to_level(Expr a, Expr b, std::size_t n);
Perm label_at_uncached(Expr e, const Vertex& v);

/// Complete label assignment for all vertices of levels < depth, indexed by
/// cell rank (see cell_offset / cell_count).
struct Portrait {
  unsigned m = 2;
  std::size_t depth = 0;
  std::vector<Perm> labels;
};
Portrait portrait(Expr e, std::size_t depth);

/// Closure of the generator set under sections at all first-level vertices,
/// deduplicated by equality up to `dedup_level`. Throws BoundExceeded when
/// the closure grows past `bound`.
std::vector<Expr> section_closure(std::vector<Expr> gens, std::size_t bound,
                                  std::size_t dedup_level = 6);

// Tree cell indexing shared by portraits and the permutation-quotient chain:
// cells are the vertices of levels < depth in BFS (graded lexicographic)
// order.
std::size_t cell_count(unsigned m, std::size_t depth);
std::size_t cell_offset(unsigned m, std::size_t level);
std::uint64_t pow_u64(std::uint64_t base, std::uint64_t exp);

// Structural inspection (for serialization and diagnostics).
Expr expr_child(Expr e, unsigned which);          // Product: 0/1; unary kinds: 0
const Vertex& expr_vertex(Expr e);                // Graft / SectionView / Inflate
std::size_t expr_level(Expr e);                   // Truncate level / DeleteLevels depth
MachinePtr expr_machine(Expr e);                  // Gen
int expr_state(Expr e);                           // Gen

/// Number of live nodes in the global store (diagnostics / budget tests).
std::size_t expr_store_size();
/// Node budget; evaluation throws NonEvaluable once the store exceeds it.
void set_expr_store_budget(std::size_t max_nodes);

}  // namespace arbor
