#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "arbor/machine.hpp"
#include "arbor/perm.hpp"

namespace arbor {

class NotFoundWithinBound : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tree automorphism of the depth-n truncated tree in label coordinates: one
/// Sym(m) label code per cell (vertices of levels < depth, BFS order).
class LabelVec {
public:
  LabelVec() = default;
  LabelVec(unsigned m, std::size_t depth);

  static LabelVec identity_elem(unsigned m, std::size_t depth);
  /// Decodes a level-`depth` permutation; nullopt when it does not preserve
  /// the tree's block structure.
  static std::optional<LabelVec> from_perm(unsigned m, std::size_t depth, const Perm& p);
  static LabelVec from_expr(Expr e, std::size_t depth);

  unsigned arity() const { return m_; }
  std::size_t depth() const { return depth_; }
  std::size_t cells() const { return lab_.size(); }
  std::uint16_t label(std::size_t cell) const { return lab_[cell]; }

  bool is_identity() const { return first_nontrivial() == cells(); }
  std::size_t first_nontrivial() const;

  LabelVec then(const LabelVec& o) const;  // apply this, then o
  LabelVec inverse() const;
  Perm to_perm() const;  // induced permutation of the m^depth leaves

  bool operator==(const LabelVec& o) const { return lab_ == o.lab_; }

private:
  unsigned m_ = 2;
  std::size_t depth_ = 0;
  std::vector<std::uint16_t> lab_;
  friend class CellChain;
};

/// Deterministic Schreier-Sims over the cell base (vertices in graded
/// lexicographic order; the first moved cell is the insertion point). Orders
/// are exact and bit-reproducible across runs.
class CellChain {
public:
  CellChain(unsigned m, std::size_t depth);

  void add_generator(const LabelVec& g);
  bool contains(const LabelVec& g) const;
  mpz_class order() const;
  std::size_t chain_length() const { return levels_.size(); }

private:
  struct Level {
    std::size_t cell;
    std::vector<std::uint16_t> codes;     // subgroup of Sym(m) at this cell, BFS order
    std::vector<LabelVec> transversal;    // parallel to codes
    std::vector<std::uint32_t> code_pos;  // label code -> index+1, 0 = absent
    std::vector<LabelVec> gens;           // strong generators inserted here
    std::vector<std::uint64_t> gen_serial;
    // Schreier bookkeeping watermarks
    std::size_t done_transversal = 0;
    std::uint64_t done_serial = 0;
  };

  LabelVec sift(LabelVec g, std::size_t* fail_cell) const;
  std::size_t level_for_cell(std::size_t cell) const;  // levels_.size() when absent
  void insert_strong_generator(LabelVec g, std::size_t cell);
  void extend_orbit(std::size_t pos);
  void process();

  unsigned m_;
  std::size_t depth_;
  std::size_t cells_;
  std::uint32_t fact_;
  std::vector<Level> levels_;  // sorted by cell
  std::vector<std::size_t> dirty_;
  std::uint64_t serial_ = 0;
};

/// Exact image of a generating set in the permutation group on the m^n
/// level-n vertices.
class LevelQuotient {
public:
  LevelQuotient(unsigned m, std::size_t level, std::vector<Perm> generator_perms);
  static LevelQuotient from_exprs(std::span<const Expr> gens, std::size_t level);

  unsigned arity() const { return m_; }
  std::size_t level() const { return level_; }
  std::size_t degree() const { return degree_; }
  const std::vector<Perm>& generators() const { return gens_; }
  const mpz_class& order() const { return order_; }

  bool contains(const Perm& p) const;
  bool contains(Expr e) const;

  /// Orbits of the generator action on level points.
  std::vector<std::vector<std::uint32_t>> orbits() const;
  bool is_transitive() const;

  /// Quotient generated by the normal closure of generator commutators.
  LevelQuotient derived_subgroup() const;
  /// Normal closure of `seed` inside this quotient.
  LevelQuotient normal_closure(std::span<const Perm> seed) const;

private:
  unsigned m_;
  std::size_t level_;
  std::size_t degree_;
  std::vector<Perm> gens_;
  std::shared_ptr<CellChain> chain_;
  mpz_class order_;
};

LevelQuotient quotient(std::span<const Expr> gens, std::size_t level);

bool is_level_transitive(std::span<const Expr> gens, std::size_t level);

struct SubtreeTransitivity {
  std::size_t level;        // smallest k with transitive subtree actions
  std::size_t probe_depth;  // orbits checked on levels 1..probe_depth below
};
/// Smallest k <= max_k such that for every level-k vertex v the sections at v
/// of elements fixing v act transitively on every probed level below v.
/// Throws NotFoundWithinBound when no such k exists within the bound.
SubtreeTransitivity minimal_subtree_transitivity_level(std::span<const Expr> gens, std::size_t max_k,
                                                       std::size_t probe_depth);

/// Per-level exact orders |G : St_G(n)| for n = 0..N.
struct IndexTable {
  unsigned m = 2;
  std::vector<mpz_class> orders;
  std::size_t levels() const { return orders.empty() ? 0 : orders.size() - 1; }
};

IndexTable index_table(std::span<const Expr> gens, std::size_t max_level, unsigned jobs = 1);
/// CSV: level, order (decimal), log_m_order (30 significant digits).
std::string index_table_csv(const IndexTable& t);

/// Breadth-first multiplication closure; throws BoundExceeded past `cap`.
std::vector<Perm> naive_elements(std::span<const Perm> gens, std::size_t cap);
mpz_class naive_order(std::span<const Perm> gens, std::size_t cap);

}  // namespace arbor
