#pragma once

#include <vector>

#include "arbor/permquot.hpp"

namespace arbor {

struct SelfSimOptions {
  std::size_t direct_levels = 0;  // 0 = choose from the arity
  std::size_t closure_bound = 4096;
  bool force_direct = false;
  unsigned jobs = 1;
};

/// Provenance of a self-similar index table. Deep levels are produced by the
/// first-level recursion |Q_n| = |Q_1| |Q_{n-1}|^m / I once three exact
/// finite-level certificates hold; each flag records one of them.
struct SelfSimCertificates {
  bool recursion_used = false;
  std::size_t direct_to = 0;        // levels 0..direct_to from the cell chain
  bool lattice_stabilized = false;  // generator-relation lattice equal at the last two direct levels
  bool branch_certified = false;    // grafted derived generators sift into the quotient
  std::size_t certificate_level = 0;
  bool cross_validated = false;  // recursion reproduces the last direct order
  mpz_class layer_index = 0;     // I = |(Q_{n-1})^m : psi(St(1)) image|, constant past stabilization
};

struct SelfSimTable {
  IndexTable table;
  SelfSimCertificates cert;
};

/// Exact |G : St_G(n)| for n = 0..max_level for a self-similar generator
/// system whose sections are again generators (or the identity). Shallow
/// levels come from the deterministic cell chain; deeper levels from the
/// certified recursion. Falls back to the chain at every level when the
/// certificates cannot be established.
SelfSimTable selfsimilar_index_table(const std::vector<Expr>& gens, std::size_t max_level,
                                     const SelfSimOptions& opt = {});

}  // namespace arbor
