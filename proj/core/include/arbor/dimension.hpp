#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

#include "arbor/antichain.hpp"
#include "arbor/permquot.hpp"
#include "arbor/selfsim.hpp"

namespace arbor {

class SelfSimilarityUnverified : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exact value log_m(arg); arguments stay rational so that zero tests and
/// comparisons are exact. Logs are only evaluated numerically at the edge.
struct LogVal {
  unsigned base = 2;
  mpq_class arg = 1;
  bool is_zero() const { return arg == 1; }
  bool operator==(const LogVal& o) const { return base == o.base && arg == o.arg; }
};

/// Directed-rounded interval at 192-bit precision; results carry both ends
/// as 30-digit decimal strings plus doubles for quick consumption.
struct Rounded {
  double lo = 0, hi = 0;
  std::string lo_str, hi_str;
};

/// The iterated permutational wreath product ambient: all labels in a fixed
/// transitive H <= Sym(m). Only |H| enters index bookkeeping.
struct WreathAmbient {
  unsigned m = 2;
  mpz_class h_order = 2;
};

IndexTable wreath_index_table(const WreathAmbient& w, std::size_t max_level);
/// Rigid vertex stabilizer of W_H at a level-d vertex (closed form).
IndexTable wreath_rist_index_table(const WreathAmbient& w, std::size_t vertex_level, std::size_t max_level);
/// Product of full W_H rigid stabilizers over an antichain (closed form).
IndexTable wreath_graft_index_table(const WreathAmbient& w, const Antichain& V, std::size_t max_level);

/// s_n = m log|St(n-1):St(n)| - log|St(n):St(n+1)| for n = 1 .. levels-1.
std::vector<LogVal> s_sequence(const IndexTable& t);
/// r_n = m log|G:St(n-1)| - log|G:St(n)| + log|G:St(1)| for n = 1 .. levels.
std::vector<LogVal> r_sequence(const IndexTable& t);

struct RatioSeries {
  std::vector<std::size_t> levels;
  std::vector<Rounded> ratios;
  // liminf estimator: minimum of the last ceil(n/2) per-level ratios
  Rounded liminf_estimate;
};
RatioSeries estimate_ratio(const IndexTable& subject, const IndexTable& ambient);

struct Enclosure {
  Rounded value;  // [lo, hi]
  bool tail_bound_used = false;
  std::string tail_bound;  // log_m of the tail budget B - r_N
  LogVal B;
  bool stabilized = false;
  std::size_t stabilized_at = 0;
  bool estimator_only = false;
  RatioSeries ratios;
  SelfSimCertificates table_cert;
  IndexTable table;
};

/// Rigorous enclosure of hdim_{W_H}(closure of <gens>) for a section-closed
/// generator system, via the gradient series with the stabilized-tail bound.
Enclosure hdim_selfsimilar_enclosure(const std::vector<Expr>& gens, const WreathAmbient& ambient,
                                     std::size_t N, const SelfSimOptions& opt = {});

/// Same evaluation from an already-computed subject table (the subject is
/// assumed self-similar; the gradient positivity is still enforced).
Enclosure enclosure_from_table(const IndexTable& table, const WreathAmbient& ambient, std::size_t N);

std::string enclosure_json(const Enclosure& e);
std::string enclosure_csv(const Enclosure& e);

struct ProductDimensionReport {
  bool per_level_identity = true;  // ratio factorization holds at every level
  RatioSeries k_in_g, h_in_g, k_in_h;
};
/// Verifies log|K_n|/log|G_n| = (log|H_n|/log|G_n|)(log|K_n|/log|H_n|)
/// per level (as intervals, exactly as rationals of logs) for K <= H <= G.
ProductDimensionReport product_dimension_check(const IndexTable& K, const IndexTable& H,
                                               const IndexTable& G);

struct MuVsDimReport {
  RatioSeries ratios;
  mpq_class mu;
  std::vector<double> gap;  // per-level |ratio - mu| (outer bound)
  double max_scaled_gap = 0;  // max gap_n * (m^n - 1)
};
/// Full W_H rigid stabilizers grafted along the antichain V, compared with
/// the exact measure mu(V).
MuVsDimReport mu_vs_dimension(const WreathAmbient& w, const Antichain& V, std::size_t from_level,
                              std::size_t to_level);

}  // namespace arbor
