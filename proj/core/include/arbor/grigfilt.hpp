#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "arbor/zoo.hpp"

namespace arbor {

// Closed forms for the N_m / lower-2-central / Jennings filtrations of the
// first Grigorchuk group. All values are log_2 of relative indices.

/// log2 |N_m : N_{m+1}| = 2^m + 2^{m-1}.
long nm_step_logdim(unsigned m);

/// g(r) = log2 |N_m : gamma_{2^m+1+r}|.
long gamma_rel_logindex(unsigned m, unsigned long r);

/// f(r) for a vertex at level k: log2 |rist_{N_m}(v) : rist_{gamma}(v)|.
long rist_rel_logindex(unsigned m, unsigned long r, unsigned k);

/// log2 |N_m : D_{2^m+1+r}|, derived by codimension counting from the
/// V-space description of the Jennings series (no closed form is quoted for
/// it; the telescoping identity cross-checks the derivation).
long d_rel_logindex(unsigned m, unsigned long r);

/// dim V_m^r = max(0, 2^m - r).
long vmr_dim(unsigned m, unsigned long r);

struct RistDimWindow {
  unsigned m;
  double ratio_min, ratio_max;  // over the r-window at this m
  double step_ratio;            // (x_{m+1}-x_m+...)/(y_{m+1}-y_m+...), exact 2^-k
};
struct RistDimReport {
  mpq_class exact_limit;  // step-coefficient ratio of the closed forms
  std::vector<RistDimWindow> windows;
  double estimate;  // last-window midpoint
};
/// Hausdorff dimension of a level-k rigid stabilizer with respect to the
/// lower-2-central filtration, from the closed-form sandwich. `c_log_index`
/// is log2 |G : N_1| (empirically recorded; see empirical_crosscheck).
RistDimReport rist_hdim_wrt_gamma(unsigned k, unsigned max_m = 20, long c_log_index = 7);

struct FiltRow {
  std::string filtration;  // "N", "gamma", "D"
  unsigned m;
  unsigned long r;  // 0 for the N rows
  long closed_form;
  std::optional<long> empirical;
  bool stabilized = false;
};

struct CrosscheckReport {
  std::vector<FiltRow> rows;
  std::optional<long> g_to_n1_logindex;  // log2 |G : N_1|, stabilized
  bool gamma_equals_nm;                  // gamma_{2^m+1} == N_m as permutation groups
  std::size_t verified_m;
};

/// Builds the N_m generator systems, computes the lower-2-central series of
/// the Grigorchuk level-N quotient, and compares relative log-indices with
/// the closed forms. Values are accepted only when they agree across levels
/// N and N+1.
CrosscheckReport empirical_crosscheck(unsigned max_m, std::size_t level);

std::string filt_csv(const CrosscheckReport& rep, unsigned max_m);

}  // namespace arbor
