#include "arbor/grigfilt.hpp"
#include <cmath>
#include <array>

#include <algorithm>

#include "arbor/permquot.hpp"

namespace arbor {

namespace {

long p2(unsigned e) { return 1L << e; }

}  // namespace

long nm_step_logdim(unsigned m) {
  if (m < 1) throw std::invalid_argument("nm_step_logdim requires m >= 1");
  if (m > 60) throw std::overflow_error("nm_step_logdim overflow");
  return p2(m) + p2(m - 1);
}

long gamma_rel_logindex(unsigned m, unsigned long r) {
  if (m < 1 || r < 1 || r > static_cast<unsigned long>(p2(m)) - 1)
    throw std::invalid_argument("gamma_rel_logindex: r out of range");
  if (r <= static_cast<unsigned long>(p2(m - 1)) - 1) return 2 * static_cast<long>(r);
  return p2(m - 1) + static_cast<long>(r);
}

long rist_rel_logindex(unsigned m, unsigned long r, unsigned k) {
  if (m < 1 || r < 1 || r > static_cast<unsigned long>(p2(m)) - 1)
    throw std::invalid_argument("rist_rel_logindex: r out of range");
  if (k > m - 1) throw std::invalid_argument("rist_rel_logindex: k out of range");
  long floor_term = static_cast<long>(r >> k);
  if (r <= static_cast<unsigned long>(p2(m - 1)) - 1) return 2 * floor_term;
  return p2(m - 1 - k) + floor_term;
}

long d_rel_logindex(unsigned m, unsigned long r) {
  if (m < 1 || r < 1 || r > static_cast<unsigned long>(p2(m)) - 1)
    throw std::invalid_argument("d_rel_logindex: r out of range");
  // codimension of V_m^r in V_m plus codimension of V_{m-1}^(floor(r/2)) in
  // V_{m-1}; both caps are inactive for r <= 2^m - 1
  long s = static_cast<long>(r / 2);
  long first = std::min<long>(static_cast<long>(r), p2(m));
  long second = std::min<long>(s, p2(m - 1));
  return first + second;
}

long vmr_dim(unsigned m, unsigned long r) {
  long d = p2(m) - static_cast<long>(r);
  return d > 0 ? d : 0;
}

RistDimReport rist_hdim_wrt_gamma(unsigned k, unsigned max_m, long c_log_index) {
  if (max_m < k + 3) throw std::invalid_argument("need max_m >= k + 3");
  RistDimReport rep;
  auto x_of = [&](unsigned m) -> double {
    if (m < k + 1) return 0;
    return static_cast<double>((p2(m - k) - 1) + (p2(m - 1 - k) - 1));
  };
  auto y_of = [&](unsigned m) -> double {
    return static_cast<double>(c_log_index) + 3.0 * (p2(m - 1) - 1);
  };
  for (unsigned m = k + 2; m <= max_m; ++m) {
    RistDimWindow w;
    w.m = m;
    double lo = 2, hi = -1;
    unsigned long rmax = (1ul << m) - 1;
    for (unsigned long r = 1; r <= rmax; ++r) {
      double ratio = (x_of(m) + rist_rel_logindex(m, r, k)) / (y_of(m) + gamma_rel_logindex(m, r));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    w.ratio_min = lo;
    w.ratio_max = hi;
    w.step_ratio = (x_of(m + 1) - x_of(m)) / (y_of(m + 1) - y_of(m));
    rep.windows.push_back(w);
  }
  // the closed forms are affine in 2^m with constant step ratio; the limit is
  // that exact ratio: 3*2^{m-1-k} / (3*2^{m-1}) = 2^-k
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
  rep.exact_limit = mpq_class(1) / mpq_class(den);
  rep.estimate = (rep.windows.back().ratio_min + rep.windows.back().ratio_max) / 2;
  return rep;
}

namespace {

// log2 of an exact power of two
long exact_log2(const mpz_class& v) {
  if (v <= 0 || mpz_popcount(v.get_mpz_t()) != 1)
    throw std::logic_error("index is not a power of two");
  return static_cast<long>(mpz_sizeinbase(v.get_mpz_t(), 2)) - 1;
}

// Conjugation closure of {x^2} under the Grigorchuk generators, stabilized
// at the given level; yields expression generators of T = <x^2>^G = K^2.
std::vector<Expr> t_generator_exprs(const GroupSpec& grig, std::size_t level) {
  Expr x = grigorchuk_x(grig);
  Expr x2 = product(x, x);
  std::vector<Expr> out;
  CellChain chain(2, level);
  auto try_add = [&](Expr e) {
    LabelVec lv = LabelVec::from_expr(e, level);
    if (lv.is_identity() || chain.contains(lv)) return;
    chain.add_generator(lv);
    out.push_back(e);
  };
  try_add(x2);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (Expr q : grig.gens) try_add(conjugate(out[i], q));
  return out;
}

std::vector<Expr> nm_generator_exprs(const GroupSpec& grig, unsigned m, const std::vector<Expr>& tgens) {
  std::vector<Expr> gens;
  for (std::uint64_t i = 0; i < pow_u64(2, m); ++i) {
    Vertex v = Vertex::from_level_rank(2, m, i);
    for (Expr k : grigorchuk_k_gens(grig)) gens.push_back(graft(k, v));
  }
  for (std::uint64_t i = 0; i < pow_u64(2, m - 1); ++i) {
    Vertex v = Vertex::from_level_rank(2, m - 1, i);
    for (Expr t : tgens) gens.push_back(graft(t, v));
  }
  return gens;
}

// Lower 2-central series of a 2-group quotient: gamma_{n+1} = [gamma_n, Q] gamma_n^2.
std::vector<LevelQuotient> lower_2_central(const LevelQuotient& Q, std::size_t steps) {
  std::vector<LevelQuotient> out;
  out.push_back(Q);
  for (std::size_t n = 0; n < steps; ++n) {
    const LevelQuotient& cur = out.back();
    std::vector<Perm> seed;
    for (const auto& g : cur.generators()) {
      for (const auto& q : Q.generators())
        seed.push_back(g.inverse().then(q.inverse()).then(g).then(q));
      seed.push_back(g.then(g));
    }
    out.push_back(Q.normal_closure(seed));
    if (out.back().order() == 1) break;
  }
  return out;
}

}  // namespace

CrosscheckReport empirical_crosscheck(unsigned max_m, std::size_t level) {
  if (max_m < 1 || level < 4) throw std::invalid_argument("crosscheck needs max_m >= 1, level >= 4");
  GroupSpec grig = grigorchuk();
  CrosscheckReport rep;
  rep.gamma_equals_nm = true;
  rep.verified_m = 0;

  std::vector<Expr> tgens = t_generator_exprs(grig, level + 1);

  // orders of the N_m images at both probe levels
  std::vector<std::array<mpz_class, 2>> nm_orders;  // [m-1][which level]
  std::array<mpz_class, 2> full_orders;
  unsigned m_cap = std::min<unsigned>(max_m, static_cast<unsigned>(level) - 2);
  for (int which = 0; which < 2; ++which) {
    std::size_t L = level + static_cast<std::size_t>(which);
    full_orders[which] = quotient(grig.gens, L).order();
  }
  for (unsigned m = 1; m <= m_cap + 1; ++m) {
    std::array<mpz_class, 2> o;
    for (int which = 0; which < 2; ++which) {
      std::size_t L = level + static_cast<std::size_t>(which);
      auto gens = nm_generator_exprs(grig, m, tgens);
      o[which] = quotient(gens, L).order();
    }
    nm_orders.push_back(o);
  }

  // |G : N_1|
  {
    long a = exact_log2(full_orders[0] / nm_orders[0][0]);
    long b = exact_log2(full_orders[1] / nm_orders[0][1]);
    if (a == b) rep.g_to_n1_logindex = a;
  }

  // N_m steps
  for (unsigned m = 1; m <= m_cap; ++m) {
    FiltRow row;
    row.filtration = "N";
    row.m = m;
    row.r = 0;
    row.closed_form = nm_step_logdim(m);
    long a = exact_log2(nm_orders[m - 1][0] / nm_orders[m][0]);
    long b = exact_log2(nm_orders[m - 1][1] / nm_orders[m][1]);
    row.empirical = a;
    row.stabilized = a == b;
    rep.rows.push_back(row);
  }

  // lower 2-central series at both probe levels
  unsigned gamma_m_cap = std::min<unsigned>(m_cap, 2);
  std::size_t gamma_steps = (1u << (gamma_m_cap + 1)) + 1;
  std::array<std::vector<LevelQuotient>, 2> gamma;
  std::array<LevelQuotient*, 2> quots{nullptr, nullptr};
  std::vector<LevelQuotient> storage;
  storage.reserve(2);
  for (int which = 0; which < 2; ++which) {
    std::size_t L = level + static_cast<std::size_t>(which);
    storage.push_back(quotient(grig.gens, L));
    gamma[which] = lower_2_central(storage.back(), gamma_steps);
    quots[which] = &storage.back();
  }

  for (unsigned m = 1; m <= gamma_m_cap; ++m) {
    // gamma_{2^m+1} should be the N_m image
    std::size_t tau = (1u << m) + 1;
    for (int which = 0; which < 2; ++which) {
      if (gamma[which].size() < tau) {
        rep.gamma_equals_nm = false;
        continue;
      }
      const LevelQuotient& gq = gamma[which][tau - 1];
      if (gq.order() != nm_orders[m - 1][which]) {
        rep.gamma_equals_nm = false;
        continue;
      }
      bool contained = true;
      auto gens = nm_generator_exprs(grig, m, tgens);
      for (Expr e : gens)
        if (!gq.contains(e)) {
          contained = false;
          break;
        }
      if (!contained) rep.gamma_equals_nm = false;
    }
    if (rep.gamma_equals_nm) rep.verified_m = m;

    for (unsigned long r = 1; r <= (1ul << m) - 1; ++r) {
      FiltRow row;
      row.filtration = "gamma";
      row.m = m;
      row.r = r;
      row.closed_form = gamma_rel_logindex(m, r);
      std::array<long, 2> emp{-1, -1};
      bool have = true;
      for (int which = 0; which < 2; ++which) {
        if (gamma[which].size() < tau + r) {
          have = false;
          break;
        }
        emp[static_cast<std::size_t>(which)] =
            exact_log2(gamma[which][tau - 1].order() / gamma[which][tau - 1 + r].order());
      }
      if (have) {
        row.empirical = emp[0];
        row.stabilized = emp[0] == emp[1];
      }
      rep.rows.push_back(row);
    }
  }

  // Jennings rows: derived closed form only (no quoted empirical target)
  for (unsigned m = 1; m <= max_m; ++m)
    for (unsigned long r = 1; r <= (1ul << m) - 1 && m <= 6; ++r) {
      FiltRow row;
      row.filtration = "D";
      row.m = m;
      row.r = r;
      row.closed_form = d_rel_logindex(m, r);
      rep.rows.push_back(row);
    }

  return rep;
}

std::string filt_csv(const CrosscheckReport& rep, unsigned max_m) {
  std::string csv = "filtration,m,r,closed_form,empirical,stabilized\n";
  for (const auto& row : rep.rows) {
    if (row.m > max_m) continue;
    csv += row.filtration + "," + std::to_string(row.m) + "," + std::to_string(row.r) + "," +
           std::to_string(row.closed_form) + ",";
    if (row.empirical) csv += std::to_string(*row.empirical);
    csv += ",";
    csv += row.stabilized ? "true" : "false";
    csv += "\n";
  }
  return csv;
}

}  // namespace arbor
