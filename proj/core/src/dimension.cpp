#include "arbor/dimension.hpp"

#include <algorithm>

#include <mpfr.h>

namespace arbor {

namespace {

constexpr mpfr_prec_t kPrec = 192;

// Minimal interval layer over mpfr with directed rounding.
class RI {
public:
  RI() {
    mpfr_init2(lo_, kPrec);
    mpfr_init2(hi_, kPrec);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
  }
  RI(const RI& o) : RI() {
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  RI& operator=(const RI& o) {
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
    return *this;
  }
  ~RI() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
  }

  static RI exact_ui(unsigned long v) {
    RI r;
    mpfr_set_ui(r.lo_, v, MPFR_RNDD);
    mpfr_set_ui(r.hi_, v, MPFR_RNDU);
    return r;
  }

  // ln of an exact positive rational
  static RI log_of(const mpq_class& q) {
    if (q <= 0) throw std::invalid_argument("log of non-positive rational");
    RI r;
    mpfr_t t;
    mpfr_init2(t, kPrec);
    mpfr_set_q(t, q.get_mpq_t(), MPFR_RNDD);
    mpfr_log(r.lo_, t, MPFR_RNDD);
    mpfr_set_q(t, q.get_mpq_t(), MPFR_RNDU);
    mpfr_log(r.hi_, t, MPFR_RNDU);
    mpfr_clear(t);
    return r;
  }
  static RI log_of(const mpz_class& z) { return log_of(mpq_class(z)); }

  RI add(const RI& o) const {
    RI r;
    mpfr_add(r.lo_, lo_, o.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, hi_, o.hi_, MPFR_RNDU);
    return r;
  }
  RI sub(const RI& o) const {
    RI r;
    mpfr_sub(r.lo_, lo_, o.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, hi_, o.lo_, MPFR_RNDU);
    return r;
  }
  // division by a positive interval
  RI div_pos(const RI& o) const {
    RI r;
    if (mpfr_sgn(o.lo_) <= 0) throw std::invalid_argument("division by non-positive interval");
    if (mpfr_sgn(lo_) >= 0) {
      mpfr_div(r.lo_, lo_, o.hi_, MPFR_RNDD);
      mpfr_div(r.hi_, hi_, o.lo_, MPFR_RNDU);
    } else {
      mpfr_div(r.lo_, lo_, o.lo_, MPFR_RNDD);
      mpfr_div(r.hi_, hi_, mpfr_sgn(hi_) >= 0 ? o.lo_ : o.hi_, MPFR_RNDU);
    }
    return r;
  }
  // division by exact m^n
  RI div_pow(unsigned m, std::size_t n) const {
    mpz_class d;
    mpz_ui_pow_ui(d.get_mpz_t(), m, static_cast<unsigned long>(n));
    RI r;
    mpfr_t t;
    mpfr_init2(t, kPrec);
    mpfr_set_z(t, d.get_mpz_t(), MPFR_RNDN);  // exact
    mpfr_div(r.lo_, lo_, t, MPFR_RNDD);
    mpfr_div(r.hi_, hi_, t, MPFR_RNDU);
    mpfr_clear(t);
    return r;
  }

  Rounded rounded() const {
    Rounded out;
    out.lo = mpfr_get_d(lo_, MPFR_RNDD);
    out.hi = mpfr_get_d(hi_, MPFR_RNDU);
    char* s = nullptr;
    mpfr_asprintf(&s, "%.30Rg", lo_);
    out.lo_str = s;
    mpfr_free_str(s);
    s = nullptr;
    mpfr_asprintf(&s, "%.30Rg", hi_);
    out.hi_str = s;
    mpfr_free_str(s);
    return out;
  }

private:
  mpfr_t lo_, hi_;
};

mpz_class geom(unsigned m, std::size_t n) {
  // (m^n - 1) / (m - 1)
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), m, static_cast<unsigned long>(n));
  return (p - 1) / (m - 1);
}

mpz_class pow_mpz(const mpz_class& b, const mpz_class& e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e.get_ui());
  return r;
}

}  // namespace

IndexTable wreath_index_table(const WreathAmbient& w, std::size_t max_level) {
  IndexTable t;
  t.m = w.m;
  t.orders.resize(max_level + 1);
  for (std::size_t n = 0; n <= max_level; ++n) t.orders[n] = pow_mpz(w.h_order, geom(w.m, n));
  return t;
}

IndexTable wreath_rist_index_table(const WreathAmbient& w, std::size_t vertex_level, std::size_t max_level) {
  IndexTable t;
  t.m = w.m;
  t.orders.resize(max_level + 1);
  for (std::size_t n = 0; n <= max_level; ++n)
    t.orders[n] = n <= vertex_level ? mpz_class(1) : pow_mpz(w.h_order, geom(w.m, n - vertex_level));
  return t;
}

IndexTable wreath_graft_index_table(const WreathAmbient& w, const Antichain& V, std::size_t max_level) {
  IndexTable t;
  t.m = w.m;
  t.orders.assign(max_level + 1, mpz_class(1));
  for (const auto& v : V.vertices())
    for (std::size_t n = v.level() + 1; n <= max_level; ++n)
      t.orders[n] *= pow_mpz(w.h_order, geom(w.m, n - v.level()));
  return t;
}

std::vector<LogVal> s_sequence(const IndexTable& t) {
  if (t.orders.size() < 3) throw std::invalid_argument("index table too short for the gradient");
  std::vector<LogVal> s;
  for (std::size_t n = 1; n + 1 < t.orders.size(); ++n) {
    // m * log(|Qn|/|Qn-1|) - log(|Qn+1|/|Qn|)  ==  log of the ratio below
    mpq_class num = t.orders[n];
    for (unsigned i = 1; i < t.m; ++i) num *= t.orders[n];
    num *= t.orders[n];
    mpq_class den = t.orders[n + 1];
    for (unsigned i = 0; i < t.m; ++i) den *= t.orders[n - 1];
    mpq_class arg = num / den;
    arg.canonicalize();
    s.push_back(LogVal{t.m, arg});
  }
  return s;
}

std::vector<LogVal> r_sequence(const IndexTable& t) {
  if (t.orders.size() < 2) throw std::invalid_argument("index table too short");
  std::vector<LogVal> r;
  for (std::size_t n = 1; n < t.orders.size(); ++n) {
    // m log|Q_{n-1}| - log|Q_n| + log|Q_1|
    mpq_class num = t.orders[1];
    for (unsigned i = 0; i < t.m; ++i) num *= t.orders[n - 1];
    mpq_class arg = num / mpq_class(t.orders[n]);
    arg.canonicalize();
    r.push_back(LogVal{t.m, arg});
  }
  return r;
}

namespace {

// liminf estimator: minimum over the last ceil(n/2) per-level ratios
void finish_liminf(RatioSeries& out) {
  if (out.ratios.empty()) return;
  std::size_t take = (out.ratios.size() + 1) / 2;
  Rounded est;
  bool first = true;
  for (std::size_t i = out.ratios.size() - take; i < out.ratios.size(); ++i) {
    const Rounded& r = out.ratios[i];
    if (first || r.lo < est.lo) {
      est.lo = r.lo;
      est.lo_str = r.lo_str;
    }
    if (first || r.hi < est.hi) {
      est.hi = r.hi;
      est.hi_str = r.hi_str;
    }
    first = false;
  }
  out.liminf_estimate = est;
}

}  // namespace

RatioSeries estimate_ratio(const IndexTable& subject, const IndexTable& ambient) {
  std::size_t levels = std::min(subject.orders.size(), ambient.orders.size()) - 1;
  RatioSeries out;
  for (std::size_t n = 1; n <= levels; ++n) {
    if (ambient.orders[n] == 1) throw std::invalid_argument("ambient order 1 at requested level");
    RI num = RI::log_of(subject.orders[n]);
    RI den = RI::log_of(ambient.orders[n]);
    out.levels.push_back(n);
    out.ratios.push_back(num.div_pos(den).rounded());
  }
  finish_liminf(out);
  return out;
}

Enclosure hdim_selfsimilar_enclosure(const std::vector<Expr>& gens, const WreathAmbient& ambient,
                                     std::size_t N, const SelfSimOptions& opt) {
  if (N < 2) throw std::invalid_argument("enclosure needs at least two levels");
  try {
    section_closure(gens, opt.closure_bound);
  } catch (const BoundExceeded&) {
    throw SelfSimilarityUnverified("generator set is not section-closed within the bound");
  }
  SelfSimTable st = selfsimilar_index_table(gens, N, opt);
  Enclosure out = enclosure_from_table(st.table, ambient, N);
  out.table_cert = st.cert;
  return out;
}

Enclosure enclosure_from_table(const IndexTable& t, const WreathAmbient& ambient, std::size_t N) {
  Enclosure out;
  out.table = t;

  auto s = s_sequence(t);  // s_1 .. s_{N-1}
  auto r = r_sequence(t);  // r_1 .. r_N
  for (const auto& sv : s)
    if (sv.arg < 1) throw std::logic_error("negative gradient for a self-similar subject");

  // partial value: (log |Q1| - sum_{n<N} s_n / m^n) / log |H|
  RI logH = RI::log_of(ambient.h_order);
  RI acc = RI::log_of(t.orders[1]);
  for (std::size_t n = 1; n <= s.size(); ++n)
    acc = acc.sub(RI::log_of(s[n - 1].arg).div_pow(t.m, n));
  RI hi_val = acc.div_pos(logH);

  // tail: sum_{n >= N} s_n / m^n <= (B - r_N) / m^N with B the stabilized
  // r-value; stabilization = the last two r-values agree exactly.
  out.B = r.back();
  out.stabilized = r.size() >= 2 && r[r.size() - 1].arg == r[r.size() - 2].arg;
  if (out.stabilized) {
    std::size_t at = r.size();
    while (at >= 2 && r[at - 2].arg == r.back().arg) --at;
    out.stabilized_at = at;
    mpq_class tail_arg = out.B.arg / r.back().arg;  // == 1: tail budget is zero
    tail_arg.canonicalize();
    RI tail = RI::log_of(tail_arg).div_pow(t.m, N);
    RI lo_val = hi_val.sub(tail.div_pos(logH));
    Rounded lo_r = lo_val.rounded();
    Rounded hi_r = hi_val.rounded();
    out.value.lo = std::max(0.0, lo_r.lo);
    out.value.hi = std::min(1.0, hi_r.hi);
    out.value.lo_str = out.value.lo == 0.0 && lo_r.lo < 0 ? "0" : lo_r.lo_str;
    out.value.hi_str = hi_r.hi_str;
    out.tail_bound_used = true;
    out.tail_bound = tail.rounded().hi_str;
  } else {
    out.estimator_only = true;
    Rounded hi_r = hi_val.rounded();
    out.value.lo = 0;
    out.value.lo_str = "0";
    out.value.hi = std::min(1.0, hi_r.hi);
    out.value.hi_str = hi_r.hi_str;
  }
  out.ratios = estimate_ratio(t, wreath_index_table(ambient, N));
  return out;
}

std::string enclosure_json(const Enclosure& e) {
  std::string j = "{\"levels\": [";
  for (std::size_t i = 0; i < e.ratios.levels.size(); ++i) {
    if (i) j += ", ";
    j += std::to_string(e.ratios.levels[i]);
  }
  j += "], \"ratios_lo\": [";
  for (std::size_t i = 0; i < e.ratios.ratios.size(); ++i) {
    if (i) j += ", ";
    j += e.ratios.ratios[i].lo_str;
  }
  j += "], \"ratios_hi\": [";
  for (std::size_t i = 0; i < e.ratios.ratios.size(); ++i) {
    if (i) j += ", ";
    j += e.ratios.ratios[i].hi_str;
  }
  j += "], \"enclosure\": {\"lo\": \"" + e.value.lo_str + "\", \"hi\": \"" + e.value.hi_str +
       "\", \"tail_B\": \"" + (e.tail_bound_used ? e.tail_bound : std::string("unavailable")) +
       "\", \"stabilized\": " + (e.stabilized ? "true" : "false") +
       ", \"estimator_only\": " + (e.estimator_only ? "true" : "false") + "}}";
  return j;
}

std::string enclosure_csv(const Enclosure& e) {
  std::string csv = "level,ratio_lo,ratio_hi\n";
  for (std::size_t i = 0; i < e.ratios.levels.size(); ++i)
    csv += std::to_string(e.ratios.levels[i]) + "," + e.ratios.ratios[i].lo_str + "," +
           e.ratios.ratios[i].hi_str + "\n";
  return csv;
}

ProductDimensionReport product_dimension_check(const IndexTable& K, const IndexTable& H,
                                               const IndexTable& G) {
  ProductDimensionReport rep;
  std::size_t levels = std::min({K.orders.size(), H.orders.size(), G.orders.size()}) - 1;
  std::size_t usable = 0;
  for (std::size_t n = 1; n <= levels; ++n) {
    if (H.orders[n] == 1 || G.orders[n] == 1) continue;  // ratio undefined this shallow
    ++usable;
    if (!(K.orders[n] <= H.orders[n] && H.orders[n] <= G.orders[n])) rep.per_level_identity = false;
    RI logk = RI::log_of(K.orders[n]);
    RI logh = RI::log_of(H.orders[n]);
    RI logg = RI::log_of(G.orders[n]);
    RI kg = logk.div_pos(logg), hg = logh.div_pos(logg), kh = logk.div_pos(logh);
    rep.k_in_g.levels.push_back(n);
    rep.h_in_g.levels.push_back(n);
    rep.k_in_h.levels.push_back(n);
    Rounded rkg = kg.rounded(), rhg = hg.rounded(), rkh = kh.rounded();
    // interval consistency of the exact factorization (a/c) = (b/c)(a/b)
    if (rkg.hi < rhg.lo * rkh.lo - 1e-12 || rkg.lo > rhg.hi * rkh.hi + 1e-12)
      rep.per_level_identity = false;
    rep.k_in_g.ratios.push_back(rkg);
    rep.h_in_g.ratios.push_back(rhg);
    rep.k_in_h.ratios.push_back(rkh);
  }
  if (usable == 0) throw std::invalid_argument("zero-order denominator at every level");
  finish_liminf(rep.k_in_g);
  finish_liminf(rep.h_in_g);
  finish_liminf(rep.k_in_h);
  return rep;
}

MuVsDimReport mu_vs_dimension(const WreathAmbient& w, const Antichain& V, std::size_t from_level,
                              std::size_t to_level) {
  if (from_level < 1 || from_level > to_level) throw std::invalid_argument("bad level range");
  std::size_t need = std::max<std::size_t>(to_level, V.max_level() + 1);
  IndexTable subject = wreath_graft_index_table(w, V, need);
  IndexTable ambient = wreath_index_table(w, need);
  MuVsDimReport rep;
  rep.mu = V.measure();
  RatioSeries all = estimate_ratio(subject, ambient);
  double mu_d = rep.mu.get_d();
  for (std::size_t i = 0; i < all.levels.size(); ++i) {
    std::size_t n = all.levels[i];
    if (n < from_level || n > to_level) continue;
    rep.ratios.levels.push_back(n);
    rep.ratios.ratios.push_back(all.ratios[i]);
    double gap = std::max(std::abs(all.ratios[i].lo - mu_d), std::abs(all.ratios[i].hi - mu_d));
    rep.gap.push_back(gap);
    double scale = static_cast<double>(pow_u64(w.m, n)) - 1.0;
    rep.max_scaled_gap = std::max(rep.max_scaled_gap, gap * scale);
  }
  return rep;
}

}  // namespace arbor
