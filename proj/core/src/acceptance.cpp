#include "arbor/acceptance.hpp"
#include <array>
#include <functional>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "arbor/dimension.hpp"
#include "arbor/grigfilt.hpp"
#include "arbor/permquot.hpp"
#include "arbor/selfsim.hpp"
#include "arbor/zoo.hpp"

namespace arbor {

namespace {

mpz_class pow_z(unsigned long b, const mpz_class& e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), b, e.get_ui());
  return r;
}

mpz_class wreath_order(unsigned long h, unsigned m, std::size_t n) {
  mpz_class g;
  mpz_ui_pow_ui(g.get_mpz_t(), m, static_cast<unsigned long>(n));
  g = (g - 1) / (m - 1);
  return pow_z(h, g);
}

struct SunicCase {
  unsigned m;
  std::vector<Perm> h;
  unsigned r;
  unsigned long h_order;
  std::string label;
};

std::vector<SunicCase> criterion1_grid() {
  return {
      {2, {Perm::cycle(2)}, 1, 2, "(2,C2,1)"},
      {2, {Perm::cycle(2)}, 2, 2, "(2,C2,2)"},
      {3, {Perm::cycle(3)}, 1, 3, "(3,C3,1)"},
      {3, {Perm::cycle(3), Perm::transposition(3, 0, 1)}, 1, 6, "(3,Sym3,1)"},
  };
}

CriterionResult sunic_quotients() {
  CriterionResult res{1, "sunic congruence quotients are iterated wreath products", true, ""};
  std::ostringstream d;
  for (const auto& c : criterion1_grid()) {
    GroupSpec g = sunic_generalized(SunicParams{c.h, c.r});
    for (std::size_t n = 1; n <= c.r + 1; ++n) {
      mpz_class got = quotient(g.gens, n).order();
      mpz_class want = wreath_order(c.h_order, c.m, n);
      if (got != want) {
        res.pass = false;
        d << c.label << " level " << n << ": got " << got.get_str() << ", want " << want.get_str()
          << "; ";
      }
    }
  }
  res.detail = res.pass ? "orders |H|^{(m^n-1)/(m-1)} for n <= r+1 on the whole grid" : d.str();
  return res;
}

CriterionResult sunic_gradient() {
  CriterionResult res{2, "sunic gradient vanishes up to the spine length", true, ""};
  std::ostringstream d;
  for (const auto& c : criterion1_grid()) {
    GroupSpec g = sunic_generalized(SunicParams{c.h, c.r});
    IndexTable t = index_table(g.gens, c.r + 2);
    auto s = s_sequence(t);
    for (unsigned n = 1; n <= c.r; ++n)
      if (!s[n - 1].is_zero()) {
        res.pass = false;
        d << c.label << " s_" << n << " != 0; ";
      }
  }
  res.detail = res.pass ? "s_n = 0 exactly for n <= r on the whole grid" : d.str();
  return res;
}

CriterionResult sunic_enclosure() {
  CriterionResult res{3, "sunic dimension enclosure meets the paper bound", true, ""};
  std::ostringstream d;
  struct Case {
    unsigned m, r;
  };
  for (Case c : {Case{2, 3}, Case{3, 2}}) {
    GroupSpec g = sunic_generalized(SunicParams{{Perm::cycle(c.m)}, c.r});
    WreathAmbient amb{c.m, mpz_class(c.m)};
    Enclosure e = hdim_selfsimilar_enclosure(g.gens, amb, 8);
    double bound = 1.0 - static_cast<double>(c.r + 1) / std::pow(c.m, c.r - 1);
    d << "(m=" << c.m << ",r=" << c.r << "): [" << e.value.lo << ", " << e.value.hi
      << "], bound " << bound << (e.table_cert.recursion_used ? ", certified recursion" : ", direct")
      << "; ";
    if (!(e.value.lo >= bound - 1e-9)) res.pass = false;
    if (e.estimator_only) res.pass = false;
  }
  res.detail = d.str();
  return res;
}

CriterionResult grigorchuk_table() {
  CriterionResult res{4, "grigorchuk index table: oracle, regression, enclosure", true, ""};
  std::ostringstream d;
  GroupSpec g = grigorchuk();
  // oracle equivalence at levels 1..3
  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<Perm> perms;
    for (Expr e : g.gens) perms.push_back(level_perm(e, n));
    mpz_class naive = naive_order(perms, 10000);
    mpz_class sgs = quotient(g.gens, n).order();
    if (naive != sgs) {
      res.pass = false;
      d << "level " << n << " naive " << naive.get_str() << " != sgs " << sgs.get_str() << "; ";
    }
  }
  // regression constants for levels 4..7 (log2 orders 12, 22, 42, 82)
  IndexTable t = index_table(g.gens, 7);
  const long expected_log2[] = {0, 1, 3, 7, 12, 22, 42, 82};
  for (std::size_t n = 4; n <= 7; ++n) {
    mpz_class want;
    mpz_ui_pow_ui(want.get_mpz_t(), 2, static_cast<unsigned long>(expected_log2[n]));
    if (t.orders[n] != want) {
      res.pass = false;
      d << "level " << n << " order " << t.orders[n].get_str() << " != 2^" << expected_log2[n] << "; ";
    }
  }
  auto s = s_sequence(t);
  for (unsigned n = 4; n <= 6; ++n)
    if (!s[n - 1].is_zero()) {
      res.pass = false;
      d << "s_" << n << " != 0; ";
    }
  WreathAmbient amb{2, 2};
  Enclosure e = hdim_selfsimilar_enclosure(g.gens, amb, 7);
  double width = e.value.hi - e.value.lo;
  d << "enclosure [" << e.value.lo << ", " << e.value.hi << "] width " << width;
  if (!(width < 0.01) || e.estimator_only) res.pass = false;
  res.detail = d.str();
  return res;
}

CriterionResult measure_dimension_agreement() {
  CriterionResult res{5, "measure vs dimension for grafted full rigid stabilizers", true, ""};
  std::ostringstream d;
  WreathAmbient w2{2, 2};
  struct Case {
    std::string label;
    std::vector<std::string> verts;
  };
  std::vector<Case> cases = {
      {"{0}", {"0"}},
      {"{0,100}", {"0", "100"}},
      {"level-2", {"00", "01", "10", "11"}},
  };
  for (const auto& c : cases) {
    std::vector<Vertex> vs;
    for (const auto& s : c.verts) vs.push_back(Vertex::parse(s, 2));
    Antichain V(2, std::move(vs));
    MuVsDimReport rep = mu_vs_dimension(w2, V, 3, 10);
    d << c.label << ": mu = " << rep.mu.get_str() << ", c = " << rep.max_scaled_gap << "; ";
    if (!(rep.max_scaled_gap <= 2.0)) res.pass = false;
  }
  res.detail = d.str() + (res.pass ? "" : "(scaled gap exceeded c = 2)");
  return res;
}

CriterionResult filtration_closed_forms() {
  CriterionResult res{6, "grigorchuk filtration closed forms and crosscheck", true, ""};
  std::ostringstream d;
  if (nm_step_logdim(1) != 3 || nm_step_logdim(2) != 6 || nm_step_logdim(3) != 12) {
    res.pass = false;
    d << "nm_step values wrong; ";
  }
  for (unsigned m = 1; m <= 10; ++m) {
    // gamma telescoping: the last step from gamma_{2^m+2^m} to N_{m+1} is 1
    if (gamma_rel_logindex(m, (1ul << m) - 1) + 1 != nm_step_logdim(m)) {
      res.pass = false;
      d << "gamma telescoping fails at m=" << m << "; ";
    }
    if (d_rel_logindex(m, (1ul << m) - 1) + 2 != nm_step_logdim(m)) {
      res.pass = false;
      d << "D telescoping fails at m=" << m << "; ";
    }
  }
  for (unsigned m = 1; m <= 8; ++m)
    for (unsigned k = 0; k + 1 <= m; ++k)
      for (unsigned long r = 1; r <= (1ul << m) - 1; ++r) {
        long f = rist_rel_logindex(m, r, k);
        long g = gamma_rel_logindex(m, r);
        // f <= 2^{1-k} g, cleared of denominators: f * 2^k <= 2 g
        if ((static_cast<long long>(f) << k) > 2ll * g) {
          res.pass = false;
          d << "f/g bound fails at (m,r,k)=(" << m << "," << r << "," << k << "); ";
        }
      }
  for (std::size_t level : {std::size_t(5), std::size_t(6)}) {
    CrosscheckReport rep = empirical_crosscheck(2, level);
    for (const auto& row : rep.rows) {
      if (row.filtration == "D") continue;
      if (!row.empirical) continue;
      if (row.filtration == "N" && (!row.stabilized || *row.empirical != row.closed_form)) {
        res.pass = false;
        d << "N_" << row.m << " step mismatch at probe level " << level << "; ";
      }
      if (row.filtration == "gamma" && (!row.stabilized || *row.empirical != row.closed_form)) {
        res.pass = false;
        d << "gamma step (m=" << row.m << ",r=" << row.r << ") mismatch at probe level " << level
          << "; ";
      }
    }
    if (!rep.gamma_equals_nm) {
      res.pass = false;
      d << "gamma_{2^m+1} != N_m at probe level " << level << "; ";
    }
    if (rep.g_to_n1_logindex) d << "log2|G:N_1| = " << *rep.g_to_n1_logindex << " @" << level << "; ";
  }
  res.detail = res.pass ? "closed forms, telescoping, f/g bound, stabilized crosscheck" + d.str()
                        : d.str();
  return res;
}

CriterionResult rist_dimension() {
  CriterionResult res{7, "rigid stabilizer dimension equals the vertex measure", true, ""};
  std::ostringstream d;
  for (unsigned k = 0; k <= 4; ++k) {
    RistDimReport rep = rist_hdim_wrt_gamma(k, 20);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
    mpq_class target = mpq_class(1) / mpq_class(den);
    // exact rational limit must equal mu of a level-k singleton
    Antichain singleton(2, {Vertex(2, std::vector<unsigned>(k, 0))});
    mpq_class mu = WeightedAntichain(singleton).is_finite()
                       ? arbor::mu(WeightedAntichain(singleton), k).lo
                       : mpq_class(0);
    if (rep.exact_limit != target || mu != target) {
      res.pass = false;
      d << "k=" << k << " exact limit mismatch; ";
    }
    if (std::abs(rep.estimate - target.get_d()) > 1e-6) {
      res.pass = false;
      d << "k=" << k << " numeric estimate off by " << std::abs(rep.estimate - target.get_d())
        << "; ";
    }
    d << "k=" << k << " window@20 [" << rep.windows.back().ratio_min << ", "
      << rep.windows.back().ratio_max << "]; ";
  }
  res.detail = d.str();
  return res;
}

bool fixes_outside(Expr g, const std::vector<Vertex>& xs, std::size_t level) {
  unsigned m = g.arity();
  Perm p = level_perm(g, level);
  for (std::uint64_t i = 0; i < p.degree(); ++i) {
    if (p(static_cast<std::uint32_t>(i)) == i) continue;
    Vertex v = Vertex::from_level_rank(m, level, i);
    bool below = false;
    for (const auto& x : xs)
      if (x.level() <= level && x.is_prefix_of(v)) {
        below = true;
        break;
      }
    if (!below) return false;
  }
  return true;
}

CriterionResult construction_contracts() {
  CriterionResult res{8, "construction contracts: counts and supports", true, ""};
  std::ostringstream d;

  // L_X over T_4 with a 3-generator seed, W at level 1: 4*(1+6)+3 = 31
  {
    std::vector<Expr> kg = {rooted(Perm::cycle(4)), rooted(Perm::transposition(4, 0, 1)),
                            rooted(Perm::from_cycles(4, {{0, 2}, {1, 3}}))};
    GroupSpec K;
    K.name = "w4_seed";
    K.m = 4;
    K.gens = kg;
    K.gen_names = {"k1", "k2", "k3"};
    AntichainSchema X = antichain_for_target(mpq_class(1, 2), 4);
    LXParams lp{K, X, 1, adding_machine_witness(4, 10), true};
    GroupSpec lx = l_x_generators(lp);
    std::size_t want = 4 * (1 + 2 * 3) + 3;
    if (lx.gens.size() != want) {
      res.pass = false;
      d << "lx count " << lx.gens.size() << " != " << want << "; ";
    }
    std::vector<Vertex> xs;
    for (std::size_t k = 0; X.depth_floor(k) <= 8; ++k) {
      auto v = X.vertex(k);
      if (!v) break;
      xs.push_back(*v);
    }
    for (std::size_t i = 0; i < lx.gens.size(); ++i)
      for (std::size_t n = 1; n <= 8 && res.pass; ++n)
        if (!fixes_outside(lx.gens[i], xs, n)) {
          res.pass = false;
          d << "lx generator " << lx.gen_names[i] << " moves a point outside X at level " << n
            << "; ";
        }
    d << "lx count " << lx.gens.size() << "; ";
  }

  // W_p two-generated family
  {
    AntichainSchema X = staircase_schema();
    GroupSpec wp = wp_two_generated(2, X);
    if (wp.gens.size() != 2) {
      res.pass = false;
      d << "wp2 generator count " << wp.gens.size() << "; ";
    }
    std::vector<Vertex> xs;
    for (std::size_t k = 0; X.depth_floor(k) <= 8; ++k) xs.push_back(*X.vertex(k));
    for (std::size_t i = 0; i < wp.gens.size(); ++i)
      for (std::size_t n = 1; n <= 8 && res.pass; ++n)
        if (!fixes_outside(wp.gens[i], xs, n)) {
          res.pass = false;
          d << "wp2 generator " << i << " moves a point outside X at level " << n << "; ";
        }
    d << "wp2 count 2; ";
  }

  // Siegenthaler: d(H)+1 generators
  {
    for (unsigned p : {2u, 3u}) {
      SiegenthalerParams sp;
      sp.h_gens = {Perm::cycle(p)};
      Perm sigma = Perm::cycle(p);
      sp.family = [sigma](unsigned r) { return sunic_generalized(SunicParams{{sigma}, r}); };
      GroupSpec K = siegenthaler_K(sp);
      if (K.gens.size() != sp.h_gens.size() + 1) {
        res.pass = false;
        d << "siegenthaler W_" << p << " count " << K.gens.size() << "; ";
      }
    }
    d << "siegenthaler counts d(H)+1; ";
  }
  res.detail = d.str();
  return res;
}

CriterionResult witness_orders() {
  CriterionResult res{9, "infinite-order witness: growing truncation orders", true, ""};
  std::ostringstream d;
  // W_2 seed
  {
    GroupSpec K;
    K.name = "w2_seed";
    K.m = 2;
    K.gens = {rooted(Perm::transposition(2, 0, 1))};
    K.gen_names = {"s"};
    for (std::size_t k : {std::size_t(4), std::size_t(8)}) {
      Witness w = infinite_order_witness(K, k);
      std::size_t L = w.stages.back().path.level();
      mpz_class ord = level_perm(w.g, L).order();
      mpz_class want;
      mpz_ui_pow_ui(want.get_mpz_t(), 2, static_cast<unsigned long>(k));
      d << "w2 stage " << k << ": order " << ord.get_str() << " at level " << L << "; ";
      if (ord < want) res.pass = false;
    }
  }
  // Grigorchuk K
  {
    GroupSpec grig = grigorchuk();
    GroupSpec K;
    K.name = "grigorchuk_k";
    K.m = 2;
    K.gens = grigorchuk_k_gens(grig);
    K.gen_names = {"x", "x0", "x1"};
    for (std::size_t k : {std::size_t(5), std::size_t(8)}) {
      Witness w = infinite_order_witness(K, k);
      std::size_t L = w.stages.back().path.level();
      mpz_class ord = level_perm(w.g, L).order();
      mpz_class want;
      mpz_ui_pow_ui(want.get_mpz_t(), 2, static_cast<unsigned long>(k));
      d << "grigK stage " << k << ": order " << ord.get_str() << " at level " << L << "; ";
      if (ord < want) res.pass = false;
    }
  }
  res.detail = d.str();
  return res;
}

CriterionResult calculus_identities() {
  CriterionResult res{10, "section calculus identities on randomized cases", true, ""};
  GroupSpec grig = grigorchuk();
  GroupSpec bas = basilica();
  Expr add2 = adding_machine(2);
  std::vector<Expr> atoms = {grig.gens[0], grig.gens[1], grig.gens[2], grig.gens[3],
                             bas.gens[0],  bas.gens[1],  add2};
  // deterministic linear congruential stream
  std::uint64_t state = 0x243f6a8885a308d3ull;
  auto rnd = [&state](std::uint64_t bound) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return (state >> 33) % bound;
  };
  std::function<Expr(int)> random_expr = [&](int depth) -> Expr {
    if (depth <= 0) return atoms[rnd(atoms.size())];
    switch (rnd(4)) {
      case 0:
        return product(random_expr(depth - 1), random_expr(depth - 1));
      case 1:
        return inverse(random_expr(depth - 1));
      case 2: {
        Vertex v(2);
        std::size_t len = 1 + rnd(2);
        for (std::size_t i = 0; i < len; ++i) v = v.child(static_cast<unsigned>(rnd(2)));
        return graft(random_expr(depth - 1), v);
      }
      default:
        return atoms[rnd(atoms.size())];
    }
  };
  auto random_vertex = [&](std::size_t maxlen) {
    Vertex v(2);
    std::size_t len = 1 + rnd(maxlen);
    for (std::size_t i = 0; i < len; ++i) v = v.child(static_cast<unsigned>(rnd(2)));
    return v;
  };

  int fails = 0, cases = 0;
  for (int it = 0; it < 220; ++it) {
    Expr g = random_expr(2), h = random_expr(2);
    Vertex v = random_vertex(3);
    ++cases;
    // homomorphism and inverse on level permutations
    if (level_perm(product(g, h), 5) != level_perm(g, 5).then(level_perm(h, 5))) ++fails;
    if (level_perm(inverse(g), 5) != level_perm(g, 5).inverse()) ++fails;
    // section of a product
    Expr lhs = section(product(g, h), v);
    Expr rhs = product(section(g, v), section(h, act(g, v)));
    if (!equal_up_to_level(lhs, rhs, 5)) ++fails;
    // graft conjugation (g*v)^h = (g^{h|_v}) * ((v)h)
    Expr cl = conjugate(graft(g, v), h);
    Expr cr = graft(conjugate(g, section(h, v)), act(h, v));
    if (!equal_up_to_level(cl, cr, 5)) ++fails;
    // grafts at non-comparable vertices commute
    Vertex u = random_vertex(3);
    if (!is_comparable(u, v)) {
      Expr p1 = product(graft(g, u), graft(h, v));
      Expr p2 = product(graft(h, v), graft(g, u));
      if (!equal_up_to_level(p1, p2, 5)) ++fails;
    }
  }
  res.pass = fails == 0;
  res.detail = std::to_string(cases) + " randomized cases, " + std::to_string(fails) + " failures";
  return res;
}

}  // namespace

std::vector<CriterionResult> run_acceptance() {
  std::vector<CriterionResult> out;
  out.push_back(sunic_quotients());
  out.push_back(sunic_gradient());
  out.push_back(sunic_enclosure());
  out.push_back(grigorchuk_table());
  out.push_back(measure_dimension_agreement());
  out.push_back(filtration_closed_forms());
  out.push_back(rist_dimension());
  out.push_back(construction_contracts());
  out.push_back(witness_orders());
  out.push_back(calculus_identities());
  return out;
}

int report_acceptance(const std::vector<CriterionResult>& results) {
  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] criterion %d: %s — %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failures);
  return failures;
}

}  // namespace arbor
