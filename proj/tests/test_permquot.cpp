#include <doctest.h>

#include "arbor/permquot.hpp"
#include "arbor/selfsim.hpp"
#include "arbor/zoo.hpp"

using namespace arbor;

namespace {

Vertex V2(const std::string& s) { return Vertex::parse(s, 2); }

// the level-n quotient generators of W_2: the rooted swap grafted everywhere
std::vector<Expr> w2_family(std::size_t n) {
  Expr s = rooted(Perm::transposition(2, 0, 1));
  std::vector<Expr> gens{s};
  for (std::size_t k = 1; k < n; ++k)
    for (std::uint64_t r = 0; r < pow_u64(2, k); ++r)
      gens.push_back(graft(s, Vertex::from_level_rank(2, k, r)));
  return gens;
}

}  // namespace

TEST_CASE("quotient orders of small groups") {
  GroupSpec g = grigorchuk();
  CHECK(quotient(g.gens, 1).order() == 2);
  CHECK(quotient(g.gens, 2).order() == 8);
  CHECK(quotient(g.gens, 3).order() == 128);

  for (std::size_t n = 1; n <= 6; ++n) {
    mpz_class want = mpz_class(1) << ((1u << n) - 1);  // 2^(2^n - 1)
    CHECK(quotient(w2_family(n), n).order() == want);
  }
}

TEST_CASE("naive enumeration oracle agrees with the chain") {
  GroupSpec g = grigorchuk();
  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<Perm> perms;
    for (Expr e : g.gens) perms.push_back(level_perm(e, n));
    CHECK(naive_order(perms, 10000) == quotient(g.gens, n).order());
  }
  // a single full cycle
  std::vector<Perm> cyc{Perm::cycle(16)};
  CHECK(naive_order(cyc, 100) == 16);
  CHECK(LevelQuotient(2, 4, cyc).order() == 16);
}

TEST_CASE("membership") {
  GroupSpec g = grigorchuk();
  LevelQuotient q = quotient(g.gens, 3);
  for (Expr e : g.gens) CHECK(q.contains(e));
  CHECK(q.contains(identity(2)));

  // regression: sifting verdict for a grafted branching element, with the
  // naive oracle as ground truth
  Expr x = grigorchuk_x(g);
  Expr probe = graft(x, V2("11"));
  std::vector<Perm> perms;
  for (Expr e : g.gens) perms.push_back(level_perm(e, 3));
  auto all = naive_elements(perms, 10000);
  Perm target = level_perm(probe, 3);
  bool oracle = false;
  for (const auto& p : all)
    if (p == target) {
      oracle = true;
      break;
    }
  CHECK(q.contains(probe) == oracle);
  CHECK(oracle);  // frozen verdict: the level-3 image of K's graft lies inside
}

TEST_CASE("level transitivity") {
  CHECK(is_level_transitive(std::vector<Expr>{adding_machine(2)}, 12));
  CHECK(is_level_transitive(std::vector<Expr>{adding_machine(3)}, 8));
  GroupSpec g = grigorchuk();
  for (std::size_t n = 1; n <= 6; ++n) CHECK(is_level_transitive(g.gens, n));
  std::vector<Expr> bonly{g.gens[1]};
  CHECK_FALSE(is_level_transitive(bonly, 1));
}

TEST_CASE("subtree transitivity levels") {
  CHECK(minimal_subtree_transitivity_level(w2_family(6), 2, 3).level == 0);
  GroupSpec g = grigorchuk();
  auto kgens = grigorchuk_k_gens(g);
  auto st = minimal_subtree_transitivity_level(kgens, 4, 5);
  CHECK(st.level <= 4);
  CHECK(st.level == 1);  // regression: K acts transitively below level 1
  std::vector<Expr> bonly{g.gens[1]};
  CHECK_THROWS_AS(minimal_subtree_transitivity_level(bonly, 3, 3), NotFoundWithinBound);
}

TEST_CASE("derived subgroups") {
  // abelian quotient: the adding machine level quotient is cyclic
  LevelQuotient cyc(2, 3, {Perm(level_perm(adding_machine(2), 3))});
  CHECK(cyc.derived_subgroup().order() == 1);

  GroupSpec g = grigorchuk();
  LevelQuotient q = quotient(g.gens, 3);
  LevelQuotient d = q.derived_subgroup();
  // oracle: brute-force commutator closure inside the 128-element group
  std::vector<Perm> perms;
  for (Expr e : g.gens) perms.push_back(level_perm(e, 3));
  auto all = naive_elements(perms, 10000);
  std::vector<Perm> comms;
  for (const auto& p : all)
    for (const auto& r : perms) comms.push_back(p.inverse().then(r.inverse()).then(p).then(r));
  CHECK(naive_order(comms, 10000) == d.order());
  CHECK(d.order() == 16);  // frozen regression: |Q3'| = 2^4

  LevelQuotient dd = d.derived_subgroup();
  for (const auto& p : dd.generators()) CHECK(d.contains(p));
}

TEST_CASE("index tables") {
  GroupSpec g = grigorchuk();
  IndexTable t = index_table(g.gens, 7);
  const long log2s[] = {0, 1, 3, 7, 12, 22, 42, 82};
  for (std::size_t n = 0; n <= 7; ++n) CHECK(t.orders[n] == mpz_class(1) << log2s[n]);
  for (std::size_t n = 0; n < 7; ++n) CHECK(t.orders[n + 1] % t.orders[n] == 0);

  // csv shape
  std::string csv = index_table_csv(t);
  CHECK(csv.substr(0, 28) == "level,order,log_m_order\n0,1,");

  // parallel computation is identical
  IndexTable t2 = index_table(g.gens, 5, 3);
  for (std::size_t n = 0; n <= 5; ++n) CHECK(t2.orders[n] == t.orders[n]);
}

TEST_CASE("grafted families multiply orders across non-comparable vertices") {
  GroupSpec g = grigorchuk();
  Expr b = g.gens[1];
  std::vector<Vertex> V{V2("0"), V2("10")};
  std::vector<Expr> grafted;
  for (const auto& v : V) grafted.push_back(graft(b, v));
  for (std::size_t n = 3; n <= 6; ++n) {
    mpz_class whole = quotient(grafted, n).order();
    mpz_class prod(1);
    for (const auto& v : V) {
      std::vector<Expr> single{b};
      prod *= quotient(single, n - v.level()).order();
    }
    CHECK(whole == prod);
  }
}

TEST_CASE("self-similar recursion matches the direct chain") {
  // Grigorchuk, forced through the recursion from level 4
  GroupSpec g = grigorchuk();
  SelfSimOptions opt;
  opt.direct_levels = 4;
  SelfSimTable st = selfsimilar_index_table(g.gens, 7, opt);
  IndexTable direct = index_table(g.gens, 7);
  for (std::size_t n = 0; n <= 7; ++n) CHECK(st.table.orders[n] == direct.orders[n]);
  CHECK(st.cert.recursion_used);
  CHECK(st.cert.lattice_stabilized);
  CHECK(st.cert.branch_certified);
  CHECK(st.cert.cross_validated);

  // sunic over C3: recursion beyond the direct window agrees with the chain
  GroupSpec s = sunic_generalized(SunicParams{{Perm::cycle(3)}, 1});
  SelfSimOptions opt3;
  opt3.direct_levels = 3;
  SelfSimTable st3 = selfsimilar_index_table(s.gens, 4, opt3);
  CHECK(st3.cert.recursion_used);
  CHECK(st3.table.orders[4] == quotient(s.gens, 4).order());
}
