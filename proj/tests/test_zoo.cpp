#include <doctest.h>

#include "arbor/dimension.hpp"
#include "arbor/permquot.hpp"
#include "arbor/zoo.hpp"

using namespace arbor;

namespace {
Vertex V2(const std::string& s) { return Vertex::parse(s, 2); }
}

TEST_CASE("grigorchuk group basics") {
  GroupSpec g = grigorchuk();
  for (Expr e : g.gens) CHECK(level_perm(e, 6).pow(2).is_identity());  // all involutions
  // bcd = 1
  Expr bcd = product(product(g.gens[1], g.gens[2]), g.gens[3]);
  CHECK(equal_up_to_level(bcd, identity(2), 6));
  CHECK(quotient(g.gens, 1).order() == 2);
  // x = abab generates the branching subgroup with its two grafts
  Expr x = grigorchuk_x(g);
  CHECK(root_label(x).is_identity());
  CHECK_FALSE(level_perm(x, 2).is_identity());
  CHECK(grigorchuk_k_gens(g).size() == 3);
}

TEST_CASE("basilica recursion") {
  GroupSpec b = basilica();
  CHECK(root_label(b.gens[0]).is_identity());       // a stabilizes level 1
  CHECK_FALSE(root_label(b.gens[1]).is_identity());  // b does not
  CHECK(quotient(b.gens, 1).order() == 2);
  // level-3 order: chain vs naive oracle, frozen value
  std::vector<Perm> perms;
  for (Expr e : b.gens) perms.push_back(level_perm(e, 3));
  mpz_class naive = naive_order(perms, 10000);
  CHECK(quotient(b.gens, 3).order() == naive);
  CHECK(naive == 128);  // regression
}

TEST_CASE("adding machine and truncations") {
  for (unsigned m : {2u, 3u}) {
    Expr a = adding_machine(m);
    for (std::size_t n = 1; n <= 6; ++n) {
      CHECK(level_perm(a, n).cycles().size() == 1);  // single m^n-cycle
      CHECK(level_perm(trunc(a, n), n) == level_perm(a, n));
    }
    CHECK(equal_up_to_level(trunc(a, 1), rooted(Perm::cycle(m)), 4));
  }
  // orbit of the leftmost path under a general seeded odometer has length t^n
  Perm h = Perm::from_cycles(3, {{0, 1}});  // t = 2 on three letters
  Expr a = adding_machine_for(h);
  Vertex v(3, std::vector<unsigned>(4, 0));
  Vertex u = v;
  unsigned long len = 0;
  do {
    u = act(a, u);
    ++len;
  } while (u != v);
  CHECK(len == 16);  // t^n = 2^4
}

TEST_CASE("generalized sunic groups") {
  SUBCASE("generator count and level-1 stabilization") {
    GroupSpec g = sunic_generalized(SunicParams{{Perm::cycle(3), Perm::transposition(3, 0, 1)}, 2});
    CHECK(g.gens.size() == 2 * (2 + 1));  // l (r+1)
    for (std::size_t i = 2; i < g.gens.size(); ++i)
      CHECK(root_label(g.gens[i]).is_identity());  // spinal states fix level 1
  }
  SUBCASE("self-similar and level-transitive markers") {
    for (auto& g : {sunic_generalized(SunicParams{{Perm::cycle(2)}, 2}),
                    sunic_generalized(SunicParams{{Perm::cycle(3)}, 1}), grigorchuk(), basilica()}) {
      CHECK(verify_self_similar(g).holds);
      CHECK(verify_level_transitive(g, 6).holds);
    }
  }
  SUBCASE("strong fractality marker") {
    GroupSpec g = sunic_generalized(SunicParams{{Perm::cycle(3)}, 1});
    CHECK(verify_strongly_fractal(g, 4).holds);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS(sunic_generalized(SunicParams{{Perm::identity(3)}, 1}));          // not transitive
    CHECK_THROWS(sunic_generalized(SunicParams{{Perm::cycle(2), Perm::cycle(2)}, 1}));  // l > m-1
  }
}

TEST_CASE("delta grafts along the odometer orbit") {
  GroupSpec g = sunic_generalized(SunicParams{{Perm::cycle(2)}, 1});
  SUBCASE("single argument") {
    DeltaResult d1 = delta({g.gens[0]}, {Perm::cycle(2)});
    REQUIRE(d1.vertices.size() == 1);
    // the single factor sits at (0...0) a^{t^0} = image of the leftmost vertex
    Expr a1 = adding_truncation(Perm::cycle(2), 1);
    CHECK(d1.vertices[0] == act(a1, Vertex(2, {0})));
  }
  SUBCASE("two arguments: vertices (0..0)a^{t^i}") {
    DeltaResult d2 = delta({g.gens[0], g.gens[1]}, {Perm::cycle(2)});
    REQUIRE(d2.vertices.size() == 2);
    Expr a2 = adding_truncation(Perm::cycle(2), 2);
    Vertex base(2, {0, 0});
    CHECK(d2.vertices[0] == act(a2, base));
    CHECK(d2.vertices[1] == act(power(a2, 2), base));
    CHECK(d2.vertices[0] == V2("11"));
    CHECK(d2.vertices[1] == V2("01"));
    CHECK(d2.t_r == 2);
    // portrait regression: the product of the two grafts
    Expr expect = product(graft(g.gens[0], V2("11")), graft(g.gens[1], V2("01")));
    CHECK(equal_up_to_level(d2.expr, expect, 6));
  }
  SUBCASE("no moving generator") {
    CHECK_THROWS_AS(delta({g.gens[0]}, {Perm::identity(2)}), NoMovingGenerator);
  }
}

TEST_CASE("infinite-order witness stages") {
  GroupSpec K;
  K.name = "w2_seed";
  K.m = 2;
  K.gens = {rooted(Perm::transposition(2, 0, 1))};
  K.gen_names = {"s"};
  SUBCASE("zero stages returns the seed") {
    Witness w = infinite_order_witness(K, 0);
    CHECK(w.g == w.seed);
  }
  SUBCASE("orbit lengths certify divisibility") {
    Witness w = infinite_order_witness(K, 6);
    REQUIRE(w.stages.size() == 6);
    unsigned long long prod = 1;
    for (const auto& st : w.stages) {
      CHECK(st.orbit_len >= 2);
      prod *= st.orbit_len;
    }
    std::size_t L = w.stages.back().path.level();
    mpz_class ord = level_perm(w.g, L).order();
    CHECK(mpz_class(ord) % mpz_class(static_cast<unsigned long>(prod)) == 0);
  }
  SUBCASE("trivial input is rejected") {
    GroupSpec T;
    T.m = 2;
    T.gens = {identity(2)};
    T.gen_names = {"e"};
    CHECK_THROWS_AS(infinite_order_witness(T, 2), TrivialInput);
  }
}

TEST_CASE("L_X generators") {
  // seed over T_4 with three rooted generators and the odometer witness
  std::vector<Expr> kg = {rooted(Perm::cycle(4)), rooted(Perm::transposition(4, 0, 1)),
                          rooted(Perm::from_cycles(4, {{0, 2}, {1, 3}}))};
  GroupSpec K;
  K.name = "w4_seed";
  K.m = 4;
  K.gens = kg;
  K.gen_names = {"k1", "k2", "k3"};
  AntichainSchema X = antichain_for_target(mpq_class(1, 2), 4);
  LXParams lp{K, X, 1, adding_machine_witness(4, 8), true};
  GroupSpec lx = l_x_generators(lp);
  CHECK(lx.gens.size() == 4 * (1 + 2 * 3) + 3);

  SUBCASE("support containment") {
    std::vector<Vertex> xs;
    for (std::size_t k = 0; X.depth_floor(k) <= 6; ++k) {
      auto v = X.vertex(k);
      if (!v) break;
      xs.push_back(*v);
    }
    for (std::size_t i = 0; i < lx.gens.size(); ++i) {
      Perm p = level_perm(lx.gens[i], 4);
      for (std::uint64_t pt = 0; pt < p.degree(); ++pt) {
        if (p(static_cast<std::uint32_t>(pt)) == pt) continue;
        Vertex v = Vertex::from_level_rank(4, 4, pt);
        bool below = false;
        for (const auto& x : xs)
          if (x.is_prefix_of(v)) below = true;
        CHECK(below);
      }
    }
  }

  SUBCASE("commutator of conjugated b generators lands on the grafted commutator") {
    // [b_{j,w}^{a_w^{T(r-j)}}, b_{s,w}^{a_w^{T(r-s)}}] = [k_j, k_s] * x_u w v_{u,r}
    std::size_t r = 3, u = 1, j = 1, s = 2;
    Vertex w0 = Vertex(4).child(0);
    Expr a_w = lx.gens[0];  // a@0
    Expr b_j = lx.gens[1];  // b1@0
    Expr b_s = lx.gens[2];  // b2@0
    long long T = 1;        // t_prefix(1)
    Expr lhs = commutator(conjugate(b_j, power(a_w, T * static_cast<long long>(r - j))),
                          conjugate(b_s, power(a_w, T * static_cast<long long>(r - s))));
    // v_{1,r} = (path_1) g^{T(r-1)} for the synthetic odometer witness
    Witness wit = adding_machine_witness(4, 8);
    Vertex v1r = act(power(wit.g, T * static_cast<long long>(r - 1)), wit.stages[0].path);
    Vertex at = X.vertex(0)->concat(w0).concat(v1r);
    Expr rhs = graft(commutator(kg[j - 1], kg[s - 1]), at);
    CHECK(equal_up_to_level(lhs, rhs, 6));
    (void)u;
  }

  SUBCASE("orbit-too-short seeds are rejected") {
    GroupSpec Kbig;
    Kbig.m = 2;
    Kbig.gens = {rooted(Perm::transposition(2, 0, 1)), rooted(Perm::transposition(2, 0, 1)),
                 rooted(Perm::transposition(2, 0, 1))};
    Kbig.gen_names = {"k1", "k2", "k3"};
    LXParams bad{Kbig, staircase_schema(), 1, adding_machine_witness(2, 6), true};
    CHECK_THROWS_AS(l_x_generators(bad), OrbitTooShort);
  }
}

TEST_CASE("siegenthaler two-generator system") {
  SiegenthalerParams sp;
  sp.h_gens = {Perm::cycle(2)};
  Perm sigma = Perm::cycle(2);
  sp.family = [sigma](unsigned r) { return sunic_generalized(SunicParams{{sigma}, r}); };
  GroupSpec K = siegenthaler_K(sp);
  CHECK(K.gens.size() == 2);  // d(H) + 1

  // b_1 evaluates at level 5 by unfolding finitely many layers
  Perm p5 = level_perm(K.gens[1], 5);
  CHECK(p5.degree() == 32);

  // containment instance of G' * L_n <= K': a grafted commutator of G_1's
  // generators sifts into the derived subgroup of the K_1 quotient
  GroupSpec G1 = sp.family(1);
  std::size_t n1 = G1.gens.size() + 1 + 1;  // d(G_1) + l + 1
  Expr comm_g = commutator(G1.gens[0], G1.gens[1]);
  std::size_t probe = n1 + 2;
  LevelQuotient q = quotient(K.gens, probe);
  LevelQuotient d = q.derived_subgroup();
  Vertex ones(2, std::vector<unsigned>(n1, 0));
  CHECK(d.contains(graft(comm_g, ones)));
}

TEST_CASE("wp two-generated family") {
  GroupSpec wp = wp_two_generated(2, staircase_schema());
  REQUIRE(wp.gens.size() == 2);
  // ratio estimates against W_2 recorded for mu(X) = 1/2 (no convergence claim)
  GroupSpec wph = wp_two_generated(2, antichain_for_target(mpq_class(1, 2), 2));
  IndexTable t = index_table(wph.gens, 6);
  WreathAmbient w2{2, 2};
  RatioSeries rs = estimate_ratio(t, wreath_index_table(w2, 6));
  for (const auto& r : rs.ratios) {
    CHECK(r.lo >= 0.0);
    CHECK(r.hi <= 1.0 + 1e-12);
  }
}

TEST_CASE("group specs round-trip through JSON bit-exactly") {
  for (const auto& g :
       {grigorchuk(), basilica(), sunic_generalized(SunicParams{{Perm::cycle(3)}, 2})}) {
    std::string j = g.to_json();
    GroupSpec back = GroupSpec::from_json(j);
    CHECK(back.to_json() == j);
    REQUIRE(back.gens.size() == g.gens.size());
    for (std::size_t i = 0; i < g.gens.size(); ++i)
      CHECK(equal_up_to_level(back.gens[i], g.gens[i], 5));
  }
}

TEST_CASE("constructor registry") {
  GroupSpec g = construct_by_name("sunic", R"({"m": 2, "r": 2})");
  CHECK(g.gens.size() == 3);
  CHECK_THROWS(construct_by_name("nosuch", "{}"));
  GroupSpec wp = construct_by_name("wp2", R"({"p": 2, "X": {"gamma": "1/2"}})");
  CHECK(wp.gens.size() == 2);
}
