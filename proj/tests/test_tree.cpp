#include <doctest.h>

#include "arbor/antichain.hpp"
#include "arbor/zoo.hpp"

using namespace arbor;

namespace {

Vertex V2(const std::string& s) { return Vertex::parse(s, 2); }

// Independent oracle: binary digits of gamma by repeated doubling.
std::vector<unsigned> binary_digits(mpq_class gamma, std::size_t count) {
  std::vector<unsigned> out;
  for (std::size_t i = 0; i < count; ++i) {
    gamma *= 2;
    mpz_class digit = gamma.get_num() / gamma.get_den();
    out.push_back(static_cast<unsigned>(digit.get_ui()));
    gamma -= mpq_class(digit);
  }
  return out;
}

}  // namespace

TEST_CASE("comparability of vertices") {
  CHECK(is_comparable(V2("01"), V2("0")));
  CHECK_FALSE(is_comparable(V2("01"), V2("00")));
  CHECK(is_comparable(V2("0"), V2("0")));
  CHECK_THROWS_AS(is_comparable(V2("0"), Vertex::parse("0", 3)), ArityMismatch);
}

TEST_CASE("binary encoding of vertices") {
  CHECK(vertex_to_int(Vertex(2)) == 0);
  CHECK(vertex_to_int(V2("10")) == 1);
  CHECK(vertex_to_int(V2("011")) == 6);
  CHECK_THROWS_AS(vertex_to_int(Vertex::parse("012", 3)), ArityMismatch);
}

TEST_CASE("graded lexicographic order and ranks") {
  CHECK(V2("1") < V2("00"));
  CHECK(V2("00") < V2("01"));
  for (std::uint64_t r = 0; r < 8; ++r)
    CHECK(Vertex::from_level_rank(2, 3, r).level_rank() == r);
}

TEST_CASE("measure of weighted antichains") {
  SUBCASE("single level-1 vertex") {
    WeightedAntichain w(Antichain(2, {V2("0")}));
    auto mi = mu(w, 5);
    CHECK(mi.lo == mpq_class(1, 2));
    CHECK(mi.exact());
  }
  SUBCASE("full level-2 transversal of T_3") {
    std::vector<Vertex> vs;
    for (std::uint64_t r = 0; r < 9; ++r) vs.push_back(Vertex::from_level_rank(3, 2, r));
    WeightedAntichain w{Antichain(3, std::move(vs))};
    auto mi = mu(w, 2);
    CHECK(mi.lo == 1);
    CHECK(mi.hi == 1);
  }
  SUBCASE("staircase schema at depth 20") {
    WeightedAntichain w(staircase_schema());
    auto mi = mu(w, 20);
    mpz_class p20 = mpz_class(1) << 20;
    CHECK(mi.lo == mpq_class(p20 - 1) / mpq_class(p20));
    CHECK(mi.hi == 1);
  }
  SUBCASE("weights scale terms") {
    Antichain a(2, {V2("0")});
    std::map<Vertex, mpq_class> wt{{V2("0"), mpq_class(1, 2)}};
    WeightedAntichain w(a, wt);
    auto mi = mu(w, 3);
    CHECK(mi.lo == mpq_class(1, 4));
    CHECK(mi.exact());
  }
}

TEST_CASE("mu monotonicity and additivity") {
  Antichain a(2, {V2("00")});
  Antichain b(2, {V2("00"), V2("01")});
  CHECK(mu(WeightedAntichain(b), 4).lo > mu(WeightedAntichain(a), 4).lo);

  Antichain u(2, {V2("0")});
  Antichain v(2, {V2("10")});
  Antichain both(2, {V2("0"), V2("10")});
  CHECK(mu(WeightedAntichain(both), 4).lo ==
        mu(WeightedAntichain(u), 4).lo + mu(WeightedAntichain(v), 4).lo);
}

TEST_CASE("subdivision invariance") {
  // replacing v by its children (inheriting the weight) keeps mu fixed
  Antichain before(2, {V2("0")});
  Antichain after(2, {V2("00"), V2("01")});
  std::map<Vertex, mpq_class> wt_before{{V2("0"), mpq_class(1, 3)}};
  std::map<Vertex, mpq_class> wt_after{{V2("00"), mpq_class(1, 3)}, {V2("01"), mpq_class(1, 3)}};
  CHECK(mu(WeightedAntichain(before, wt_before), 4).lo ==
        mu(WeightedAntichain(after, wt_after), 4).lo);
}

TEST_CASE("greedy antichain for a target measure") {
  SUBCASE("gamma = 1 is the root singleton") {
    auto sch = antichain_for_target(1, 2);
    auto a = sch.prefix_below(0);
    REQUIRE(a.size() == 1);
    CHECK(a.vertices()[0].is_root());
    auto mi = mu(WeightedAntichain(sch), 3);
    CHECK(mi.lo == 1);
    CHECK(mi.hi == 1);
  }
  SUBCASE("finite dyadic expansion 5/8") {
    auto sch = antichain_for_target(mpq_class(5, 8), 2);
    auto a = sch.prefix_below(20);
    REQUIRE(a.size() == 2);
    CHECK(a.vertices()[0] == V2("0"));
    CHECK(a.vertices()[1] == V2("100"));
    auto mi = mu(WeightedAntichain(sch), 20);
    CHECK(mi.lo == mpq_class(5, 8));
    CHECK(mi.exact());
  }
  SUBCASE("1/3 against the independent digit oracle") {
    mpq_class third(1, 3);
    auto sch = antichain_for_target(third, 2);
    auto mi = mu(WeightedAntichain(sch), 20);
    // oracle: partial sums of the binary expansion
    auto digits = binary_digits(third, 20);
    mpq_class partial(0);
    mpq_class scale(1, 2);
    for (unsigned d : digits) {
      if (d) partial += scale;
      scale /= 2;
    }
    CHECK(mi.lo == partial);
    CHECK(mi.lo <= third);
    CHECK(third <= mi.hi);
    mpz_class p20 = mpz_class(1) << 20;
    CHECK(mi.hi - mi.lo <= mpq_class(1) / mpq_class(p20));
  }
  SUBCASE("interval always contains gamma; width shrinks by 1/m per level") {
    mpq_class g(7, 11);
    auto sch = antichain_for_target(g, 3);
    mpq_class prev_width(-1);
    for (std::size_t depth = 2; depth <= 8; ++depth) {
      auto mi = mu(WeightedAntichain(sch), depth);
      CHECK(mi.lo <= g);
      CHECK(g <= mi.hi);
      mpq_class width = mi.hi - mi.lo;
      if (prev_width >= 0) CHECK(width * 3 <= prev_width + mpq_class(1, 1000000));
      prev_width = width;
    }
  }
}

TEST_CASE("transversal detection") {
  SUBCASE("full level-1 set") {
    CHECK(is_transversal(Antichain(2, {V2("0"), V2("1")}), 1));
  }
  SUBCASE("uncovered branch") { CHECK_FALSE(is_transversal(Antichain(2, {V2("0")}), 2)); }
  SUBCASE("mixed levels, with a brute-force oracle") {
    Antichain y(2, {V2("0"), V2("10"), V2("11")});
    // oracle: every level-2 vertex has exactly one ancestor-or-self in Y
    for (std::uint64_t rank = 0; rank < 4; ++rank) {
      Vertex v = Vertex::from_level_rank(2, 2, rank);
      int covers = 0;
      for (const auto& u : y.vertices())
        if (u.is_prefix_of(v)) ++covers;
      CHECK(covers == 1);
    }
    CHECK(is_transversal(y, 2));
    CHECK_THROWS(is_transversal(y, 1));
  }
  SUBCASE("full level-k sets for k <= 6, m in {2,3}") {
    for (unsigned m : {2u, 3u})
      for (std::size_t k = 1; k <= 6; ++k) {
        std::vector<Vertex> vs;
        for (std::uint64_t r = 0; r < pow_u64(m, k); ++r)
          vs.push_back(Vertex::from_level_rank(m, k, r));
        CHECK(is_transversal(Antichain(m, std::move(vs)), k));
      }
  }
}

TEST_CASE("antichain JSON round trip") {
  Antichain a(2, {V2("0"), V2("100")});
  CHECK(a.to_json() == "[\"0\",\"100\"]");
  CHECK(Antichain::from_json(a.to_json(), 2).vertices() == a.vertices());
}

TEST_CASE("antichain construction rejects comparable members") {
  CHECK_THROWS(Antichain(2, {V2("0"), V2("01")}));
}

TEST_CASE("schema validation") {
  // depth floor must not overstate levels
  auto bad_rule = [](std::size_t) -> std::optional<Vertex> { return Vertex::parse("0", 2); };
  auto bad_floor = [](std::size_t k) -> std::size_t { return k + 5; };
  CHECK_THROWS(AntichainSchema(2, bad_rule, bad_floor));
}
