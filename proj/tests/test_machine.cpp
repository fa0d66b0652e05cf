#include <doctest.h>

#include <functional>

#include "arbor/machine.hpp"
#include "arbor/sexpr.hpp"
#include "arbor/zoo.hpp"

using namespace arbor;

namespace {

Vertex V2(const std::string& s) { return Vertex::parse(s, 2); }

struct Rng {
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  std::uint64_t operator()(std::uint64_t bound) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return (state >> 33) % bound;
  }
};

}  // namespace

TEST_CASE("labels of the grigorchuk generators") {
  GroupSpec g = grigorchuk();
  Expr a = g.gens[0];
  CHECK(root_label(a) == Perm::transposition(2, 0, 1));
  CHECK(root_label(product(a, a)).is_identity());
  // grafted sections have trivial labels away from the graft
  Expr gr = graft(g.gens[1], V2("01"));
  CHECK(label_at(gr, V2("1")).is_identity());
  CHECK(label_at(gr, V2("00")).is_identity());
  CHECK(label_at(gr, V2("01")) == root_label(g.gens[1]));
}

TEST_CASE("adding machine action") {
  Expr a = adding_machine(2);
  // paper letters "11" -> "22"; 0-indexed: "00" -> "11"
  CHECK(act(a, V2("00")) == V2("11"));
  CHECK(act(identity(2), V2("0101")) == V2("0101"));
  for (std::size_t n = 1; n <= 12; ++n) {
    Perm p = level_perm(a, n);
    CHECK(p.order() == mpz_class(1) << n);  // a single 2^n-cycle
    CHECK(p.cycles().size() == 1);
  }
  Expr a3 = adding_machine(3);
  for (std::size_t n = 1; n <= 8; ++n) CHECK(level_perm(a3, n).cycles().size() == 1);
}

TEST_CASE("sections") {
  GroupSpec g = grigorchuk();
  Expr a = g.gens[0], b = g.gens[1], c = g.gens[2];
  CHECK(section(b, V2("0")) == a);  // psi(b) = (a, c)
  CHECK(section(b, V2("1")) == c);
  Expr x = product(a, b);
  // (ab)|_{first letter} = a|_x b|_{(x)a}; with a rooted, it is b's far section
  CHECK(equal_up_to_level(section(x, V2("0")), c, 6));
  // section of a graft at its own vertex
  CHECK(section(graft(x, V2("01")), V2("01")) == x);
}

TEST_CASE("level permutations of structured expressions") {
  CHECK(level_perm(rooted(Perm::cycle(3)), 1) == Perm::cycle(3));
  GroupSpec g = grigorchuk();
  Expr gr = graft(g.gens[0], V2("01"));
  CHECK(level_perm(gr, 2).is_identity());
  CHECK_FALSE(level_perm(gr, 3).is_identity());
}

TEST_CASE("truncation") {
  Expr a = adding_machine(2);
  CHECK(equal_up_to_level(trunc(a, 1), rooted(Perm::transposition(2, 0, 1)), 4));
  CHECK(trunc(identity(2), 5) == identity(2));
  // truncations agree with the original up to their depth
  GroupSpec g = grigorchuk();
  Rng rng;
  std::vector<Expr> atoms = {g.gens[0], g.gens[1], g.gens[2], g.gens[3], a};
  for (int i = 0; i < 50; ++i) {
    Expr e = product(atoms[rng(atoms.size())], inverse(atoms[rng(atoms.size())]));
    std::size_t n = 1 + rng(5);
    CHECK(level_perm(trunc(e, n), n) == level_perm(e, n));
    // and the truncation is finitary below depth n
    CHECK(level_perm(graft(trunc(e, n), Vertex(2)), n) == level_perm(e, n));
  }
}

TEST_CASE("equality up to a level") {
  GroupSpec g = grigorchuk();
  Expr a = g.gens[0], b = g.gens[1];
  CHECK(equal_up_to_level(a, a, 6));
  CHECK(equal_up_to_level(product(a, inverse(a)), identity(2), 8));
  // same word, different parse: ababa vs (abab)a
  Expr w1 = product(product(product(product(a, b), a), b), a);
  Expr w2 = product(product(a, b), product(a, product(b, a)));
  CHECK(equal_up_to_level(w1, w2, 6));
}

TEST_CASE("section closure") {
  GroupSpec g = grigorchuk();
  auto closure = section_closure(g.gens, 64);
  CHECK(closure.size() == 5);  // a, b, c, d and the identity
  auto rt = section_closure({rooted(Perm::cycle(3))}, 8);
  CHECK(rt.size() == 2);
}

TEST_CASE("deletion of levels") {
  Expr a2 = adding_machine(2);
  CHECK(delete_levels_embed(identity(2), 2) == identity(4));
  Expr e = delete_levels_embed(a2, 2);
  CHECK(e.arity() == 4);
  // level-1 label of the embedding is the induced level-2 permutation
  CHECK(root_label(e) == level_perm(a2, 2));
  CHECK(level_perm(e, 1) == level_perm(a2, 2));

  // phi commutes with sections at non-deleted levels
  GroupSpec g = grigorchuk();
  Rng rng;
  std::vector<Expr> atoms = {g.gens[0], g.gens[1], g.gens[2], g.gens[3], a2};
  for (int i = 0; i < 100; ++i) {
    Expr x = product(atoms[rng(atoms.size())], atoms[rng(atoms.size())]);
    std::uint64_t letter = rng(4);
    Vertex u = Vertex::from_level_rank(2, 2, letter);
    Expr lhs = section_letter(delete_levels_embed(x, 2), static_cast<unsigned>(letter));
    Expr rhs = delete_levels_embed(section(x, u), 2);
    CHECK(level_perm(lhs, 4) == level_perm(rhs, 4));
  }
}

TEST_CASE("deletion-of-levels pullback") {
  Expr a2 = adding_machine(2);
  Expr big = delete_levels_embed(a2, 2);
  Expr back = delete_levels_pullback(big, 2, 2);
  CHECK(equal_up_to_level(back, a2, 8));
  // pullback rejects labels that break the block structure
  Expr bad = rooted(Perm::from_cycles(4, {{0, 2}}));
  CHECK_THROWS_AS(root_label(delete_levels_pullback(bad, 2, 2)), NotInWreathImage);
  // closure of a pullback stays within (m^n-1)/(m-1) states per generator
  auto closure = section_closure({back}, 16);
  CHECK(closure.size() <= 3 + 1);  // (2^2-1)/(2-1) * 1 generator, plus identity
}

TEST_CASE("infinite graft products expand level by level") {
  GroupSpec g = grigorchuk();
  Expr b = g.gens[1];
  auto factor = [b](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
    std::vector<unsigned> w(k + 1, 1);
    w.back() = 0;
    return std::make_pair(b, Vertex(2, std::move(w)));
  };
  auto floor = [](std::size_t k) { return k + 1; };
  Expr ig = inf_graft(2, std::make_shared<FnGraftSchema>(factor, floor));
  // agrees with the finite product of the factors visible at each level
  for (std::size_t n = 2; n <= 7; ++n) {
    std::vector<Expr> parts;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      auto f = factor(k);
      parts.push_back(graft(f->first, f->second));
    }
    CHECK(level_perm(ig, n) == level_perm(product(parts, 2), n));
  }
  // sections through the infinite product stay consistent
  Expr s = section(ig, V2("1"));
  CHECK(level_perm(s, 5) == level_perm(section_letter(ig, 1), 5));
}

TEST_CASE("memoized and uncached evaluation agree") {
  GroupSpec g = grigorchuk();
  Rng rng;
  std::vector<Expr> atoms = {g.gens[0], g.gens[1], g.gens[2], g.gens[3]};
  for (int i = 0; i < 30; ++i) {
    Expr e = product(product(atoms[rng(4)], atoms[rng(4)]), inverse(atoms[rng(4)]));
    for (std::uint64_t r = 0; r < 8; ++r) {
      Vertex v = Vertex::from_level_rank(2, 3, r);
      CHECK(label_at(e, v) == label_at_uncached(e, v));
    }
  }
}

TEST_CASE("machine json round trip") {
  GroupSpec g = grigorchuk();
  std::string j = g.machine->to_json();
  auto back = MachineDef::from_json(j);
  CHECK(back->to_json() == j);
  CHECK(back->arity() == 2);
  CHECK(back->state_index("d") == 3);
  // spec surface: {"m": 2, "states": {"a": {"perm": [1,0], "children": ["a", null]}}}
  auto odo = MachineDef::from_json(
      R"({"m": 2, "states": {"a": {"perm": [1, 0], "children": ["a", null]}}})", "odo");
  CHECK(equal_up_to_level(gen(odo, "a"), adding_machine(2), 8));
}

TEST_CASE("s-expressions") {
  GroupSpec g = grigorchuk();
  MachineRegistry reg{{"grig", g.machine}};
  Expr e = parse_sexpr("(graft (gen grig b) \"01\")", reg);
  CHECK(e == graft(g.gens[1], V2("01")));
  CHECK(parse_sexpr(to_sexpr(e, reg), reg) == e);
  Expr w = parse_sexpr("(* (gen grig a) (inv (gen grig b)) (rooted 1 0))", reg);
  CHECK(w == product(product(g.gens[0], inverse(g.gens[1])), rooted(Perm::transposition(2, 0, 1))));
  CHECK_THROWS(parse_sexpr("(gen nosuch a)", reg));
}
