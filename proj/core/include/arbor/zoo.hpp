#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arbor/antichain.hpp"
#include "arbor/machine.hpp"

namespace arbor {

class NoMovingGenerator : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class OrbitTooShort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class TrivialInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GroupMeta {
  bool self_similar = false;
  bool level_transitive = false;
  std::string branch_over;  // empty = no claim
};

/// Named generator system; metadata claims are checkable flags, not trusted
/// facts (verify_* below produce level-verified markers).
struct GroupSpec {
  std::string name;
  unsigned m = 2;
  std::vector<std::string> gen_names;
  std::vector<Expr> gens;
  MachinePtr machine;  // null for graft-product systems
  GroupMeta meta;
  std::string params_json;  // construction parameters, for round-tripping

  std::string to_json() const;
  static GroupSpec from_json(const std::string& json);
};

// --- explicit groups -------------------------------------------------------

GroupSpec grigorchuk();
/// x = [a,b] = abab (an involution pair commutator; the branching seed).
Expr grigorchuk_x(const GroupSpec& g);
/// K = <x, (x,1), (1,x)>; the group is regular branch over K.
std::vector<Expr> grigorchuk_k_gens(const GroupSpec& g);

GroupSpec basilica();

/// psi(a) = (a, 1, ..., 1) h for a rooted permutation h.
Expr adding_machine_for(const Perm& h);
Expr adding_machine(unsigned m);  // h = the full m-cycle
/// Truncated version a_n (finitary of depth n).
Expr adding_truncation(const Perm& h, std::size_t n);

struct SunicParams {
  std::vector<Perm> x;  // x_1..x_l in Sym(m)
  unsigned r = 1;       // spine length
};
GroupSpec sunic_generalized(const SunicParams& p);

struct DeltaResult {
  Expr expr;
  std::vector<Vertex> vertices;  // grafting vertices, in factor order
  unsigned r_index;              // generator h_r used for the orbit
  unsigned long t_r;             // orbit length of letter 0 under h_r
};
/// delta(g_1,...,g_n) = prod_i g_{i+1} * ((0...0) a_{n,r}^{t_r^i}).
DeltaResult delta(const std::vector<Expr>& gs, const std::vector<Perm>& h_gens);

struct WitnessStage {
  Vertex path;             // cumulative path vertex v_1...v_i
  unsigned long orbit_len;  // t_i >= 2
  bool multiplied;          // epsilon_i = 1
};
struct Witness {
  Expr g;        // h * prod (h * p_i)^{eps_i}, truncated at the stage count
  Expr seed;     // h
  std::vector<WitnessStage> stages;
};
/// Constructive infinite-order element of a branching closed subgroup: the
/// adaptive orbit-extension loop, run for `stages` rounds. Section triviality
/// is tested to probe_depth below the current path vertex.
Witness infinite_order_witness(const GroupSpec& K, std::size_t stages, std::size_t probe_depth = 4);

struct LXParams {
  GroupSpec K;          // finitely generated branching subgroup, gens k_1..k_r
  AntichainSchema X;    // non-comparable {x_n}
  std::size_t w_level;  // W = all vertices at this level
  Witness witness;
  // W_H simplification: graft the n-truncated witness in the n-th factor so
  // that the conjugating sections of the b generators become trivial.
  bool truncated_adding_mode = false;
};
/// L_X = <a_w, b_{j,w}, c_{j,w}, a_j>; |W|(1+2r) + r generators, all grafted
/// along X (so they fix every vertex not below X).
GroupSpec l_x_generators(const LXParams& p);

/// Synthetic witness for iterated wreath products: the adding machine with
/// the leftmost path, stage orbit lengths all m.
Witness adding_machine_witness(unsigned m, std::size_t stages);

struct SiegenthalerParams {
  std::vector<Perm> h_gens;                        // h_1..h_l generating H
  std::function<GroupSpec(unsigned)> family;       // G_r
  std::size_t depth_budget = 64;                   // max unfolding layers
};
/// K_1 = <a_{d(G_1)+l+1, j}, b_1>: l truncated adding machines plus the
/// lazily unfolded delta-chain b_1; d(H)+1 generators.
GroupSpec siegenthaler_K(const SiegenthalerParams& p);

/// The 2-generated subgroup of W_p grafted along X with seed K = <k1, k2>.
GroupSpec wp_two_generated(unsigned p, const AntichainSchema& X);

/// x_n = 1^{n-1} 0 in T_2 (levels n, strictly increasing).
AntichainSchema staircase_schema();
AntichainSchema finite_schema(const Antichain& a);

// --- metadata verification (finite-level markers) ---------------------------

struct VerifiedTo {
  bool holds = false;
  std::size_t level = 0;
};
VerifiedTo verify_self_similar(const GroupSpec& g, std::size_t bound = 4096);
VerifiedTo verify_level_transitive(const GroupSpec& g, std::size_t level);
/// Section surjectivity of St(1) at every first-level vertex, in the level-d
/// quotient (strong fractality has no finite certificate; this is a marker).
VerifiedTo verify_strongly_fractal(const GroupSpec& g, std::size_t level);

/// Stable-name constructor registry used by the CLI.
GroupSpec construct_by_name(const std::string& name, const std::string& params_json);

}  // namespace arbor
