#include "arbor/zoo.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "arbor/permquot.hpp"
#include "arbor/sexpr.hpp"

namespace arbor {

namespace {

MachinePtr make_machine(std::string name, unsigned m, std::vector<MachineDef::State> states) {
  return std::make_shared<const MachineDef>(std::move(name), m, std::move(states));
}

std::vector<int> ids(unsigned m) { return std::vector<int>(m, -1); }

GroupSpec machine_group(std::string name, MachinePtr mach, std::vector<std::string> gen_names,
                        GroupMeta meta) {
  GroupSpec g;
  g.name = std::move(name);
  g.m = mach->arity();
  g.machine = mach;
  g.meta = meta;
  for (auto& s : gen_names) {
    g.gens.push_back(gen(mach, s));
    g.gen_names.push_back(std::move(s));
  }
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Explicit machines

GroupSpec grigorchuk() {
  std::vector<MachineDef::State> st;
  st.push_back({"a", Perm::transposition(2, 0, 1), {-1, -1}});
  st.push_back({"b", Perm::identity(2), {0, 2}});   // (a, c)
  st.push_back({"c", Perm::identity(2), {0, 3}});   // (a, d)
  st.push_back({"d", Perm::identity(2), {-1, 1}});  // (1, b)
  auto mach = make_machine("grig", 2, std::move(st));
  GroupMeta meta;
  meta.self_similar = true;
  meta.level_transitive = true;
  meta.branch_over = "K = <x, (x,1), (1,x)>, x = abab";
  return machine_group("grigorchuk", mach, {"a", "b", "c", "d"}, meta);
}

Expr grigorchuk_x(const GroupSpec& g) {
  Expr a = g.gens[0], b = g.gens[1];
  return product(product(product(a, b), a), b);
}

std::vector<Expr> grigorchuk_k_gens(const GroupSpec& g) {
  Expr x = grigorchuk_x(g);
  Vertex root(2);
  return {x, graft(x, root.child(0)), graft(x, root.child(1))};
}

GroupSpec basilica() {
  std::vector<MachineDef::State> st;
  st.push_back({"a", Perm::identity(2), {-1, 1}});           // (1, b)
  st.push_back({"b", Perm::transposition(2, 0, 1), {-1, 0}});  // (1, a) sigma
  auto mach = make_machine("basilica", 2, std::move(st));
  GroupMeta meta;
  meta.self_similar = true;
  meta.level_transitive = true;
  meta.branch_over = "weakly regular branch over B'";
  return machine_group("basilica", mach, {"a", "b"}, meta);
}

Expr adding_machine_for(const Perm& h) {
  unsigned m = static_cast<unsigned>(h.degree());
  std::vector<MachineDef::State> st;
  std::vector<int> ch = ids(m);
  ch[0] = 0;  // section a at the first letter
  st.push_back({"a", h, std::move(ch)});
  auto mach = make_machine("odometer_" + h.str(), m, std::move(st));
  return gen(mach, "a");
}

Expr adding_machine(unsigned m) { return adding_machine_for(Perm::cycle(m)); }

Expr adding_truncation(const Perm& h, std::size_t n) { return trunc(adding_machine_for(h), n); }

GroupSpec sunic_generalized(const SunicParams& p) {
  if (p.x.empty()) throw std::invalid_argument("sunic: need at least one generating permutation");
  if (p.r < 1) throw std::invalid_argument("sunic: spine length must be >= 1");
  unsigned m = static_cast<unsigned>(p.x[0].degree());
  unsigned l = static_cast<unsigned>(p.x.size());
  for (const auto& xi : p.x)
    if (xi.degree() != m) throw ArityMismatch("sunic: mixed permutation degrees");
  if (l > m - 1) throw std::invalid_argument("sunic: need l <= m-1 so spines do not collide");
  // <x_1..x_l> must be transitive on the alphabet
  {
    std::vector<bool> seen(m, false);
    std::vector<unsigned> orb{0};
    seen[0] = true;
    for (std::size_t i = 0; i < orb.size(); ++i)
      for (const auto& xi : p.x) {
        unsigned y = xi(orb[i]);
        if (!seen[y]) {
          seen[y] = true;
          orb.push_back(y);
        }
      }
    if (orb.size() != m) throw std::invalid_argument("sunic: <x_i> is not transitive on the alphabet");
  }

  std::vector<MachineDef::State> st;
  std::vector<std::string> names;
  for (unsigned i = 0; i < l; ++i) {
    st.push_back({"x" + std::to_string(i + 1), p.x[i], ids(m)});
    names.push_back(st.back().name);
  }
  // spinal states b_{i,j}; index of b_{i,j} is l + (i-1)r + (j-1)
  auto bidx = [&](unsigned i, unsigned j) { return static_cast<int>(l + (i - 1) * p.r + (j - 1)); };
  for (unsigned i = 1; i <= l; ++i)
    for (unsigned j = 1; j <= p.r; ++j) {
      std::vector<int> ch = ids(m);
      if (j < p.r) {
        ch[m - 1] = bidx(i, j + 1);
      } else {
        ch[i - 1] = static_cast<int>(i - 1);  // x_i at the paper's letter i
        ch[m - 1] = bidx(i, 1);
      }
      st.push_back({"b" + std::to_string(i) + "_" + std::to_string(j), Perm::identity(m), std::move(ch)});
      names.push_back(st.back().name);
    }
  auto mach = make_machine("sunic_m" + std::to_string(m) + "_r" + std::to_string(p.r), m, std::move(st));
  GroupMeta meta;
  meta.self_similar = true;
  meta.level_transitive = true;
  meta.branch_over = "G'";
  GroupSpec g = machine_group("sunic", mach, std::move(names), meta);
  nlohmann::ordered_json params;
  params["m"] = m;
  params["r"] = p.r;
  auto& xs = params["x"] = nlohmann::ordered_json::array();
  for (const auto& xi : p.x) xs.push_back(xi.images());
  g.params_json = params.dump();
  return g;
}

// ---------------------------------------------------------------------------
// delta

DeltaResult delta(const std::vector<Expr>& gs, const std::vector<Perm>& h_gens) {
  if (gs.empty()) throw std::invalid_argument("delta of an empty sequence");
  unsigned m = gs[0].arity();
  unsigned r_index = 0;
  bool found = false;
  for (unsigned j = 0; j < h_gens.size(); ++j)
    if (h_gens[j](0) != 0) {
      r_index = j;
      found = true;
      break;
    }
  if (!found) throw NoMovingGenerator("no generator of H moves the first letter");
  const Perm& hr = h_gens[r_index];
  unsigned long t = 1;
  for (unsigned x = hr(0); x != 0; x = hr(x)) ++t;

  std::size_t n = gs.size();
  Expr a = adding_truncation(hr, n);
  Vertex ones(m, std::vector<unsigned>(n, 0));
  std::vector<Vertex> verts;
  std::vector<Expr> parts;
  long long e = 1;  // t^0
  for (std::size_t i = 0; i < n; ++i) {
    Vertex v = act(power(a, e), ones);
    for (const auto& u : verts)
      if (u == v) throw std::logic_error("delta: grafting vertex collision");
    verts.push_back(v);
    parts.push_back(graft(gs[i], v));
    if (i + 1 < n) {
      if (e > static_cast<long long>(1) << 56) throw std::overflow_error("delta: orbit power overflow");
      e *= static_cast<long long>(t);
    }
  }
  return DeltaResult{product(parts, m), std::move(verts), r_index, t};
}

// ---------------------------------------------------------------------------
// infinite-order witness

namespace {

// First vertex (graded lex) moved by e within `probe` levels, or nullopt.
std::optional<Vertex> first_moved_vertex(Expr e, std::size_t probe) {
  unsigned m = e.arity();
  for (std::size_t lev = 1; lev <= probe; ++lev) {
    Perm p = level_perm(e, lev);
    std::uint32_t x = p.smallest_moved();
    if (x < p.degree()) return Vertex::from_level_rank(m, lev, x);
  }
  return std::nullopt;
}

}  // namespace

Witness infinite_order_witness(const GroupSpec& K, std::size_t stages, std::size_t probe_depth) {
  if (K.gens.empty()) throw TrivialInput("empty generating set");
  unsigned m = K.m;
  // seed: the first generator acting non-trivially, at its minimal level
  Expr h = identity(m);
  std::size_t seed_level = 0;
  for (std::size_t lev = 1; lev <= probe_depth + 4 && seed_level == 0; ++lev)
    for (Expr g : K.gens)
      if (!level_perm(g, lev).is_identity()) {
        h = g;
        seed_level = lev;
        break;
      }
  if (seed_level == 0) throw TrivialInput("no generator acts within the probed levels");

  Witness w;
  w.seed = h;
  w.g = h;
  Vertex path(m);
  unsigned long long T = 1;
  std::size_t probe = std::max(probe_depth, seed_level);
  for (std::size_t i = 0; i < stages; ++i) {
    Expr s = section(power(w.g, static_cast<long long>(T)), path);
    bool multiplied = false;
    auto moved = first_moved_vertex(s, probe);
    if (!moved) {
      // the section died: multiply by the grafted seed, which revives it
      w.g = product(w.g, graft(h, path));
      s = product(s, h);
      multiplied = true;
      moved = first_moved_vertex(s, probe);
      if (!moved) throw std::logic_error("witness section still trivial after grafting the seed");
    }
    Vertex v = *moved;
    unsigned long t = 1;
    for (Vertex u = act(s, v); u != v; u = act(s, u)) {
      ++t;
      if (t > (1ul << 20)) throw std::logic_error("witness orbit failed to close");
    }
    if (t < 2) throw std::logic_error("witness stage orbit is trivial");
    path = path.concat(v);
    if (T > (1ull << 44)) throw std::overflow_error("witness orbit product overflow");
    T *= t;
    w.stages.push_back(WitnessStage{path, t, multiplied});
  }
  return w;
}

// ---------------------------------------------------------------------------
// L_X

namespace {

struct LxData {
  std::vector<Expr> kgens;
  Expr g;
  std::vector<Vertex> paths;          // p_n, 1-based index n -> paths[n-1]
  std::vector<unsigned long> t;       // t_n
  AntichainSchema X;
  std::size_t w_level;
  bool truncate_factors = false;

  // witness expression grafted in the n-th factor (1-based)
  Expr g_for(std::size_t n) const { return truncate_factors ? trunc(g, n) : g; }

  // t_1 ... t_{n-1} (n 1-based)
  long long t_prefix(std::size_t n) const {
    long long e = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (e > (1ll << 50)) throw std::overflow_error("orbit power overflow");
      e *= static_cast<long long>(t[i]);
    }
    return e;
  }
  Vertex x_at(std::size_t k) const {
    auto v = X.vertex(k);
    if (!v) throw DepthBudgetExceeded("antichain schema exhausted");
    return *v;
  }
  // v_{n,j} = (p_n) g^{t_1..t_{n-1} (j-1)}, n and j 1-based
  Vertex orbit_vertex(std::size_t n, std::size_t j) const {
    if (n > paths.size()) throw DepthBudgetExceeded("witness orbit data exhausted at this depth");
    if (j > t[n - 1]) throw OrbitTooShort("orbit shorter than the generator rank");
    long long e = t_prefix(n) * static_cast<long long>(j - 1);
    return act(power(g, e), paths[n - 1]);
  }
};

}  // namespace

GroupSpec l_x_generators(const LXParams& p) {
  unsigned m = p.K.m;
  std::size_t r = p.K.gens.size();
  auto data = std::make_shared<LxData>(
      LxData{p.K.gens, p.witness.g, {}, {}, p.X, p.w_level, p.truncated_adding_mode});
  for (const auto& st : p.witness.stages) {
    data->paths.push_back(st.path);
    data->t.push_back(st.orbit_len);
  }
  // the construction needs t_i >= r at every used stage
  for (unsigned long ti : data->t)
    if (ti < r) throw OrbitTooShort("witness orbit lengths must be at least d(K)");

  GroupSpec out;
  out.name = "lx";
  out.m = m;
  out.meta.self_similar = false;
  out.meta.level_transitive = false;

  std::vector<Vertex> W;
  std::uint64_t wn = pow_u64(m, p.w_level);
  for (std::uint64_t i = 0; i < wn; ++i) W.push_back(Vertex::from_level_rank(m, p.w_level, i));

  auto xw_floor = [data](std::size_t k) { return data->X.depth_floor(k) + data->w_level; };

  for (const auto& w : W) {
    // a_w = prod_n g * (x_n w)
    auto fac_a = [data, w](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
      return std::make_pair(data->g_for(k + 1), data->x_at(k).concat(w));
    };
    Expr a_w = inf_graft(m, std::make_shared<FnGraftSchema>(fac_a, xw_floor));
    out.gens.push_back(a_w);
    out.gen_names.push_back("a@" + w.str());

    auto deep_floor = [data, w](std::size_t k) {
      return data->X.depth_floor(k) + data->w_level + (k + 1);
    };
    for (std::size_t j = 1; j <= r; ++j) {
      // b_{j,w}: k_j conjugated by the inverse section of a_w^{t_1..t_{n-1}(r-j)}
      auto fac_b = [data, w, j, r, a_w](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
        std::size_t n = k + 1;
        Vertex at = data->x_at(k).concat(w).concat(data->orbit_vertex(n, j));
        long long e = data->t_prefix(n) * static_cast<long long>(r - j);
        Expr sec = section(power(a_w, e), at);
        Expr kj = data->kgens[j - 1];
        return std::make_pair(conjugate(kj, inverse(sec)), at);
      };
      out.gens.push_back(inf_graft(m, std::make_shared<FnGraftSchema>(fac_b, deep_floor)));
      out.gen_names.push_back("b" + std::to_string(j) + "@" + w.str());
    }
    for (std::size_t j = 1; j <= r; ++j) {
      // c_{j,w} = prod_n k_j * (x_n w v_{n,r})
      auto fac_c = [data, w, j, r](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
        std::size_t n = k + 1;
        Vertex at = data->x_at(k).concat(w).concat(data->orbit_vertex(n, r));
        return std::make_pair(data->kgens[j - 1], at);
      };
      out.gens.push_back(inf_graft(m, std::make_shared<FnGraftSchema>(fac_c, deep_floor)));
      out.gen_names.push_back("c" + std::to_string(j) + "@" + w.str());
    }
  }
  for (std::size_t j = 1; j <= r; ++j) {
    auto fac = [data, j](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
      return std::make_pair(data->kgens[j - 1], data->x_at(k));
    };
    auto floor = [data](std::size_t k) { return data->X.depth_floor(k); };
    out.gens.push_back(inf_graft(m, std::make_shared<FnGraftSchema>(fac, floor)));
    out.gen_names.push_back("a" + std::to_string(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Siegenthaler's construction

namespace {

// Flattened factor stream of the delta-chain b_1. Layer r contributes the
// non-recursive delta arguments at its orbit vertices; the final orbit vertex
// extends the prefix for layer r+1.
struct SiegState {
  SiegenthalerParams params;
  unsigned m;
  unsigned l;
  unsigned r_index;
  unsigned long t;
  std::vector<std::pair<Expr, Vertex>> factors;
  Vertex prefix;
  unsigned next_layer = 1;
  std::mutex mtx;

  explicit SiegState(SiegenthalerParams p, unsigned arity)
      : params(std::move(p)), m(arity), l(static_cast<unsigned>(params.h_gens.size())), prefix(arity) {
    bool found = false;
    for (unsigned j = 0; j < l; ++j)
      if (params.h_gens[j](0) != 0) {
        r_index = j;
        found = true;
        break;
      }
    if (!found) throw NoMovingGenerator("no generator of H moves the first letter");
    t = 1;
    const Perm& hr = params.h_gens[r_index];
    for (unsigned x = hr(0); x != 0; x = hr(x)) ++t;
  }

  void build_layer() {
    if (next_layer > params.depth_budget)
      throw DepthBudgetExceeded("siegenthaler delta chain exceeded its depth budget");
    unsigned r = next_layer;
    GroupSpec Gr = params.family(r);
    GroupSpec Gr1 = params.family(r + 1);
    std::size_t q = Gr.gens.size() + l + 1;
    Expr a = adding_truncation(params.h_gens[r_index], q);
    Vertex ones(m, std::vector<unsigned>(q, 0));
    // delta arguments: gens of G_r, then the layer-(r+1) truncated odometers,
    // then the recursion slot.
    std::vector<Expr> args = Gr.gens;
    std::size_t q1 = Gr1.gens.size() + l + 1;
    for (unsigned j = 0; j < l; ++j) args.push_back(adding_truncation(params.h_gens[j], q1));
    long long e = 1;
    for (std::size_t i = 0; i < q; ++i) {
      Vertex v = prefix.concat(act(power(a, e), ones));
      if (i + 1 < q) {
        factors.emplace_back(args[i], v);
        if (e > (1ll << 50)) throw std::overflow_error("delta orbit power overflow");
        e *= static_cast<long long>(t);
      } else {
        prefix = v;  // b_{r+1} lives here
      }
    }
    ++next_layer;
  }

  std::pair<Expr, Vertex> factor(std::size_t k) {
    std::lock_guard lk(mtx);
    while (factors.size() <= k) build_layer();
    return factors[k];
  }
  std::size_t floor(std::size_t k) {
    std::lock_guard lk(mtx);
    while (factors.size() <= k) build_layer();
    return factors[k].second.level();
  }
};

struct SiegSchema : GraftSchema {
  std::shared_ptr<SiegState> st;
  explicit SiegSchema(std::shared_ptr<SiegState> s) : st(std::move(s)) {}
  std::optional<std::pair<Expr, Vertex>> factor(std::size_t k) const override { return st->factor(k); }
  std::size_t level_floor(std::size_t k) const override { return st->floor(k); }
  std::size_t budget() const override { return 1u << 20; }
};

}  // namespace

GroupSpec siegenthaler_K(const SiegenthalerParams& p) {
  if (p.h_gens.empty()) throw std::invalid_argument("siegenthaler: empty H generating set");
  unsigned m = static_cast<unsigned>(p.h_gens[0].degree());
  auto st = std::make_shared<SiegState>(p, m);
  GroupSpec g1 = p.family(1);
  std::size_t q1 = g1.gens.size() + p.h_gens.size() + 1;

  GroupSpec out;
  out.name = "siegenthaler";
  out.m = m;
  for (unsigned j = 0; j < p.h_gens.size(); ++j) {
    out.gens.push_back(adding_truncation(p.h_gens[j], q1));
    out.gen_names.push_back("a" + std::to_string(q1) + "_" + std::to_string(j + 1));
  }
  out.gens.push_back(inf_graft(m, std::make_shared<SiegSchema>(st)));
  out.gen_names.push_back("b1");
  return out;
}

// ---------------------------------------------------------------------------
// W_p two-generated family

GroupSpec wp_two_generated(unsigned p, const AntichainSchema& X) {
  Perm sigma = Perm::cycle(p);
  SiegenthalerParams sp;
  sp.h_gens = {sigma};
  sp.family = [sigma](unsigned r) { return sunic_generalized(SunicParams{{sigma}, r}); };
  GroupSpec seed = siegenthaler_K(sp);
  Expr k1 = seed.gens[0], k2 = seed.gens[1];

  auto Xp = std::make_shared<AntichainSchema>(X);
  auto x_at = [Xp](std::size_t k) {
    auto v = Xp->vertex(k);
    if (!v) throw DepthBudgetExceeded("antichain schema exhausted");
    return *v;
  };
  auto xfloor = [Xp](std::size_t k) { return Xp->depth_floor(k); };
  unsigned m = p;

  // g = prod_n a_n * x_n
  auto fac_g = [x_at, sigma](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
    return std::make_pair(adding_truncation(sigma, k + 1), x_at(k));
  };
  Expr g = inf_graft(m, std::make_shared<FnGraftSchema>(fac_g, xfloor));

  auto deep_floor = [Xp](std::size_t k) { return Xp->depth_floor(k) + (k + 1); };
  // h = (prod_n k1 * x_n 0^n)(prod_n k2 * x_n ((0^n) a_n^{p^{n-1}}))
  auto fac_h1 = [x_at, k1, m](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
    Vertex ones(m, std::vector<unsigned>(k + 1, 0));
    return std::make_pair(k1, x_at(k).concat(ones));
  };
  auto fac_h2 = [x_at, k2, m, sigma, p](std::size_t k) -> std::optional<std::pair<Expr, Vertex>> {
    std::size_t n = k + 1;
    Vertex ones(m, std::vector<unsigned>(n, 0));
    long long e = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (e > (1ll << 50)) throw std::overflow_error("odometer power overflow");
      e *= p;
    }
    Vertex at = x_at(k).concat(act(power(adding_truncation(sigma, n), e), ones));
    return std::make_pair(k2, at);
  };
  Expr h = product(inf_graft(m, std::make_shared<FnGraftSchema>(fac_h1, deep_floor)),
                   inf_graft(m, std::make_shared<FnGraftSchema>(fac_h2, deep_floor)));

  GroupSpec out;
  out.name = "wp2";
  out.m = m;
  out.gens = {g, h};
  out.gen_names = {"g", "h"};
  nlohmann::ordered_json params;
  params["p"] = p;
  out.params_json = params.dump();
  return out;
}

Witness adding_machine_witness(unsigned m, std::size_t stages) {
  Witness w;
  w.seed = adding_machine(m);
  w.g = w.seed;
  Vertex path(m);
  for (std::size_t i = 0; i < stages; ++i) {
    path = path.child(0);
    w.stages.push_back(WitnessStage{path, m, false});
  }
  return w;
}

AntichainSchema staircase_schema() {
  auto rule = [](std::size_t k) -> std::optional<Vertex> {
    std::vector<unsigned> w(k + 1, 1);
    w.back() = 0;
    return Vertex(2, std::move(w));
  };
  auto floor = [](std::size_t k) { return k + 1; };
  // members deeper than `depth` all live below 1^depth
  auto tail = [](std::size_t depth) {
    mpz_class den = mpz_class(1) << depth;
    return mpq_class(1) / mpq_class(den);
  };
  return AntichainSchema(2, rule, floor, tail);
}

AntichainSchema finite_schema(const Antichain& a) {
  auto verts = std::make_shared<std::vector<Vertex>>(a.vertices());
  unsigned m = a.arity();
  auto rule = [verts](std::size_t k) -> std::optional<Vertex> {
    if (k >= verts->size()) return std::nullopt;
    return (*verts)[k];
  };
  // vertices are sorted graded-lexicographically; levels are non-decreasing,
  // so level(v_k) >= level(v_0) and a valid diverging floor is level-anchored
  auto floor = [verts](std::size_t k) -> std::size_t {
    if (k < verts->size()) return (*verts)[k].level();
    return (verts->empty() ? 1 : verts->back().level()) + (k - verts->size()) + 1;
  };
  auto tail = [verts, m](std::size_t depth) {
    mpq_class extra(0);
    for (const auto& v : *verts)
      if (v.level() > depth) {
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), m, static_cast<unsigned long>(v.level()));
        extra += mpq_class(1) / mpq_class(den);
      }
    return extra;
  };
  return AntichainSchema(m, rule, floor, tail);
}

// ---------------------------------------------------------------------------
// verification markers

VerifiedTo verify_self_similar(const GroupSpec& g, std::size_t bound) {
  VerifiedTo v;
  try {
    section_closure(g.gens, bound);
    v.holds = true;
    v.level = 6;  // dedup depth of the closure
  } catch (const BoundExceeded&) {
    v.holds = false;
  }
  return v;
}

VerifiedTo verify_level_transitive(const GroupSpec& g, std::size_t level) {
  VerifiedTo v;
  v.level = level;
  v.holds = true;
  for (std::size_t n = 1; n <= level; ++n)
    if (!is_level_transitive(g.gens, n)) {
      v.holds = false;
      break;
    }
  return v;
}

VerifiedTo verify_strongly_fractal(const GroupSpec& g, std::size_t level) {
  VerifiedTo out;
  out.level = level;
  if (level < 2) throw std::invalid_argument("fractality marker needs level >= 2");
  unsigned m = g.m;
  // Schreier generators of St(1) as expressions
  std::map<Perm, Expr> transversal;
  std::vector<Perm> queue{Perm::identity(m)};
  transversal.emplace(queue[0], identity(m));
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (Expr x : g.gens) {
      Perm p = queue[i].then(root_label(x));
      if (!transversal.count(p)) {
        transversal.emplace(p, product(transversal.at(queue[i]), x));
        queue.push_back(p);
      }
    }
  std::vector<Expr> st1;
  for (const auto& [p, w] : transversal)
    for (Expr x : g.gens) {
      Perm p2 = p.then(root_label(x));
      Expr s = product(product(w, x), inverse(transversal.at(p2)));
      if (!root_label(s).is_identity()) throw std::logic_error("Schreier element moved level 1");
      st1.push_back(s);
    }
  mpz_class target = quotient(std::span<const Expr>(g.gens), level - 1).order();
  out.holds = true;
  for (unsigned letter = 0; letter < m && out.holds; ++letter) {
    std::vector<Expr> secs;
    for (Expr s : st1) secs.push_back(section_letter(s, letter));
    if (quotient(secs, level - 1).order() != target) out.holds = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON round trip and the name registry

std::string GroupSpec::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["m"] = m;
  if (machine)
    j["machine"] = nlohmann::ordered_json::parse(machine->to_json());
  else
    j["machine"] = nullptr;
  j["generators"] = gen_names;
  if (!params_json.empty())
    j["params"] = nlohmann::ordered_json::parse(params_json);
  else
    j["params"] = nullptr;
  j["metadata"] = {{"self_similar", meta.self_similar},
                   {"level_transitive", meta.level_transitive},
                   {"branch_over", meta.branch_over}};
  return j.dump(2);
}

GroupSpec GroupSpec::from_json(const std::string& json) {
  auto j = nlohmann::ordered_json::parse(json);
  GroupSpec g;
  g.name = j.at("name").get<std::string>();
  g.m = j.at("m").get<unsigned>();
  if (!j.at("machine").is_null()) {
    g.machine = MachineDef::from_json(j.at("machine").dump());
    for (const auto& n : j.at("generators")) {
      g.gen_names.push_back(n.get<std::string>());
      g.gens.push_back(gen(g.machine, g.gen_names.back()));
    }
  } else if (!j.at("params").is_null()) {
    GroupSpec built = construct_by_name(g.name, j.at("params").dump());
    g.gens = built.gens;
    g.gen_names = built.gen_names;
    g.machine = built.machine;
    g.params_json = built.params_json;
  } else {
    throw std::invalid_argument("group json needs a machine or constructor params");
  }
  if (j.contains("metadata")) {
    g.meta.self_similar = j["metadata"].value("self_similar", false);
    g.meta.level_transitive = j["metadata"].value("level_transitive", false);
    g.meta.branch_over = j["metadata"].value("branch_over", "");
  }
  if (!j.at("params").is_null()) g.params_json = j.at("params").dump();
  return g;
}

namespace {

std::vector<Perm> parse_h_spec(const nlohmann::ordered_json& j, unsigned m) {
  std::string name = j.is_string() ? j.get<std::string>() : "";
  if (name == "cycle" || name == "c2" || name == "c3" || name == "cp") return {Perm::cycle(m)};
  if (name == "sym3") {
    if (m != 3) throw std::invalid_argument("sym3 requires m = 3");
    return {Perm::cycle(3), Perm::transposition(3, 0, 1)};
  }
  if (j.is_array()) {
    std::vector<Perm> out;
    for (const auto& pj : j) out.push_back(Perm(pj.get<std::vector<std::uint32_t>>()));
    return out;
  }
  throw std::invalid_argument("unknown H specification");
}

AntichainSchema parse_x_spec(const nlohmann::ordered_json& j, unsigned m) {
  if (j.is_string() && j.get<std::string>() == "staircase") {
    if (m != 2) throw std::invalid_argument("staircase schema is binary");
    return staircase_schema();
  }
  if (j.is_object() && j.contains("gamma"))
    return antichain_for_target(parse_rational(j.at("gamma").get<std::string>()), m);
  if (j.is_array()) {
    std::vector<Vertex> vs;
    for (const auto& s : j) vs.push_back(Vertex::parse(s.get<std::string>(), m));
    return finite_schema(Antichain(m, std::move(vs)));
  }
  throw std::invalid_argument("unknown antichain specification");
}

}  // namespace

GroupSpec construct_by_name(const std::string& name, const std::string& params_json) {
  nlohmann::ordered_json p =
      params_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(params_json);
  if (name == "grigorchuk") return grigorchuk();
  if (name == "basilica") return basilica();
  if (name == "adding") {
    unsigned m = p.value("m", 2u);
    GroupSpec g;
    g.name = "adding";
    g.m = m;
    g.gens = {adding_machine(m)};
    g.gen_names = {"a"};
    g.machine = expr_machine(g.gens[0]);
    g.meta.self_similar = true;
    g.meta.level_transitive = true;
    nlohmann::ordered_json pj;
    pj["m"] = m;
    g.params_json = pj.dump();
    return g;
  }
  if (name == "sunic") {
    unsigned m = p.value("m", 2u);
    SunicParams sp;
    sp.r = p.value("r", 1u);
    sp.x = p.contains("h") ? parse_h_spec(p.at("h"), m) : std::vector<Perm>{Perm::cycle(m)};
    return sunic_generalized(sp);
  }
  if (name == "siegenthaler") {
    unsigned m = p.value("m", 2u);
    SiegenthalerParams sp;
    sp.h_gens = p.contains("h") ? parse_h_spec(p.at("h"), m) : std::vector<Perm>{Perm::cycle(m)};
    auto h = sp.h_gens;
    sp.family = [h](unsigned r) { return sunic_generalized(SunicParams{h, r}); };
    if (p.contains("depth_budget")) sp.depth_budget = p.at("depth_budget").get<std::size_t>();
    return siegenthaler_K(sp);
  }
  if (name == "wp2") {
    unsigned prime = p.value("p", 2u);
    AntichainSchema X = p.contains("X") ? parse_x_spec(p.at("X"), prime)
                                        : antichain_for_target(mpq_class(1, 2), prime);
    return wp_two_generated(prime, X);
  }
  if (name == "lx") {
    std::string kname = p.value("K", std::string("grigorchuk_k"));
    GroupSpec K;
    if (kname == "grigorchuk_k") {
      GroupSpec grig = grigorchuk();
      K.name = "grigorchuk_k";
      K.m = 2;
      K.gens = grigorchuk_k_gens(grig);
      K.gen_names = {"x", "x0", "x1"};
    } else if (kname == "w2") {
      K.name = "w2";
      K.m = 2;
      K.gens = {rooted(Perm::transposition(2, 0, 1))};
      K.gen_names = {"s"};
    } else {
      throw std::invalid_argument("unknown branching subgroup name: " + kname);
    }
    AntichainSchema X = p.contains("X") ? parse_x_spec(p.at("X"), K.m) : staircase_schema();
    LXParams lp{K, X, p.value("w_level", std::size_t(1)),
                infinite_order_witness(K, p.value("stages", std::size_t(10)))};
    return l_x_generators(lp);
  }
  throw std::invalid_argument("unknown group name: " + name);
}

}  // namespace arbor
