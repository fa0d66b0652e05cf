#include "arbor/machine.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include <json.hpp>

namespace arbor {

// ---------------------------------------------------------------------------
// MachineDef

MachineDef::MachineDef(std::string name, unsigned arity, std::vector<State> states)
    : name_(std::move(name)), m_(arity), states_(std::move(states)) {
  if (m_ < 2) throw std::invalid_argument("machine arity must be >= 2");
  for (const auto& s : states_) {
    if (s.label.degree() != m_) throw std::invalid_argument("state label degree mismatch");
    if (s.children.size() != m_) throw std::invalid_argument("state child count mismatch");
    for (int c : s.children)
      if (c != -1 && (c < 0 || static_cast<std::size_t>(c) >= states_.size()))
        throw std::invalid_argument("state child reference out of range");
  }
}

int MachineDef::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states_.size(); ++i)
    if (states_[i].name == state) return static_cast<int>(i);
  return -1;
}

MachinePtr MachineDef::from_json(const std::string& json, std::string name) {
  auto j = nlohmann::ordered_json::parse(json);
  unsigned m = j.at("m").get<unsigned>();
  std::vector<State> states;
  std::map<std::string, int, std::less<>> index;
  const auto& js = j.at("states");
  for (auto it = js.begin(); it != js.end(); ++it) {
    index.emplace(it.key(), static_cast<int>(states.size()));
    states.push_back(State{it.key(), Perm(), {}});
  }
  std::size_t i = 0;
  for (auto it = js.begin(); it != js.end(); ++it, ++i) {
    std::vector<std::uint32_t> img = it.value().at("perm").get<std::vector<std::uint32_t>>();
    states[i].label = Perm(std::move(img));
    for (const auto& c : it.value().at("children")) {
      if (c.is_null()) {
        states[i].children.push_back(-1);
      } else {
        auto f = index.find(c.get<std::string>());
        if (f == index.end()) throw std::invalid_argument("unknown child state in machine json");
        states[i].children.push_back(f->second);
      }
    }
  }
  if (name.empty() && j.contains("name")) name = j.at("name").get<std::string>();
  return std::make_shared<const MachineDef>(std::move(name), m, std::move(states));
}

std::string MachineDef::to_json() const {
  nlohmann::ordered_json j;
  if (!name_.empty()) j["name"] = name_;
  j["m"] = m_;
  auto& js = j["states"] = nlohmann::ordered_json::object();
  for (const auto& s : states_) {
    nlohmann::ordered_json st;
    st["perm"] = s.label.images();
    auto& ch = st["children"] = nlohmann::ordered_json::array();
    for (int c : s.children) {
      if (c == -1)
        ch.push_back(nullptr);
      else
        ch.push_back(states_[static_cast<std::size_t>(c)].name);
    }
    js[s.name] = std::move(st);
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// Expression store

namespace {

struct Node {
  ExprKind kind = ExprKind::Identity;
  unsigned m = 2;
  std::uint32_t a = 0;  // child id / state index
  std::uint32_t b = 0;  // second child id / level / nlevels
  MachinePtr mach;
  Perm perm;
  Vertex vtx;
  GraftSchemaPtr schema;
};

struct NodeKey {
  std::size_t hash;
  const Node* node;
};

std::size_t node_hash(const Node& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x9e3779b97f4a7c15ull + n.m;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
  mix(n.a);
  mix(n.b);
  mix(reinterpret_cast<std::size_t>(n.mach.get()));
  mix(reinterpret_cast<std::size_t>(n.schema.get()));
  if (n.kind == ExprKind::Rooted) mix(PermHash{}(n.perm));
  if (!n.vtx.is_root() || n.kind == ExprKind::Graft || n.kind == ExprKind::SectionView ||
      n.kind == ExprKind::Inflate)
    mix(VertexHash{}(n.vtx));
  return h;
}

bool node_equal(const Node& x, const Node& y) {
  if (x.kind != y.kind || x.m != y.m || x.a != y.a || x.b != y.b) return false;
  if (x.mach != y.mach || x.schema != y.schema) return false;
  if (x.kind == ExprKind::Rooted && x.perm != y.perm) return false;
  if (x.kind == ExprKind::Graft || x.kind == ExprKind::SectionView || x.kind == ExprKind::Inflate)
    if (x.vtx != y.vtx) return false;
  return true;
}

// Cached data attached to an InfGraft node.
struct InfState {
  std::vector<std::pair<Expr, Vertex>> factors;  // validated prefix
  bool exhausted = false;
  std::mutex mtx;
};

class Store {
public:
  static Store& instance() {
    static Store s;
    return s;
  }

  std::uint32_t intern(Node n) {
    std::size_t h = node_hash(n);
    {
      std::shared_lock lk(mtx_);
      auto it = find_locked(h, n);
      if (it) return *it;
    }
    std::unique_lock lk(mtx_);
    auto it = find_locked(h, n);
    if (it) return *it;
    if (nodes_.size() >= budget_)
      throw NonEvaluable("expression store budget exceeded (non-contracting evaluation?)");
    std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(std::move(n));
    intern_.emplace(h, id);
    if (nodes_.back().kind == ExprKind::InfGraft) inf_states_[id] = std::make_unique<InfState>();
    return id;
  }

  const Node& node(std::uint32_t id) const {
    std::shared_lock lk(mtx_);
    return nodes_[id];
  }

  // Unsynchronized node access: nodes are append-only and never mutated, so
  // a reference obtained once stays valid.
  const Node& node_fast(std::uint32_t id) {
    std::shared_lock lk(mtx_);
    return nodes_[id];
  }

  std::optional<Perm> cached_root(std::uint32_t id) {
    std::shared_lock lk(mtx_);
    auto it = root_cache_.find(id);
    if (it == root_cache_.end()) return std::nullopt;
    return it->second;
  }
  void store_root(std::uint32_t id, const Perm& p) {
    std::unique_lock lk(mtx_);
    root_cache_.emplace(id, p);
  }

  std::optional<std::uint32_t> cached_section(std::uint32_t id, unsigned letter) {
    std::shared_lock lk(mtx_);
    auto it = section_cache_.find((static_cast<std::uint64_t>(id) << 32) | letter);
    if (it == section_cache_.end()) return std::nullopt;
    return it->second;
  }
  void store_section(std::uint32_t id, unsigned letter, std::uint32_t value) {
    std::unique_lock lk(mtx_);
    section_cache_.emplace((static_cast<std::uint64_t>(id) << 32) | letter, value);
  }

  std::optional<std::uint32_t> cached_expansion(std::uint32_t id, std::size_t level) {
    std::shared_lock lk(mtx_);
    auto it = expansion_cache_.find((static_cast<std::uint64_t>(id) << 24) | level);
    if (it == expansion_cache_.end()) return std::nullopt;
    return it->second;
  }
  void store_expansion(std::uint32_t id, std::size_t level, std::uint32_t value) {
    std::unique_lock lk(mtx_);
    expansion_cache_.emplace((static_cast<std::uint64_t>(id) << 24) | level, value);
  }

  InfState& inf_state(std::uint32_t id) {
    std::shared_lock lk(mtx_);
    return *inf_states_.at(id);
  }

  std::size_t size() const {
    std::shared_lock lk(mtx_);
    return nodes_.size();
  }
  void set_budget(std::size_t b) { budget_ = b; }

private:
  std::optional<std::uint32_t> find_locked(std::size_t h, const Node& n) const {
    auto [lo, hi] = intern_.equal_range(h);
    for (auto it = lo; it != hi; ++it)
      if (node_equal(nodes_[it->second], n)) return it->second;
    return std::nullopt;
  }

  mutable std::shared_mutex mtx_;
  std::vector<Node> nodes_{Node{}};  // id 0 unused sentinel
  std::unordered_multimap<std::size_t, std::uint32_t> intern_;
  std::unordered_map<std::uint32_t, Perm> root_cache_;
  std::unordered_map<std::uint64_t, std::uint32_t> section_cache_;
  std::unordered_map<std::uint64_t, std::uint32_t> expansion_cache_;
  std::unordered_map<std::uint32_t, std::unique_ptr<InfState>> inf_states_;
  std::atomic<std::size_t> budget_{1u << 23};
};

thread_local int g_depth = 0;
constexpr int kMaxDepth = 60000;

struct DepthGuard {
  DepthGuard() {
    if (++g_depth > kMaxDepth)
      throw NonEvaluable("evaluation recursion depth exceeded (ill-founded definition?)");
  }
  ~DepthGuard() { --g_depth; }
};

Expr make(Node n) { return Expr(Store::instance().intern(std::move(n))); }

const Node& deref(Expr e) { return Store::instance().node_fast(e.id()); }

// Enumerate the factors of an InfGraft with vertex level < `level`.
std::vector<std::pair<Expr, Vertex>> factors_below(Expr ig, std::size_t level) {
  const Node& n = deref(ig);
  auto& st = Store::instance().inf_state(ig.id());
  std::lock_guard lk(st.mtx);
  const GraftSchema& sch = *n.schema;
  std::size_t k = st.factors.size();
  while (!st.exhausted && sch.level_floor(k) < level) {
    if (k > sch.budget())
      throw DepthBudgetExceeded("graft schema enumeration exceeded its budget");
    auto f = sch.factor(k);
    if (!f) {
      st.exhausted = true;
      break;
    }
    if (f->second.arity() != n.m || f->first.arity() != n.m)
      throw ArityMismatch("graft schema factor arity mismatch");
    if (f->second.level() < 1)
      throw std::invalid_argument("graft schema factor vertex must lie below the root");
    if (f->second.level() < sch.level_floor(k))
      throw std::invalid_argument("graft schema factor below its level floor");
    for (const auto& prev : st.factors)
      if (is_comparable(prev.second, f->second))
        throw std::invalid_argument("graft schema vertices must be pairwise non-comparable");
    st.factors.push_back(*f);
    ++k;
  }
  std::vector<std::pair<Expr, Vertex>> out;
  for (const auto& f : st.factors)
    if (f.second.level() < level) out.push_back(f);
  return out;
}

// Finite product of grafts agreeing with the InfGraft on all labels at
// levels < `level` (grafts at deeper vertices fix those levels pointwise).
Expr expand_below(Expr ig, std::size_t level) {
  auto cached = Store::instance().cached_expansion(ig.id(), level);
  if (cached) return Expr(*cached);
  auto fs = factors_below(ig, level);
  std::vector<Expr> parts;
  parts.reserve(fs.size());
  for (const auto& [g, v] : fs) parts.push_back(graft(g, v));
  Expr res = product(parts, deref(ig).m);
  Store::instance().store_expansion(ig.id(), level, res.id());
  return res;
}

std::vector<Perm> decompose_block_portrait(const Perm& p, unsigned m, unsigned nlevels);

Perm root_label_impl(Expr e);

Expr section_letter_impl(Expr e, unsigned letter) {
  const Node& n = deref(e);
  if (letter >= n.m) throw std::invalid_argument("section letter out of range");
  DepthGuard guard;
  switch (n.kind) {
    case ExprKind::Identity:
    case ExprKind::Rooted:
      return identity(n.m);
    case ExprKind::Gen: {
      int c = n.mach->states()[n.a].children[letter];
      return c == -1 ? identity(n.m) : gen(n.mach, c);
    }
    case ExprKind::Product: {
      Expr lhs(n.a), rhs(n.b);
      unsigned moved = act_letter(lhs, letter);
      return product(section_letter(lhs, letter), section_letter(rhs, moved));
    }
    case ExprKind::Inverse: {
      Expr inner(n.a);
      unsigned pre = root_label(inner).inverse()(letter);
      return inverse(section_letter(inner, pre));
    }
    case ExprKind::Graft: {
      if (n.vtx.letter(0) != letter) return identity(n.m);
      return graft(Expr(n.a), n.vtx.drop_front(1));
    }
    case ExprKind::Truncate:
      return trunc(section_letter(Expr(n.a), letter), n.b - 1);
    case ExprKind::InfGraft: {
      Node s;
      s.kind = ExprKind::SectionView;
      s.m = n.m;
      s.a = e.id();
      s.vtx = Vertex(n.m).child(letter);
      return make(std::move(s));
    }
    case ExprKind::SectionView: {
      Node s;
      s.kind = ExprKind::SectionView;
      s.m = n.m;
      s.a = n.a;
      s.vtx = n.vtx.child(letter);
      return make(std::move(s));
    }
    case ExprKind::DeleteLevels: {
      Expr inner(n.a);
      Vertex w = Vertex::from_level_rank(inner.arity(), n.b, letter);
      return delete_levels_embed(section(inner, w), n.b);
    }
    case ExprKind::Inflate: {
      Expr inner(n.a);
      Vertex w = n.vtx.child(letter);
      if (w.level() < n.b) {
        Node s;
        s.kind = ExprKind::Inflate;
        s.m = n.m;
        s.a = n.a;
        s.b = n.b;
        s.vtx = w;
        return make(std::move(s));
      }
      unsigned big_letter = static_cast<unsigned>(w.level_rank());
      return delete_levels_pullback(section_letter(inner, big_letter), n.m, n.b);
    }
  }
  throw std::logic_error("unreachable expression kind");
}

Perm root_label_impl(Expr e) {
  const Node& n = deref(e);
  DepthGuard guard;
  switch (n.kind) {
    case ExprKind::Identity:
      return Perm::identity(n.m);
    case ExprKind::Gen:
      return n.mach->states()[n.a].label;
    case ExprKind::Rooted:
      return n.perm;
    case ExprKind::Product:
      return root_label(Expr(n.a)).then(root_label(Expr(n.b)));
    case ExprKind::Inverse:
      return root_label(Expr(n.a)).inverse();
    case ExprKind::Graft:
      return Perm::identity(n.m);  // vertex level >= 1 after normalization
    case ExprKind::Truncate:
      return root_label(Expr(n.a));
    case ExprKind::InfGraft:
      return Perm::identity(n.m);
    case ExprKind::SectionView: {
      // Label of the underlying infinite product at vtx: only factors with
      // vertex level <= level(vtx) can contribute.
      Expr expanded = expand_below(Expr(n.a), n.vtx.level() + 1);
      return label_at(expanded, n.vtx);
    }
    case ExprKind::DeleteLevels:
      return level_perm(Expr(n.a), n.b);
    case ExprKind::Inflate: {
      Perm big = root_label(Expr(n.a));
      auto cells = decompose_block_portrait(big, n.m, n.b);
      std::size_t cell = cell_offset(n.m, n.vtx.level()) + n.vtx.level_rank();
      return cells[cell];
    }
  }
  throw std::logic_error("unreachable expression kind");
}

std::vector<Perm> decompose_block_portrait(const Perm& p, unsigned m, unsigned nlevels) {
  // Interpret a permutation of m^nlevels points as an automorphism of the
  // nlevels-deep m-ary tree, or fail.
  std::size_t cells = cell_count(m, nlevels);
  std::vector<Perm> out(cells, Perm::identity(m));
  std::size_t deg = p.degree();
  // image of each vertex at each level, top-down
  std::vector<std::uint64_t> cur{0};
  for (unsigned level = 0; level < nlevels; ++level) {
    std::uint64_t width = deg / pow_u64(m, level);       // block size at this level
    std::uint64_t child_width = width / m;
    std::vector<std::uint64_t> next(pow_u64(m, level + 1));
    for (std::uint64_t r = 0; r < cur.size(); ++r) {
      std::uint64_t img_base = cur[r] * width;
      std::uint64_t src_base = r * width;
      std::vector<std::uint32_t> lab(m);
      std::vector<bool> seen(m, false);
      for (unsigned x = 0; x < m; ++x) {
        std::uint64_t q = p(static_cast<std::uint32_t>(src_base + x * child_width));
        if (q < img_base || q >= img_base + width)
          throw NotInWreathImage("label does not preserve the deleted-levels block structure");
        std::uint64_t y = (q - img_base) / child_width;
        // every point of the child block must land in image child block y
        for (std::uint64_t t = 0; t < child_width; ++t) {
          std::uint64_t qq = p(static_cast<std::uint32_t>(src_base + x * child_width + t));
          if (qq < img_base + y * child_width || qq >= img_base + (y + 1) * child_width)
            throw NotInWreathImage("label does not preserve the deleted-levels block structure");
        }
        if (seen[y]) throw NotInWreathImage("block images collide");
        seen[y] = true;
        lab[x] = static_cast<std::uint32_t>(y);
        next[r * m + x] = cur[r] * m + y;
      }
      out[cell_offset(m, level) + r] = Perm(std::move(lab));
    }
    cur = std::move(next);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructors

unsigned Expr::arity() const { return deref(*this).m; }
ExprKind Expr::kind() const { return deref(*this).kind; }

Expr identity(unsigned arity) {
  Node n;
  n.kind = ExprKind::Identity;
  n.m = arity;
  return make(std::move(n));
}

Expr gen(const MachinePtr& machine, std::string_view state) {
  int idx = machine->state_index(state);
  if (idx < 0) throw std::invalid_argument("unknown machine state: " + std::string(state));
  return gen(machine, idx);
}

Expr gen(const MachinePtr& machine, int state_index) {
  Node n;
  n.kind = ExprKind::Gen;
  n.m = machine->arity();
  n.a = static_cast<std::uint32_t>(state_index);
  n.mach = machine;
  return make(std::move(n));
}

Expr rooted(const Perm& label) {
  if (label.is_identity()) return identity(static_cast<unsigned>(label.degree()));
  Node n;
  n.kind = ExprKind::Rooted;
  n.m = static_cast<unsigned>(label.degree());
  n.perm = label;
  return make(std::move(n));
}

Expr product(Expr a, Expr b) {
  if (a.arity() != b.arity()) throw ArityMismatch("product arity mismatch");
  if (a.kind() == ExprKind::Identity) return b;
  if (b.kind() == ExprKind::Identity) return a;
  Node n;
  n.kind = ExprKind::Product;
  n.m = a.arity();
  n.a = a.id();
  n.b = b.id();
  return make(std::move(n));
}

Expr product(std::span<const Expr> factors, unsigned arity) {
  if (factors.empty()) return identity(arity);
  // Balanced fold keeps recursion depth logarithmic in the factor count.
  std::vector<Expr> layer(factors.begin(), factors.end());
  while (layer.size() > 1) {
    std::vector<Expr> next;
    next.reserve((layer.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) next.push_back(product(layer[i], layer[i + 1]));
    if (layer.size() % 2) next.push_back(layer.back());
    layer = std::move(next);
  }
  return layer[0];
}

Expr inverse(Expr e) {
  if (e.kind() == ExprKind::Identity) return e;
  if (e.kind() == ExprKind::Inverse) return Expr(deref(e).a);
  Node n;
  n.kind = ExprKind::Inverse;
  n.m = e.arity();
  n.a = e.id();
  return make(std::move(n));
}

Expr graft(Expr g, const Vertex& at) {
  if (at.arity() != g.arity()) throw ArityMismatch("graft arity mismatch");
  if (at.is_root()) return g;
  if (g.kind() == ExprKind::Identity) return g;
  Node n;
  n.kind = ExprKind::Graft;
  n.m = g.arity();
  n.a = g.id();
  n.vtx = at;
  return make(std::move(n));
}

Expr trunc(Expr g, std::size_t level) {
  if (level == 0) return identity(g.arity());
  if (g.kind() == ExprKind::Identity) return g;
  Node n;
  n.kind = ExprKind::Truncate;
  n.m = g.arity();
  n.a = g.id();
  n.b = static_cast<std::uint32_t>(level);
  return make(std::move(n));
}

Expr inf_graft(unsigned arity, GraftSchemaPtr schema) {
  Node n;
  n.kind = ExprKind::InfGraft;
  n.m = arity;
  n.schema = std::move(schema);
  return make(std::move(n));
}

Expr conjugate(Expr g, Expr by) { return product(product(inverse(by), g), by); }

Expr commutator(Expr g, Expr h) { return product(product(inverse(g), inverse(h)), product(g, h)); }

Expr power(Expr g, long long e) {
  if (e == 0) return identity(g.arity());
  Expr base = e < 0 ? inverse(g) : g;
  unsigned long long k = e < 0 ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
  Expr acc = identity(g.arity());
  while (k) {
    if (k & 1) acc = product(acc, base);
    if (k >>= 1) base = product(base, base);
  }
  return acc;
}

Expr delete_levels_embed(Expr e, unsigned nlevels) {
  if (nlevels == 0) throw std::invalid_argument("deletion depth must be >= 1");
  if (nlevels == 1) return e;
  std::uint64_t M = pow_u64(e.arity(), nlevels);
  if (M > (1u << 20)) throw std::invalid_argument("deleted-levels arity too large");
  if (e.kind() == ExprKind::Identity) return identity(static_cast<unsigned>(M));
  Node n;
  n.kind = ExprKind::DeleteLevels;
  n.m = static_cast<unsigned>(M);
  n.a = e.id();
  n.b = nlevels;
  return make(std::move(n));
}

Expr delete_levels_pullback(Expr e, unsigned arity_m, unsigned nlevels) {
  if (nlevels == 1) return e;
  if (pow_u64(arity_m, nlevels) != e.arity())
    throw ArityMismatch("pullback: expression arity is not m^nlevels");
  if (e.kind() == ExprKind::Identity) return identity(arity_m);
  Node n;
  n.kind = ExprKind::Inflate;
  n.m = arity_m;
  n.a = e.id();
  n.b = nlevels;
  n.vtx = Vertex(arity_m);
  return make(std::move(n));
}

// ---------------------------------------------------------------------------
// Evaluation

Perm root_label(Expr e) {
  auto cached = Store::instance().cached_root(e.id());
  if (cached) return *cached;
  Perm p = root_label_impl(e);
  Store::instance().store_root(e.id(), p);
  return p;
}

Expr section_letter(Expr e, unsigned letter) {
  auto cached = Store::instance().cached_section(e.id(), letter);
  if (cached) return Expr(*cached);
  Expr s = section_letter_impl(e, letter);
  Store::instance().store_section(e.id(), letter, s.id());
  return s;
}

unsigned act_letter(Expr e, unsigned letter) { return root_label(e)(letter); }

Perm label_at(Expr e, const Vertex& v) { return root_label(section(e, v)); }

Vertex act(Expr e, const Vertex& v) {
  if (v.arity() != e.arity()) throw ArityMismatch("act arity mismatch");
  Vertex out(v.arity());
  Expr cur = e;
  for (unsigned x : v.letters()) {
    out = out.child(act_letter(cur, x));
    cur = section_letter(cur, x);
  }
  return out;
}

Expr section(Expr e, const Vertex& v) {
  if (v.arity() != e.arity()) throw ArityMismatch("section arity mismatch");
  Expr cur = e;
  for (unsigned x : v.letters()) cur = section_letter(cur, x);
  return cur;
}

Perm level_perm(Expr e, std::size_t n) {
  unsigned m = e.arity();
  std::uint64_t deg = pow_u64(m, n);
  if (deg > (1u << 26)) throw std::invalid_argument("level too deep for dense permutations");
  if (n == 0) return Perm::identity(1);
  std::vector<std::uint32_t> ids{e.id()};
  std::vector<std::uint32_t> imgs{0};
  for (std::size_t level = 0; level + 1 < n; ++level) {
    std::vector<std::uint32_t> nids(ids.size() * m), nimgs(ids.size() * m);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Expr s(ids[i]);
      Perm lab = root_label(s);
      for (unsigned x = 0; x < m; ++x) {
        nids[i * m + x] = section_letter(s, x).id();
        nimgs[i * m + x] = imgs[i] * m + lab(x);
      }
    }
    ids = std::move(nids);
    imgs = std::move(nimgs);
  }
  std::vector<std::uint32_t> img(deg);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Perm lab = root_label(Expr(ids[i]));
    for (unsigned x = 0; x < m; ++x) img[i * m + x] = imgs[i] * m + lab(x);
  }
  return Perm(std::move(img));
}

bool equal_up_to_level(Expr a, Expr b, std::size_t n) {
  if (a.arity() != b.arity()) throw ArityMismatch("comparison arity mismatch");
  if (a == b) return true;
  return level_perm(a, n) == level_perm(b, n);
}

Perm label_at_uncached(Expr e, const Vertex& v) {
  // Recompute the section path without consulting the memo tables; the
  // expansion of infinite products is shared (it is definitional).
  Expr cur = e;
  for (unsigned x : v.letters()) cur = section_letter_impl(cur, x);
  return root_label_impl(cur);
}

Portrait portrait(Expr e, std::size_t depth) {
  Portrait p;
  p.m = e.arity();
  p.depth = depth;
  p.labels.reserve(cell_count(p.m, depth));
  std::vector<std::uint32_t> ids{e.id()};
  for (std::size_t level = 0; level < depth; ++level) {
    std::vector<std::uint32_t> nids;
    nids.reserve(ids.size() * p.m);
    for (auto idv : ids) {
      Expr s(idv);
      p.labels.push_back(root_label(s));
      if (level + 1 < depth)
        for (unsigned x = 0; x < p.m; ++x) nids.push_back(section_letter(s, x).id());
    }
    ids = std::move(nids);
  }
  return p;
}

std::vector<Expr> section_closure(std::vector<Expr> gens, std::size_t bound, std::size_t dedup_level) {
  if (gens.empty()) throw std::invalid_argument("section closure of an empty set");
  unsigned m = gens[0].arity();
  std::map<std::vector<std::uint32_t>, Expr> seen;
  std::vector<Expr> out;
  std::vector<Expr> queue;
  auto push = [&](Expr e) {
    auto key = level_perm(e, dedup_level).images();
    auto [it, fresh] = seen.emplace(std::move(key), e);
    (void)it;
    if (fresh) {
      if (seen.size() > bound)
        throw BoundExceeded("section closure exceeded bound (not finite-state at this depth)");
      out.push_back(e);
      queue.push_back(e);
    }
  };
  for (Expr g : gens) {
    if (g.arity() != m) throw ArityMismatch("section closure arity mismatch");
    push(g);
  }
  while (!queue.empty()) {
    Expr e = queue.back();
    queue.pop_back();
    for (unsigned x = 0; x < m; ++x) push(section_letter(e, x));
  }
  return out;
}

std::size_t cell_count(unsigned m, std::size_t depth) {
  std::size_t total = 0, level = 1;
  for (std::size_t t = 0; t < depth; ++t) {
    total += level;
    level *= m;
  }
  return total;
}

std::size_t cell_offset(unsigned m, std::size_t level) { return cell_count(m, level); }

std::uint64_t pow_u64(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  while (exp--) {
    if (r > (std::uint64_t(1) << 62) / (base ? base : 1))
      throw std::overflow_error("pow_u64 overflow");
    r *= base;
  }
  return r;
}

Expr expr_child(Expr e, unsigned which) {
  const Node& n = deref(e);
  switch (n.kind) {
    case ExprKind::Product:
      return Expr(which == 0 ? n.a : n.b);
    case ExprKind::Inverse:
    case ExprKind::Graft:
    case ExprKind::Truncate:
    case ExprKind::SectionView:
    case ExprKind::DeleteLevels:
    case ExprKind::Inflate:
      return Expr(n.a);
    default:
      throw std::invalid_argument("expression kind has no children");
  }
}

const Vertex& expr_vertex(Expr e) {
  const Node& n = deref(e);
  if (n.kind != ExprKind::Graft && n.kind != ExprKind::SectionView && n.kind != ExprKind::Inflate)
    throw std::invalid_argument("expression kind carries no vertex");
  return n.vtx;
}

std::size_t expr_level(Expr e) {
  const Node& n = deref(e);
  if (n.kind != ExprKind::Truncate && n.kind != ExprKind::DeleteLevels && n.kind != ExprKind::Inflate)
    throw std::invalid_argument("expression kind carries no level");
  return n.b;
}

MachinePtr expr_machine(Expr e) {
  const Node& n = deref(e);
  if (n.kind != ExprKind::Gen) throw std::invalid_argument("not a generator expression");
  return n.mach;
}

int expr_state(Expr e) {
  const Node& n = deref(e);
  if (n.kind != ExprKind::Gen) throw std::invalid_argument("not a generator expression");
  return static_cast<int>(n.a);
}

std::size_t expr_store_size() { return Store::instance().size(); }
void set_expr_store_budget(std::size_t max_nodes) { Store::instance().set_budget(max_nodes); }

}  // namespace arbor
