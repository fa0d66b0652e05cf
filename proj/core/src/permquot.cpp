#include "arbor/permquot.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <unordered_set>

#include <mpfr.h>

namespace arbor {

namespace {

// Multiplication / inversion / application tables for Sym(m) label codes
// (Lehmer ranks). Supports m <= 6; the chain never needs more.
struct SymTable {
  unsigned m = 0;
  std::uint32_t fact = 1;
  std::vector<std::uint16_t> mult;  // fact * fact, composition left-to-right
  std::vector<std::uint16_t> inv;
  std::vector<std::uint8_t> app;  // fact * m

  static const SymTable& get(unsigned m) {
    static std::map<unsigned, SymTable> tables;
    static std::mutex mtx;
    std::lock_guard lk(mtx);
    auto it = tables.find(m);
    if (it != tables.end()) return it->second;
    if (m > 6) throw std::invalid_argument("cell chain supports arity <= 6");
    SymTable t;
    t.m = m;
    t.fact = 1;
    for (unsigned i = 2; i <= m; ++i) t.fact *= i;
    std::vector<Perm> perms(t.fact);
    for (std::uint32_t c = 0; c < t.fact; ++c) perms[c] = perm_unrank(m, c);
    t.mult.resize(static_cast<std::size_t>(t.fact) * t.fact);
    t.inv.resize(t.fact);
    t.app.resize(static_cast<std::size_t>(t.fact) * m);
    for (std::uint32_t a = 0; a < t.fact; ++a) {
      t.inv[a] = static_cast<std::uint16_t>(perm_rank(perms[a].inverse()));
      for (unsigned x = 0; x < m; ++x) t.app[a * m + x] = static_cast<std::uint8_t>(perms[a](x));
      for (std::uint32_t b = 0; b < t.fact; ++b)
        t.mult[static_cast<std::size_t>(a) * t.fact + b] =
            static_cast<std::uint16_t>(perm_rank(perms[a].then(perms[b])));
    }
    return tables.emplace(m, std::move(t)).first->second;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// LabelVec

LabelVec::LabelVec(unsigned m, std::size_t depth)
    : m_(m), depth_(depth), lab_(cell_count(m, depth), 0) {}

LabelVec LabelVec::identity_elem(unsigned m, std::size_t depth) { return LabelVec(m, depth); }

std::size_t LabelVec::first_nontrivial() const {
  for (std::size_t i = 0; i < lab_.size(); ++i)
    if (lab_[i]) return i;
  return lab_.size();
}

std::optional<LabelVec> LabelVec::from_perm(unsigned m, std::size_t depth, const Perm& p) {
  if (p.degree() != pow_u64(m, depth)) throw std::invalid_argument("perm degree != m^depth");
  LabelVec out(m, depth);
  std::uint64_t deg = p.degree();
  std::vector<std::uint64_t> cur{0};
  for (std::size_t t = 0; t < depth; ++t) {
    std::uint64_t width = deg / pow_u64(m, t);
    std::uint64_t child = width / m;
    std::vector<std::uint64_t> next(pow_u64(m, t + 1));
    for (std::uint64_t r = 0; r < cur.size(); ++r) {
      std::uint64_t src = r * width, img = cur[r] * width;
      std::vector<std::uint32_t> lab(m);
      std::vector<bool> seen(m, false);
      for (unsigned x = 0; x < m; ++x) {
        std::uint64_t q = p(static_cast<std::uint32_t>(src + x * child));
        if (q < img || q >= img + width) return std::nullopt;
        std::uint64_t y = (q - img) / child;
        if (child > 1) {
          // spot-check the far end of the block; full validation happens via
          // deeper levels of this loop
          std::uint64_t q2 = p(static_cast<std::uint32_t>(src + x * child + child - 1));
          if (q2 < img + y * child || q2 >= img + (y + 1) * child) return std::nullopt;
        }
        if (seen[y]) return std::nullopt;
        seen[y] = true;
        lab[x] = static_cast<std::uint32_t>(y);
        next[r * m + x] = cur[r] * m + y;
      }
      out.lab_[cell_offset(m, t) + r] = static_cast<std::uint16_t>(perm_rank(Perm(std::move(lab))));
    }
    cur = std::move(next);
  }
  return out;
}

LabelVec LabelVec::from_expr(Expr e, std::size_t depth) {
  Portrait p = portrait(e, depth);
  LabelVec out(p.m, depth);
  for (std::size_t i = 0; i < p.labels.size(); ++i)
    out.lab_[i] = static_cast<std::uint16_t>(perm_rank(p.labels[i]));
  return out;
}

LabelVec LabelVec::then(const LabelVec& o) const {
  if (m_ != o.m_ || depth_ != o.depth_) throw std::invalid_argument("label vec shape mismatch");
  const SymTable& T = SymTable::get(m_);
  LabelVec out(m_, depth_);
  std::size_t f = first_nontrivial();
  if (f == lab_.size()) return o;
  // this is trivial above the level of cell f, so the product agrees with o
  // on all cells at strictly shallower levels.
  std::size_t lvl0 = 0;
  while (cell_offset(m_, lvl0 + 1) <= f) ++lvl0;
  std::copy(o.lab_.begin(), o.lab_.begin() + static_cast<std::ptrdiff_t>(cell_offset(m_, lvl0)),
            out.lab_.begin());
  std::uint64_t width0 = pow_u64(m_, lvl0);
  std::vector<std::uint32_t> img(width0);
  for (std::uint32_t r = 0; r < width0; ++r) img[r] = r;
  for (std::size_t t = lvl0; t < depth_; ++t) {
    std::size_t off = cell_offset(m_, t);
    std::size_t width = static_cast<std::size_t>(pow_u64(m_, t));
    std::vector<std::uint32_t> next;
    if (t + 1 < depth_) next.resize(width * m_);
    for (std::size_t r = 0; r < width; ++r) {
      std::uint16_t a = lab_[off + r];
      std::uint32_t ir = img[r];
      out.lab_[off + r] = T.mult[static_cast<std::size_t>(a) * T.fact + o.lab_[off + ir]];
      if (t + 1 < depth_)
        for (unsigned x = 0; x < m_; ++x)
          next[r * m_ + x] = ir * m_ + T.app[static_cast<std::size_t>(a) * m_ + x];
    }
    img = std::move(next);
  }
  return out;
}

LabelVec LabelVec::inverse() const {
  const SymTable& T = SymTable::get(m_);
  LabelVec out(m_, depth_);
  std::vector<std::uint32_t> pre{0};
  for (std::size_t t = 0; t < depth_; ++t) {
    std::size_t off = cell_offset(m_, t);
    std::size_t width = static_cast<std::size_t>(pow_u64(m_, t));
    std::vector<std::uint32_t> next;
    if (t + 1 < depth_) next.resize(width * m_);
    for (std::size_t r = 0; r < width; ++r) {
      std::uint16_t code = T.inv[lab_[off + pre[r]]];
      out.lab_[off + r] = code;
      if (t + 1 < depth_)
        for (unsigned x = 0; x < m_; ++x)
          next[r * m_ + x] = pre[r] * m_ + T.app[static_cast<std::size_t>(code) * m_ + x];
    }
    pre = std::move(next);
  }
  return out;
}

Perm LabelVec::to_perm() const {
  const SymTable& T = SymTable::get(m_);
  std::vector<std::uint32_t> img{0};
  for (std::size_t t = 0; t < depth_; ++t) {
    std::size_t off = cell_offset(m_, t);
    std::vector<std::uint32_t> next(img.size() * m_);
    for (std::size_t r = 0; r < img.size(); ++r)
      for (unsigned x = 0; x < m_; ++x)
        next[r * m_ + x] = img[r] * m_ + T.app[static_cast<std::size_t>(lab_[off + r]) * m_ + x];
    img = std::move(next);
  }
  return Perm(std::move(img));
}

// ---------------------------------------------------------------------------
// CellChain

CellChain::CellChain(unsigned m, std::size_t depth)
    : m_(m), depth_(depth), cells_(cell_count(m, depth)), fact_(SymTable::get(m).fact) {}

std::size_t CellChain::level_for_cell(std::size_t cell) const {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), cell,
                             [](const Level& l, std::size_t c) { return l.cell < c; });
  if (it == levels_.end() || it->cell != cell) return levels_.size();
  return static_cast<std::size_t>(it - levels_.begin());
}

LabelVec CellChain::sift(LabelVec g, std::size_t* fail_cell) const {
  for (;;) {
    std::size_t f = g.first_nontrivial();
    if (f == cells_) {
      if (fail_cell) *fail_cell = cells_;
      return g;
    }
    std::size_t pos = level_for_cell(f);
    if (pos == levels_.size()) {
      if (fail_cell) *fail_cell = f;
      return g;
    }
    const Level& lvl = levels_[pos];
    std::uint32_t idx = lvl.code_pos[g.label(f)];
    if (!idx) {
      if (fail_cell) *fail_cell = f;
      return g;
    }
    // right division: g t^{-1} lands in the kernel of the label map here
    g = g.then(lvl.transversal[idx - 1].inverse());
  }
}

void CellChain::add_generator(const LabelVec& g) {
  if (g.arity() != m_ || g.depth() != depth_) throw std::invalid_argument("chain shape mismatch");
  std::size_t fail = cells_;
  LabelVec r = sift(g, &fail);
  if (fail == cells_) return;
  insert_strong_generator(std::move(r), fail);
  process();
}

bool CellChain::contains(const LabelVec& g) const {
  std::size_t fail = cells_;
  LabelVec r = sift(g, &fail);
  (void)r;
  return fail == cells_;
}

mpz_class CellChain::order() const {
  mpz_class o(1);
  for (const auto& lvl : levels_) o *= static_cast<unsigned long>(lvl.transversal.size());
  return o;
}

void CellChain::insert_strong_generator(LabelVec g, std::size_t cell) {
  std::size_t pos = level_for_cell(cell);
  if (pos == levels_.size() || levels_[pos].cell != cell) {
    Level lvl;
    lvl.cell = cell;
    lvl.code_pos.assign(fact_, 0);
    lvl.codes.push_back(0);
    lvl.transversal.push_back(LabelVec::identity_elem(m_, depth_));
    lvl.code_pos[0] = 1;
    auto it = std::lower_bound(levels_.begin(), levels_.end(), cell,
                               [](const Level& l, std::size_t c) { return l.cell < c; });
    pos = static_cast<std::size_t>(it - levels_.begin());
    levels_.insert(it, std::move(lvl));
  }
  levels_[pos].gens.push_back(std::move(g));
  levels_[pos].gen_serial.push_back(++serial_);
  extend_orbit(pos);
  // Every level at or above the insertion cell gains Schreier pairs.
  for (const auto& lvl : levels_)
    if (lvl.cell <= cell) dirty_.push_back(lvl.cell);
}

void CellChain::extend_orbit(std::size_t pos) {
  const SymTable& T = SymTable::get(m_);
  Level& lvl = levels_[pos];
  for (std::size_t i = 0; i < lvl.codes.size(); ++i) {
    for (const auto& g : lvl.gens) {
      std::uint16_t nc = T.mult[static_cast<std::size_t>(lvl.codes[i]) * T.fact + g.label(lvl.cell)];
      if (!lvl.code_pos[nc]) {
        lvl.codes.push_back(nc);
        lvl.transversal.push_back(lvl.transversal[i].then(g));
        lvl.code_pos[nc] = static_cast<std::uint32_t>(lvl.transversal.size());
      }
    }
  }
}

void CellChain::process() {
  while (!dirty_.empty()) {
    // deepest dirty cell first
    auto it = std::max_element(dirty_.begin(), dirty_.end());
    std::size_t cell = *it;
    dirty_.erase(std::remove(dirty_.begin(), dirty_.end(), cell), dirty_.end());

    std::size_t pos = level_for_cell(cell);
    if (pos == levels_.size()) continue;
    std::size_t t_mark = levels_[pos].done_transversal;
    std::uint64_t s_mark = levels_[pos].done_serial;
    std::size_t t_now = levels_[pos].transversal.size();
    std::uint64_t s_now = serial_;

    // Generators of the stabilizer headed by this cell: everything inserted
    // at this cell or deeper, addressed positionally because an insertion
    // reshapes the level table (the cell is then re-queued via dirty_).
    std::vector<std::pair<std::size_t, std::size_t>> acting;  // (level pos, gen idx)
    for (std::size_t p2 = pos; p2 < levels_.size(); ++p2)
      for (std::size_t k = 0; k < levels_[p2].gens.size(); ++k) acting.emplace_back(p2, k);

    bool changed = false;
    for (std::size_t ui = 0; ui < t_now && !changed; ++ui) {
      for (const auto& [p2, k] : acting) {
        std::uint64_t gser = levels_[p2].gen_serial[k];
        if (ui < t_mark && gser <= s_mark) continue;  // already processed
        LabelVec y = levels_[pos].transversal[ui].then(levels_[p2].gens[k]);
        std::uint16_t b = y.label(levels_[pos].cell);
        std::uint32_t vi = levels_[pos].code_pos[b];
        if (!vi) throw std::logic_error("orbit not closed under its own generators");
        // Schreier generator u s rep(us)^{-1} of the next stabilizer
        LabelVec sch = y.then(levels_[pos].transversal[vi - 1].inverse());
        std::size_t fail = cells_;
        LabelVec res = sift(std::move(sch), &fail);
        if (fail != cells_) {
          insert_strong_generator(std::move(res), fail);
          changed = true;  // level table shifted; the dirty queue re-runs us
          break;
        }
      }
    }
    if (!changed) {
      std::size_t p = level_for_cell(cell);
      levels_[p].done_transversal = t_now;
      levels_[p].done_serial = s_now;
    }
  }
}

// ---------------------------------------------------------------------------
// LevelQuotient

LevelQuotient::LevelQuotient(unsigned m, std::size_t level, std::vector<Perm> generator_perms)
    : m_(m), level_(level), degree_(static_cast<std::size_t>(pow_u64(m, level))), gens_(std::move(generator_perms)) {
  chain_ = std::make_shared<CellChain>(m_, level_);
  for (const auto& p : gens_) {
    auto lv = LabelVec::from_perm(m_, level_, p);
    if (!lv) throw NotInWreathImage("generator permutation does not act on the tree");
    chain_->add_generator(*lv);
  }
  order_ = chain_->order();
}

LevelQuotient LevelQuotient::from_exprs(std::span<const Expr> gens, std::size_t level) {
  std::vector<Perm> ps;
  ps.reserve(gens.size());
  unsigned m = gens.empty() ? 2 : gens[0].arity();
  for (Expr e : gens) ps.push_back(level_perm(e, level));
  return LevelQuotient(m, level, std::move(ps));
}

bool LevelQuotient::contains(const Perm& p) const {
  if (p.degree() != degree_) throw std::invalid_argument("degree mismatch");
  auto lv = LabelVec::from_perm(m_, level_, p);
  if (!lv) return false;
  return chain_->contains(*lv);
}

bool LevelQuotient::contains(Expr e) const { return chain_->contains(LabelVec::from_expr(e, level_)); }

std::vector<std::vector<std::uint32_t>> LevelQuotient::orbits() const {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<bool> seen(degree_, false);
  for (std::uint32_t s = 0; s < degree_; ++s) {
    if (seen[s]) continue;
    std::vector<std::uint32_t> orb{s};
    seen[s] = true;
    for (std::size_t i = 0; i < orb.size(); ++i)
      for (const auto& g : gens_) {
        std::uint32_t y = g(orb[i]);
        if (!seen[y]) {
          seen[y] = true;
          orb.push_back(y);
        }
      }
    std::sort(orb.begin(), orb.end());
    out.push_back(std::move(orb));
  }
  return out;
}

bool LevelQuotient::is_transitive() const {
  if (degree_ == 1) return true;
  if (gens_.empty()) return false;
  return orbits().size() == 1;
}

LevelQuotient LevelQuotient::normal_closure(std::span<const Perm> seed) const {
  std::vector<Perm> closure_gens;
  auto chain = std::make_shared<CellChain>(m_, level_);
  auto try_add = [&](const Perm& p) {
    auto lv = LabelVec::from_perm(m_, level_, p);
    if (!lv) throw NotInWreathImage("closure element does not act on the tree");
    if (chain->contains(*lv)) return;
    chain->add_generator(*lv);
    closure_gens.push_back(p);
  };
  for (const auto& p : seed)
    if (!p.is_identity()) try_add(p);
  for (std::size_t i = 0; i < closure_gens.size(); ++i) {
    for (const auto& q : gens_) {
      Perm c = q.inverse().then(closure_gens[i]).then(q);
      try_add(c);
    }
  }
  LevelQuotient out(m_, level_, {});
  out.gens_ = std::move(closure_gens);
  out.chain_ = std::move(chain);
  out.order_ = out.chain_->order();
  return out;
}

LevelQuotient LevelQuotient::derived_subgroup() const {
  std::vector<Perm> seed;
  for (std::size_t i = 0; i < gens_.size(); ++i)
    for (std::size_t j = i + 1; j < gens_.size(); ++j)
      seed.push_back(gens_[i].inverse().then(gens_[j].inverse()).then(gens_[i]).then(gens_[j]));
  return normal_closure(seed);
}

LevelQuotient quotient(std::span<const Expr> gens, std::size_t level) {
  return LevelQuotient::from_exprs(gens, level);
}

bool is_level_transitive(std::span<const Expr> gens, std::size_t level) {
  if (level == 0) return true;
  std::vector<Perm> ps;
  for (Expr e : gens) ps.push_back(level_perm(e, level));
  std::size_t deg = static_cast<std::size_t>(pow_u64(gens[0].arity(), level));
  std::vector<bool> seen(deg, false);
  std::vector<std::uint32_t> orb{0};
  seen[0] = true;
  for (std::size_t i = 0; i < orb.size(); ++i)
    for (const auto& g : ps) {
      std::uint32_t y = g(orb[i]);
      if (!seen[y]) {
        seen[y] = true;
        orb.push_back(y);
      }
    }
  return orb.size() == deg;
}

SubtreeTransitivity minimal_subtree_transitivity_level(std::span<const Expr> gens, std::size_t max_k,
                                                       std::size_t probe_depth) {
  unsigned m = gens[0].arity();
  for (std::size_t k = 0; k <= max_k; ++k) {
    std::size_t full = k + probe_depth;
    std::vector<Perm> ps, level_k;
    for (Expr e : gens) {
      ps.push_back(level_perm(e, full));
      level_k.push_back(level_perm(e, k));
    }
    std::uint64_t block = pow_u64(m, probe_depth);
    std::uint64_t nverts = pow_u64(m, k);
    bool all_ok = true;
    for (std::uint64_t v = 0; v < nverts && all_ok; ++v) {
      // Schreier generators of the stabilizer of vertex v at level k.
      std::vector<std::int64_t> transversal_of(nverts, -1);
      std::vector<Perm> reps{Perm::identity(static_cast<std::size_t>(pow_u64(m, full)))};
      std::vector<std::uint64_t> orb{v};
      transversal_of[v] = 0;
      for (std::size_t i = 0; i < orb.size(); ++i)
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
          std::uint64_t y = level_k[gi](static_cast<std::uint32_t>(orb[i]));
          if (transversal_of[y] < 0) {
            transversal_of[y] = static_cast<std::int64_t>(orb.size());
            orb.push_back(y);
            reps.push_back(reps[i].then(ps[gi]));
          }
        }
      std::vector<Perm> sections;
      for (std::size_t i = 0; i < orb.size(); ++i)
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
          std::uint64_t y = level_k[gi](static_cast<std::uint32_t>(orb[i]));
          Perm stab = reps[i].then(ps[gi]).then(reps[static_cast<std::size_t>(transversal_of[y])].inverse());
          // section below v: the block [v*block, (v+1)*block)
          std::vector<std::uint32_t> img(static_cast<std::size_t>(block));
          bool in_block = true;
          for (std::uint64_t x = 0; x < block; ++x) {
            std::uint64_t q = stab(static_cast<std::uint32_t>(v * block + x));
            if (q < v * block || q >= (v + 1) * block) {
              in_block = false;
              break;
            }
            img[static_cast<std::size_t>(x)] = static_cast<std::uint32_t>(q - v * block);
          }
          if (!in_block) throw std::logic_error("stabilizer element moved its own block");
          sections.push_back(Perm(std::move(img)));
        }
      // transitivity of the section action on each probed level below v
      for (std::size_t t = 1; t <= probe_depth && all_ok; ++t) {
        std::uint64_t pts = pow_u64(m, t);
        std::uint64_t shift = block / pts;
        std::vector<bool> seen(static_cast<std::size_t>(pts), false);
        std::vector<std::uint64_t> o{0};
        seen[0] = true;
        for (std::size_t i = 0; i < o.size(); ++i)
          for (const auto& s : sections) {
            std::uint64_t y = s(static_cast<std::uint32_t>(o[i] * shift)) / shift;
            if (!seen[static_cast<std::size_t>(y)]) {
              seen[static_cast<std::size_t>(y)] = true;
              o.push_back(y);
            }
          }
        if (o.size() != pts) all_ok = false;
      }
    }
    if (all_ok) return SubtreeTransitivity{k, probe_depth};
  }
  throw NotFoundWithinBound("no subtree-transitive level within bound");
}

IndexTable index_table(std::span<const Expr> gens, std::size_t max_level, unsigned jobs) {
  IndexTable t;
  t.m = gens.empty() ? 2 : gens[0].arity();
  t.orders.resize(max_level + 1);
  t.orders[0] = 1;
  auto compute = [&](std::size_t n) { return LevelQuotient::from_exprs(gens, n).order(); };
  if (jobs <= 1) {
    for (std::size_t n = 1; n <= max_level; ++n) t.orders[n] = compute(n);
  } else {
    std::vector<std::future<mpz_class>> futs(max_level + 1);
    std::size_t next = 1;
    while (next <= max_level) {
      std::size_t batch = std::min<std::size_t>(jobs, max_level - next + 1);
      for (std::size_t i = 0; i < batch; ++i)
        futs[next + i] = std::async(std::launch::async, compute, next + i);
      for (std::size_t i = 0; i < batch; ++i) t.orders[next + i] = futs[next + i].get();
      next += batch;
    }
  }
  return t;
}

namespace {

std::string log_base_m(const mpz_class& order, unsigned m, int digits) {
  mpfr_t x, b;
  mpfr_init2(x, 256);
  mpfr_init2(b, 256);
  mpfr_set_z(x, order.get_mpz_t(), MPFR_RNDN);
  mpfr_log(x, x, MPFR_RNDN);
  mpfr_set_ui(b, m, MPFR_RNDN);
  mpfr_log(b, b, MPFR_RNDN);
  mpfr_div(x, x, b, MPFR_RNDN);
  char* s = nullptr;
  mpfr_asprintf(&s, "%.*Rg", digits, x);
  std::string out(s);
  mpfr_free_str(s);
  mpfr_clear(x);
  mpfr_clear(b);
  return out;
}

}  // namespace

std::string index_table_csv(const IndexTable& t) {
  std::string csv = "level,order,log_m_order\n";
  for (std::size_t n = 0; n < t.orders.size(); ++n) {
    csv += std::to_string(n);
    csv += ",";
    csv += t.orders[n].get_str();
    csv += ",";
    csv += log_base_m(t.orders[n], t.m, 30);
    csv += "\n";
  }
  return csv;
}

std::vector<Perm> naive_elements(std::span<const Perm> gens, std::size_t cap) {
  if (gens.empty()) return {};
  std::unordered_set<Perm, PermHash> seen;
  std::vector<Perm> out{Perm::identity(gens[0].degree())};
  seen.insert(out[0]);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& g : gens) {
      Perm y = out[i].then(g);
      if (seen.insert(y).second) {
        if (seen.size() > cap) throw BoundExceeded("naive enumeration exceeded cap");
        out.push_back(std::move(y));
      }
    }
  }
  return out;
}

mpz_class naive_order(std::span<const Perm> gens, std::size_t cap) {
  return mpz_class(static_cast<unsigned long>(naive_elements(gens, cap).size()));
}

}  // namespace arbor
