#include "arbor/selfsim.hpp"

#include <algorithm>
#include <map>

namespace arbor {

namespace {

using Word = std::vector<int>;  // symbols +-(i+1) over the generator list

Word reduce_free(Word w) {
  Word out;
  for (int s : w) {
    if (!out.empty() && out.back() == -s)
      out.pop_back();
    else
      out.push_back(s);
  }
  return out;
}

Word inverse_word(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
  return out;
}

struct WordSystem {
  unsigned m = 2;
  std::vector<Expr> gens;
  std::vector<Perm> labels;            // root label per generator
  std::vector<std::vector<int>> sec;   // sec[i][x]: 0 identity, +(j+1) generator j
  bool closed = true;

  static WordSystem build(const std::vector<Expr>& gens) {
    WordSystem ws;
    ws.gens = gens;
    ws.m = gens[0].arity();
    for (Expr g : gens) ws.labels.push_back(root_label(g));
    for (Expr g : gens) {
      std::vector<int> row(ws.m, 0);
      for (unsigned x = 0; x < ws.m && ws.closed; ++x) {
        Expr s = section_letter(g, x);
        if (s.kind() == ExprKind::Identity) {
          row[x] = 0;
          continue;
        }
        auto it = std::find(gens.begin(), gens.end(), s);
        if (it == gens.end()) {
          ws.closed = false;
          break;
        }
        row[x] = static_cast<int>(it - gens.begin()) + 1;
      }
      ws.sec.push_back(std::move(row));
      if (!ws.closed) break;
    }
    return ws;
  }

  Perm word_label(const Word& w) const {
    Perm p = Perm::identity(m);
    for (int s : w) {
      const Perm& l = labels[static_cast<std::size_t>(std::abs(s)) - 1];
      p = p.then(s > 0 ? l : l.inverse());
    }
    return p;
  }

  Word word_section(const Word& w, unsigned letter) const {
    Word out;
    unsigned cur = letter;
    for (int s : w) {
      std::size_t i = static_cast<std::size_t>(std::abs(s)) - 1;
      if (s > 0) {
        int t = sec[i][cur];
        if (t) out.push_back(t);
        cur = labels[i](cur);
      } else {
        unsigned pre = labels[i].inverse()(cur);
        int t = sec[i][pre];
        if (t) out.push_back(-t);
        cur = pre;
      }
    }
    return reduce_free(out);
  }

  std::vector<long> exponents(const Word& w) const {
    std::vector<long> e(gens.size(), 0);
    for (int s : w) e[static_cast<std::size_t>(std::abs(s)) - 1] += s > 0 ? 1 : -1;
    return e;
  }

  Expr word_expr(const Word& w) const {
    Expr acc = identity(m);
    for (int s : w) {
      Expr g = gens[static_cast<std::size_t>(std::abs(s)) - 1];
      acc = product(acc, s > 0 ? g : inverse(g));
    }
    return acc;
  }
};

// Hermite normal form of the lattice spanned by `rows` in Z^d; returns the
// d x d upper-triangular basis, or an empty matrix when the rank is < d.
std::vector<std::vector<mpz_class>> hnf(std::vector<std::vector<mpz_class>> rows, std::size_t d) {
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < d; ++col) {
    // eliminate below-pivot entries in this column by gcd row operations
    for (std::size_t r = pivot_row + 1; r < rows.size(); ++r) {
      while (rows[r][col] != 0) {
        if (rows[pivot_row][col] == 0) {
          std::swap(rows[pivot_row], rows[r]);
          continue;
        }
        mpz_class q = rows[r][col] / rows[pivot_row][col];
        for (std::size_t c = 0; c < d; ++c) rows[r][c] -= q * rows[pivot_row][c];
        if (rows[r][col] != 0) std::swap(rows[pivot_row], rows[r]);
      }
    }
    if (pivot_row < rows.size() && rows[pivot_row][col] != 0) {
      if (rows[pivot_row][col] < 0)
        for (std::size_t c = 0; c < d; ++c) rows[pivot_row][c] = -rows[pivot_row][c];
      ++pivot_row;
    }
  }
  if (pivot_row < d) return {};
  rows.resize(d);
  // reduce entries above each pivot
  for (std::size_t i = d; i-- > 0;) {
    for (std::size_t r = 0; r < i; ++r) {
      if (rows[i][i] == 0) continue;
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), rows[r][i].get_mpz_t(), rows[i][i].get_mpz_t());
      if (q != 0)
        for (std::size_t c = 0; c < d; ++c) rows[r][c] -= q * rows[i][c];
    }
  }
  return rows;
}

mpz_class hnf_index(const std::vector<std::vector<mpz_class>>& h) {
  if (h.empty()) return 0;
  mpz_class idx(1);
  for (std::size_t i = 0; i < h.size(); ++i) idx *= h[i][i];
  return idx;
}

struct AbLattice {
  std::vector<std::vector<mpz_class>> basis;  // HNF, d x d
  mpz_class ab_order;
  bool ok = false;
};

// Relations lattice of the generator images in the abelianization of the
// level-n quotient.
AbLattice ab_lattice(const std::vector<Expr>& gens, std::size_t n, std::size_t product_cap) {
  AbLattice out;
  LevelQuotient Q = quotient(gens, n);
  LevelQuotient D = Q.derived_subgroup();
  std::size_t d = gens.size();
  std::vector<Perm> perms = Q.generators();
  // image orders modulo the derived subgroup
  std::vector<unsigned long> ord(d, 1);
  mpz_class box(1);
  for (std::size_t i = 0; i < d; ++i) {
    Perm acc = perms[i];
    unsigned long o = 1;
    while (!D.contains(acc)) {
      acc = acc.then(perms[i]);
      ++o;
      if (o > product_cap) return out;  // unbounded abelianization direction
    }
    ord[i] = o;
    box *= o;
  }
  if (box > product_cap) return out;
  // enumerate the residue box and collect relation vectors
  std::vector<std::vector<mpz_class>> rows;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<mpz_class> r(d, 0);
    r[i] = ord[i];
    rows.push_back(std::move(r));
  }
  std::vector<unsigned long> e(d, 0);
  std::size_t members = 0;
  for (;;) {
    // compute product for the current exponent vector
    Perm p = Perm::identity(Q.degree());
    for (std::size_t i = 0; i < d; ++i)
      for (unsigned long k = 0; k < e[i]; ++k) p = p.then(perms[i]);
    if (D.contains(p)) {
      ++members;
      bool zero = std::all_of(e.begin(), e.end(), [](unsigned long v) { return v == 0; });
      if (!zero) {
        std::vector<mpz_class> r(d);
        for (std::size_t i = 0; i < d; ++i) r[i] = static_cast<unsigned long>(e[i]);
        rows.push_back(std::move(r));
      }
    }
    std::size_t i = 0;
    while (i < d && ++e[i] == ord[i]) e[i++] = 0;
    if (i == d) break;
  }
  out.basis = hnf(std::move(rows), d);
  if (out.basis.empty()) return out;
  out.ab_order = Q.order() / D.order();
  // sanity: box / members must equal |Q/D|
  mpz_class check = box / static_cast<unsigned long>(members);
  if (check != out.ab_order) return out;
  out.ok = true;
  return out;
}

// Derived-subgroup generator expressions: commutators of the generators
// closed under conjugation until the level-`level` image stabilizes.
std::vector<Expr> derived_generator_exprs(const std::vector<Expr>& gens, std::size_t level) {
  std::vector<Expr> out;
  CellChain chain(gens[0].arity(), level);
  auto try_add = [&](Expr e) {
    LabelVec lv = LabelVec::from_expr(e, level);
    if (lv.is_identity()) return;
    if (chain.contains(lv)) return;
    chain.add_generator(lv);
    out.push_back(e);
  };
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) try_add(commutator(gens[i], gens[j]));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (Expr q : gens) try_add(conjugate(out[i], q));
  return out;
}

}  // namespace

SelfSimTable selfsimilar_index_table(const std::vector<Expr>& gens, std::size_t max_level,
                                     const SelfSimOptions& opt) {
  if (gens.empty()) throw std::invalid_argument("empty generating set");
  unsigned m = gens[0].arity();
  SelfSimTable out;
  out.table.m = m;
  out.table.orders.assign(max_level + 1, mpz_class(1));

  std::size_t d0 = opt.direct_levels;
  if (d0 == 0) {
    d0 = 1;
    while (pow_u64(m, d0 + 1) <= 256) ++d0;
  }
  d0 = std::min(d0, max_level);
  for (std::size_t n = 1; n <= d0; ++n) out.table.orders[n] = quotient(gens, n).order();
  out.cert.direct_to = d0;
  if (max_level <= d0 || opt.force_direct) {
    for (std::size_t n = d0 + 1; n <= max_level; ++n) out.table.orders[n] = quotient(gens, n).order();
    return out;
  }

  WordSystem ws = WordSystem::build(gens);
  bool recursion_ok = ws.closed && d0 >= 2;
  AbLattice La, Lb;
  if (recursion_ok) {
    La = ab_lattice(gens, d0 - 1, 1u << 15);
    Lb = ab_lattice(gens, d0, 1u << 15);
    recursion_ok = La.ok && Lb.ok && La.basis == Lb.basis;
    out.cert.lattice_stabilized = recursion_ok;
    out.cert.certificate_level = d0;
  }

  LevelQuotient Qd0 = quotient(gens, d0);
  std::vector<Expr> kgens;
  if (recursion_ok) {
    // branching certificate: grafted derived generators land in the group
    kgens = derived_generator_exprs(gens, d0);
    bool branch = true;
    for (Expr k : kgens) {
      for (unsigned x = 0; x < m && branch; ++x) {
        Vertex v = Vertex(m).child(x);
        if (!Qd0.contains(graft(k, v))) branch = false;
      }
      if (!branch) break;
    }
    out.cert.branch_certified = branch;
    recursion_ok = branch;
  }

  mpz_class layer_index = 0;
  if (recursion_ok) {
    // Schreier generators of St_G(1) as words
    std::map<Perm, Word> transversal;
    std::vector<Perm> queue{Perm::identity(m)};
    transversal[queue[0]] = Word{};
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        Perm p = queue[i].then(ws.labels[gi]);
        if (!transversal.count(p)) {
          Word w = transversal[queue[i]];
          w.push_back(static_cast<int>(gi) + 1);
          transversal[p] = std::move(w);
          queue.push_back(p);
        }
      }
    std::vector<Word> schreier;
    for (const auto& [p, w] : transversal)
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        Word full = w;
        full.push_back(static_cast<int>(gi) + 1);
        Perm p2 = p.then(ws.labels[gi]);
        Word back = inverse_word(transversal.at(p2));
        full.insert(full.end(), back.begin(), back.end());
        full = reduce_free(std::move(full));
        if (!full.empty()) schreier.push_back(std::move(full));
      }
    // index of the psi(St(1)) image inside (Q/Q')^m
    std::size_t d = gens.size();
    std::vector<std::vector<mpz_class>> rows;
    for (unsigned block = 0; block < m; ++block)
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<mpz_class> r(static_cast<std::size_t>(m) * d, 0);
        for (std::size_t c = 0; c < d; ++c) r[block * d + c] = Lb.basis[i][c];
        rows.push_back(std::move(r));
      }
    for (const Word& s : schreier) {
      std::vector<mpz_class> r(static_cast<std::size_t>(m) * d, 0);
      for (unsigned x = 0; x < m; ++x) {
        auto ex = ws.exponents(ws.word_section(s, x));
        for (std::size_t c = 0; c < d; ++c) r[x * d + c] = ex[c];
      }
      rows.push_back(std::move(r));
    }
    auto h = hnf(std::move(rows), static_cast<std::size_t>(m) * d);
    layer_index = hnf_index(h);
    if (layer_index == 0) recursion_ok = false;
  }

  if (recursion_ok) {
    // cross-validate: the recursion must reproduce the last direct order
    mpz_class num = out.table.orders[1] * out.table.orders[d0 - 1];
    for (unsigned i = 1; i < m; ++i) num *= out.table.orders[d0 - 1];
    mpz_class q, rem;
    mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), layer_index.get_mpz_t());
    out.cert.cross_validated = rem == 0 && q == out.table.orders[d0];
    recursion_ok = out.cert.cross_validated;
  }

  if (!recursion_ok) {
    for (std::size_t n = d0 + 1; n <= max_level; ++n) out.table.orders[n] = quotient(gens, n).order();
    return out;
  }

  out.cert.recursion_used = true;
  out.cert.layer_index = layer_index;
  for (std::size_t n = d0 + 1; n <= max_level; ++n) {
    mpz_class num = out.table.orders[1];
    for (unsigned i = 0; i < m; ++i) num *= out.table.orders[n - 1];
    mpz_class q, rem;
    mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), layer_index.get_mpz_t());
    if (rem != 0) throw std::logic_error("layer index does not divide the recursion numerator");
    out.table.orders[n] = q;
  }
  return out;
}

}  // namespace arbor
