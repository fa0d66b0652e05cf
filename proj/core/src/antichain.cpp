#include "arbor/antichain.hpp"

#include <algorithm>

#include <json.hpp>

namespace arbor {

namespace {

mpq_class pow_m_neg(unsigned m, std::size_t level) {
  mpz_class d;
  mpz_ui_pow_ui(d.get_mpz_t(), m, static_cast<unsigned long>(level));
  mpq_class q(1);
  q /= mpq_class(d);
  return q;
}

}  // namespace

Antichain::Antichain(unsigned arity, std::vector<Vertex> vertices) : m_(arity), v_(std::move(vertices)) {
  for (const auto& v : v_)
    if (v.arity() != m_) throw ArityMismatch("antichain member arity mismatch");
  std::sort(v_.begin(), v_.end());
  v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
  for (std::size_t i = 0; i < v_.size(); ++i)
    for (std::size_t j = i + 1; j < v_.size(); ++j)
      if (is_comparable(v_[i], v_[j]))
        throw std::invalid_argument("antichain members must be pairwise non-comparable");
}

std::size_t Antichain::max_level() const {
  std::size_t d = 0;
  for (const auto& v : v_) d = std::max(d, v.level());
  return d;
}

mpq_class Antichain::measure() const {
  mpq_class s(0);
  for (const auto& v : v_) s += pow_m_neg(m_, v.level());
  return s;
}

std::string Antichain::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& v : v_) j.push_back(v.str());
  return j.dump();
}

Antichain Antichain::from_json(const std::string& json, unsigned arity) {
  auto j = nlohmann::json::parse(json);
  std::vector<Vertex> vs;
  for (const auto& e : j) vs.push_back(Vertex::parse(e.get<std::string>(), arity));
  return Antichain(arity, std::move(vs));
}

AntichainSchema::AntichainSchema(unsigned arity, Rule rule, DepthFloor depth_floor, TailBound tail)
    : m_(arity), rule_(std::move(rule)), floor_(std::move(depth_floor)), tail_(std::move(tail)) {
  validate();
}

std::optional<mpq_class> AntichainSchema::tail_bound(std::size_t depth) const {
  if (!tail_) return std::nullopt;
  return tail_(depth);
}

std::optional<Vertex> AntichainSchema::vertex(std::size_t k) const {
  while (cache_.size() <= k) {
    std::size_t i = cache_.size();
    if (!cache_.empty() && !cache_.back().has_value()) {
      cache_.push_back(std::nullopt);
      continue;
    }
    auto v = rule_(i);
    if (v) {
      if (v->arity() != m_) throw ArityMismatch("schema vertex arity mismatch");
      if (v->level() < floor_(i))
        throw std::invalid_argument("schema vertex below its depth floor");
    }
    cache_.push_back(std::move(v));
  }
  return cache_[k];
}

void AntichainSchema::validate() const {
  // The floor must be non-decreasing and gain at least one level every m-1
  // terms (at most m-1 antichain vertices can share a level along a greedy
  // descent). For m = 2 this is the strictly increasing contract.
  std::size_t window = m_ - 1;
  std::vector<Vertex> seen;
  for (std::size_t k = 0; k < 64; ++k) {
    if (k > 0 && floor_(k) < floor_(k - 1))
      throw std::invalid_argument("schema depth floor must be non-decreasing");
    if (k >= window && floor_(k) <= floor_(k - window))
      throw std::invalid_argument("schema depth floor must grow every arity-1 terms");
    auto v = vertex(k);
    if (!v) break;
    for (const auto& u : seen)
      if (is_comparable(u, *v))
        throw std::invalid_argument("schema prefix is not an antichain");
    seen.push_back(*v);
  }
}

Antichain AntichainSchema::prefix_below(std::size_t depth) const {
  std::vector<Vertex> vs;
  for (std::size_t k = 0;; ++k) {
    if (floor_(k) > depth) break;
    auto v = vertex(k);
    if (!v) break;
    if (v->level() <= depth) vs.push_back(*v);
  }
  return Antichain(m_, std::move(vs));
}

bool AntichainSchema::exhausted_below(std::size_t depth) const {
  for (std::size_t k = 0;; ++k) {
    if (floor_(k) > depth) return false;
    auto v = vertex(k);
    if (!v) return true;
    if (v->level() > depth) return false;
  }
}

WeightedAntichain::WeightedAntichain(Antichain base) : finite_(std::move(base)) {}

WeightedAntichain::WeightedAntichain(Antichain base, std::map<Vertex, mpq_class> weights)
    : finite_(std::move(base)), weights_(std::move(weights)) {
  for (const auto& [v, w] : weights_) {
    if (w < 0 || w > 1) throw std::invalid_argument("weights must lie in [0,1]");
    (void)v;
  }
  for (const auto& v : finite_->vertices())
    if (!weights_.count(v)) throw std::invalid_argument("weight domain must equal the vertex set");
  if (weights_.size() != finite_->size())
    throw std::invalid_argument("weight domain must equal the vertex set");
}

WeightedAntichain::WeightedAntichain(AntichainSchema base) : schema_(std::move(base)) {}

WeightedAntichain::WeightedAntichain(AntichainSchema base, std::function<mpq_class(std::size_t)> weight)
    : schema_(std::move(base)), weight_fn_(std::move(weight)) {}

unsigned WeightedAntichain::arity() const { return finite_ ? finite_->arity() : schema_->arity(); }

mpq_class WeightedAntichain::weight_of(const Vertex& v, std::size_t index_hint) const {
  if (finite_) {
    if (weights_.empty()) return 1;
    return weights_.at(v);
  }
  if (!weight_fn_) return 1;
  mpq_class w = weight_fn_(index_hint);
  if (w < 0 || w > 1) throw std::invalid_argument("weights must lie in [0,1]");
  return w;
}

MuInterval mu(const WeightedAntichain& V, std::size_t depth) {
  unsigned m = V.arity();
  mpq_class lo(0);
  mpq_class shadow(0);  // unit-weight measure of the enumerated region
  bool complete;
  if (V.is_finite()) {
    complete = V.finite().max_level() <= depth;
    for (const auto& v : V.finite().vertices()) {
      if (v.level() > depth) continue;
      lo += V.weight_of(v, 0) * pow_m_neg(m, v.level());
      shadow += pow_m_neg(m, v.level());
    }
  } else {
    const auto& sch = V.schema();
    complete = sch.exhausted_below(depth);
    for (std::size_t k = 0;; ++k) {
      if (sch.depth_floor(k) > depth) break;
      auto v = sch.vertex(k);
      if (!v) break;
      if (v->level() > depth) continue;
      lo += V.weight_of(*v, k) * pow_m_neg(m, v->level());
      shadow += pow_m_neg(m, v->level());
    }
  }
  if (complete) return {lo, lo};
  if (!V.is_finite()) {
    // schemas may carry a sharp bound on the deeper members' measure
    auto tb = V.schema().tail_bound(depth);
    if (tb) return {lo, lo + *tb};
  }
  // Every level-`depth` vertex outside the shadow of the enumerated prefix
  // may carry tail vertices; their measure is at most 1 - shadow.
  mpq_class hi = lo + (1 - shadow);
  return {lo, hi};
}

AntichainSchema antichain_for_target(const mpq_class& gamma, unsigned arity) {
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("target measure must lie in [0,1]");
  // State walks the greedy expansion; members are emitted in discovery order,
  // which is graded lexicographic by construction.
  struct State {
    std::vector<Vertex> emitted;
    Vertex cursor;
    mpq_class remainder;
    bool done = false;
  };
  auto st = std::make_shared<State>();
  st->cursor = Vertex(arity);
  st->remainder = gamma;
  if (gamma == 1) {
    st->emitted.push_back(Vertex(arity));
    st->done = true;
  } else if (gamma == 0) {
    st->done = true;
  }
  unsigned m = arity;
  auto advance = [st, m]() {
    while (!st->done) {
      mpq_class scaled = st->remainder * m;
      mpz_class digit = scaled.get_num() / scaled.get_den();
      unsigned d = static_cast<unsigned>(digit.get_ui());
      bool emitted = false;
      for (unsigned x = 0; x < d; ++x) {
        st->emitted.push_back(st->cursor.child(x));
        emitted = true;
      }
      st->remainder = scaled - mpq_class(digit);
      if (st->remainder == 0) {
        st->done = true;
      } else {
        st->cursor = st->cursor.child(d);
      }
      if (emitted) return;
    }
  };
  auto rule = [st, advance](std::size_t k) -> std::optional<Vertex> {
    while (st->emitted.size() <= k && !st->done) advance();
    if (k < st->emitted.size()) return st->emitted[k];
    return std::nullopt;
  };
  // Each expansion step descends one level and emits at most m-1 members, so
  // the k-th member lives at level >= k/(m-1) + 1. The root singleton for
  // gamma = 1 sits at level 0 and needs its own floor.
  AntichainSchema::DepthFloor floor_fn;
  if (gamma == 1) {
    floor_fn = [](std::size_t k) { return k; };
  } else {
    floor_fn = [m](std::size_t k) -> std::size_t { return k / (m - 1) + 1; };
  }
  // Members deeper than `depth` all live below the single unconsumed subtree
  // the cursor had reached at that level.
  auto tail = [st, rule, m](std::size_t depth) -> mpq_class {
    while (!st->done && st->cursor.level() <= depth) {
      if (!rule(st->emitted.size())) break;
    }
    if (st->done) {
      mpq_class extra(0);
      for (const auto& v : st->emitted)
        if (v.level() > depth) extra += pow_m_neg(m, v.level());
      return extra;
    }
    return pow_m_neg(m, depth);
  };
  return AntichainSchema(arity, rule, floor_fn, tail);
}

bool is_transversal(const Antichain& Y, std::size_t check_depth) {
  if (check_depth < Y.max_level())
    throw std::invalid_argument("check_depth must cover the deepest vertex of Y");
  // Y is an antichain, so the level-`check_depth` shadows of its members are
  // disjoint; unique coverage of the whole level is exact measure 1.
  return Y.measure() == 1;
}

mpq_class parse_rational(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
  q.canonicalize();
  return q;
}

std::string rational_str(const mpq_class& q) { return q.get_str(); }

}  // namespace arbor
