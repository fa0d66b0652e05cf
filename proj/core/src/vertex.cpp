#include "arbor/vertex.hpp"

namespace arbor {

Vertex::Vertex(unsigned arity, std::vector<unsigned> letters) : m_(arity), w_(std::move(letters)) {
  check_arity(arity);
  for (unsigned x : w_)
    if (x >= m_) throw std::invalid_argument("vertex letter out of range for arity");
}

Vertex Vertex::parse(const std::string& digits, unsigned arity) {
  if (arity > 10) throw std::invalid_argument("digit-string vertices require arity <= 10");
  std::vector<unsigned> w;
  w.reserve(digits.size());
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("vertex string must be decimal digits");
    w.push_back(static_cast<unsigned>(c - '0'));
  }
  return Vertex(arity, std::move(w));
}

Vertex Vertex::child(unsigned letter) const {
  if (letter >= m_) throw std::invalid_argument("child letter out of range");
  Vertex v(*this);
  v.w_.push_back(letter);
  return v;
}

Vertex Vertex::parent() const {
  if (is_root()) throw std::invalid_argument("root has no parent");
  Vertex v(*this);
  v.w_.pop_back();
  return v;
}

Vertex Vertex::concat(const Vertex& below) const {
  if (below.m_ != m_) throw ArityMismatch("concat: arity mismatch");
  Vertex v(*this);
  v.w_.insert(v.w_.end(), below.w_.begin(), below.w_.end());
  return v;
}

Vertex Vertex::drop_front(std::size_t k) const {
  if (k > w_.size()) throw std::invalid_argument("drop_front past end");
  Vertex v(m_);
  v.w_.assign(w_.begin() + static_cast<std::ptrdiff_t>(k), w_.end());
  return v;
}

Vertex Vertex::prefix(std::size_t k) const {
  if (k > w_.size()) throw std::invalid_argument("prefix past end");
  Vertex v(m_);
  v.w_.assign(w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(k));
  return v;
}

bool Vertex::is_prefix_of(const Vertex& other) const {
  if (m_ != other.m_) throw ArityMismatch("is_prefix_of: arity mismatch");
  if (w_.size() > other.w_.size()) return false;
  return std::equal(w_.begin(), w_.end(), other.w_.begin());
}

std::uint64_t Vertex::level_rank() const {
  std::uint64_t r = 0;
  for (unsigned x : w_) r = r * m_ + x;
  return r;
}

Vertex Vertex::from_level_rank(unsigned arity, std::size_t level, std::uint64_t rank) {
  std::vector<unsigned> w(level);
  for (std::size_t i = level; i-- > 0;) {
    w[i] = static_cast<unsigned>(rank % arity);
    rank /= arity;
  }
  return Vertex(arity, std::move(w));
}

std::string Vertex::str() const {
  if (m_ > 10) throw std::invalid_argument("digit-string vertices require arity <= 10");
  std::string s;
  s.reserve(w_.size());
  for (unsigned x : w_) s.push_back(static_cast<char>('0' + x));
  return s;
}

bool Vertex::operator<(const Vertex& o) const {
  if (w_.size() != o.w_.size()) return w_.size() < o.w_.size();
  return w_ < o.w_;
}

bool is_comparable(const Vertex& u, const Vertex& v) {
  if (u.arity() != v.arity()) throw ArityMismatch("is_comparable: arity mismatch");
  return u.is_prefix_of(v) || v.is_prefix_of(u);
}

std::uint64_t vertex_to_int(const Vertex& v) {
  if (v.arity() != 2) throw ArityMismatch("vertex_to_int requires the binary tree");
  if (v.level() > 63) throw std::invalid_argument("vertex_to_int: word too long for 64 bits");
  std::uint64_t n = 0;
  const auto& w = v.letters();
  for (std::size_t i = 0; i < w.size(); ++i) n |= static_cast<std::uint64_t>(w[i]) << i;
  return n;
}

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
  std::size_t h = 1469598103934665603ull ^ v.arity();
  for (unsigned x : v.letters()) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  h ^= v.level() * 0x100000001b3ull;
  return h;
}

}  // namespace arbor
