#include "arbor/perm.hpp"

#include <numeric>
#include <stdexcept>

namespace arbor {

Perm::Perm(std::size_t n) : img_(n) { std::iota(img_.begin(), img_.end(), 0u); }

Perm::Perm(std::vector<std::uint32_t> images) : img_(std::move(images)) {
  std::vector<bool> seen(img_.size(), false);
  for (auto x : img_) {
    if (x >= img_.size() || seen[x]) throw std::invalid_argument("not a permutation");
    seen[x] = true;
  }
}

Perm Perm::transposition(std::size_t n, std::uint32_t a, std::uint32_t b) {
  Perm p(n);
  std::swap(p.img_[a], p.img_[b]);
  return p;
}

Perm Perm::cycle(std::size_t n) {
  Perm p(n);
  for (std::size_t i = 0; i < n; ++i) p.img_[i] = static_cast<std::uint32_t>((i + 1) % n);
  return p;
}

Perm Perm::from_cycles(std::size_t n, const std::vector<std::vector<std::uint32_t>>& cycles) {
  Perm p(n);
  for (const auto& c : cycles)
    for (std::size_t i = 0; i < c.size(); ++i) p.img_[c[i]] = c[(i + 1) % c.size()];
  // re-validate
  return Perm(std::move(p.img_));
}

bool Perm::is_identity() const {
  for (std::size_t i = 0; i < img_.size(); ++i)
    if (img_[i] != i) return false;
  return true;
}

Perm Perm::inverse() const {
  Perm p;
  p.img_.resize(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i) p.img_[img_[i]] = static_cast<std::uint32_t>(i);
  return p;
}

Perm Perm::then(const Perm& other) const {
  if (degree() != other.degree()) throw std::invalid_argument("perm degree mismatch");
  Perm p;
  p.img_.resize(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i) p.img_[i] = other.img_[img_[i]];
  return p;
}

Perm Perm::pow(long e) const {
  Perm base = e < 0 ? inverse() : *this;
  unsigned long k = e < 0 ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  Perm acc = identity(degree());
  while (k) {
    if (k & 1) acc = acc.then(base);
    base = base.then(base);
    k >>= 1;
  }
  return acc;
}

mpz_class Perm::order() const {
  mpz_class ord(1);
  for (const auto& c : cycles()) {
    mpz_class len(static_cast<unsigned long>(c.size()));
    mpz_lcm(ord.get_mpz_t(), ord.get_mpz_t(), len.get_mpz_t());
  }
  return ord;
}

std::vector<std::vector<std::uint32_t>> Perm::cycles() const {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<bool> seen(img_.size(), false);
  for (std::uint32_t s = 0; s < img_.size(); ++s) {
    if (seen[s] || img_[s] == s) continue;
    std::vector<std::uint32_t> c;
    std::uint32_t x = s;
    while (!seen[x]) {
      seen[x] = true;
      c.push_back(x);
      x = img_[x];
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::uint32_t Perm::smallest_moved() const {
  for (std::uint32_t i = 0; i < img_.size(); ++i)
    if (img_[i] != i) return i;
  return static_cast<std::uint32_t>(img_.size());
}

std::string Perm::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(img_[i]);
  }
  return s + "]";
}

std::size_t PermHash::operator()(const Perm& p) const noexcept {
  std::size_t h = 14695981039346656037ull;
  for (auto x : p.images()) {
    h ^= x;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint32_t perm_rank(const Perm& p) {
  std::size_t m = p.degree();
  std::uint32_t rank = 0;
  std::vector<std::uint32_t> img(p.images());
  // Lehmer code via selection sort counting.
  for (std::size_t i = 0; i < m; ++i) {
    std::uint32_t smaller = 0;
    for (std::size_t j = i + 1; j < m; ++j)
      if (img[j] < img[i]) ++smaller;
    rank = rank * static_cast<std::uint32_t>(m - i) + smaller;
  }
  return rank;
}

Perm perm_unrank(std::size_t m, std::uint32_t rank) {
  std::vector<std::uint32_t> lehmer(m, 0);
  for (std::size_t i = m; i-- > 0;) {
    lehmer[i] = rank % static_cast<std::uint32_t>(m - i);
    rank /= static_cast<std::uint32_t>(m - i);
  }
  std::vector<std::uint32_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<std::uint32_t> img(m);
  for (std::size_t i = 0; i < m; ++i) {
    img[i] = pool[lehmer[i]];
    pool.erase(pool.begin() + lehmer[i]);
  }
  return Perm(std::move(img));
}

}  // namespace arbor
