#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace arbor {

/// Dense permutation of {0, ..., n-1}. Composition is left-to-right to match
/// the right action used throughout: (x)(p * q) = ((x)p)q.
class Perm {
public:
  Perm() = default;
  explicit Perm(std::size_t n);
  explicit Perm(std::vector<std::uint32_t> images);

  static Perm identity(std::size_t n) { return Perm(n); }
  static Perm transposition(std::size_t n, std::uint32_t a, std::uint32_t b);
  static Perm cycle(std::size_t n);  // 0 -> 1 -> ... -> n-1 -> 0
  static Perm from_cycles(std::size_t n, const std::vector<std::vector<std::uint32_t>>& cycles);

  std::size_t degree() const { return img_.size(); }
  std::uint32_t operator()(std::uint32_t x) const { return img_[x]; }
  const std::vector<std::uint32_t>& images() const { return img_; }

  bool is_identity() const;
  Perm inverse() const;
  /// this followed by other.
  Perm then(const Perm& other) const;
  Perm pow(long e) const;

  mpz_class order() const;
  std::vector<std::vector<std::uint32_t>> cycles() const;
  std::uint32_t smallest_moved() const;  // degree() when identity

  bool operator==(const Perm& o) const { return img_ == o.img_; }
  bool operator!=(const Perm& o) const { return img_ != o.img_; }
  bool operator<(const Perm& o) const { return img_ < o.img_; }

  std::string str() const;

private:
  std::vector<std::uint32_t> img_;
};

struct PermHash {
  std::size_t operator()(const Perm& p) const noexcept;
};

/// Lehmer rank of a permutation on m points; inverse of perm_unrank.
std::uint32_t perm_rank(const Perm& p);
Perm perm_unrank(std::size_t m, std::uint32_t rank);

}  // namespace arbor
