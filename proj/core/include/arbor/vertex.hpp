#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace arbor {

class ArityMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A vertex of the regular m-adic tree, addressed by its letter word from the
/// root. Letters are 0-indexed (the paper's alphabet 1..m maps to 0..m-1).
class Vertex {
public:
  Vertex() : m_(2) {}
  explicit Vertex(unsigned arity) : m_(arity) { check_arity(arity); }
  Vertex(unsigned arity, std::vector<unsigned> letters);

  /// Parses a digit string such as "0121" over arity m (m <= 10).
  static Vertex parse(const std::string& digits, unsigned arity);

  unsigned arity() const { return m_; }
  std::size_t level() const { return w_.size(); }
  bool is_root() const { return w_.empty(); }
  const std::vector<unsigned>& letters() const { return w_; }
  unsigned letter(std::size_t i) const { return w_[i]; }

  Vertex child(unsigned letter) const;
  Vertex parent() const;
  /// Concatenation: this vertex followed by the word of `below`.
  Vertex concat(const Vertex& below) const;
  /// Suffix after removing the first `k` letters.
  Vertex drop_front(std::size_t k) const;
  Vertex prefix(std::size_t k) const;

  bool is_prefix_of(const Vertex& other) const;

  /// Rank of this vertex among the vertices of its level, graded
  /// lexicographic (big-endian base-m value of the word).
  std::uint64_t level_rank() const;
  static Vertex from_level_rank(unsigned arity, std::size_t level, std::uint64_t rank);

  /// Digit-string form; requires arity <= 10.
  std::string str() const;

  bool operator==(const Vertex& o) const { return m_ == o.m_ && w_ == o.w_; }
  bool operator!=(const Vertex& o) const { return !(*this == o); }
  /// Graded lexicographic order: first by level, then lexicographic.
  bool operator<(const Vertex& o) const;

private:
  static void check_arity(unsigned m) {
    if (m < 2) throw std::invalid_argument("tree arity must be >= 2");
  }
  unsigned m_;
  std::vector<unsigned> w_;
};

/// True iff the words are equal or one is a prefix of the other.
bool is_comparable(const Vertex& u, const Vertex& v);

/// (v)_2 of the binary tree: for path x_1..x_n returns x_n 2^{n-1} + ... + x_1.
std::uint64_t vertex_to_int(const Vertex& v);

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept;
};

}  // namespace arbor
