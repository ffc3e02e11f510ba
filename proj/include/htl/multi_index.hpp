#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

namespace htl {

// Multi-index alpha in N^n for n = 1 or 2.
class MultiIndex {
 public:
  explicit MultiIndex(int a0) : dim_(1), e_{a0, 0} { check(); }
  MultiIndex(int a0, int a1) : dim_(2), e_{a0, a1} { check(); }

  static MultiIndex zero(int dim) {
    return dim == 1 ? MultiIndex(0) : MultiIndex(0, 0);
  }

  int dimension() const { return dim_; }
  int order() const { return e_[0] + e_[1]; }  // |alpha|
  int operator[](int i) const { return e_[i]; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.dim_ == b.dim_ && a.e_ == b.e_;
  }

 private:
  void check() const {
    for (int i = 0; i < dim_; ++i)
      if (e_[i] < 0) throw std::invalid_argument("MultiIndex: negative entry");
  }

  int dim_;
  std::array<int, 2> e_;
};

// H h_alpha = (2|alpha| + n) h_alpha.
inline double eigenvalue(const MultiIndex& alpha) {
  return 2.0 * alpha.order() + alpha.dimension();
}

// Dense enumeration of {alpha : |alpha| <= cap}, graded by |alpha|; within a
// grade d the entries are (d,0), (d-1,1), ..., (0,d).
class DegreeTable {
 public:
  DegreeTable(int dim, int cap) : dim_(dim), cap_(cap) {
    if (dim != 1 && dim != 2)
      throw std::invalid_argument("DegreeTable: dimension must be 1 or 2");
    if (cap < 0) throw std::invalid_argument("DegreeTable: negative cap");
  }

  int dimension() const { return dim_; }
  int cap() const { return cap_; }

  std::size_t size() const {
    const std::size_t c = static_cast<std::size_t>(cap_);
    return dim_ == 1 ? c + 1 : (c + 1) * (c + 2) / 2;
  }

  std::size_t index_of(const MultiIndex& a) const {
    if (a.dimension() != dim_ || a.order() > cap_)
      throw std::out_of_range("DegreeTable: index outside table");
    if (dim_ == 1) return static_cast<std::size_t>(a[0]);
    const std::size_t d = static_cast<std::size_t>(a.order());
    return d * (d + 1) / 2 + static_cast<std::size_t>(a[1]);
  }

  MultiIndex at(std::size_t i) const {
    if (i >= size()) throw std::out_of_range("DegreeTable: flat index too big");
    if (dim_ == 1) return MultiIndex(static_cast<int>(i));
    std::size_t d = 0;
    while ((d + 1) * (d + 2) / 2 <= i) ++d;
    const int a1 = static_cast<int>(i - d * (d + 1) / 2);
    return MultiIndex(static_cast<int>(d) - a1, a1);
  }

 private:
  int dim_;
  int cap_;
};

}  // namespace htl
