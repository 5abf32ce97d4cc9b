#pragma once

// Minimal dense double-precision kernels. The cost toolkit needs exact
// multiply-accumulate counts and bitwise-reproducible results, so the
// evaluation order of every kernel is fixed and instrumented.

#include <cstdint>
#include <vector>

#include "rnnt/error.hpp"

namespace rnnt {

using Vec = std::vector<double>;

struct MacCounter {
  std::uint64_t macs = 0;
};

// Row-major dense matrix. Shape metadata is validated against storage on
// construction and never mutated afterwards.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols), a_(checked_size(rows, cols), 0.0) {}
  Mat(std::int64_t rows, std::int64_t cols, Vec data)
      : rows_(rows), cols_(cols), a_(std::move(data)) {
    if (a_.size() != checked_size(rows, cols))
      throw Error(ErrorCode::SHAPE_MISMATCH,
                  "matrix storage does not match shape");
  }

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  std::int64_t size() const { return rows_ * cols_; }

  double& operator()(std::int64_t r, std::int64_t c) {
    return a_[static_cast<std::size_t>(r * cols_ + c)];
  }
  double operator()(std::int64_t r, std::int64_t c) const {
    return a_[static_cast<std::size_t>(r * cols_ + c)];
  }

  Vec& data() { return a_; }
  const Vec& data() const { return a_; }

 private:
  static std::size_t checked_size(std::int64_t rows, std::int64_t cols) {
    if (rows < 0 || cols < 0)
      throw Error(ErrorCode::SHAPE_MISMATCH, "negative matrix dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  std::int64_t rows_, cols_;
  Vec a_;
};

// y = M x, accumulated left to right in index order. Counts rows*cols MACs.
Vec matvec(const Mat& m, const Vec& x, MacCounter* macs = nullptr);

// y += M x without reallocating. Same counting and order as matvec.
void matvec_add(const Mat& m, const Vec& x, Vec& y, MacCounter* macs = nullptr);

Vec add(const Vec& a, const Vec& b);

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

void require_finite(const Vec& v, const char* what);

}  // namespace rnnt
