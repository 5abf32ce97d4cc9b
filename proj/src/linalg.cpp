#include "rnnt/linalg.hpp"

#include <cmath>

namespace rnnt {

Vec matvec(const Mat& m, const Vec& x, MacCounter* macs) {
  Vec y(static_cast<std::size_t>(m.rows()), 0.0);
  matvec_add(m, x, y, macs);
  return y;
}

void matvec_add(const Mat& m, const Vec& x, Vec& y, MacCounter* macs) {
  if (x.size() != static_cast<std::size_t>(m.cols()))
    throw Error(ErrorCode::SHAPE_MISMATCH,
                "matvec: vector length " + std::to_string(x.size()) +
                    " vs matrix cols " + std::to_string(m.cols()));
  if (y.size() != static_cast<std::size_t>(m.rows()))
    throw Error(ErrorCode::SHAPE_MISMATCH, "matvec: output length mismatch");
  const Vec& a = m.data();
  const std::size_t cols = static_cast<std::size_t>(m.cols());
  for (std::size_t r = 0; r < static_cast<std::size_t>(m.rows()); ++r) {
    double acc = y[r];
    const double* row = a.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  if (macs) macs->macs += static_cast<std::uint64_t>(m.rows() * m.cols());
}

Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LENGTH_MISMATCH, "vector add: length mismatch");
  Vec y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const Mat& m) { return all_finite(m.data()); }

void require_finite(const Vec& v, const char* what) {
  if (!all_finite(v))
    throw Error(ErrorCode::NONFINITE_INPUT, std::string(what));
}

}  // namespace rnnt
