#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace cct {

// Exactly rounded floating-point summation, Shewchuk's growing-expansion
// algorithm with the final correct-rounding step from CPython's math.fsum.
// The result is the double closest to the exact real sum of the inputs, so
// it is invariant under any permutation of the inputs. Inputs must be finite.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < partials_.size(); ++j) {
      double y = partials_[j];
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  // Correctly rounded sum of everything added so far.
  double result() const {
    std::ptrdiff_t n = static_cast<std::ptrdiff_t>(partials_.size());
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // If the residual and the next partial share a sign, adding twice the
    // residual can flip the round-to-even decision; apply it when exact.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                  (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

  void reset() { partials_.clear(); }

 private:
  std::vector<double> partials_;
};

}  // namespace cct
