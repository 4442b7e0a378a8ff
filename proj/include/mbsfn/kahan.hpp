#pragma once

namespace mbsfn {

/// Neumaier-compensated accumulator. The outage expansion sums terms of
/// alternating sign whose magnitudes can exceed the result by many orders,
/// so the running compensation is kept and folded in on read.
template <typename Real>
class CompensatedSum {
 public:
  void add(Real value) {
    const Real t = sum_ + value;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (value >= 0 ? value : -value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

}  // namespace mbsfn
