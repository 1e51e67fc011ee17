#pragma once

#include <cmath>

namespace boltzlab {

// Neumaier-compensated accumulator. Moment series mix terms spanning many
// orders of magnitude, so plain summation loses the small ones.
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(double init) : sum_(init) {}

    KahanSum& operator+=(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace boltzlab
