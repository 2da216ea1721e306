#pragma once

#include <cmath>

namespace garling::detail {

// Neumaier-compensated accumulator; the error term also rescues additions
// where the increment dominates the running sum.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace garling::detail
