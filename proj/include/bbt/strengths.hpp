#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace bbt {

enum class Normalization { SumZero, Raw };

// Vector of team log-strengths. Win probabilities depend only on pairwise
// differences, so estimates carry an explicit normalization tag.
struct Strengths {
    std::vector<double> lambda;
    Normalization normalization = Normalization::Raw;

    int size() const { return static_cast<int>(lambda.size()); }
    double operator[](std::size_t i) const { return lambda[i]; }
    double& operator[](std::size_t i) { return lambda[i]; }

    // Shift to sum zero and tag accordingly.
    void recenter() {
        double mean = 0.0;
        for (double v : lambda)
            mean += v;
        mean /= lambda.empty() ? 1.0 : static_cast<double>(lambda.size());
        for (double& v : lambda)
            v -= mean;
        normalization = Normalization::SumZero;
    }

    double sum() const {
        double s = 0.0;
        for (double v : lambda)
            s += v;
        return s;
    }
};

inline Strengths zero_strengths(int n) {
    return Strengths{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                     Normalization::SumZero};
}

}  // namespace bbt
