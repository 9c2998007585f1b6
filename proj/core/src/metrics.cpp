#include "sliceq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sliceq {

double r_squared(std::span<const double> actual,
                 std::span<const double> predicted) {
    if (actual.empty()) {
        throw std::invalid_argument("r_squared: empty input");
    }
    if (actual.size() != predicted.size()) {
        throw std::invalid_argument("r_squared: length mismatch");
    }
    const auto n = actual.size();
    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(n);

    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = actual[i] - mean;
        const double r = actual[i] - predicted[i];
        ss_tot += d * d;
        ss_res += r * r;
    }
    if (ss_tot == 0.0) {
        throw std::domain_error("r_squared: actual values have zero variance");
    }
    return 1.0 - ss_res / ss_tot;
}

}  // namespace sliceq
