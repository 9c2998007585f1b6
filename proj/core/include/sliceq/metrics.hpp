#ifndef SLICEQ_METRICS_HPP
#define SLICEQ_METRICS_HPP

#include <span>

namespace sliceq {

/// Coefficient of determination, 1 - SS_res/SS_tot with SS_tot taken
/// around the mean of `actual`. May be negative for predictors worse than
/// the mean; equals 1 exactly when predicted == actual.
///
/// Throws std::invalid_argument on empty or length-mismatched inputs and
/// std::domain_error when `actual` has zero variance.
double r_squared(std::span<const double> actual,
                 std::span<const double> predicted);

}  // namespace sliceq

#endif  // SLICEQ_METRICS_HPP
