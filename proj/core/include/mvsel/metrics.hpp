#pragma once

#include <span>

#include "mvsel/scenario.hpp"

namespace mvsel {

// Fraction of mismatched labels.
double error_rate(std::span<const VersionId> predicted, std::span<const VersionId> actual);

// Root relative squared error in percent:
//   100 * sqrt( sum (pred - actual)^2 / sum (train_mean - actual)^2 )
// Throws kDegenerateActuals when the denominator is zero.
double rrse(std::span<const double> predicted, std::span<const double> actual, double train_mean);

}  // namespace mvsel
