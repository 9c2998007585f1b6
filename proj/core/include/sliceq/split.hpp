#ifndef SLICEQ_SPLIT_HPP
#define SLICEQ_SPLIT_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sliceq/types.hpp"

namespace sliceq {

/// Partitions {0..n-1} into k disjoint folds whose sizes differ by at most
/// one. Deterministic for a given seed. Throws std::invalid_argument unless
/// 2 <= k <= n.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

/// Shuffled train/test split with train size round(n * train_fraction).
/// Throws std::invalid_argument on an empty dataset or a fraction outside
/// the open interval (0,1).
std::pair<Dataset, Dataset> train_test_split(const Dataset& rows,
                                             double train_fraction,
                                             std::uint64_t seed);

}  // namespace sliceq

#endif  // SLICEQ_SPLIT_HPP
