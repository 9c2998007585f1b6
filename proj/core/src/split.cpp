#include "sliceq/split.hpp"

#include <cmath>
#include <stdexcept>

#include "sliceq/rng.hpp"

namespace sliceq {

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
    if (k > n) throw std::invalid_argument("kfold_split: k must be <= n");

    const std::vector<std::size_t> order = shuffled_indices(n, seed);
    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;  // first `extra` folds get one more
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + pos, order.begin() + pos + len);
        pos += len;
    }
    return folds;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& rows,
                                             double train_fraction,
                                             std::uint64_t seed) {
    if (rows.empty()) {
        throw std::invalid_argument("train_test_split: dataset is empty");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument(
            "train_test_split: train_fraction must be in (0,1)");
    }
    const std::size_t n = rows.size();
    const auto train_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * train_fraction));
    const std::vector<std::size_t> order = shuffled_indices(n, seed);

    Dataset train, test;
    train.reserve(train_n);
    test.reserve(n - train_n);
    for (std::size_t i = 0; i < n; ++i) {
        (i < train_n ? train : test).push_back(rows[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace sliceq
