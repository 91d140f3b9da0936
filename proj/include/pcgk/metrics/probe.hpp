#pragma once

#include <cstdint>
#include <vector>

namespace pcgk::metrics {

struct ProbeOptions {
    double test_fraction = 0.2;
    std::size_t steps = 500;
    double lr = 0.1;
    double l2 = 1e-4;
};

struct ProbeResult {
    double accuracy = 0.0;
    std::size_t n_train = 0, n_test = 0;
    std::vector<int> predictions;  // per test sample
    std::vector<std::size_t> test_indices;
};

/// Multinomial logistic regression on fixed features, trained by full-batch
/// gradient descent on a stratified split. Features are standardized with the
/// training-split mean and deviation. Returns held-out accuracy.
/// Throws DataError on inconsistent sizes, non-finite features, or a class
/// missing from the training split.
ProbeResult linear_probe(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                         std::uint64_t split_seed, const ProbeOptions& options = {});

/// Per class, a seeded shuffle sends round(fraction * n_c) samples to the test side.
void stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed,
                      std::vector<std::size_t>& train, std::vector<std::size_t>& test);

}  // namespace pcgk::metrics
