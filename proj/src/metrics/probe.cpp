#include "pcgk/metrics/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pcgk/common/error.hpp"
#include "pcgk/common/rng.hpp"

namespace pcgk::metrics {

void stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed,
                      std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    train.clear();
    test.clear();
    for (auto& [label, idx] : by_class) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
        // Fisher-Yates with the portable index draw.
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
        const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
        test.insert(test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
        train.insert(train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

ProbeResult linear_probe(const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
                         std::uint64_t split_seed, const ProbeOptions& opt) {
    const std::size_t n = features.size();
    if (n == 0 || labels.size() != n)
        throw DataError("linear_probe: " + std::to_string(n) + " feature rows for " + std::to_string(labels.size()) +
                        " labels");
    const std::size_t d = features[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != d) throw DataError("linear_probe: ragged feature row " + std::to_string(i));
        for (double x : features[i])
            if (!std::isfinite(x)) throw DataError("linear_probe: non-finite feature in row " + std::to_string(i));
    }
    std::map<int, std::size_t> class_of;
    for (int l : labels) class_of.emplace(l, 0);
    std::vector<int> class_labels;
    for (auto& [l, c] : class_of) {
        c = class_labels.size();
        class_labels.push_back(l);
    }
    const std::size_t C = class_labels.size();

    ProbeResult res;
    std::vector<std::size_t> train;
    stratified_split(labels, opt.test_fraction, split_seed, train, res.test_indices);
    std::vector<bool> seen(C, false);
    for (auto i : train) seen[class_of[labels[i]]] = true;
    for (std::size_t c = 0; c < C; ++c)
        if (!seen[c]) throw DataError("linear_probe: class " + std::to_string(class_labels[c]) + " absent from train split");
    res.n_train = train.size();
    res.n_test = res.test_indices.size();

    std::vector<double> mu(d, 0.0), sd(d, 0.0);
    for (auto i : train)
        for (std::size_t j = 0; j < d; ++j) mu[j] += features[i][j];
    for (auto& m : mu) m /= static_cast<double>(train.size());
    for (auto i : train)
        for (std::size_t j = 0; j < d; ++j) sd[j] += (features[i][j] - mu[j]) * (features[i][j] - mu[j]);
    for (auto& s : sd) {
        s = std::sqrt(s / static_cast<double>(train.size()));
        if (s < 1e-12) s = 1.0;
    }
    auto standardized = [&](std::size_t i) {
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = (features[i][j] - mu[j]) / sd[j];
        return x;
    };
    std::vector<std::vector<double>> xs;
    for (auto i : train) xs.push_back(standardized(i));

    std::vector<double> W(d * C, 0.0), b(C, 0.0), gW(d * C), gb(C), logits(C);
    auto scores = [&](const std::vector<double>& x) {
        for (std::size_t c = 0; c < C; ++c) {
            double s = b[c];
            for (std::size_t j = 0; j < d; ++j) s += x[j] * W[j * C + c];
            logits[c] = s;
        }
    };
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (std::size_t step = 0; step < opt.steps; ++step) {
        for (std::size_t j = 0; j < d * C; ++j) gW[j] = opt.l2 * W[j];
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t t = 0; t < train.size(); ++t) {
            scores(xs[t]);
            const double m = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (auto& l : logits) z += (l = std::exp(l - m));
            const std::size_t y = class_of[labels[train[t]]];
            for (std::size_t c = 0; c < C; ++c) {
                const double g = (logits[c] / z - (c == y ? 1.0 : 0.0)) * inv_n;
                gb[c] += g;
                for (std::size_t j = 0; j < d; ++j) gW[j * C + c] += g * xs[t][j];
            }
        }
        for (std::size_t j = 0; j < d * C; ++j) W[j] -= opt.lr * gW[j];
        for (std::size_t c = 0; c < C; ++c) b[c] -= opt.lr * gb[c];
    }

    std::size_t correct = 0;
    for (auto i : res.test_indices) {
        scores(standardized(i));
        const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
        res.predictions.push_back(class_labels[best]);
        correct += class_labels[best] == labels[i];
    }
    res.accuracy = res.n_test ? static_cast<double>(correct) / static_cast<double>(res.n_test) : 0.0;
    return res;
}

}  // namespace pcgk::metrics
