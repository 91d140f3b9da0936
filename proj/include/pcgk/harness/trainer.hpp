#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "pcgk/geometry/point_cloud.hpp"
#include "pcgk/harness/run_config.hpp"
#include "pcgk/model/pointcg.hpp"

namespace pcgk::harness {

/// Normalizes and FPS-resamples to cfg.n_points (seed 0). Throws DataError when
/// the cloud has fewer than n_points points.
geometry::PointCloud prepare_cloud(const geometry::PointCloud& cloud, const RunConfig& cfg);
/// Training clouds: the manifest if set, otherwise the synthetic set.
std::vector<geometry::PointCloud> load_training_set(const RunConfig& cfg);
/// Held-out synthetic clouds (eval_per_class per class, eval_seed).
std::vector<geometry::PointCloud> load_eval_set(const RunConfig& cfg);

struct StepLosses {
    tensor::Value total;
    double cd = 0.0, cm = 0.0, l1 = 0.0, second = 0.0;  // second: MSFR or L2 per gen_loss
};

/// Total-loss graph for one batch with the ablation flags applied; disabled terms are
/// constant zeros and their branches are not evaluated.
StepLosses compute_losses(const model::PointCG& net, const model::Batch& batch, const RunConfig& cfg);

struct EpochLosses {
    std::size_t epoch = 0;
    double cd = 0.0, cm = 0.0, l1 = 0.0, msfr = 0.0, total = 0.0;
    std::size_t samples = 0, skipped = 0;
};

struct TrainResult {
    std::vector<EpochLosses> history;
    std::size_t skipped = 0;
    std::unique_ptr<model::PointCG> model;
};

/// Pre-training. Writes losses.csv, checkpoint_init.pcgk, checkpoint_epochNNN.pcgk
/// every checkpoint_every epochs and checkpoint_final.pcgk into out_dir. Samples
/// that stay degenerate after pose retries are skipped; more than 5% skips abort
/// with DataError. Progress lines go to `log` when given.
TrainResult pretrain(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

/// Same, on an explicit cloud list.
TrainResult pretrain(const RunConfig& cfg, const std::vector<geometry::PointCloud>& clouds,
                     const std::filesystem::path& out_dir, std::ostream* log = nullptr);

/// Mean of the last `window` epoch totals.
double smoothed_final_loss(const std::vector<EpochLosses>& history, std::size_t window = 5);

}  // namespace pcgk::harness
