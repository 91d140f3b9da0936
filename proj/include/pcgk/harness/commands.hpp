#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcgk/geometry/point_cloud.hpp"
#include "pcgk/harness/run_config.hpp"
#include "pcgk/metrics/probe.hpp"
#include "pcgk/model/pointcg.hpp"
#include "pcgk/render/image.hpp"

namespace pcgk::harness {

/// Three fixed viewpoints used for frozen-feature extraction.
std::vector<geometry::CameraPose> canonical_poses();

/// Max(T_E) averaged over the canonical poses.
std::vector<double> probe_features(const model::PointCG& net, const geometry::PointCloud& cloud, const RunConfig& cfg,
                                   std::size_t cloud_id);

struct ProbeData {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
};
/// Probe features and labels for every cloud. Throws DataError on an unlabeled cloud.
ProbeData probe_dataset(const model::PointCG& net, const std::vector<geometry::PointCloud>& clouds,
                        const RunConfig& cfg);

struct ProbeReport {
    std::vector<double> accuracies;  // per split
    double mean = 0.0;
};
/// metrics::linear_probe over split seeds derive_seed(seed, s), s < splits.
ProbeReport probe_splits(const ProbeData& data, std::uint64_t seed, std::size_t splits);
/// probe_dataset then probe_splits(cfg.seed, cfg.probe_splits).
ProbeReport run_probe(const model::PointCG& net, const std::vector<geometry::PointCloud>& clouds,
                      const RunConfig& cfg);

struct GenerationRow {
    std::size_t sample_id = 0;
    double cd = 0.0, mse = 0.0, psnr = 0.0, ssim = 0.0, nmi = 0.0;
};

struct GenerationReport {
    std::vector<GenerationRow> rows;
    double mean_cd = 0.0, mean_mse = 0.0, mean_ssim = 0.0, mean_nmi = 0.0;
    double mean_psnr = 0.0;  // over finite values
};

/// Completion Chamfer and image metrics per cloud, at input/target poses drawn
/// from derive_seed(cfg.eval_seed, index).
GenerationReport evaluate(const model::PointCG& net, const std::vector<geometry::PointCloud>& clouds,
                          const RunConfig& cfg);
void write_metrics_csv(const GenerationReport& report, const std::filesystem::path& path);

/// Completion inputs: `hpr_view`, `groups:<g>` or `partial:<npts>`.
struct CompletionResult {
    std::vector<geometry::Vec3> input;      // visible patches, absolute
    std::vector<geometry::Vec3> predicted;  // predicted hidden patches, absolute
    double chamfer_to_gt = 0.0;             // merged set against the complete cloud
};

CompletionResult complete_cloud(const model::PointCG& net, const geometry::PointCloud& cloud, const std::string& mode,
                                const geometry::CameraPose& pose, const RunConfig& cfg, std::uint64_t seed);

/// Generated image at target_pose from the visible set at input_pose, with the
/// ground-truth rendering.
struct GeneratedPair {
    render::ImageGrid generated, ground_truth;
};
GeneratedPair generate_view(const model::PointCG& net, const geometry::PointCloud& cloud,
                            const geometry::CameraPose& input_pose, const geometry::CameraPose& target_pose,
                            const RunConfig& cfg, std::uint64_t seed);

/// "az,el,dist" in radians.
geometry::CameraPose parse_pose(const std::string& text);

}  // namespace pcgk::harness
