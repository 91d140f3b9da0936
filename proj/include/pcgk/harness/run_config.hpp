#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pcgk/dataorg/patches.hpp"
#include "pcgk/losses/losses.hpp"
#include "pcgk/model/config.hpp"
#include "pcgk/render/raster.hpp"

namespace pcgk::harness {

struct RunConfig {
    // Data: a manifest path, or synthetic shapes when empty.
    std::string manifest;
    std::size_t per_class = 50;
    std::size_t n_points = 256;
    std::uint64_t data_seed = 7;
    // Held-out synthetic set for probing and evaluation.
    std::size_t eval_per_class = 50;
    std::uint64_t eval_seed = 1007;
    // Probe accuracy is averaged over this many stratified splits.
    std::size_t probe_splits = 10;

    model::ModelConfig model;
    losses::LossWeights weights;

    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    double lr = 1e-3;
    double weight_decay = 0.05;
    std::size_t warmup_epochs = 2;
    std::uint64_t seed = 7;
    double gamma = 3.0;
    double fov_deg = 50.0;
    std::size_t checkpoint_every = 10;
    std::size_t jobs = 1;

    bool enable_hpc = true, enable_cm = true, enable_aig = true;
    losses::ChamferMode chamfer_mode = losses::ChamferMode::per_patch;
    render::RenderMode render_mode = render::RenderMode::depth;
    dataorg::InputMode input_mode = dataorg::InputMode::view1;

    /// Sets one field from its text form. Throws ConfigError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// All keys in a fixed order.
    static std::vector<std::string> keys();
    std::string get(const std::string& key) const;

    /// Throws ConfigError on violated invariants.
    void validate() const;

    /// key=value lines; parse(echo()) reproduces the config exactly.
    std::string echo() const;
    static RunConfig parse(const std::string& text, const std::string& source = "<string>");
    static RunConfig load(const std::filesystem::path& path);

    dataorg::SampleParams sample_params() const;

    bool operator==(const RunConfig& o) const { return echo() == o.echo(); }
};

/// Applies PCGK_SEED from the environment, if set.
void apply_env_overrides(RunConfig& cfg);

}  // namespace pcgk::harness
