#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcgk/harness/run_config.hpp"
#include "pcgk/model/pointcg.hpp"
#include "pcgk/tensor/param_store.hpp"

namespace pcgk::harness {

/// ParamStore blob followed by u64 length and a UTF-8 JSON metadata block:
/// {"config": <echo text>, "epoch": E, "seed": S, "loss_tail": [...]}.
struct Checkpoint {
    tensor::ParamStore params;
    RunConfig config;
    std::size_t epoch = 0;
    std::vector<double> loss_tail;
};

void save_checkpoint(const std::filesystem::path& path, const tensor::ParamStore& params, const RunConfig& config,
                     std::size_t epoch, const std::vector<double>& loss_tail);
/// Throws DataError on a malformed file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// The model described by a checkpoint, with its parameters loaded.
model::PointCG model_from_checkpoint(const Checkpoint& ckpt);

/// Model config with the run seed applied.
model::ModelConfig model_config(const RunConfig& cfg);

}  // namespace pcgk::harness
