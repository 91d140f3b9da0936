#include "pcgk/harness/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "pcgk/common/error.hpp"

namespace pcgk::harness {

model::ModelConfig model_config(const RunConfig& cfg) {
    auto m = cfg.model;
    m.seed = cfg.seed;
    return m;
}

void save_checkpoint(const std::filesystem::path& path, const tensor::ParamStore& params, const RunConfig& config,
                     std::size_t epoch, const std::vector<double>& loss_tail) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint '" + path.string() + "' for writing");
    params.save(os);
    const nlohmann::json meta = {
        {"config", config.echo()}, {"epoch", epoch}, {"seed", config.seed}, {"loss_tail", loss_tail}};
    const std::string text = meta.dump();
    const std::uint64_t len = text.size();
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw DataError("write failed for checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint '" + path.string() + "'");
    Checkpoint ck{tensor::ParamStore::load(is), {}, 0, {}};
    const auto offset = static_cast<std::size_t>(is.tellg());
    std::uint64_t len = 0;
    if (!is.read(reinterpret_cast<char*>(&len), sizeof len))
        throw DataError(path.string() + ": missing metadata block at byte offset " + std::to_string(offset));
    if (len > (std::uint64_t{1} << 26)) throw DataError(path.string() + ": implausible metadata length");
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len)))
        throw DataError(path.string() + ": truncated metadata at byte offset " + std::to_string(offset + 8));
    try {
        const auto meta = nlohmann::json::parse(text);
        ck.config = RunConfig::parse(meta.at("config").get<std::string>(), path.string() + " (embedded config)");
        ck.epoch = meta.at("epoch").get<std::size_t>();
        ck.loss_tail = meta.at("loss_tail").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed metadata (" + e.what() + ")");
    }
    return ck;
}

model::PointCG model_from_checkpoint(const Checkpoint& ckpt) {
    model::PointCG net(model_config(ckpt.config));
    net.params().assign_from(ckpt.params);
    return net;
}

}  // namespace pcgk::harness
