#include "pcgk/harness/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <ostream>
#include <thread>

#include "pcgk/common/error.hpp"
#include "pcgk/dataorg/cloud_io.hpp"
#include "pcgk/dataorg/synthetic.hpp"
#include "pcgk/geometry/sampling.hpp"
#include "pcgk/harness/checkpoint.hpp"
#include "pcgk/harness/optimizer.hpp"
#include "pcgk/losses/losses.hpp"
#include "pcgk/tensor/ops.hpp"

namespace pcgk::harness {

using tensor::Value;

geometry::PointCloud prepare_cloud(const geometry::PointCloud& cloud, const RunConfig& cfg) {
    if (cloud.size() < cfg.n_points)
        throw DataError("cloud has " + std::to_string(cloud.size()) + " points, need at least n_points = " +
                        std::to_string(cfg.n_points));
    auto out = geometry::normalize_cloud(cloud);
    if (out.size() > cfg.n_points) {
        std::vector<geometry::Vec3> kept;
        for (auto i : geometry::farthest_point_sampling(out.points, cfg.n_points, 0)) kept.push_back(out.points[i]);
        out.points = std::move(kept);
        out = geometry::normalize_cloud(out);
    }
    return out;
}

std::vector<geometry::PointCloud> load_training_set(const RunConfig& cfg) {
    if (!cfg.manifest.empty()) {
        auto clouds = dataorg::load_dataset(cfg.manifest);
        for (std::size_t i = 0; i < clouds.size(); ++i) {
            try {
                clouds[i] = prepare_cloud(clouds[i], cfg);
            } catch (const DataError& e) {
                throw DataError("manifest entry " + std::to_string(i) + ": " + e.what());
            }
        }
        return clouds;
    }
    return dataorg::make_synthetic_dataset(cfg.per_class, cfg.n_points, cfg.data_seed);
}

std::vector<geometry::PointCloud> load_eval_set(const RunConfig& cfg) {
    return dataorg::make_synthetic_dataset(cfg.eval_per_class, cfg.n_points, cfg.eval_seed);
}

StepLosses compute_losses(const model::PointCG& net, const model::Batch& batch, const RunConfig& cfg) {
    model::ForwardOptions opts{cfg.enable_hpc, cfg.enable_cm, cfg.enable_aig};
    const auto out = net.forward(batch, opts);
    StepLosses s;
    Value cd = Value::scalar(0.0), cm = Value::scalar(0.0), gen = Value::scalar(0.0);
    if (cfg.enable_hpc && batch.h > 0) {
        cd = losses::chamfer(out.predicted, batch.target_patches, cfg.chamfer_mode, &batch.hidden_centers);
        s.cd = cd.item();
    }
    if (cfg.enable_cm) {
        cm = losses::cross_modal(out.z_point, out.z_image, cfg.weights.tau);
        s.cm = cm.item();
    }
    if (cfg.enable_aig) {
        const Value l1 = losses::l1_image(batch.target_images, out.generated);
        const Value second = cfg.weights.gen_loss == losses::GenLossKind::l1_msfr
                                 ? losses::msfr(batch.target_images, out.generated, cfg.weights.msfr_scales)
                                 : losses::l2_image(batch.target_images, out.generated);
        gen = tensor::add(tensor::scalar_mul(l1, cfg.weights.alpha), tensor::scalar_mul(second, cfg.weights.beta));
        s.l1 = l1.item();
        s.second = second.item();
    }
    s.total = losses::total_loss(cd, cm, gen, cfg.weights);
    return s;
}

namespace {

std::vector<std::optional<dataorg::Sample>> build_samples(const std::vector<geometry::PointCloud>& clouds,
                                                          const std::vector<std::size_t>& idx, const RunConfig& cfg,
                                                          std::size_t epoch) {
    std::vector<std::optional<dataorg::Sample>> out(idx.size());
    const auto params = cfg.sample_params();
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                out[i] = dataorg::build_sample(clouds[idx[i]], params, derive_seed(cfg.seed, epoch, idx[i]), idx[i]);
            } catch (const DataError&) {
                out[i].reset();
            }
        }
    };
    const std::size_t jobs = std::min(cfg.jobs, idx.size());
    if (jobs <= 1) {
        work(0, idx.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (idx.size() + jobs - 1) / jobs;
        for (std::size_t j = 0; j < jobs; ++j)
            pool.emplace_back(work, j * chunk, std::min(idx.size(), (j + 1) * chunk));
        for (auto& t : pool) t.join();
    }
    return out;
}

std::string csv_number(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

TrainResult pretrain(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream* log) {
    cfg.validate();
    return pretrain(cfg, load_training_set(cfg), out_dir, log);
}

TrainResult pretrain(const RunConfig& cfg, const std::vector<geometry::PointCloud>& clouds,
                     const std::filesystem::path& out_dir, std::ostream* log) {
    cfg.validate();
    if (clouds.empty()) throw DataError("pretrain: empty dataset");
    std::filesystem::create_directories(out_dir);
    TrainResult res;
    res.model = std::make_unique<model::PointCG>(model_config(cfg));
    auto& net = *res.model;
    save_checkpoint(out_dir / "checkpoint_init.pcgk", net.params(), cfg, 0, {});

    std::ofstream csv(out_dir / "losses.csv");
    if (!csv) throw DataError("cannot write '" + (out_dir / "losses.csv").string() + "'");
    csv << "epoch,L_CD,L_CM,L1,L_MSFR,L_total\n";

    const std::size_t n = clouds.size();
    const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = steps_per_epoch * cfg.epochs;
    const std::size_t warmup = steps_per_epoch * cfg.warmup_epochs;
    AdamW opt;
    std::size_t step = 0, seen = 0;
    std::vector<double> totals;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng shuffle_rng(derive_seed(cfg.seed, 0x5F0FF1E, epoch));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);

        EpochLosses ep;
        ep.epoch = epoch;
        std::size_t batches = 0;
        for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size) {
            const std::vector<std::size_t> idx(order.begin() + static_cast<long>(b0),
                                               order.begin() + static_cast<long>(std::min(n, b0 + cfg.batch_size)));
            std::vector<dataorg::Sample> samples;
            for (auto& s : build_samples(clouds, idx, cfg, epoch)) {
                if (s)
                    samples.push_back(std::move(*s));
                else
                    ++ep.skipped;
            }
            seen += idx.size();
            res.skipped += idx.size() - samples.size();
            if (static_cast<double>(res.skipped) > 0.05 * static_cast<double>(seen))
                throw DataError("pretrain: " + std::to_string(res.skipped) + " of " + std::to_string(seen) +
                                " samples skipped (limit 5%)");
            if (samples.empty()) continue;
            const auto batch = model::make_batch(samples);
            const auto losses = compute_losses(net, batch, cfg);
            net.params().zero_grad();
            tensor::backward(losses.total);
            opt.step(net.params(), cosine_lr(cfg.lr, step, total_steps, warmup), cfg.weight_decay);
            ++step;
            ++batches;
            ep.samples += samples.size();
            ep.cd += losses.cd;
            ep.cm += losses.cm;
            ep.l1 += losses.l1;
            ep.msfr += losses.second;
            ep.total += losses.total.item();
        }
        if (batches > 0) {
            const double inv = 1.0 / static_cast<double>(batches);
            ep.cd *= inv;
            ep.cm *= inv;
            ep.l1 *= inv;
            ep.msfr *= inv;
            ep.total *= inv;
        }
        res.history.push_back(ep);
        totals.push_back(ep.total);
        csv << epoch << ',' << csv_number(ep.cd) << ',' << csv_number(ep.cm) << ',' << csv_number(ep.l1) << ','
            << csv_number(ep.msfr) << ',' << csv_number(ep.total) << '\n';
        csv.flush();
        if (log)
            *log << "epoch " << epoch << "/" << cfg.epochs << " total " << ep.total << " cd " << ep.cd << " cm "
                 << ep.cm << " l1 " << ep.l1 << " msfr " << ep.msfr << " skipped " << ep.skipped << std::endl;
        const std::vector<double> tail(totals.end() - static_cast<long>(std::min<std::size_t>(5, totals.size())),
                                       totals.end());
        if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
            std::ostringstream name;
            name << "checkpoint_epoch" << std::setw(3) << std::setfill('0') << epoch << ".pcgk";
            save_checkpoint(out_dir / name.str(), net.params(), cfg, epoch, tail);
        }
        if (epoch == cfg.epochs) save_checkpoint(out_dir / "checkpoint_final.pcgk", net.params(), cfg, epoch, tail);
    }
    return res;
}

double smoothed_final_loss(const std::vector<EpochLosses>& history, std::size_t window) {
    if (history.empty()) throw DataError("smoothed_final_loss: empty history");
    const std::size_t w = std::min(window, history.size());
    double s = 0.0;
    for (std::size_t i = history.size() - w; i < history.size(); ++i) s += history[i].total;
    return s / static_cast<double>(w);
}

}  // namespace pcgk::harness
