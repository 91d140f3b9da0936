// pcgk: command-line front end for data generation, pre-training and evaluation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "pcgk/common/error.hpp"
#include "pcgk/dataorg/cloud_io.hpp"
#include "pcgk/dataorg/synthetic.hpp"
#include "pcgk/geometry/hpr.hpp"
#include "pcgk/harness/checkpoint.hpp"
#include "pcgk/harness/commands.hpp"
#include "pcgk/harness/trainer.hpp"
#include "pcgk/metrics/image_metrics.hpp"
#include "pcgk/render/image_io.hpp"
#include "pcgk/render/raster.hpp"

namespace fs = std::filesystem;
using namespace pcgk;
using harness::RunConfig;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3 };

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_file, "key=value config file");
    cmd->add_option("--set", c.sets, "override one config key (key=value), repeatable");
}

void apply_overrides(RunConfig& cfg, const Common& c) {
    if (!c.config_file.empty()) {
        const RunConfig file = RunConfig::load(c.config_file);
        for (const auto& key : RunConfig::keys()) cfg.set(key, file.get(key));
    }
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set '" + kv + "': expected key=value");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    harness::apply_env_overrides(cfg);
    cfg.validate();
}

RunConfig build_config(const Common& c) {
    RunConfig cfg;
    apply_overrides(cfg, c);
    return cfg;
}

// A checkpoint's own config is the base; files and --set layer on top, but the
// network always keeps the checkpoint's model shape.
struct Loaded {
    harness::Checkpoint ckpt;
    RunConfig cfg;
};

Loaded load_for_eval(const std::string& path, const Common& c) {
    Loaded out{harness::load_checkpoint(path), {}};
    out.cfg = out.ckpt.config;
    apply_overrides(out.cfg, c);
    out.cfg.model = out.ckpt.config.model;
    return out;
}

geometry::PointCloud read_input_cloud(const std::string& path, const RunConfig& cfg) {
    return harness::prepare_cloud(dataorg::load_cloud(path), cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcgk: point-cloud pre-training with completion, alignment and view generation"};
    app.require_subcommand(1);

    Common gen_c, hpr_c, render_c, pre_c, comp_c, genv_c, probe_c, eval_c;
    std::string out_dir = ".", cloud_path, pose_text = "0,0.5,1", ckpt_path, out_path, target_pose_text;
    std::string mode_text = "hpr_view", dataset_manifest, image_mode;
    std::size_t image_size = 0;
    std::size_t jobs = 0;
    std::size_t gen_classes = dataorg::kNumShapeClasses;
    std::optional<std::size_t> gen_per_class, gen_points;
    std::optional<std::uint64_t> gen_seed;

    auto* gen = app.add_subcommand("gen-data", "write the synthetic dataset (PLY files and manifest.csv)");
    add_common(gen, gen_c);
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--classes", gen_classes, "number of shape classes, taken in order")->check(CLI::Range(1, 4));
    gen->add_option("--per-class", gen_per_class, "clouds per class (default: config per_class)");
    gen->add_option("--points", gen_points, "points per cloud (default: config n_points)");
    gen->add_option("--seed", gen_seed, "dataset seed (default: config data_seed)");

    auto* hpr = app.add_subcommand("hpr", "split a cloud into visible and hidden points");
    add_common(hpr, hpr_c);
    hpr->add_option("--cloud", cloud_path, "PLY or OFF input")->required();
    hpr->add_option("--pose", pose_text, "camera az,el,dist (radians)");
    hpr->add_option("--out", out_dir, "output directory");

    auto* render = app.add_subcommand("render", "rasterize a cloud to PGM or PNG");
    add_common(render, render_c);
    render->add_option("--cloud,--in", cloud_path, "PLY or OFF input")->required();
    render->add_option("--pose", pose_text, "camera az,el,dist (radians)");
    render->add_option("--out", out_path, "image path (.pgm or .png)")->required();
    render->add_option("--mode", image_mode, "silhouette or depth (default: config render_mode)");
    render->add_option("--size", image_size, "image side in pixels (default: config img_size)");

    auto* pre = app.add_subcommand("pretrain", "pre-train and write losses.csv and checkpoints");
    add_common(pre, pre_c);
    pre->add_option("--out", out_dir, "run directory")->required();
    pre->add_option("--jobs", jobs, "parallel sample building");

    auto* comp = app.add_subcommand("complete", "complete a cloud from a partial input");
    add_common(comp, comp_c);
    comp->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    comp->add_option("--cloud", cloud_path, "PLY or OFF input")->required();
    comp->add_option("--mode", mode_text, "hpr_view, groups:<g> or partial:<npts>");
    comp->add_option("--pose", pose_text, "camera az,el,dist for hpr_view");
    comp->add_option("--out", out_dir, "output directory");

    auto* genv = app.add_subcommand("generate", "generate an image at a target view");
    add_common(genv, genv_c);
    genv->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    genv->add_option("--cloud", cloud_path, "PLY or OFF input")->required();
    genv->add_option("--pose", pose_text, "input camera az,el,dist");
    genv->add_option("--target-pose", target_pose_text, "target camera az,el,dist (default: input pose)");
    genv->add_option("--out", out_dir, "output directory");

    auto* probe = app.add_subcommand("probe", "linear probe on frozen encoder features");
    add_common(probe, probe_c);
    probe->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    probe->add_option("--dataset", dataset_manifest, "labelled manifest (default: held-out synthetic set)");
    probe->add_option("--out", out_path, "report file");

    auto* eval = app.add_subcommand("eval", "completion and image metrics on the held-out set");
    add_common(eval, eval_c);
    eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval->add_option("--out", out_dir, "output directory for metrics.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*gen) {
            auto cfg = build_config(gen_c);
            if (gen_per_class) cfg.per_class = *gen_per_class;
            if (gen_points) cfg.n_points = *gen_points;
            if (gen_seed) cfg.data_seed = *gen_seed;
            cfg.validate();
            auto clouds = dataorg::make_synthetic_dataset(cfg.per_class, cfg.n_points, cfg.data_seed);
            std::erase_if(clouds, [&](const geometry::PointCloud& c) {
                return static_cast<std::size_t>(*c.label) >= gen_classes;
            });
            dataorg::save_dataset(clouds, out_dir);
            std::cout << "wrote " << clouds.size() << " clouds to " << out_dir << "\n";
        } else if (*hpr) {
            const auto cfg = build_config(hpr_c);
            const auto cloud = dataorg::load_cloud(cloud_path);
            const auto split = geometry::hidden_point_removal(cloud, harness::parse_pose(pose_text), cfg.gamma);
            geometry::PointCloud vis, hid;
            for (auto i : split.visible) vis.points.push_back(cloud.points[i]);
            for (auto i : split.hidden) hid.points.push_back(cloud.points[i]);
            fs::create_directories(out_dir);
            dataorg::save_cloud(vis, fs::path(out_dir) / "visible.ply");
            if (!hid.empty()) dataorg::save_cloud(hid, fs::path(out_dir) / "hidden.ply");
            std::cout << "visible " << split.visible.size() << " hidden " << split.hidden.size() << "\n";
        } else if (*render) {
            const auto cfg = build_config(render_c);
            const auto cloud = dataorg::load_cloud(cloud_path);
            const auto mode = image_mode.empty() ? cfg.render_mode : render::parse_render_mode(image_mode);
            const auto size = image_size ? image_size : cfg.model.img_size;
            const auto img = render::rasterize(cloud.points, harness::parse_pose(pose_text), size, mode, cfg.fov_deg);
            render::write_image(img, out_path);
            std::cout << "wrote " << out_path << "\n";
        } else if (*pre) {
            auto cfg = build_config(pre_c);
            if (jobs) cfg.jobs = jobs;
            const auto res = harness::pretrain(cfg, out_dir, &std::cout);
            if (!res.history.empty())
                std::cout << "final smoothed loss " << harness::smoothed_final_loss(res.history) << " (epoch 1 "
                          << res.history.front().total << "), skipped " << res.skipped << "\n";
        } else if (*comp) {
            const auto l = load_for_eval(ckpt_path, comp_c);
            const auto net = harness::model_from_checkpoint(l.ckpt);
            const auto cloud = read_input_cloud(cloud_path, l.cfg);
            const auto res = harness::complete_cloud(net, cloud, mode_text, harness::parse_pose(pose_text), l.cfg, l.cfg.seed);
            geometry::PointCloud in{res.input, {}}, pred{res.predicted, {}}, merged{res.input, {}};
            merged.points.insert(merged.points.end(), res.predicted.begin(), res.predicted.end());
            fs::create_directories(out_dir);
            dataorg::save_cloud(in, fs::path(out_dir) / "input.ply");
            if (!pred.empty()) dataorg::save_cloud(pred, fs::path(out_dir) / "predicted.ply");
            dataorg::save_cloud(merged, fs::path(out_dir) / "merged.ply");
            std::cout << "input " << in.size() << " predicted " << pred.size() << " chamfer "
                      << metrics::format_metric(res.chamfer_to_gt) << "\n";
        } else if (*genv) {
            const auto l = load_for_eval(ckpt_path, genv_c);
            const auto net = harness::model_from_checkpoint(l.ckpt);
            const auto cloud = read_input_cloud(cloud_path, l.cfg);
            const auto in_pose = harness::parse_pose(pose_text);
            const auto tgt_pose = target_pose_text.empty() ? in_pose : harness::parse_pose(target_pose_text);
            const auto pair = harness::generate_view(net, cloud, in_pose, tgt_pose, l.cfg, l.cfg.seed);
            fs::create_directories(out_dir);
            render::write_image(pair.generated, fs::path(out_dir) / "generated.pgm");
            render::write_image(pair.ground_truth, fs::path(out_dir) / "ground_truth.pgm");
            render::write_image(pair.generated, fs::path(out_dir) / "generated.png");
            render::write_image(pair.ground_truth, fs::path(out_dir) / "ground_truth.png");
            const double m = metrics::mse(pair.ground_truth, pair.generated);
            std::cout << "mse,psnr,ssim,nmi\n"
                      << metrics::format_metric(m) << ',' << metrics::format_metric(metrics::psnr_from_mse(m)) << ','
                      << metrics::format_metric(metrics::ssim(pair.ground_truth, pair.generated)) << ','
                      << metrics::format_metric(metrics::nmi(pair.ground_truth, pair.generated)) << "\n";
        } else if (*probe) {
            const auto l = load_for_eval(ckpt_path, probe_c);
            const auto net = harness::model_from_checkpoint(l.ckpt);
            std::vector<geometry::PointCloud> clouds;
            if (dataset_manifest.empty()) {
                clouds = harness::load_eval_set(l.cfg);
            } else {
                clouds = dataorg::load_dataset(dataset_manifest);
                for (auto& c : clouds) c = harness::prepare_cloud(c, l.cfg);
            }
            const auto rep = harness::run_probe(net, clouds, l.cfg);
            std::ostringstream os;
            os << std::setprecision(6);
            os << "clouds " << clouds.size() << "\nsplits";
            for (double a : rep.accuracies) os << ' ' << a;
            os << "\nmean_accuracy " << rep.mean << "\n";
            std::cout << os.str();
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) throw DataError("cannot write " + out_path);
                f << os.str();
            }
        } else if (*eval) {
            const auto l = load_for_eval(ckpt_path, eval_c);
            const auto net = harness::model_from_checkpoint(l.ckpt);
            const auto rep = harness::evaluate(net, harness::load_eval_set(l.cfg), l.cfg);
            fs::create_directories(out_dir);
            harness::write_metrics_csv(rep, fs::path(out_dir) / "metrics.csv");
            std::cout << "samples " << rep.rows.size() << " cd " << rep.mean_cd << " mse " << rep.mean_mse << " psnr "
                      << rep.mean_psnr << " ssim " << rep.mean_ssim << " nmi " << rep.mean_nmi << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
