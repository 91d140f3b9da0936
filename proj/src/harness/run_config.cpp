#include "pcgk/harness/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "pcgk/common/error.hpp"

namespace pcgk::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        const auto x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return static_cast<T>(x);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

struct Field {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define PCGK_SIZE(name, member)                                                   \
    Field {                                                                       \
        name, [](const RunConfig& c) { return std::to_string(c.member); },        \
            [](RunConfig& c, const std::string& v) { c.member = parse_unsigned<decltype(c.member)>(name, v); } \
    }
#define PCGK_REAL(name, member)                                                   \
    Field {                                                                       \
        name, [](const RunConfig& c) { return fmt(c.member); },                   \
            [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); } \
    }
#define PCGK_BOOL(name, member)                                                   \
    Field {                                                                       \
        name, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, \
            [](RunConfig& c, const std::string& v) { c.member = parse_bool(name, v); } \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"manifest", [](const RunConfig& c) { return c.manifest; },
              [](RunConfig& c, const std::string& v) { c.manifest = v; }},
        PCGK_SIZE("per_class", per_class),
        PCGK_SIZE("n_points", n_points),
        PCGK_SIZE("data_seed", data_seed),
        PCGK_SIZE("eval_per_class", eval_per_class),
        PCGK_SIZE("eval_seed", eval_seed),
        PCGK_SIZE("probe_splits", probe_splits),
        PCGK_SIZE("d", model.d),
        PCGK_SIZE("heads", model.heads),
        PCGK_SIZE("enc_blocks", model.enc_blocks),
        PCGK_SIZE("dec_blocks", model.dec_blocks),
        PCGK_SIZE("mlp_ratio", model.mlp_ratio),
        PCGK_SIZE("v", model.v),
        PCGK_SIZE("h", model.h),
        PCGK_SIZE("k", model.k),
        PCGK_SIZE("k_v", model.k_v),
        PCGK_SIZE("patch_hidden", model.patch_hidden),
        PCGK_SIZE("pos_hidden", model.pos_hidden),
        PCGK_SIZE("img_size", model.img_size),
        PCGK_SIZE("gen_c0", model.gen_c0),
        PCGK_SIZE("gen_h0", model.gen_h0),
        PCGK_SIZE("gen_w0", model.gen_w0),
        PCGK_SIZE("feature_dim", model.feature_dim),
        PCGK_SIZE("proj_dim", model.proj_dim),
        PCGK_REAL("tau", weights.tau),
        PCGK_REAL("alpha", weights.alpha),
        PCGK_REAL("beta", weights.beta),
        PCGK_REAL("omega", weights.omega),
        PCGK_REAL("phi", weights.phi),
        PCGK_REAL("psi", weights.psi),
        PCGK_SIZE("msfr_scales", weights.msfr_scales),
        Field{"gen_loss", [](const RunConfig& c) { return losses::to_string(c.weights.gen_loss); },
              [](RunConfig& c, const std::string& v) { c.weights.gen_loss = losses::parse_gen_loss(v); }},
        PCGK_SIZE("epochs", epochs),
        PCGK_SIZE("batch_size", batch_size),
        PCGK_REAL("lr", lr),
        PCGK_REAL("weight_decay", weight_decay),
        PCGK_SIZE("warmup_epochs", warmup_epochs),
        PCGK_SIZE("seed", seed),
        PCGK_REAL("gamma", gamma),
        PCGK_REAL("fov_deg", fov_deg),
        PCGK_SIZE("checkpoint_every", checkpoint_every),
        PCGK_SIZE("jobs", jobs),
        PCGK_BOOL("enable_hpc", enable_hpc),
        PCGK_BOOL("enable_cm", enable_cm),
        PCGK_BOOL("enable_aig", enable_aig),
        Field{"chamfer_mode", [](const RunConfig& c) { return losses::to_string(c.chamfer_mode); },
              [](RunConfig& c, const std::string& v) { c.chamfer_mode = losses::parse_chamfer_mode(v); }},
        Field{"render_mode", [](const RunConfig& c) { return render::to_string(c.render_mode); },
              [](RunConfig& c, const std::string& v) { c.render_mode = render::parse_render_mode(v); }},
        Field{"input_mode", [](const RunConfig& c) { return dataorg::to_string(c.input_mode); },
              [](RunConfig& c, const std::string& v) { c.input_mode = dataorg::parse_input_mode(v); }},
    };
    return table;
}

#undef PCGK_SIZE
#undef PCGK_REAL
#undef PCGK_BOOL

const Field& find_field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) { find_field(key).set(*this, value); }

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
}

void RunConfig::validate() const {
    model.validate();
    weights.validate();
    if (!enable_hpc && !enable_cm && !enable_aig) throw ConfigError("at least one of enable_hpc, enable_cm, enable_aig must be true");
    if (manifest.empty() && (per_class == 0 || n_points < 64))
        throw ConfigError("synthetic data needs per_class >= 1 and n_points >= 64");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
    if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw ConfigError("fov_deg must be in (0, 180)");
    if (jobs == 0) throw ConfigError("jobs must be >= 1");
    if (probe_splits == 0) throw ConfigError("probe_splits must be >= 1");
    if (model.img_size % (std::size_t{1} << (weights.msfr_scales - 1)) != 0)
        throw ConfigError("img_size must be divisible by 2^(msfr_scales-1)");
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    for (const auto& f : fields()) os << f.key << '=' << f.get(*this) << '\n';
    return os.str();
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value, got '" + line + "'");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path.string());
}

dataorg::SampleParams RunConfig::sample_params() const {
    dataorg::SampleParams p;
    p.patch.v = model.v;
    p.patch.h = model.h;
    p.patch.k = model.k;
    p.patch.k_v = model.k_v;
    p.patch.gamma = gamma;
    p.patch.input_mode = input_mode;
    p.img_size = model.img_size;
    p.render_mode = render_mode;
    p.fov_deg = fov_deg;
    return p;
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* s = std::getenv("PCGK_SEED"); s && *s) {
        try {
            cfg.set("seed", s);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("PCGK_SEED: ") + e.what());
        }
    }
}

}  // namespace pcgk::harness
