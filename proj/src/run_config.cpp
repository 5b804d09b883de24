#include "fer/run_config.hpp"

#include <cstdlib>

#include <json.hpp>

#include "fer/error.hpp"

namespace fer {

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw config_error("config key '" + key + "': " + e.what());
    }
}

}  // namespace

void RunConfig::apply_json_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config file must hold a JSON object");

    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (key == "manifest") manifest = get_as<std::string>(v, key);
        else if (key == "alpha") alpha = get_as<double>(v, key);
        else if (key == "beta") beta = get_as<double>(v, key);
        else if (key == "seed") seed = get_as<std::uint64_t>(v, key);
        else if (key == "train_frac") train_frac = get_as<double>(v, key);
        else if (key == "val_frac") val_frac = get_as<double>(v, key);
        else if (key == "test_frac") test_frac = get_as<double>(v, key);
        else if (key == "lambda_t") lambda_t = get_as<double>(v, key);
        else if (key == "lambda_c") lambda_c = get_as<double>(v, key);
        else if (key == "lambda_r") lambda_r = get_as<double>(v, key);
        else if (key == "lr") lr = get_as<double>(v, key);
        else if (key == "batch") batch = get_as<int>(v, key);
        else if (key == "patience") patience = get_as<int>(v, key);
        else if (key == "max_epochs") max_epochs = get_as<int>(v, key);
        else if (key == "warmup") warmup = get_as<int>(v, key);
        else if (key == "normalization") normalization = get_as<std::string>(v, key);
        else if (key == "networks") networks = get_as<std::vector<std::string>>(v, key);
        else if (key == "monitor") monitor = get_as<std::string>(v, key);
        else if (key == "threads") threads = get_as<int>(v, key);
        else if (key == "out") out = get_as<std::string>(v, key);
        else if (key == "checkpoints") checkpoints = get_as<std::vector<std::string>>(v, key);
        else if (key == "classifier") classifier = get_as<std::string>(v, key);
        else if (key == "video") video = get_as<std::string>(v, key);
        else if (key == "parts") parts = get_as<std::vector<std::string>>(v, key);
        else if (key == "grid_axes") grid_axes = get_as<std::string>(v, key);
        else if (key == "grid_values") grid_values = get_as<std::vector<double>>(v, key);
        else if (key == "synth_videos_per_class") synth_videos_per_class = get_as<int>(v, key);
        else if (key == "synth_min_frames") synth_min_frames = get_as<int>(v, key);
        else if (key == "synth_max_frames") synth_max_frames = get_as<int>(v, key);
        else if (key == "synth_image_size") synth_image_size = get_as<int>(v, key);
        else if (key == "synth_landmark_noise") synth_landmark_noise = get_as<double>(v, key);
        else if (key == "synth_pixel_noise") synth_pixel_noise = get_as<double>(v, key);
        else if (key == "synth_video_jitter") synth_video_jitter = get_as<double>(v, key);
        else if (key == "synth_scale_jitter") synth_scale_jitter = get_as<double>(v, key);
        else throw config_error("unknown config key '" + key + "'");
    }
}

SplitConfig RunConfig::split_config() const {
    SplitConfig cfg;
    cfg.seed = seed;
    cfg.train = train_frac;
    cfg.validation = val_frac;
    cfg.test = test_frac;
    return cfg;
}

LossWeights RunConfig::lambdas() const { return {lambda_t, lambda_c, lambda_r}; }

TrainConfig RunConfig::train_config() const {
    TrainConfig cfg;
    cfg.lr = lr;
    cfg.batch_size = batch;
    cfg.max_epochs = max_epochs;
    cfg.patience = patience;
    cfg.lambdas = lambdas();
    cfg.seed = seed;
    if (normalization == "per-batch") cfg.norm = LossNormalization::PerBatch;
    else if (normalization == "raw-sum") cfg.norm = LossNormalization::RawSum;
    else throw config_error("normalization must be 'per-batch' or 'raw-sum'");
    for (const auto& name : networks) cfg.active.push_back(rep_from_name(name));
    cfg.monitor = rep_from_name(monitor);
    cfg.supervised_warmup_epochs = warmup;
    cfg.threads = threads;
    return cfg;
}

SyntheticConfig RunConfig::synthetic_config() const {
    SyntheticConfig cfg;
    cfg.videos_per_class = synth_videos_per_class;
    cfg.min_frames = synth_min_frames;
    cfg.max_frames = synth_max_frames;
    cfg.image_size = synth_image_size;
    cfg.landmark_noise = synth_landmark_noise;
    cfg.pixel_noise = synth_pixel_noise;
    cfg.video_jitter = synth_video_jitter;
    cfg.video_scale_jitter = synth_scale_jitter;
    cfg.seed = seed;
    return cfg;
}

GridSpec RunConfig::grid_spec() const {
    GridSpec spec;
    spec.axes = grid_axes;
    spec.values = grid_values;
    return spec;
}

std::filesystem::path RunConfig::out_dir() const {
    std::filesystem::path p(out);
    if (p.is_relative()) {
        if (const char* root = std::getenv("FER_OUT_ROOT")) p = std::filesystem::path(root) / p;
    }
    return p;
}

void RunConfig::validate() const {
    if (!(alpha > 0.0 && alpha < beta && beta < 1.0))
        throw config_error("need 0 < alpha < beta < 1");
    if (threads < 1) throw config_error("threads must be >= 1");
    if (batch < 2 || batch % 2) throw config_error("batch must be even and >= 2");
    if (lr <= 0) throw config_error("lr must be positive");
    if (lambda_t < 0 || lambda_c < 0 || lambda_r < 0)
        throw config_error("lambda values must be nonnegative");
    (void)train_config();  // validates normalization / network names
}

}  // namespace fer
