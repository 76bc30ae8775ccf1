#include "drapegeom/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace drapegeom {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double as_double(const KeyValues& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw InvalidConfig("config key '" + key + "' is not a number: '" + it->second + "'");
    }
}

long as_long(const KeyValues& kv, const std::string& key, long fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        const long v = std::stol(it->second, &pos, 10);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw InvalidConfig("config key '" + key + "' is not an integer: '" + it->second + "'");
    }
}

std::string as_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string v = it->second;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        lineNo++;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineNo);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineNo);
        kv[key] = value;
    }
    return kv;
}

KeyValues load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        KeyValues kv;
        const auto j = nlohmann::json::parse(text);
        for (const auto& [key, value] : j.items()) {
            if (value.is_string())
                kv[key] = value.get<std::string>();
            else if (value.is_boolean())
                kv[key] = value.get<bool>() ? "1" : "0";
            else if (value.is_null())
                continue;
            else {
                std::ostringstream os;
                os.precision(17);
                os << value.get<double>();
                kv[key] = os.str();
            }
        }
        return kv;
    }
    return parse_key_values(text);
}

LossWeights weights_from(const KeyValues& kv, LossWeights base) {
    LossWeights w = base;
    w.lambda_pen = as_double(kv, "lambda_pen", w.lambda_pen);
    w.lambda_norm = as_double(kv, "lambda_norm", w.lambda_norm);
    w.lambda_bend = as_double(kv, "lambda_bend", w.lambda_bend);
    w.lambda_p = as_double(kv, "lambda_p", w.lambda_p);
    w.lambda_mc = as_double(kv, "lambda_mc", w.lambda_mc);
    w.lambda_rq8 = as_double(kv, "lambda_rq8", w.lambda_rq8);
    w.lambda_rq16 = as_double(kv, "lambda_rq16", w.lambda_rq16);
    w.lambda_rq32 = as_double(kv, "lambda_rq32", w.lambda_rq32);
    w.d_tol = as_double(kv, "d_tol_cm", w.d_tol);
    w.body_offset_fraction = as_double(kv, "body_offset_fraction", w.body_offset_fraction);
    if (kv.count("mc_clamp_threshold"))
        w.mc_clamp_threshold = as_double(kv, "mc_clamp_threshold", 0.0);
    w.validate();
    return w;
}

SpatialDefaults spatial_from(const KeyValues& kv, SpatialDefaults base) {
    SpatialDefaults s = base;
    s.poolingK = static_cast<int>(as_long(kv, "pooling_k", s.poolingK));
    s.downsampleFactor = static_cast<int>(as_long(kv, "downsample_factor", s.downsampleFactor));
    if (s.poolingK < 1 || s.downsampleFactor < 1)
        throw InvalidConfig("pooling_k and downsample_factor must be >= 1");
    return s;
}

RefineConfig refine_config_from(const KeyValues& kv, RefineConfig base) {
    RefineConfig c = base;
    c.weights = weights_from(kv, c.weights);
    if (kv.count("recipe")) c.recipe = parse_recipe(as_string(kv, "recipe", ""));
    c.steps = static_cast<int>(as_long(kv, "steps", c.steps));
    if (kv.count("optimizer")) c.optimizer = parse_optimizer(as_string(kv, "optimizer", ""));
    c.momentumBeta = as_double(kv, "momentum_beta", c.momentumBeta);
    c.adamBeta1 = as_double(kv, "adam_beta1", c.adamBeta1);
    c.adamBeta2 = as_double(kv, "adam_beta2", c.adamBeta2);
    c.adamEps = as_double(kv, "adam_eps", c.adamEps);
    c.stepSize = as_double(kv, "step_size_cm", c.stepSize);
    c.snapshotRefreshEvery =
        static_cast<int>(as_long(kv, "snapshot_refresh_every", c.snapshotRefreshEvery));
    c.traceEvery = static_cast<int>(as_long(kv, "trace_every", c.traceEvery));
    c.seed = static_cast<std::uint64_t>(as_long(kv, "seed", static_cast<long>(c.seed)));
    c.validate();
    return c;
}

SceneSpec scene_spec_from(const KeyValues& kv) {
    SceneSpec spec;
    spec.generator = as_string(kv, "generator", "");
    if (spec.generator.empty()) throw InvalidConfig("scene spec needs 'generator'");
    spec.seed = as_long(kv, "seed", 0);
    for (const auto& [key, value] : kv) {
        if (key == "generator" || key == "seed") continue;
        spec.params[key] = as_double(kv, key, 0.0);
    }
    return spec;
}

nlohmann::ordered_json resolved_weights_json(const LossWeights& w, const SpatialDefaults& s) {
    nlohmann::ordered_json j;
    j["lambda_pen"] = w.lambda_pen;
    j["lambda_norm"] = w.lambda_norm;
    j["lambda_bend"] = w.lambda_bend;
    j["lambda_p"] = w.lambda_p;
    j["lambda_mc"] = w.lambda_mc;
    j["lambda_rq8"] = w.lambda_rq8;
    j["lambda_rq16"] = w.lambda_rq16;
    j["lambda_rq32"] = w.lambda_rq32;
    j["d_tol_cm"] = w.d_tol;
    j["body_offset_fraction"] = w.body_offset_fraction;
    if (w.mc_clamp_threshold) j["mc_clamp_threshold"] = *w.mc_clamp_threshold;
    j["pooling_k"] = s.poolingK;
    j["downsample_factor"] = s.downsampleFactor;
    return j;
}

nlohmann::ordered_json resolved_refine_json(const RefineConfig& c) {
    nlohmann::ordered_json j = resolved_weights_json(c.weights, SpatialDefaults{});
    j["recipe"] = recipe_name(c.recipe);
    j["steps"] = c.steps;
    j["optimizer"] = optimizer_name(c.optimizer);
    j["momentum_beta"] = c.momentumBeta;
    j["adam_beta1"] = c.adamBeta1;
    j["adam_beta2"] = c.adamBeta2;
    j["adam_eps"] = c.adamEps;
    j["step_size_cm"] = c.stepSize;
    j["snapshot_refresh_every"] = c.snapshotRefreshEvery;
    j["trace_every"] = c.traceEvery;
    j["seed"] = c.seed;
    return j;
}

}  // namespace drapegeom
