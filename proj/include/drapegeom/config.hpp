#pragma once

// Flat key-value configuration with explicit units in key names. Every
// canonical constant appears exactly once, as a struct default; config files
// override them. The resolved configuration embedded in JSON reports can be
// fed back as a config file and reproduces identical results.

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "drapegeom/losses.hpp"
#include "drapegeom/refine.hpp"
#include "drapegeom/scene.hpp"

namespace drapegeom {

inline constexpr const char* kToolName = "drapegeom";
inline constexpr const char* kToolVersion = "0.1.0";

// Spatial defaults that sit outside LossWeights.
struct SpatialDefaults {
    int poolingK = 15;
    int downsampleFactor = 10;
};

using KeyValues = std::map<std::string, std::string>;

// `key = value` lines, '#' comments. Throws ParseError with the line number.
KeyValues parse_key_values(const std::string& text);

// Reads a config file; accepts the key-value format or a flat JSON object
// (auto-detected), so resolved-config JSON round-trips as a config.
KeyValues load_config_file(const std::string& path);

LossWeights weights_from(const KeyValues& kv, LossWeights base = {});
RefineConfig refine_config_from(const KeyValues& kv, RefineConfig base = {});
SpatialDefaults spatial_from(const KeyValues& kv, SpatialDefaults base = {});
SceneSpec scene_spec_from(const KeyValues& kv);

// Fully resolved configuration blocks for reports and the golden-config test.
nlohmann::ordered_json resolved_weights_json(const LossWeights& w, const SpatialDefaults& s);
nlohmann::ordered_json resolved_refine_json(const RefineConfig& c);

}  // namespace drapegeom
