#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stereonocs/harness/noise.hpp"
#include "stereonocs/harness/scene.hpp"
#include "stereonocs/solver.hpp"

namespace stereonocs::harness {

/// `[section]` headers and `key = value` lines; `#` starts a comment.
/// Duplicate sections or keys are errors.
struct IniDocument {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

/// Throws InvalidConfig with the offending line number.
IniDocument parse_ini(std::istream& in);

enum class Method { decoupled, decoupled_front, joint };
std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct ExperimentConfig {
    std::vector<Category> categories{Category::bottle, Category::mug, Category::cup};
    SceneConfig scene;  // category and shape ranges are filled in per category
    std::map<Category, ShapeRanges> shapes{{Category::bottle, ShapeRanges::defaults(Category::bottle)},
                                           {Category::mug, ShapeRanges::defaults(Category::mug)},
                                           {Category::cup, ShapeRanges::defaults(Category::cup)}};
    std::vector<NoiseModel> levels{NoiseModel{}};
    std::vector<Method> methods{Method::decoupled, Method::joint};
    DecoupledConfig solver;
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::filesystem::path out_dir = "results";
    bool record_timing = false;  // off keeps the CSV byte-reproducible

    void validate() const;
    SceneConfig scene_for(Category c) const;
};

/// Recognized sections: scene, shape.bottle, shape.mug, shape.cup, noise,
/// solver, experiment. Unknown sections or keys are errors. Noise keys take
/// comma-separated lists; length-1 lists broadcast over the sweep.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Writes a config that parses back to `cfg`.
void write_experiment_config(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace stereonocs::harness
