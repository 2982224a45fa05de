#pragma once

#include <random>
#include <string_view>
#include <utility>

#include "stereonocs/mesh.hpp"

namespace stereonocs::harness {

enum class Category { bottle, mug, cup };

std::string_view to_string(Category c);
/// Throws InvalidConfig for unknown names.
Category parse_category(std::string_view name);

/// Dimensions in meters. Which fields matter depends on the category:
///   bottle: height, radius, neck_radius, neck_fraction
///   cup:    height, radius (bottom), top_radius, wall
///   mug:    height, radius, wall, handle_radius, handle_tube
/// All shapes stand on y = 0 with +y up; the mug handle points along +x.
struct ShapeParams {
    double height = 0.2;
    double radius = 0.04;
    double neck_radius = 0.015;
    double neck_fraction = 0.3;  // share of the height taken by the neck
    double top_radius = 0.045;
    double wall = 0.005;
    double handle_radius = 0.03;  // centerline radius of the handle arc
    double handle_tube = 0.002;   // tube radius; kept below 0.4 * wall so the ends sit inside the wall
    int segments = 48;            // around the axis, multiple of 4
};

using Range = std::pair<double, double>;

/// Sampling ranges. Ratios are relative to `radius`, `height` or `wall` as named.
struct ShapeRanges {
    Range height;
    Range radius;
    Range neck_radius_ratio{0.3, 0.5};
    Range neck_fraction{0.25, 0.4};
    Range top_radius_ratio{1.15, 1.45};
    Range wall{0.004, 0.007};
    Range handle_radius_ratio{0.25, 0.33};  // of height
    Range handle_tube_ratio{0.25, 0.38};    // of wall

    static ShapeRanges defaults(Category c);
    void validate() const;
};

ShapeParams sample_shape_params(Category c, const ShapeRanges& ranges, std::mt19937_64& rng);

/// Closed (watertight) triangle mesh of the category. Throws InvalidParams.
TriangleMesh generate_parametric_mesh(Category c, const ShapeParams& p);

}  // namespace stereonocs::harness
