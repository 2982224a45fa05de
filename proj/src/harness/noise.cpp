#include "stereonocs/harness/noise.hpp"

#include <cmath>
#include <random>

#include "stereonocs/error.hpp"

namespace stereonocs::harness {

void NoiseModel::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidConfig, "sigma must be >= 0");
    if (!(dropout >= 0.0 && dropout <= 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout must lie in [0,1]");
    if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) throw Error(ErrorCode::InvalidConfig, "outlier rate must lie in [0,1]");
    if (erosion_radius < 0) throw Error(ErrorCode::InvalidConfig, "erosion radius must be >= 0");
}

void erode_mask(NocsMap& front, NocsMap& back, int radius) {
    if (radius <= 0) return;
    const int H = front.height(), W = front.width();
    const NocsMap src = front;
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            if (!src.masked(r, c)) continue;
            bool keep = true;
            for (int dr = -radius; dr <= radius && keep; ++dr) {
                for (int dc = -radius; dc <= radius && keep; ++dc) {
                    if (dr * dr + dc * dc > radius * radius) continue;
                    const int rr = r + dr, cc = c + dc;
                    keep = rr >= 0 && rr < H && cc >= 0 && cc < W && src.masked(rr, cc);
                }
            }
            if (!keep) {
                front.clear(r, c);
                back.clear(r, c);
            }
        }
    }
}

namespace {

void add_noise(NocsMap& map, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, sigma);
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (!map.masked(r, c)) continue;
            NocsPoint q = map.at(r, c);
            for (int k = 0; k < 3; ++k) q[k] += gauss(rng);
            map.set(r, c, q.cwiseMax(0.0).cwiseMin(1.0));
        }
    }
}

void replace_outliers(NocsMap& map, double rate, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (!map.masked(r, c)) continue;
            if (unit(rng) >= rate) continue;
            const double x = unit(rng), y = unit(rng), z = unit(rng);
            map.set(r, c, {x, y, z});
        }
    }
}

void drop_pixels(NocsMap& front, NocsMap& back, double rate, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < front.height(); ++r) {
        for (int c = 0; c < front.width(); ++c) {
            if (!front.masked(r, c)) continue;
            if (unit(rng) < rate) {
                front.clear(r, c);
                back.clear(r, c);
            }
        }
    }
}

}  // namespace

StereoMaps corrupt(const StereoMaps& maps, const NoiseModel& noise, std::uint64_t seed) {
    noise.validate();
    StereoMaps out = maps;
    if (noise.is_zero()) return out;

    std::mt19937_64 rng(seed);
    NocsMap* all[4] = {&out.left_front, &out.left_back, &out.right_front, &out.right_back};
    if (noise.sigma > 0.0) {
        for (NocsMap* m : all) add_noise(*m, noise.sigma, rng);
    }
    if (noise.dropout > 0.0) {
        drop_pixels(out.left_front, out.left_back, noise.dropout, rng);
        drop_pixels(out.right_front, out.right_back, noise.dropout, rng);
    }
    erode_mask(out.left_front, out.left_back, noise.erosion_radius);
    erode_mask(out.right_front, out.right_back, noise.erosion_radius);
    if (noise.outlier_rate > 0.0) {
        for (NocsMap* m : all) replace_outliers(*m, noise.outlier_rate, rng);
    }
    return out;
}

}  // namespace stereonocs::harness
