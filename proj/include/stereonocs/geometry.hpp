#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace stereonocs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point in normalized object coordinate space. Values produced by this
/// library lie in [0,1]^3; arbitrary finite values are accepted as input.
using NocsPoint = Eigen::Vector3d;

/// Proper rotation matrix. Construction validates orthonormality and det = +1
/// (both within 1e-9); use `from_matrix_unchecked` only for values that are
/// rotations by construction.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}
    explicit Rotation(const Mat3& m);

    static Rotation identity() { return {}; }
    static Rotation from_matrix_unchecked(const Mat3& m);
    static Rotation from_axis_angle(const Vec3& axis, double angle_rad);
    static Rotation about_x(double angle_rad) { return from_axis_angle(Vec3::UnitX(), angle_rad); }
    static Rotation about_y(double angle_rad) { return from_axis_angle(Vec3::UnitY(), angle_rad); }
    static Rotation about_z(double angle_rad) { return from_axis_angle(Vec3::UnitZ(), angle_rad); }
    /// Nearest rotation (Frobenius) to an arbitrary 3x3 matrix, via SVD.
    static Rotation project(const Mat3& m);

    static bool is_valid(const Mat3& m, double tol = 1e-9);

    const Mat3& matrix() const { return m_; }
    Rotation inverse() const { return from_matrix_unchecked(m_.transpose()); }
    Rotation operator*(const Rotation& o) const { return from_matrix_unchecked(m_ * o.m_); }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }

    /// Geodesic angle to another rotation in radians, in [0, pi].
    double angle_to(const Rotation& o) const;

private:
    Mat3 m_;
};

/// Similarity transform from NOCS to the camera frame: X = s * R * q + t.
struct Pose {
    double scale = 1.0;  // meters per NOCS unit
    Rotation rotation;
    Vec3 translation = Vec3::Zero();  // meters

    Pose() = default;
    Pose(double s, const Rotation& r, const Vec3& t);

    Vec3 apply(const NocsPoint& q) const { return scale * (rotation * q) + translation; }
    /// Maps a camera-frame point back into NOCS.
    NocsPoint apply_inverse(const Vec3& x) const;
};

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w = 0, int h = 0);

    Mat3 matrix() const;
    Mat3 inverse_matrix() const;
};

/// Image location; u grows rightward, v downward, (0,0) is the center of the
/// top-left pixel.
struct Pixel {
    double u = 0.0;
    double v = 0.0;

    Eigen::Vector2d vec() const { return {u, v}; }
    Vec3 homogeneous() const { return {u, v, 1.0}; }
};

inline constexpr double kMinDepth = 1e-9;

Vec3 transform_nocs_to_camera(const NocsPoint& q, const Pose& pose);

/// Projects a NOCS point through the pose and pinhole intrinsics.
/// Throws NonPositiveDepth when the camera-frame depth is <= 1e-9.
Pixel project_nocs_point(const NocsPoint& q, const Pose& pose, const CameraIntrinsics& K);

/// Projects a camera-frame point. Same depth check as above.
Pixel project_point(const Vec3& x, const CameraIntrinsics& K);

/// depth * K^-1 * (u, v, 1). Throws NonPositiveDepth for depth <= 0.
Vec3 pixel_backproject(const Pixel& p, double depth, const CameraIntrinsics& K);

/// Unit-length viewing direction through a pixel.
Vec3 pixel_ray_direction(const Pixel& p, const CameraIntrinsics& K);

Mat3 skew(const Vec3& v);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double d) { return d * kPi / 180.0; }
constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace stereonocs
