#include "stereonocs/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "stereonocs/error.hpp"

namespace stereonocs {

Rotation::Rotation(const Mat3& m) : m_(m) {
    if (!is_valid(m)) {
        throw Error(ErrorCode::InvalidParams, "matrix is not a proper rotation");
    }
}

Rotation Rotation::from_matrix_unchecked(const Mat3& m) {
    Rotation r;
    r.m_ = m;
    return r;
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle_rad) {
    return from_matrix_unchecked(Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix());
}

Rotation Rotation::project(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1.0;
    return from_matrix_unchecked(svd.matrixU() * d * svd.matrixV().transpose());
}

bool Rotation::is_valid(const Mat3& m, double tol) {
    if (!m.allFinite()) return false;
    const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

double Rotation::angle_to(const Rotation& o) const {
    // acos of the trace loses half the digits near zero; the quaternion form does not.
    return Eigen::AngleAxisd(Mat3(m_ * o.m_.transpose())).angle();
}

Pose::Pose(double s, const Rotation& r, const Vec3& t) : scale(s), rotation(r), translation(t) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidParams, "pose scale must be positive");
    if (!t.allFinite()) throw Error(ErrorCode::InvalidParams, "pose translation must be finite");
}

NocsPoint Pose::apply_inverse(const Vec3& x) const {
    return rotation.matrix().transpose() * (x - translation) / scale;
}

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidParams, "focal lengths must be positive");
}

Mat3 CameraIntrinsics::matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
    Mat3 k;
    k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
    return k;
}

Vec3 transform_nocs_to_camera(const NocsPoint& q, const Pose& pose) { return pose.apply(q); }

Pixel project_point(const Vec3& x, const CameraIntrinsics& K) {
    if (!(x.z() > kMinDepth)) throw Error(ErrorCode::NonPositiveDepth, "point at or behind the camera plane");
    return {K.fx * x.x() / x.z() + K.cx, K.fy * x.y() / x.z() + K.cy};
}

Pixel project_nocs_point(const NocsPoint& q, const Pose& pose, const CameraIntrinsics& K) {
    return project_point(pose.apply(q), K);
}

Vec3 pixel_backproject(const Pixel& p, double depth, const CameraIntrinsics& K) {
    if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "backprojection depth must be positive");
    return {depth * (p.u - K.cx) / K.fx, depth * (p.v - K.cy) / K.fy, depth};
}

Vec3 pixel_ray_direction(const Pixel& p, const CameraIntrinsics& K) {
    return Vec3((p.u - K.cx) / K.fx, (p.v - K.cy) / K.fy, 1.0).normalized();
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

}  // namespace stereonocs
