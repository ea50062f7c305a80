#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace weakkam {

/// Largest torus dimension supported by the small fixed-capacity vector types.
inline constexpr int kMaxDim = 4;

/// Position / momentum / velocity vector of length d (stack storage, capacity kMaxDim).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// d x d block (Hessian blocks, frame components, heights).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
/// 2d x 2d linearized-flow matrix.
using PhaseMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim, 2 * kMaxDim>;

/// Reduce a coordinate to [0, 1).
inline double wrap_unit(double x) {
    double r = x - std::floor(x);
    // floor can round r up to exactly 1.0 for tiny negative x
    return r >= 1.0 ? 0.0 : r;
}

inline Vec wrap_torus(const Vec& q) {
    Vec r(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) r[i] = wrap_unit(q[i]);
    return r;
}

/// Nearest-image representative of a displacement on R^d / Z^d, components in [-1/2, 1/2).
inline double nearest_image(double dx) {
    return dx - std::floor(dx + 0.5);
}

inline Vec nearest_image(const Vec& dq) {
    Vec r(dq.size());
    for (Eigen::Index i = 0; i < dq.size(); ++i) r[i] = nearest_image(dq[i]);
    return r;
}

/// Point of T*T^d: q in [0,1)^d, p in R^d.
struct PhasePoint {
    Vec q;
    Vec p;

    int dim() const { return static_cast<int>(q.size()); }
};

/// Lagrangian plane spanned by the columns of [X; Y].
struct TangentFrame {
    Mat X;
    Mat Y;

    static TangentFrame vertical(int d) {
        return {Mat::Zero(d, d), Mat::Identity(d, d)};
    }
    static TangentFrame horizontal(int d) {
        return {Mat::Identity(d, d), Mat::Zero(d, d)};
    }

    /// X^T Y - Y^T X, zero for Lagrangian frames.
    Mat symplectic_defect() const { return X.transpose() * Y - Y.transpose() * X; }
};

/// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm_sym(const Mat& S);
/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue_sym(const Mat& S);
/// Largest eigenvalue of a symmetric matrix.
double max_eigenvalue_sym(const Mat& S);

}  // namespace weakkam
