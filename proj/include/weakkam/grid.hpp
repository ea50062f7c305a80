#pragma once

#include "weakkam/types.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace weakkam {

using MultiIndex = std::array<int, kMaxDim>;

/// Metadata carried with a grid function through serialization.
struct GridMeta {
    Vec c;               ///< cohomology vector (empty = zero)
    double lambda = 0.0;
    double alpha = 0.0;
};

/// Periodic scalar field on the uniform grid {i / n}^d of T^d, stored with axis 0 fastest.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(int n, int d, double fill = 0.0);

    static GridFunction sample(int n, int d, const std::function<double(const Vec&)>& f);

    int n() const { return n_; }
    int dim() const { return d_; }
    std::size_t size() const { return values_.size(); }
    double spacing() const { return 1.0 / n_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    MultiIndex multi_index(std::size_t flat) const;
    /// Flat index of a multi-index, each component reduced mod n.
    std::size_t flat_index(const MultiIndex& idx) const;
    /// Flat index of the point `offset` cells away along `axis`.
    std::size_t shifted(std::size_t flat, int axis, int offset) const;
    /// Torus coordinates of a grid point.
    Vec point(std::size_t flat) const;

    /// Periodic piecewise-multilinear interpolation.
    double operator()(const Vec& q) const;

    double sup_norm() const;
    double mean() const;
    double max() const;
    double min() const;
    bool all_finite() const;
    /// Throws InputError if the grid is empty or holds non-finite values.
    void validate() const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator+=(double a);
    GridFunction& operator*=(double a);

    GridMeta meta;

private:
    int n_ = 0;
    int d_ = 0;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a);
GridFunction operator+(GridFunction a, double s);
GridFunction operator*(double s, GridFunction a);

/// max |u - v| over grid points.
double sup_distance(const GridFunction& u, const GridFunction& v);
/// min over constants a of max |u - v - a|.
double sup_distance_mod_constants(const GridFunction& u, const GridFunction& v);

}  // namespace weakkam
