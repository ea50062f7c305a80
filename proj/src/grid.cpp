#include "weakkam/grid.hpp"
#include "weakkam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace weakkam {

GridFunction::GridFunction(int n, int d, double fill) : n_(n), d_(d) {
    if (n < 2) throw InputError("grid needs at least 2 points per axis");
    if (d < 1 || d > kMaxDim) throw InputError("grid dimension out of range");
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
    values_.assign(total, fill);
}

GridFunction GridFunction::sample(int n, int d, const std::function<double(const Vec&)>& f) {
    GridFunction g(n, d);
    for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = f(g.point(i));
    return g;
}

MultiIndex GridFunction::multi_index(std::size_t flat) const {
    MultiIndex idx{};
    for (int a = 0; a < d_; ++a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(n_));
        flat /= static_cast<std::size_t>(n_);
    }
    return idx;
}

std::size_t GridFunction::flat_index(const MultiIndex& idx) const {
    std::size_t flat = 0;
    for (int a = d_ - 1; a >= 0; --a) {
        int i = idx[static_cast<std::size_t>(a)] % n_;
        if (i < 0) i += n_;
        flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    }
    return flat;
}

std::size_t GridFunction::shifted(std::size_t flat, int axis, int offset) const {
    std::size_t stride = 1;
    for (int a = 0; a < axis; ++a) stride *= static_cast<std::size_t>(n_);
    const int i = static_cast<int>((flat / stride) % static_cast<std::size_t>(n_));
    int j = (i + offset) % n_;
    if (j < 0) j += n_;
    return flat + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * stride;
}

Vec GridFunction::point(std::size_t flat) const {
    const auto idx = multi_index(flat);
    Vec q(d_);
    for (int a = 0; a < d_; ++a) q[a] = static_cast<double>(idx[static_cast<std::size_t>(a)]) / n_;
    return q;
}

double GridFunction::operator()(const Vec& q) const {
    MultiIndex base{};
    std::array<double, kMaxDim> frac{};
    for (int a = 0; a < d_; ++a) {
        const double x = wrap_unit(q[a]) * n_;
        const double fl = std::floor(x);
        base[static_cast<std::size_t>(a)] = static_cast<int>(fl);
        frac[static_cast<std::size_t>(a)] = x - fl;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d_); ++corner) {
        MultiIndex idx = base;
        double w = 1.0;
        for (int a = 0; a < d_; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (corner & (1 << a)) {
                idx[ua] += 1;
                w *= frac[ua];
            } else {
                w *= 1.0 - frac[ua];
            }
        }
        if (w != 0.0) acc += w * values_[flat_index(idx)];
    }
    return acc;
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void GridFunction::validate() const {
    if (values_.empty()) throw InputError("empty grid function");
    if (!all_finite()) throw InputError("grid function holds non-finite values");
}

namespace {

void require_same_shape(const GridFunction& a, const GridFunction& b) {
    if (a.n() != b.n() || a.dim() != b.dim()) throw InputError("grid functions live on different grids");
}

}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator+=(double a) {
    for (double& v : values_) v += a;
    return *this;
}

GridFunction& GridFunction::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator-(GridFunction a) { return a *= -1.0; }
GridFunction operator+(GridFunction a, double s) { return a += s; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

double sup_distance(const GridFunction& u, const GridFunction& v) {
    require_same_shape(u, v);
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
}

double sup_distance_mod_constants(const GridFunction& u, const GridFunction& v) {
    require_same_shape(u, v);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return 0.5 * (hi - lo);
}

}  // namespace weakkam
