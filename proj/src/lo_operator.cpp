#include "weakkam/errors.hpp"
#include "weakkam/lo_solver.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace weakkam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxTableEntries = std::size_t{1} << 23;

// Brent minimum of g on [a, b] (golden section with parabolic steps).
template <class G>
double bracket_min(G&& g, double a, double b, int max_iters) {
    if (max_iters <= 0) return kInf;
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iters);
    return boost::math::tools::brent_find_minima(g, a, b, 40, iters).second;
}

}  // namespace

LaxOleinikOperator::LaxOleinikOperator(const HamiltonianModel& model, const SolverConfig& config)
    : model_(model), config_(config) {
    config_.validate(model.dim);
    kernel_ = make_kernel(model, config_);
    c_ = config_.c_vector(model.dim);
    n_ = config_.n;
    d_ = model.dim;
    shape_ = GridFunction(n_, d_);
    discount_ = std::exp(-config_.lambda * config_.tau);

    const double h = 1.0 / n_;
    reach_ = static_cast<int>(std::floor(kernel_.radius * kernel_.tau / h * (1.0 + 1e-12)));
    reach_ = std::max(reach_, 1);
    row_len_ = 1;
    for (int a = 0; a < d_; ++a) row_len_ *= static_cast<std::size_t>(2 * reach_ + 1);

    const std::size_t N = shape_.size();
    if (N * row_len_ <= kMaxTableEntries) {
        table_.resize(N * row_len_);
        const auto Np = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel
        {
            std::vector<double> row(row_len_);
#pragma omp for schedule(static)
            for (std::ptrdiff_t i = 0; i < Np; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                fill_row(ui, row);
                std::copy(row.begin(), row.end(), table_.begin() + static_cast<std::ptrdiff_t>(ui * row_len_));
            }
        }
    }
}

double LaxOleinikOperator::action(const Vec& q1, const Vec& delta) const {
    return segment_action(model_, q1, delta, kernel_.tau, config_.lambda, c_, config_.alpha, kernel_.quad_order);
}

void LaxOleinikOperator::fill_row(std::size_t i, std::vector<double>& row) const {
    const double h = 1.0 / n_;
    const double limit = kernel_.radius * kernel_.tau * (1.0 + 1e-12);
    const Vec q = shape_.point(i);
    const int side = 2 * reach_ + 1;
    Vec delta(d_);
    for (std::size_t r = 0; r < row_len_; ++r) {
        std::size_t rem = r;
        for (int a = 0; a < d_; ++a) {
            delta[a] = (static_cast<int>(rem % static_cast<std::size_t>(side)) - reach_) * h;
            rem /= static_cast<std::size_t>(side);
        }
        row[r] = delta.norm() > limit ? kInf : action(q, delta);
    }
}

double LaxOleinikOperator::minimize_at(const GridFunction& u, std::size_t i, std::vector<double>& row) const {
    const double* A;
    if (table_.empty()) {
        fill_row(i, row);
        A = row.data();
    } else {
        A = table_.data() + i * row_len_;
    }
    const double h = 1.0 / n_;
    const int side = 2 * reach_ + 1;
    const Vec q = shape_.point(i);

    if (d_ == 1) {
        const int ii = static_cast<int>(i);
        auto node = [&](int m) {
            int j = (ii - m) % n_;
            return j < 0 ? j + n_ : j;
        };
        double best = kInf;
        double curvature = 0.0;
        for (int k = 0; k < side; ++k) {
            if (!std::isfinite(A[k])) continue;
            best = std::min(best, discount_ * u[static_cast<std::size_t>(node(k - reach_))] + A[k]);
            if (k > 0 && k + 1 < side && std::isfinite(A[k - 1]) && std::isfinite(A[k + 1])) {
                curvature = std::max(curvature, std::abs(A[k + 1] - 2.0 * A[k] + A[k - 1]));
            }
        }
        if (!std::isfinite(best)) throw ConfigError("tau", "empty candidate set in Lax-Oleinik step");
        // the objective can dip below its smaller endpoint by at most max|A''| h^2 / 8 inside a cell,
        // plus the dip of the cubic through four nodes
        double slack = 2.0 * curvature / 8.0;
        if (config_.cubic) {
            double du2 = 0.0;
            for (int k = 0; k < side; ++k) {
                const double a = u[static_cast<std::size_t>(node(k - reach_ - 1))];
                const double b = u[static_cast<std::size_t>(node(k - reach_))];
                const double c = u[static_cast<std::size_t>(node(k - reach_ + 1))];
                du2 = std::max(du2, std::abs(a - 2.0 * b + c));
            }
            slack += 2.0 * discount_ * du2 / 8.0;
        }
        const double scan_best = best;
        Vec delta(1);
        for (int k = 0; k + 1 < side; ++k) {
            if (!std::isfinite(A[k]) || !std::isfinite(A[k + 1])) continue;
            const double u0 = u[static_cast<std::size_t>(node(k - reach_))];
            const double u1 = u[static_cast<std::size_t>(node(k + 1 - reach_))];
            const double f0 = discount_ * u0 + A[k];
            const double f1 = discount_ * u1 + A[k + 1];
            if (std::min(f0, f1) - slack > scan_best) continue;
            const double a = (k - reach_) * h;
            const double um = u[static_cast<std::size_t>(node(k - 1 - reach_))];
            const double u2 = u[static_cast<std::size_t>(node(k + 2 - reach_))];
            auto g = [&](double x) {
                const double s = (x - a) / h;
                delta[0] = x;
                double us = (1.0 - s) * u0 + s * u1;
                if (config_.cubic) {
                    // Lagrange cubic through the nodes at s = -1, 0, 1, 2
                    us = -s * (s - 1.0) * (s - 2.0) / 6.0 * um + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * u0 -
                         (s + 1.0) * s * (s - 2.0) / 2.0 * u1 + (s + 1.0) * s * (s - 1.0) / 6.0 * u2;
                }
                return discount_ * us + action(q, delta);
            };
            best = std::min(best, bracket_min(g, a, a + h, kernel_.refine_iters));
        }
        return best;
    }

    double best = kInf;
    std::size_t best_r = 0;
    for (std::size_t r = 0; r < row_len_; ++r) {
        if (!std::isfinite(A[r])) continue;
        std::size_t rem = r;
        MultiIndex idx = shape_.multi_index(i);
        for (int a = 0; a < d_; ++a) {
            idx[static_cast<std::size_t>(a)] -= static_cast<int>(rem % static_cast<std::size_t>(side)) - reach_;
            rem /= static_cast<std::size_t>(side);
        }
        const double f = discount_ * u[shape_.flat_index(idx)] + A[r];
        if (f < best) {
            best = f;
            best_r = r;
        }
    }
    if (!std::isfinite(best)) throw ConfigError("tau", "empty candidate set in Lax-Oleinik step");

    Vec delta(d_);
    std::size_t rem = best_r;
    for (int a = 0; a < d_; ++a) {
        delta[a] = (static_cast<int>(rem % static_cast<std::size_t>(side)) - reach_) * h;
        rem /= static_cast<std::size_t>(side);
    }
    auto objective = [&](const Vec& dl) { return discount_ * u(Vec(q - dl)) + action(q, dl); };
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (int a = 0; a < d_; ++a) {
            Vec trial = delta;
            const double center = delta[a];
            double arg = center;
            double local = kInf;
            auto g = [&](double x) {
                trial[a] = x;
                const double v = objective(trial);
                if (v < local) {
                    local = v;
                    arg = x;
                }
                return v;
            };
            bracket_min(g, center - h, center + h, kernel_.refine_iters);
            if (local < best) {
                best = local;
                delta[a] = arg;
            }
        }
    }
    return best;
}

GridFunction LaxOleinikOperator::apply(const GridFunction& u) const {
    if (u.n() != n_ || u.dim() != d_) throw InputError("grid function does not match the operator grid");
    u.validate();
    GridFunction out = u;
    const auto N = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel
    {
        std::vector<double> row(table_.empty() ? row_len_ : 0);
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < N; ++i) {
            out[static_cast<std::size_t>(i)] = minimize_at(u, static_cast<std::size_t>(i), row);
        }
    }
    return out;
}

GridFunction LaxOleinikOperator::apply_serial(const GridFunction& u) const {
    if (u.n() != n_ || u.dim() != d_) throw InputError("grid function does not match the operator grid");
    u.validate();
    GridFunction out = u;
    std::vector<double> row(table_.empty() ? row_len_ : 0);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = minimize_at(u, i, row);
    return out;
}

}  // namespace weakkam
