#include "weakkam/semiconcave.hpp"
#include "weakkam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace weakkam {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Second difference along the lattice direction `dir` with step `k` cells.
double second_difference(const GridFunction& u, std::size_t i, const MultiIndex& dir, int k) {
    const auto center = u.multi_index(i);
    MultiIndex fwd = center, bwd = center;
    for (int a = 0; a < u.dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        fwd[ua] += k * dir[ua];
        bwd[ua] -= k * dir[ua];
    }
    return u[u.flat_index(fwd)] - 2.0 * u[i] + u[u.flat_index(bwd)];
}

MultiIndex unit(int a) {
    MultiIndex e{};
    e[static_cast<std::size_t>(a)] = 1;
    return e;
}

MultiIndex diagonal(int a, int b, int sign) {
    MultiIndex e{};
    e[static_cast<std::size_t>(a)] = 1;
    e[static_cast<std::size_t>(b)] = sign;
    return e;
}

Mat hessian_at(const GridFunction& u, std::size_t i, int k) {
    const int d = u.dim();
    const double h = k * u.spacing();
    Mat H(d, d);
    for (int a = 0; a < d; ++a) {
        H(a, a) = second_difference(u, i, unit(a), k) / (h * h);
        for (int b = a + 1; b < d; ++b) {
            const double plus = second_difference(u, i, diagonal(a, b, 1), k);
            const double minus = second_difference(u, i, diagonal(a, b, -1), k);
            H(a, b) = H(b, a) = (plus - minus) / (4.0 * h * h);
        }
    }
    return H;
}

void require_same_grid(const SymField& a, const SymField& b) {
    if (a.n != b.n || a.d != b.d) throw InputError("Hessian fields live on different grids");
}

}  // namespace

GradientField numeric_gradient(const GridFunction& u, double kink_factor) {
    u.validate();
    const int d = u.dim();
    const double h = u.spacing();
    const std::size_t N = u.size();
    GradientField g;
    g.grad.resize(N);
    g.backward.resize(N);
    g.forward.resize(N);
    g.reliable.assign(N, 1);

    std::vector<double> jumps;
    jumps.reserve(N * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < N; ++i) {
        Vec bw(d), fw(d);
        for (int a = 0; a < d; ++a) {
            bw[a] = (u[i] - u[u.shifted(i, a, -1)]) / h;
            fw[a] = (u[u.shifted(i, a, 1)] - u[i]) / h;
            jumps.push_back(std::abs(fw[a] - bw[a]));
        }
        g.backward[i] = bw;
        g.forward[i] = fw;
        g.grad[i] = 0.5 * (bw + fw);
    }
    g.threshold = kink_factor * std::max(median(jumps), h);
    for (std::size_t i = 0; i < N; ++i) {
        for (int a = 0; a < d; ++a) {
            if (std::abs(g.forward[i][a] - g.backward[i][a]) > g.threshold) g.reliable[i] = 0;
        }
    }
    return g;
}

double SymField::masked_fraction() const {
    if (alexandrov.empty()) return 0.0;
    const auto good = std::count(alexandrov.begin(), alexandrov.end(), 1);
    return static_cast<double>(good) / static_cast<double>(alexandrov.size());
}

SymField numeric_hessian(const GridFunction& u, const HessianOptions& opts) {
    u.validate();
    const std::size_t N = u.size();
    const double h = u.spacing();
    SymField f;
    f.n = u.n();
    f.d = u.dim();
    f.hess.resize(N);
    f.discrepancy.resize(N);
    f.alexandrov.assign(N, 0);

    double scale = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        f.hess[i] = hessian_at(u, i, 1);
        const Mat coarse = hessian_at(u, i, 2);
        f.discrepancy[i] = (f.hess[i] - coarse).cwiseAbs().maxCoeff();
        scale = std::max(scale, f.hess[i].cwiseAbs().maxCoeff());
    }
    if (opts.stability_tol) {
        f.stability_tol = *opts.stability_tol;
    } else {
        f.stability_tol = 10.0 * std::max(median(f.discrepancy), h * h) + 1e-6 * scale;
    }
    for (std::size_t i = 0; i < N; ++i) f.alexandrov[i] = f.discrepancy[i] <= f.stability_tol ? 1 : 0;
    return f;
}

MetricValue d21_distance(const SymField& a, const SymField& b) {
    require_same_grid(a, b);
    MetricValue r;
    const std::size_t N = a.size();
    std::size_t missing = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (!a.alexandrov[i] || !b.alexandrov[i]) {
            ++missing;
            continue;
        }
        acc += spectral_norm_sym(a.hess[i] - b.hess[i]);
    }
    r.value = acc / static_cast<double>(N);
    r.unmeasured_mass = static_cast<double>(missing) / static_cast<double>(N);
    r.unreliable = r.unmeasured_mass > 0.5;
    return r;
}

MetricValue d21_distance(const GridFunction& u, const GridFunction& v, const HessianOptions& opts) {
    return d21_distance(numeric_hessian(u, opts), numeric_hessian(v, opts));
}

MetricValue leb_measure_exceed(const SymField& a, const SymField& b, double eps) {
    require_same_grid(a, b);
    MetricValue r;
    const std::size_t N = a.size();
    std::size_t missing = 0, exceed = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (!a.alexandrov[i] || !b.alexandrov[i]) {
            ++missing;
            continue;
        }
        if (max_eigenvalue_sym(a.hess[i] - b.hess[i]) >= eps) ++exceed;
    }
    r.value = static_cast<double>(exceed) / static_cast<double>(N);
    r.unmeasured_mass = static_cast<double>(missing) / static_cast<double>(N);
    r.unreliable = r.unmeasured_mass > 0.5;
    return r;
}

MetricValue leb_measure_exceed(const GridFunction& u, const GridFunction& v, double eps,
                               const HessianOptions& opts) {
    return leb_measure_exceed(numeric_hessian(u, opts), numeric_hessian(v, opts), eps);
}

GraphCloud graph_cloud(const GridFunction& u, const GradientField& g, const Vec& c, std::string source_tag) {
    const int d = u.dim();
    const Vec cc = c.size() == 0 ? Vec(Vec::Zero(d)) : c;
    if (cc.size() != d) throw InputError("cohomology vector has wrong dimension");
    GraphCloud cloud;
    cloud.dim = d;
    cloud.source_tag = std::move(source_tag);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Vec th = u.point(i);
        if (g.reliable[i]) {
            cloud.add(th, cc + g.grad[i]);
        } else {
            cloud.add(th, cc + g.backward[i]);
            cloud.add(th, cc + g.forward[i]);
        }
    }
    return cloud;
}

GraphCloud graph_cloud(const GridFunction& u, const Vec& c, std::string source_tag) {
    return graph_cloud(u, numeric_gradient(u), c, std::move(source_tag));
}

namespace {

double torus_gap(double a, double b) {
    double r = std::fmod(std::abs(a - b), 1.0);
    return std::min(r, 1.0 - r);
}

double phase_distance2(const Vec& ta, const Vec& pa, const Vec& tb, const Vec& pb) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < ta.size(); ++k) {
        const double g = torus_gap(ta[k], tb[k]);
        s += g * g;
    }
    for (Eigen::Index k = 0; k < pa.size(); ++k) {
        const double g = pa[k] - pb[k];
        s += g * g;
    }
    return s;
}

void require_clouds(const GraphCloud& A, const GraphCloud& B) {
    if (A.size() == 0 || B.size() == 0) throw InputError("Hausdorff distance of an empty cloud");
    if (A.dim != B.dim) throw InputError("clouds of different dimension");
}

double nearest2(const GraphCloud& B, const Vec& th, const Vec& p, double stop_below) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < B.size(); ++j) {
        best = std::min(best, phase_distance2(th, p, B.theta[j], B.p[j]));
        // cannot raise the outer max any more
        if (best < stop_below) break;
    }
    return best;
}

double directed2_serial(const GraphCloud& A, const GraphCloud& B) {
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) worst = std::max(worst, nearest2(B, A.theta[i], A.p[i], worst));
    return worst;
}

double directed2_parallel(const GraphCloud& A, const GraphCloud& B) {
    double worst = 0.0;
    const auto na = static_cast<std::ptrdiff_t>(A.size());
#pragma omp parallel
    {
        double local = 0.0;
#pragma omp for schedule(dynamic, 64) nowait
        for (std::ptrdiff_t i = 0; i < na; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            local = std::max(local, nearest2(B, A.theta[ui], A.p[ui], local));
        }
#pragma omp critical
        worst = std::max(worst, local);
    }
    return worst;
}

}  // namespace

double phase_distance(const Vec& theta_a, const Vec& p_a, const Vec& theta_b, const Vec& p_b) {
    return std::sqrt(phase_distance2(theta_a, p_a, theta_b, p_b));
}

double directed_hausdorff(const GraphCloud& A, const GraphCloud& B) {
    require_clouds(A, B);
    return std::sqrt(directed2_parallel(A, B));
}

double hausdorff_distance(const GraphCloud& A, const GraphCloud& B) {
    require_clouds(A, B);
    return std::sqrt(std::max(directed2_parallel(A, B), directed2_parallel(B, A)));
}

double hausdorff_distance_serial(const GraphCloud& A, const GraphCloud& B) {
    require_clouds(A, B);
    return std::sqrt(std::max(directed2_serial(A, B), directed2_serial(B, A)));
}

GridSection GridSection::sample(int n, int d, const std::function<Vec(const Vec&)>& f) {
    GridFunction shape(n, d);
    GridSection s;
    s.n = n;
    s.d = d;
    s.values.reserve(shape.size());
    for (std::size_t i = 0; i < shape.size(); ++i) s.values.push_back(f(shape.point(i)));
    return s;
}

std::size_t GridSection::cell_of(const Vec& theta) const {
    std::size_t flat = 0;
    for (int a = d - 1; a >= 0; --a) {
        long k = std::lround(wrap_unit(theta[a]) * n) % n;
        flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(k);
    }
    return flat;
}

double fiberwise_sup_distance(const GraphCloud& K, const GridSection& eta) {
    if (K.size() == 0) throw InputError("fiberwise distance of an empty cloud");
    if (K.dim != eta.d) throw InputError("cloud and section dimensions differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < K.size(); ++i) {
        worst = std::max(worst, (K.p[i] - eta.values[eta.cell_of(K.theta[i])]).norm());
    }
    return worst;
}

SemiconcavityEstimate semiconcavity_constant(const GridFunction& u) {
    u.validate();
    const int d = u.dim();
    const double h = u.spacing();
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (int a = 0; a < d; ++a) {
            worst = std::max(worst, second_difference(u, i, unit(a), 1) / (h * h));
            for (int b = a + 1; b < d; ++b) {
                // diagonal steps have length h * sqrt(2)
                worst = std::max(worst, second_difference(u, i, diagonal(a, b, 1), 1) / (2.0 * h * h));
                worst = std::max(worst, second_difference(u, i, diagonal(a, b, -1), 1) / (2.0 * h * h));
            }
        }
    }
    return {worst / 2.0, h};
}

}  // namespace weakkam
