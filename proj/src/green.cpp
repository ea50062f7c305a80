#include "weakkam/green.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/semiconcave.hpp"

#include "flow.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace weakkam {

namespace {

FlowParams flow_params(double lambda, const GreenOptions& opts) {
    FlowParams p;
    p.lambda = lambda;
    p.dt_max = opts.dt_max;
    p.tol = opts.flow_tol;
    return p;
}

// Full 2d-column frame at x: columns [horizontal | vertical].
detail::FrameState identity_frame(const PhasePoint& x) {
    const int d = x.dim();
    detail::FrameState st;
    st.x = PhasePoint{wrap_torus(x.q), x.p};
    st.X = Eigen::MatrixXd::Zero(d, 2 * d);
    st.Y = Eigen::MatrixXd::Zero(d, 2 * d);
    st.X.leftCols(d).setIdentity();
    st.Y.rightCols(d).setIdentity();
    return st;
}

// Tracks sign changes of det B(s) = det dq(s)/dp(0) while the fundamental matrix is pulled back.
struct DetMonitor {
    int d;
    double expected_sign;
    double min_abs = std::numeric_limits<double>::infinity();

    bool operator()(double s, const detail::FrameState& st) {
        const double det = st.X.rightCols(d).determinant();
        if (det * expected_sign <= 0.0) {
            throw ConjugatePointError(std::abs(s), "vertical block of the linearized flow became singular");
        }
        min_abs = std::min(min_abs, std::abs(det));
        return true;
    }
};

struct HeightFromFrame {
    HeightMatrix S;
    double asymmetry;
};

// G_sigma(x) is pulled back by D phi_{-sigma} onto the vertical: A + B S = 0.
HeightFromFrame height_from_frame(const detail::FrameState& st) {
    const auto d = st.X.rows();
    const Eigen::MatrixXd A = st.X.leftCols(d);
    const Eigen::MatrixXd B = st.X.rightCols(d);
    const Eigen::MatrixXd S = -B.partialPivLu().solve(A);
    if (!S.allFinite()) throw ConjugatePointError(0.0, "singular vertical block at the window end");
    HeightFromFrame out;
    out.asymmetry = (S - S.transpose()).cwiseAbs().maxCoeff();
    out.S = 0.5 * (S + S.transpose());
    return out;
}

double expected_det_sign(int d, double s) {
    // near s = 0, B(s) ~ s H_pp with H_pp positive definite
    return (s < 0 && d % 2 == 1) ? -1.0 : 1.0;
}

GreenResult green_limit(const HamiltonianModel& model, const PhasePoint& x, double lambda, const GreenOptions& opts,
                        double direction) {
    if (!(opts.t_start > 0.0) || !(opts.t_max >= opts.t_start)) {
        throw InputError("Green schedule needs 0 < t_start <= t_max");
    }
    if (!(opts.tol > 0.0)) throw InputError("Green tolerance must be positive");
    const int d = model.dim;
    const FlowParams params = flow_params(lambda, opts);
    auto st = identity_frame(x);
    // pulling back along -sigma: direction +1 integrates backward in time
    DetMonitor monitor{d, expected_det_sign(d, -direction)};
    detail::FrameObserver obs = [&monitor](double s, const detail::FrameState& f) { return monitor(s, f); };

    GreenResult res;
    double reached = 0.0;
    HeightMatrix prev;
    for (double t = opts.t_start; t <= opts.t_max * (1.0 + 1e-12); t *= 2.0) {
        detail::propagate_frame(model, st, -direction * (t - reached), params, obs);
        reached = t;
        const HeightMatrix S = height_from_frame(st).S;
        res.windows.push_back(direction * t);
        res.heights.push_back(S);
        res.height = S;
        res.t_used = t;
        if (res.heights.size() >= 2) {
            // toward G_+ heights decrease, toward G_- they increase
            const Mat step = direction * (prev - S);
            if (min_eigenvalue_sym(step) < -opts.monotonicity_slack) res.monotone = false;
            res.cauchy_gap = spectral_norm_sym(S - prev);
            if (res.cauchy_gap <= opts.tol) {
                res.converged = true;
                break;
            }
        }
        prev = S;
    }
    return res;
}

}  // namespace

PushedHeight pushed_vertical_height(const HamiltonianModel& model, const PhasePoint& x, double sigma, double lambda,
                                    const GreenOptions& opts) {
    if (sigma == 0.0 || !std::isfinite(sigma)) throw InputError("window must be finite and nonzero");
    const int d = model.dim;
    auto st = identity_frame(x);
    DetMonitor monitor{d, expected_det_sign(d, -sigma)};
    detail::propagate_frame(model, st, -sigma, flow_params(lambda, opts),
                            [&monitor](double s, const detail::FrameState& f) { return monitor(s, f); });
    const auto h = height_from_frame(st);
    return {h.S, h.asymmetry, monitor.min_abs};
}

HeightMatrix height_of_pushed_vertical(const HamiltonianModel& model, const PhasePoint& x, double t, double lambda,
                                       const GreenOptions& opts) {
    if (!(t > 0.0)) throw InputError("pushed-vertical window must be positive");
    return pushed_vertical_height(model, x, t, lambda, opts).S;
}

GreenResult green_plus(const HamiltonianModel& model, const PhasePoint& x, double lambda, const GreenOptions& opts) {
    return green_limit(model, x, lambda, opts, 1.0);
}

GreenResult green_minus(const HamiltonianModel& model, const PhasePoint& x, double lambda, const GreenOptions& opts) {
    return green_limit(model, x, lambda, opts, -1.0);
}

MonotonicityReport check_height_order(const std::vector<double>& windows, const std::vector<HeightMatrix>& heights,
                                      double slack) {
    if (windows.size() != heights.size()) throw InputError("windows and heights differ in length");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i] > 0) pos.push_back(i);
        else if (windows[i] < 0) neg.push_back(i);
        else throw InputError("zero window in monotonicity check");
    }
    auto by_abs = [&](std::size_t a, std::size_t b) { return std::abs(windows[a]) < std::abs(windows[b]); };
    std::sort(pos.begin(), pos.end(), by_abs);
    std::sort(neg.begin(), neg.end(), by_abs);

    MonotonicityReport rep;
    auto require = [&](std::size_t hi, std::size_t lo, const char* what) {
        const double m = min_eigenvalue_sym(heights[hi] - heights[lo]);
        rep.worst_violation = std::min(rep.worst_violation, m);
        if (m < -slack) {
            rep.pass = false;
            std::ostringstream os;
            os << what << ": H(" << windows[hi] << ") - H(" << windows[lo] << ") has eigenvalue " << m;
            rep.violations.push_back(os.str());
        }
    };
    for (std::size_t k = 1; k < pos.size(); ++k) require(pos[k - 1], pos[k], "positive side");
    for (std::size_t k = 1; k < neg.size(); ++k) require(neg[k], neg[k - 1], "negative side");
    for (auto i : pos)
        for (auto j : neg) require(i, j, "across");
    return rep;
}

MonotonicityReport monotonicity_check(const HamiltonianModel& model, const PhasePoint& x, double lambda,
                                      const std::vector<double>& times, const GreenOptions& opts) {
    std::vector<double> windows;
    std::vector<HeightMatrix> heights;
    for (double t : times) {
        if (!(t > 0.0)) throw InputError("monotonicity times must be positive");
        for (double sigma : {t, -t}) {
            windows.push_back(sigma);
            heights.push_back(pushed_vertical_height(model, x, sigma, lambda, opts).S);
        }
    }
    return check_height_order(windows, heights, opts.monotonicity_slack);
}

ConjugateReport detect_conjugate_points(const HamiltonianModel& model, const PhasePoint& x, double lambda, double t,
                                        double resolution, const GreenOptions& opts) {
    if (t == 0.0 || !std::isfinite(t)) throw InputError("conjugate-point window must be finite and nonzero");
    const int d = model.dim;
    const FlowParams params = flow_params(lambda, opts);
    ConjugateReport rep;
    rep.min_abs_det = std::numeric_limits<double>::infinity();

    detail::FrameState st{PhasePoint{wrap_torus(x.q), x.p}, Eigen::MatrixXd::Zero(d, d),
                          Eigen::MatrixXd::Identity(d, d)};
    detail::FrameState last = st;
    double last_s = 0.0;
    double last_det = 0.0;
    bool first = true;

    auto det_of = [](const detail::FrameState& f) { return f.X.determinant(); };

    detail::FrameObserver obs = [&](double s, const detail::FrameState& f) {
        const double det = det_of(f);
        if (!first) {
            rep.min_abs_det = std::min(rep.min_abs_det, std::abs(det));
            if ((det > 0) != (last_det > 0)) {
                // bisection on the sub-step, restarting from the saved state
                double lo = 0.0, hi = s - last_s;
                while (std::abs(hi - lo) > resolution) {
                    const double mid = 0.5 * (lo + hi);
                    auto probe = last;
                    detail::propagate_frame(model, probe, mid, params);
                    if ((det_of(probe) > 0) == (last_det > 0)) lo = mid;
                    else hi = mid;
                }
                rep.times.push_back(std::abs(last_s + 0.5 * (lo + hi)));
            }
        }
        first = false;
        last = f;
        last_s = s;
        last_det = det;
        return true;
    };
    detail::propagate_frame(model, st, t, params, obs);
    if (!std::isfinite(rep.min_abs_det)) rep.min_abs_det = std::abs(last_det);
    return rep;
}

GreenRegularityReport green_regularity_test(const HamiltonianModel& model, const GridFunction& u, const Vec& c,
                                            double lambda, double tol, const std::vector<std::size_t>& sample_set,
                                            bool upper, const GreenOptions& opts) {
    if (u.dim() != model.dim) throw InputError("grid and model dimensions differ");
    const int d = u.dim();
    const Vec cc = c.size() == 0 ? Vec(Vec::Zero(d)) : c;
    const auto grad = numeric_gradient(u);
    const auto hess = numeric_hessian(u);

    GreenRegularityReport rep;
    std::size_t exceed = 0;
    for (auto i : sample_set) {
        if (i >= u.size()) throw InputError("sample index outside the grid");
        if (!hess.alexandrov[i]) continue;
        const PhasePoint x{u.point(i), cc + grad.grad[i]};
        try {
            const auto g = upper ? green_plus(model, x, lambda, opts) : green_minus(model, x, lambda, opts);
            const double disc = spectral_norm_sym(g.height - hess.hess[i]);
            rep.samples.push_back(i);
            rep.discrepancy.push_back(disc);
            if (disc > tol) ++exceed;
        } catch (const ConjugatePointError&) {
            ++rep.invalid;
        }
    }
    rep.measure = rep.samples.empty() ? 0.0 : static_cast<double>(exceed) / static_cast<double>(rep.samples.size());
    return rep;
}

}  // namespace weakkam
