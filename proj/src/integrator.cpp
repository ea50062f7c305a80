#include "flow.hpp"
#include "ode.hpp"

#include "weakkam/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace weakkam {

void FlowParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be finite and >= 0");
    if (!(dt_max > 0.0)) throw ConfigError("dt_max", "must be > 0");
    if (!(tol > 0.0)) throw ConfigError("tol", "must be > 0");
}

namespace {

using detail::State;

void check_finite(const HamiltonianGradient& g) {
    if (!g.dq.allFinite() || !g.dp.allFinite()) throw EvaluationError("non-finite Hamiltonian gradient");
}

detail::OdeOptions ode_options(const FlowParams& params, int d) {
    detail::OdeOptions opt;
    opt.dt_max = params.dt_max;
    opt.tol = params.tol;
    opt.torus_components = d;
    return opt;
}

}  // namespace

PhasePoint integrate_flow(const HamiltonianModel& model, const PhasePoint& x, double t, const FlowParams& params) {
    params.validate();
    if (!std::isfinite(t)) throw InputError("flow duration must be finite");
    const int d = model.dim;
    State y(2 * d);
    y.head(d) = wrap_torus(x.q);
    y.tail(d) = x.p;
    const double lambda = params.lambda;
    auto rhs = [&](const State& s, State& ds) {
        const Vec q = s.head(d), p = s.tail(d);
        const auto g = model.eval_grad(q, p);
        check_finite(g);
        ds.head(d) = g.dp;
        ds.tail(d) = -g.dq - lambda * p;
    };
    detail::integrate_dopri(rhs, y, t, ode_options(params, d));
    return {y.head(d), y.tail(d)};
}

namespace detail {

double propagate_frame(const HamiltonianModel& model, FrameState& state, double t, const FlowParams& params,
                       const FrameObserver& observer) {
    params.validate();
    if (!std::isfinite(t)) throw InputError("flow duration must be finite");
    const int d = model.dim;
    const auto k = state.X.cols();
    const Eigen::Index frame = d * k;

    State y(2 * d + 2 * frame);
    y.head(d) = wrap_torus(state.x.q);
    y.segment(d, d) = state.x.p;
    y.segment(2 * d, frame) = Eigen::Map<const Eigen::VectorXd>(state.X.data(), frame);
    y.segment(2 * d + frame, frame) = Eigen::Map<const Eigen::VectorXd>(state.Y.data(), frame);

    const double lambda = params.lambda;
    auto rhs = [&](const State& s, State& ds) {
        const Vec q = s.head(d), p = s.segment(d, d);
        const auto g = model.eval_grad(q, p);
        check_finite(g);
        const auto h = model.eval_hess(q, p);
        Eigen::Map<const Eigen::MatrixXd> X(s.data() + 2 * d, d, k);
        Eigen::Map<const Eigen::MatrixXd> Y(s.data() + 2 * d + frame, d, k);
        ds.head(d) = g.dp;
        ds.segment(d, d) = -g.dq - lambda * p;
        Eigen::Map<Eigen::MatrixXd> dX(ds.data() + 2 * d, d, k);
        Eigen::Map<Eigen::MatrixXd> dY(ds.data() + 2 * d + frame, d, k);
        const Eigen::MatrixXd qq = h.qq, qp = h.qp, pp = h.pp;
        dX = qp.transpose() * X + pp * Y;
        dY = -qq * X - qp * Y - lambda * Y;
    };

    auto unpack = [&](const State& s, FrameState& out) {
        out.x.q = s.head(d);
        out.x.p = s.segment(d, d);
        out.X = Eigen::Map<const Eigen::MatrixXd>(s.data() + 2 * d, d, k);
        out.Y = Eigen::Map<const Eigen::MatrixXd>(s.data() + 2 * d + frame, d, k);
    };

    double reached;
    if (observer) {
        FrameState scratch;
        reached = integrate_dopri(rhs, y, t, ode_options(params, d), [&](double s, const State& ys) {
            unpack(ys, scratch);
            return observer(s, scratch);
        });
    } else {
        reached = integrate_dopri(rhs, y, t, ode_options(params, d));
    }
    unpack(y, state);
    return reached;
}

PhaseMat fundamental_matrix(const HamiltonianModel& model, const PhasePoint& x, double t, const FlowParams& params,
                            PhasePoint* endpoint) {
    const int d = model.dim;
    FrameState st;
    st.x = x;
    st.X = Eigen::MatrixXd::Zero(d, 2 * d);
    st.Y = Eigen::MatrixXd::Zero(d, 2 * d);
    st.X.leftCols(d).setIdentity();
    st.Y.rightCols(d).setIdentity();
    propagate_frame(model, st, t, params);
    PhaseMat phi(2 * d, 2 * d);
    phi.topRows(d) = st.X;
    phi.bottomRows(d) = st.Y;
    if (endpoint) *endpoint = st.x;
    return phi;
}

}  // namespace detail

std::pair<PhasePoint, TangentFrame> integrate_with_tangent(const HamiltonianModel& model, const PhasePoint& x,
                                                           double t, const FlowParams& params,
                                                           const TangentFrame& frame) {
    const int d = model.dim;
    if (frame.X.rows() != d || frame.Y.rows() != d || frame.X.cols() != frame.Y.cols()) {
        throw InputError("tangent frame has wrong shape");
    }
    detail::FrameState st{x, frame.X, frame.Y};
    detail::propagate_frame(model, st, t, params);

    Eigen::MatrixXd stacked(2 * d, st.X.cols());
    stacked << st.X, st.Y;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv[sv.size() - 1] > 1e-14 * sv[0])) {
        throw DegeneracyError("tangent frame lost rank during propagation");
    }
    return {st.x, TangentFrame{st.X, st.Y}};
}

}  // namespace weakkam
