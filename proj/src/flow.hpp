#pragma once

#include "weakkam/dynamics.hpp"

#include <Eigen/Dense>

#include <functional>

namespace weakkam::detail {

/// Columns of a 2d x k tangent family carried along the conformal flow.
struct FrameState {
    PhasePoint x;
    Eigen::MatrixXd X;  ///< d x k
    Eigen::MatrixXd Y;  ///< d x k
};

/// Called after each accepted step with the signed elapsed time; return false to stop.
using FrameObserver = std::function<bool(double, const FrameState&)>;

/// Integrate the flow and the variational equation for an arbitrary number of columns.
/// Returns the signed time reached (== t unless the observer stopped early).
double propagate_frame(const HamiltonianModel& model, FrameState& state, double t, const FlowParams& params,
                       const FrameObserver& observer = {});

/// Full linearized flow D phi_t(x) as a 2d x 2d matrix [[dq/dq0, dq/dp0], [dp/dq0, dp/dp0]].
PhaseMat fundamental_matrix(const HamiltonianModel& model, const PhasePoint& x, double t, const FlowParams& params,
                            PhasePoint* endpoint = nullptr);

}  // namespace weakkam::detail
