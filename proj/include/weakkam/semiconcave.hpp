#pragma once

#include "weakkam/grid.hpp"
#include "weakkam/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace weakkam {

/// Central-difference gradient with a kink indicator.
struct GradientField {
    std::vector<Vec> grad;       ///< central differences
    std::vector<Vec> backward;   ///< (u(i) - u(i - e_a)) / h per axis
    std::vector<Vec> forward;    ///< (u(i + e_a) - u(i)) / h per axis
    std::vector<char> reliable;  ///< one-sided slopes agree within `threshold`
    double threshold = 0.0;
};

/// A point is reliable when every axis has |forward - backward| <= kink_factor * max(median, h),
/// the median taken over all points and axes.
GradientField numeric_gradient(const GridFunction& u, double kink_factor = 5.0);

/// Per-point symmetric Hessian with an Alexandrov-point mask.
struct SymField {
    int n = 0;
    int d = 0;
    std::vector<Mat> hess;
    std::vector<double> discrepancy;  ///< max entry of |D_h - D_2h|
    std::vector<char> alexandrov;
    double stability_tol = 0.0;

    std::size_t size() const { return hess.size(); }
    double masked_fraction() const;
};

struct HessianOptions {
    /// Largest |D_h - D_2h| accepted at an Alexandrov point. Unset means
    /// 10 * max(median discrepancy, h^2) plus a 1e-6 relative floor.
    std::optional<double> stability_tol;
};

/// Second differences at spacing h (Hessian) and 2h (stability check); mixed
/// entries from the e_a +- e_b diagonal stencils.
SymField numeric_hessian(const GridFunction& u, const HessianOptions& opts = {});

struct MetricValue {
    double value = 0.0;
    double unmeasured_mass = 0.0;  ///< fraction of points outside either mask
    bool unreliable = false;       ///< unmeasured mass above one half
};

/// Integral of the spectral norm of D^2u - D^2v with weight 1/N per point; points outside
/// either mask contribute nothing and are reported as unmeasured mass.
MetricValue d21_distance(const SymField& a, const SymField& b);
MetricValue d21_distance(const GridFunction& u, const GridFunction& v, const HessianOptions& opts = {});

/// Fraction of points where D^2u - D^2v is not below eps * identity (doubly-masked points only).
MetricValue leb_measure_exceed(const SymField& a, const SymField& b, double eps);
MetricValue leb_measure_exceed(const GridFunction& u, const GridFunction& v, double eps,
                               const HessianOptions& opts = {});

/// Finite sample of the closure of {(theta, c + du(theta))}.
struct GraphCloud {
    int dim = 1;
    std::vector<Vec> theta;
    std::vector<Vec> p;
    std::string source_tag;

    std::size_t size() const { return theta.size(); }
    void add(const Vec& th, const Vec& pp) {
        theta.push_back(wrap_torus(th));
        p.push_back(pp);
    }
};

/// Reliable points contribute (theta, c + du); kinks contribute both one-sided slopes.
GraphCloud graph_cloud(const GridFunction& u, const Vec& c, std::string source_tag = "grid");
GraphCloud graph_cloud(const GridFunction& u, const GradientField& g, const Vec& c, std::string source_tag = "grid");

/// Nearest-image torus distance on theta combined with Euclidean distance on p.
double phase_distance(const Vec& theta_a, const Vec& p_a, const Vec& theta_b, const Vec& p_b);

/// max over a in A of min over b in B.
double directed_hausdorff(const GraphCloud& A, const GraphCloud& B);
double hausdorff_distance(const GraphCloud& A, const GraphCloud& B);
/// Single-threaded reference; returns the same value as hausdorff_distance.
double hausdorff_distance_serial(const GraphCloud& A, const GraphCloud& B);

/// Vector field sampled on the grid {i / n}^d.
struct GridSection {
    int n = 0;
    int d = 1;
    std::vector<Vec> values;

    static GridSection sample(int n, int d, const std::function<Vec(const Vec&)>& f);
    std::size_t cell_of(const Vec& theta) const;
};

/// max over cloud points of |p - eta(cell(theta))|, each theta snapped to its nearest grid node.
double fiberwise_sup_distance(const GraphCloud& K, const GridSection& eta);

struct SemiconcavityEstimate {
    double K = 0.0;
    double h = 0.0;  ///< stencil spacing
};

/// Smallest K with every axis and diagonal second difference <= 2K.
SemiconcavityEstimate semiconcavity_constant(const GridFunction& u);

}  // namespace weakkam
