#include "weakkam/types.hpp"

#include <Eigen/Eigenvalues>

namespace weakkam {

namespace {

Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1> eigenvalues_sym(const Mat& S) {
    if (S.rows() == 1) return S.diagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

double spectral_norm_sym(const Mat& S) {
    return eigenvalues_sym(S).cwiseAbs().maxCoeff();
}

double min_eigenvalue_sym(const Mat& S) {
    return eigenvalues_sym(S).minCoeff();
}

double max_eigenvalue_sym(const Mat& S) {
    return eigenvalues_sym(S).maxCoeff();
}

}  // namespace weakkam
