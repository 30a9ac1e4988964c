#pragma once

// Spectral radius by full eigendecomposition (Eigen). Used only as an oracle.

// <resolv.h> (pulled in by the HTTP layer) defines _res, which Eigen uses as a
// parameter name.
#pragma push_macro("_res")
#undef _res
#include <Eigen/Eigenvalues>
#pragma pop_macro("_res")

#include "opcascade/network.hpp"

namespace opcascade::verify {

inline double spectral_radius_dense_oracle(const DenseMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    if (n == 0) return 0.0;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace opcascade::verify
