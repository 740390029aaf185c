#pragma once

#include <Eigen/Dense>

namespace sparsetrack {

#ifdef SPARSETRACK_SINGLE_PRECISION
using Scalar = float;
#else
using Scalar = double;
#endif

using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Appearance features are unit-norm column vectors.
using Feature = Vec;

}  // namespace sparsetrack
