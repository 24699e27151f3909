#pragma once

#include <Eigen/Dense>

namespace seqmed {

// Samples are stored as rows: an n x p matrix holds n samples of p features.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexVector = Eigen::VectorXi;

}  // namespace seqmed
