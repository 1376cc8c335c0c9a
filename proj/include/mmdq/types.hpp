#pragma once

#include <Eigen/Dense>

namespace mmdq {

/// A set of points in R^d, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// A single point in R^d.
using Point = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

using PointRef = Eigen::Ref<const Eigen::RowVectorXd>;

}  // namespace mmdq
