#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace mlbq {

// One point per row.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::span<const double> point_row(const PointSet& w, Eigen::Index i) {
  return {w.data() + i * w.cols(), static_cast<std::size_t>(w.cols())};
}

}  // namespace mlbq
