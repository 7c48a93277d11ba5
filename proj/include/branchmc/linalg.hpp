#pragma once

#include <Eigen/Dense>

namespace branchmc {

/// Largest supported state dimension. Vectors and matrices are stack-resident
/// up to this size so the estimator inner loops never touch the heap.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// A : B = trace(A B^T).
inline double contract(const Mat& a, const Mat& b) { return (a.array() * b.array()).sum(); }

}  // namespace branchmc
