#pragma once

#include <Eigen/Dense>

namespace pmp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;
using Index = Eigen::Index;

}  // namespace pmp
