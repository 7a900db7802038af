#ifndef LORLAB_TYPES_HPP
#define LORLAB_TYPES_HPP

#include <Eigen/Dense>

namespace lorlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

} // namespace lorlab

#endif
