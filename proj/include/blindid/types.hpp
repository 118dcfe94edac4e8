#ifndef BLINDID_TYPES_HPP
#define BLINDID_TYPES_HPP

#include <complex>

#include <Eigen/Dense>

namespace blindid {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using ComplexVector = CVector<double>;
using Complex = std::complex<double>;

// Visitor built from lambdas, for std::visit over the model variants.
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace blindid

#endif  // BLINDID_TYPES_HPP
