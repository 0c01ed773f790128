#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace stvem {

using Real = double;

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Point = Point2<Real>;
using Matrix = DenseMatrix<Real>;
using Vector = DenseVector<Real>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent mesh data (file contents, topology, orientation).
class MeshError : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration (bad parameters, boundary markers, flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Element-level numerical failure (rank deficiency, degenerate cell).
class ElementError : public Error {
public:
    using Error::Error;
};

/// Global solve failure (singular factorization, non-finite iterate).
class SolveError : public Error {
public:
    using Error::Error;
};

/// Number of monomials of total degree <= degree in two variables; 0 for degree < 0.
constexpr int polynomial_dimension(int degree)
{
    return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2;
}

}  // namespace stvem
