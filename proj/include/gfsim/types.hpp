#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace gfsim {

using cplx = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

// One generator type everywhere so that seeded results are reproducible
// across modules and thread counts.
using Rng = std::mt19937_64;

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

} // namespace gfsim
