// SPDX-License-Identifier: Apache-2.0
//
// cbf - coordinated mmWave beamforming simulator and beam prediction library
// Copyright (C) 2026 The cbf contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CBF_COMMON_HPP
#define CBF_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cbf
{

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double SPEED_OF_LIGHT = 299792458.0; // m/s
inline constexpr double TWO_PI = 2.0 * std::numbers::pi;
inline constexpr double MPH_TO_MPS = 0.44704;

// Base of every error raised by the library. Each subclass corresponds to one
// error class named in the module contracts; the CLI maps them to exit codes.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class InvalidScene : public Error { using Error::Error; };
class DelayOverflow : public Error { using Error::Error; };
class BudgetExceeded : public Error { using Error::Error; };
class NonPositiveSpeed : public Error { using Error::Error; };
class EmptyGrid : public Error { using Error::Error; };
class ShapeMismatch : public Error { using Error::Error; };
class FormatVersionMismatch : public Error { using Error::Error; };
class CorruptRecord : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class AllZeroInputs : public Error { using Error::Error; };
class AllZeroRates : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class EmptyDataset : public Error { using Error::Error; };
class Divergence : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// SplitMix64 finalizer, used to derive independent RNG streams from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace cbf

#endif
