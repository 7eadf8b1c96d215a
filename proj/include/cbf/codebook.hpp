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

#ifndef CBF_CODEBOOK_HPP
#define CBF_CODEBOOK_HPP

#include "cbf/channel.hpp"

#include <vector>

namespace cbf
{

struct GridAngle
{
    double u_y = 0.0;       // directional cosine along the array columns
    double u_z = 0.0;       // directional cosine along the rows
    double azimuth = 0.0;   // rad; clamped to +-pi/2 when (u_y, u_z) is not a visible direction
    double elevation = 0.0; // rad
    bool visible = true;
};

// Oversampled beamsteering codebook. Column p of `codewords` is g_p.
struct Codebook
{
    CMat codewords; // M x N_tr
    std::vector<GridAngle> angle_grid;
    int n_os_y = 1;
    int n_os_z = 1;
    int grid_y = 1; // azimuth grid points, m_y * n_os_y
    int grid_z = 1; // elevation grid points, m_z * n_os_z

    int size() const { return static_cast<int>(codewords.cols()); }
    int num_antennas() const { return static_cast<int>(codewords.rows()); }
    CVec codeword(int p) const { return codewords.col(p); }
};

// g_p = conj(a(theta_p, phi_p)) on a uniform directional-cosine grid covering
// one period of the array phase; index p = iz * grid_y + iy (elevation-major).
Codebook beamsteering_codebook(const ArrayGeometry& geom, int n_os_y, int n_os_z);

// e_1: reception with the first antenna element only.
CVec omni_pattern(int m);

} // namespace cbf

#endif
