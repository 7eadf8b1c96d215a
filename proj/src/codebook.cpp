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

#include "cbf/codebook.hpp"

#include <cmath>

namespace cbf
{

Codebook beamsteering_codebook(const ArrayGeometry& geom, int n_os_y, int n_os_z)
{
    geom.validate();
    if (n_os_y < 1 || n_os_z < 1)
        throw std::invalid_argument("oversampling factors must be >= 1");

    Codebook cb;
    cb.n_os_y = n_os_y;
    cb.n_os_z = n_os_z;
    cb.grid_y = geom.m_y * n_os_y;
    cb.grid_z = geom.m_z * n_os_z;
    const int n_tr = cb.grid_y * cb.grid_z;
    cb.codewords.resize(geom.num_elements(), n_tr);
    cb.angle_grid.resize(n_tr);

    // one full period of the spatial phase 2*pi*spacing*u is 1/spacing wide in u
    const double period = 1.0 / geom.spacing;
    for (int iz = 0; iz < cb.grid_z; ++iz)
    {
        const double u_z = period * (static_cast<double>(iz) / cb.grid_z - 0.5);
        for (int iy = 0; iy < cb.grid_y; ++iy)
        {
            const double u_y = period * (static_cast<double>(iy) / cb.grid_y - 0.5);
            const int p = iz * cb.grid_y + iy;
            cb.codewords.col(p) = array_response_dircos(geom, u_y, u_z).conjugate();

            GridAngle& g = cb.angle_grid[p];
            g.u_y = u_y;
            g.u_z = u_z;
            g.visible = std::abs(u_z) <= 1.0 && u_y * u_y + u_z * u_z <= 1.0;
            g.elevation = std::asin(std::clamp(u_z, -1.0, 1.0));
            const double c = std::cos(g.elevation);
            g.azimuth = c > 0.0 ? std::asin(std::clamp(u_y / c, -1.0, 1.0)) : 0.0;
        }
    }
    return cb;
}

CVec omni_pattern(int m)
{
    if (m < 1)
        throw std::invalid_argument("omni_pattern: M must be >= 1");
    CVec g = CVec::Zero(m);
    g(0) = 1.0;
    return g;
}

} // namespace cbf
