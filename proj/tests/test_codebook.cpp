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

#include <doctest.h>

using namespace cbf;

TEST_CASE("codebook sizes")
{
    CHECK(beamsteering_codebook({32, 8, 0.5}, 2, 2).size() == 1024);
    CHECK(beamsteering_codebook({32, 8, 0.5}, 2, 1).size() == 512);
    CHECK(beamsteering_codebook({8, 2, 0.5}, 2, 2).size() == 64);
    CHECK(beamsteering_codebook({1, 1, 0.5}, 1, 1).size() == 1);
    CHECK_THROWS(beamsteering_codebook({8, 2, 0.5}, 0, 2));
}

TEST_CASE("codewords are unit norm with constant modulus")
{
    const Codebook cb = beamsteering_codebook({8, 4, 0.5}, 2, 3);
    CHECK(cb.num_antennas() == 32);
    for (int p = 0; p < cb.size(); ++p)
    {
        const CVec g = cb.codeword(p);
        CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-12));
        for (int i = 0; i < g.size(); ++i)
            CHECK(std::abs(std::abs(g(i)) - 1.0 / std::sqrt(32.0)) < 1e-12);
    }
}

TEST_CASE("grid ordering and resolution")
{
    const ArrayGeometry geom{8, 2, 0.5};
    const Codebook cb = beamsteering_codebook(geom, 2, 2);
    CHECK(cb.grid_y == 16);
    CHECK(cb.grid_z == 4);
    const double step_y = 1.0 / (geom.spacing * cb.grid_y);
    const double step_z = 1.0 / (geom.spacing * cb.grid_z);
    for (int iz = 0; iz < cb.grid_z; ++iz)
        for (int iy = 0; iy < cb.grid_y; ++iy)
        {
            const GridAngle& g = cb.angle_grid[iz * cb.grid_y + iy];
            if (iy > 0)
                CHECK(g.u_y - cb.angle_grid[iz * cb.grid_y + iy - 1].u_y == doctest::Approx(step_y));
            if (iz > 0)
                CHECK(g.u_z - cb.angle_grid[(iz - 1) * cb.grid_y + iy].u_z == doctest::Approx(step_z));
            const CVec a = array_response_dircos(geom, g.u_y, g.u_z);
            CHECK((cb.codeword(iz * cb.grid_y + iy) - a.conjugate()).norm() < 1e-12);
        }
    // broadside codeword sits at the grid centre
    const GridAngle& mid = cb.angle_grid[(cb.grid_z / 2) * cb.grid_y + cb.grid_y / 2];
    CHECK(mid.u_y == doctest::Approx(0.0));
    CHECK(mid.u_z == doctest::Approx(0.0));
    CHECK(mid.visible);
}

TEST_CASE("a channel steered at a grid angle selects that codeword")
{
    const ArrayGeometry geom{8, 2, 0.5};
    const Codebook cb = beamsteering_codebook(geom, 2, 2);
    for (int p = 0; p < cb.size(); ++p)
    {
        const GridAngle& g = cb.angle_grid[p];
        const CVec h = array_response_dircos(geom, g.u_y, g.u_z);
        Eigen::VectorXd gain = (h.transpose() * cb.codewords).cwiseAbs2().transpose();
        Eigen::Index best;
        gain.maxCoeff(&best);
        CHECK(best == p);
        CHECK(gain(p) == doctest::Approx(1.0));
    }
}

TEST_CASE("visible grid angles map back to their directional cosines")
{
    const ArrayGeometry geom{8, 4, 0.5};
    const Codebook cb = beamsteering_codebook(geom, 2, 2);
    for (int p = 0; p < cb.size(); ++p)
    {
        const GridAngle& g = cb.angle_grid[p];
        if (!g.visible)
            continue;
        const CVec a = array_response(geom, g.azimuth, g.elevation);
        CHECK(std::abs(a.dot(cb.codeword(p).conjugate())) == doctest::Approx(1.0));
    }
}

TEST_CASE("omni pattern")
{
    const CVec g = omni_pattern(4);
    CHECK(g.size() == 4);
    CHECK(g(0) == cplx(1, 0));
    CHECK(g.tail(3).norm() == 0.0);
    CHECK(g.norm() == 1.0);
    const CVec h = CVec::Random(4);
    CHECK(std::abs((g.transpose() * h).value() - h(0)) < 1e-15);
    CHECK_THROWS(omni_pattern(0));
}
