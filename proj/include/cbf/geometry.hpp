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

#ifndef CBF_GEOMETRY_HPP
#define CBF_GEOMETRY_HPP

#include "cbf/common.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cbf
{

// Infinite reflecting plane. The normal points into the propagation region
// (the street side); user and BS positions must lie on its positive side.
struct Plane
{
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double reflection = 0.5; // amplitude reflection coefficient, in (0, 1]
};

struct AxisAlignedBox
{
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
};

struct Scene
{
    std::vector<Vec3> bs_positions;
    std::vector<Vec3> bs_array_normals; // broadside of each UPA, horizontal unit vector
    std::vector<Plane> surfaces;
    std::vector<AxisAlignedBox> blockers;
    double carrier_freq = 60e9; // Hz

    std::size_t num_bs() const { return bs_positions.size(); }
    double wavelength() const { return SPEED_OF_LIGHT / carrier_freq; }

    // Throws InvalidScene when an invariant is violated.
    void validate() const;
};

struct RayPath
{
    double delay = 0.0;        // s
    cplx complex_gain{1.0, 0}; // reflection products times carrier phase
    double pathloss = 1.0;     // free-space power ratio, >= 1
    double aoa_azimuth = 0.0;  // rad, array frame, from broadside
    double aoa_elevation = 0.0;
    double path_length = 0.0;  // m
    int bounce_count = 0;

    double power() const { return std::norm(complex_gain) / pathloss; }
};

struct TraceResult
{
    std::vector<RayPath> paths;
    bool empty_scene = false; // no surfaces, LOS blocked, nothing found
};

Vec3 image_reflect(const Vec3& point, const Plane& plane);

// True iff the open segment (a, b) passes through the interior of a box.
bool occluded(const Vec3& seg_a, const Vec3& seg_b, const std::vector<AxisAlignedBox>& blockers);

// LOS, single- and (optionally) double-bounce paths by the image method,
// strongest first. Deterministic.
TraceResult trace(const Scene& scene, std::size_t bs_index, const Vec3& user_pos,
                  int max_bounces = 2, std::size_t max_paths = 25);

// Azimuth/elevation of a unit direction in the array frame of BS `bs_index`.
std::pair<double, double> array_frame_angles(const Scene& scene, std::size_t bs_index, const Vec3& dir);

// Street canyon: 4 lamp-post BSs on a 50 m (x) by 60 m (y) rectangle at 6 m,
// ground plane and two facades parallel to the street (along y).
Scene street_scene(double facade_half_width = 32.0);

// Same street with a parked bus shadowing BS index 2 (the third BS).
Scene street_scene_with_bus(double facade_half_width = 32.0);

AxisAlignedBox default_bus_box();

// JSON: {"bs_positions": [[x,y,z],...], "bs_array_normals": [[...]...] (optional),
//        "surfaces": [{"point":[..], "normal":[..], "reflection": r}],
//        "blockers": [{"min":[..], "max":[..]}], "carrier_ghz": 60}
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const Scene& scene);
Scene load_scene(const std::string& path);

// FNV-1a over the canonical JSON dump; recorded in dataset manifests.
std::uint64_t scene_hash(const Scene& scene);

} // namespace cbf

#endif
