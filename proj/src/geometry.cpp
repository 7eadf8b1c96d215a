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

#include "cbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cbf
{

namespace
{

constexpr double SIDE_EPS = 1e-9;

double signed_distance(const Vec3& p, const Plane& plane) { return plane.normal.dot(p - plane.point); }

// Intersection of the segment a->b with the plane, as the segment parameter.
double plane_crossing(const Vec3& a, const Vec3& b, const Plane& plane)
{
    double denom = plane.normal.dot(b - a);
    return plane.normal.dot(plane.point - a) / denom;
}

bool inside_region(const Vec3& p, const std::vector<Plane>& surfaces, std::size_t skip_a, std::size_t skip_b)
{
    for (std::size_t i = 0; i < surfaces.size(); ++i)
    {
        if (i == skip_a || i == skip_b)
            continue;
        if (signed_distance(p, surfaces[i]) < -SIDE_EPS)
            return false;
    }
    return true;
}

Vec3 vec3_from_json(const nlohmann::json& j, const char* what)
{
    if (!j.is_array() || j.size() != 3)
        throw InvalidScene(std::string(what) + ": expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

} // namespace

void Scene::validate() const
{
    if (bs_positions.empty())
        throw InvalidScene("scene has no base stations");
    if (bs_array_normals.size() != bs_positions.size())
        throw InvalidScene("one array normal per base station is required");
    for (const auto& n : bs_array_normals)
    {
        if (std::abs(n.norm() - 1.0) > 1e-12)
            throw InvalidScene("array normals must be unit length");
        if (std::abs(n.z()) > 1e-9)
            throw InvalidScene("array normals must be horizontal (UPA on a vertical face)");
    }
    for (const auto& s : surfaces)
    {
        if (!(s.reflection > 0.0 && s.reflection <= 1.0))
            throw InvalidScene("reflection coefficients must lie in (0, 1]");
        if (std::abs(s.normal.norm() - 1.0) > 1e-12)
            throw InvalidScene("surface normals must be unit length");
    }
    for (const auto& p : bs_positions)
        for (const auto& s : surfaces)
            if (!(signed_distance(p, s) > 0.0))
                throw InvalidScene("base stations must lie strictly on the street side of every surface");
    for (const auto& b : blockers)
        if ((b.min.array() > b.max.array()).any())
            throw InvalidScene("blocker min corner exceeds max corner");
    if (!(carrier_freq > 0.0))
        throw InvalidScene("carrier frequency must be positive");
}

Vec3 image_reflect(const Vec3& point, const Plane& plane)
{
    return point - 2.0 * signed_distance(point, plane) * plane.normal;
}

bool occluded(const Vec3& seg_a, const Vec3& seg_b, const std::vector<AxisAlignedBox>& blockers)
{
    const Vec3 d = seg_b - seg_a;
    for (const auto& box : blockers)
    {
        double t_enter = 0.0, t_exit = 1.0;
        bool miss = false;
        for (int ax = 0; ax < 3 && !miss; ++ax)
        {
            if (d[ax] == 0.0)
            {
                // parallel to this slab: must sit strictly between its faces
                if (!(seg_a[ax] > box.min[ax] && seg_a[ax] < box.max[ax]))
                    miss = true;
                continue;
            }
            double t1 = (box.min[ax] - seg_a[ax]) / d[ax];
            double t2 = (box.max[ax] - seg_a[ax]) / d[ax];
            if (t1 > t2)
                std::swap(t1, t2);
            t_enter = std::max(t_enter, t1);
            t_exit = std::min(t_exit, t2);
            if (!(t_enter < t_exit))
                miss = true;
        }
        if (!miss)
            return true;
    }
    return false;
}

std::pair<double, double> array_frame_angles(const Scene& scene, std::size_t bs_index, const Vec3& dir)
{
    const Vec3& n = scene.bs_array_normals[bs_index];
    const Vec3 horiz = Vec3::UnitZ().cross(n).normalized();
    const Vec3 vert = n.cross(horiz);
    const Vec3 u = dir.normalized();
    double azimuth = std::atan2(u.dot(horiz), u.dot(n));
    double elevation = std::asin(std::clamp(u.dot(vert), -1.0, 1.0));
    return {azimuth, elevation};
}

TraceResult trace(const Scene& scene, std::size_t bs_index, const Vec3& user_pos, int max_bounces,
                  std::size_t max_paths)
{
    if (bs_index >= scene.num_bs())
        throw std::invalid_argument("trace: BS index out of range");
    if (max_bounces < 0 || max_bounces > 2)
        throw std::invalid_argument("trace: max_bounces must be 0, 1 or 2");
    for (const auto& s : scene.surfaces)
        if (signed_distance(user_pos, s) <= SIDE_EPS)
            throw std::invalid_argument("trace: user position outside the scene");

    const Vec3& bs = scene.bs_positions[bs_index];
    const double lambda = scene.wavelength();
    const auto& surf = scene.surfaces;
    const std::size_t none = surf.size();

    std::vector<RayPath> paths;
    auto emit = [&](double length, double coeff, const Vec3& first_hop, int bounces)
    {
        RayPath r;
        r.path_length = length;
        r.delay = length / SPEED_OF_LIGHT;
        double cycles = std::fmod(length / lambda, 1.0);
        r.complex_gain = coeff * std::polar(1.0, -TWO_PI * cycles);
        double fs = 4.0 * std::numbers::pi * length / lambda;
        r.pathloss = std::max(1.0, fs * fs);
        auto [az, el] = array_frame_angles(scene, bs_index, first_hop - bs);
        r.aoa_azimuth = az;
        r.aoa_elevation = el;
        r.bounce_count = bounces;
        paths.push_back(r);
    };

    if (!occluded(bs, user_pos, scene.blockers))
        emit((user_pos - bs).norm(), 1.0, user_pos, 0);

    if (max_bounces >= 1)
    {
        for (std::size_t i = 0; i < surf.size(); ++i)
        {
            if (signed_distance(bs, surf[i]) <= SIDE_EPS)
                continue;
            const Vec3 img = image_reflect(bs, surf[i]);
            const Vec3 q = img + plane_crossing(img, user_pos, surf[i]) * (user_pos - img);
            if (!inside_region(q, surf, i, none))
                continue;
            if (occluded(bs, q, scene.blockers) || occluded(q, user_pos, scene.blockers))
                continue;
            emit((user_pos - img).norm(), surf[i].reflection, q, 1);
        }
    }

    if (max_bounces >= 2)
    {
        // bs -> q1 on surface a -> q2 on surface b -> user
        for (std::size_t a = 0; a < surf.size(); ++a)
        {
            if (signed_distance(bs, surf[a]) <= SIDE_EPS)
                continue;
            const Vec3 img1 = image_reflect(bs, surf[a]);
            for (std::size_t b = 0; b < surf.size(); ++b)
            {
                if (b == a || signed_distance(img1, surf[b]) <= SIDE_EPS)
                    continue;
                const Vec3 img2 = image_reflect(img1, surf[b]);
                double t2 = plane_crossing(user_pos, img2, surf[b]);
                if (!(t2 > 0.0 && t2 < 1.0))
                    continue;
                const Vec3 q2 = user_pos + t2 * (img2 - user_pos);
                if (signed_distance(q2, surf[a]) <= SIDE_EPS)
                    continue;
                double t1 = plane_crossing(q2, img1, surf[a]);
                if (!(t1 > 0.0 && t1 < 1.0))
                    continue;
                const Vec3 q1 = q2 + t1 * (img1 - q2);
                if (!inside_region(q1, surf, a, b) || !inside_region(q2, surf, a, b))
                    continue;
                if (signed_distance(q1, surf[b]) < -SIDE_EPS || signed_distance(q2, surf[a]) < -SIDE_EPS)
                    continue;
                if (occluded(bs, q1, scene.blockers) || occluded(q1, q2, scene.blockers) ||
                    occluded(q2, user_pos, scene.blockers))
                    continue;
                emit((user_pos - img2).norm(), surf[a].reflection * surf[b].reflection, q1, 2);
            }
        }
    }

    std::stable_sort(paths.begin(), paths.end(), [](const RayPath& x, const RayPath& y)
                     {
                         if (x.power() != y.power())
                             return x.power() > y.power();
                         return x.path_length < y.path_length;
                     });
    if (paths.size() > max_paths)
        paths.resize(max_paths);

    TraceResult out;
    out.empty_scene = paths.empty() && surf.empty();
    out.paths = std::move(paths);
    return out;
}

Scene street_scene(double facade_half_width)
{
    Scene s;
    // lamp posts on the corners of a 50 m x 60 m rectangle, arrays facing the street
    s.bs_positions = {{-25.0, -30.0, 6.0}, {25.0, -30.0, 6.0}, {-25.0, 30.0, 6.0}, {25.0, 30.0, 6.0}};
    s.bs_array_normals = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitX(), -Vec3::UnitX()};
    s.surfaces = {
        Plane{{0.0, 0.0, 0.0}, Vec3::UnitZ(), 0.3},
        Plane{{-facade_half_width, 0.0, 0.0}, Vec3::UnitX(), 0.5},
        Plane{{facade_half_width, 0.0, 0.0}, -Vec3::UnitX(), 0.5},
    };
    s.carrier_freq = 60e9;
    return s;
}

AxisAlignedBox default_bus_box()
{
    // 20 m long (along the street), 2.5 m wide, 5 m tall, parked in front of the third BS
    return AxisAlignedBox{{-15.0, 2.0, 0.0}, {-12.5, 22.0, 5.0}};
}

Scene street_scene_with_bus(double facade_half_width)
{
    Scene s = street_scene(facade_half_width);
    s.blockers.push_back(default_bus_box());
    return s;
}

Scene scene_from_json(const nlohmann::json& j)
{
    Scene s;
    s.surfaces.clear();
    for (const auto& p : j.at("bs_positions"))
        s.bs_positions.push_back(vec3_from_json(p, "bs_positions"));
    if (j.contains("bs_array_normals"))
    {
        for (const auto& n : j.at("bs_array_normals"))
            s.bs_array_normals.push_back(vec3_from_json(n, "bs_array_normals"));
    }
    else
    {
        // default: face the street centre line x = 0
        for (const auto& p : s.bs_positions)
            s.bs_array_normals.push_back(p.x() <= 0.0 ? Vec3::UnitX() : Vec3(-Vec3::UnitX()));
    }
    if (j.contains("surfaces"))
        for (const auto& e : j.at("surfaces"))
            s.surfaces.push_back(Plane{vec3_from_json(e.at("point"), "surface point"),
                                       vec3_from_json(e.at("normal"), "surface normal"),
                                       e.value("reflection", 0.5)});
    if (j.contains("blockers"))
        for (const auto& e : j.at("blockers"))
            s.blockers.push_back(AxisAlignedBox{vec3_from_json(e.at("min"), "blocker min"),
                                                vec3_from_json(e.at("max"), "blocker max")});
    s.carrier_freq = j.value("carrier_ghz", 60.0) * 1e9;
    s.validate();
    return s;
}

nlohmann::json scene_to_json(const Scene& scene)
{
    nlohmann::json j;
    j["bs_positions"] = nlohmann::json::array();
    for (const auto& p : scene.bs_positions)
        j["bs_positions"].push_back(vec3_to_json(p));
    j["bs_array_normals"] = nlohmann::json::array();
    for (const auto& n : scene.bs_array_normals)
        j["bs_array_normals"].push_back(vec3_to_json(n));
    j["surfaces"] = nlohmann::json::array();
    for (const auto& s : scene.surfaces)
        j["surfaces"].push_back({{"point", vec3_to_json(s.point)},
                                 {"normal", vec3_to_json(s.normal)},
                                 {"reflection", s.reflection}});
    j["blockers"] = nlohmann::json::array();
    for (const auto& b : scene.blockers)
        j["blockers"].push_back({{"min", vec3_to_json(b.min)}, {"max", vec3_to_json(b.max)}});
    j["carrier_ghz"] = scene.carrier_freq / 1e9;
    return j;
}

Scene load_scene(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open scene file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    return scene_from_json(j);
}

std::uint64_t scene_hash(const Scene& scene)
{
    const std::string text = scene_to_json(scene).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace cbf
