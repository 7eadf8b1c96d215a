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

#include <boost/rational.hpp>
#include <doctest.h>

#include <random>

using namespace cbf;

namespace
{

using Q = boost::rational<long long>;

// Exact slab test on rational coordinates: does the open segment meet the open box?
// `edge` reports a segment that only touches a box edge or corner (entry == exit).
bool occluded_exact(const std::array<Q, 3>& a, const std::array<Q, 3>& b, const std::array<Q, 3>& lo,
                    const std::array<Q, 3>& hi, bool* edge = nullptr)
{
    Q t_lo(0), t_hi(1);
    for (int i = 0; i < 3; ++i)
    {
        const Q d = b[i] - a[i];
        if (d.numerator() == 0)
        {
            if (!(lo[i] < a[i] && a[i] < hi[i]))
                return false;
            continue;
        }
        Q t1 = (lo[i] - a[i]) / d, t2 = (hi[i] - a[i]) / d;
        if (t1 > t2)
            std::swap(t1, t2);
        t_lo = std::max(t_lo, t1);
        t_hi = std::min(t_hi, t2);
    }
    if (edge)
        *edge = t_lo == t_hi && Q(0) < t_lo && t_lo < Q(1);
    return t_lo < t_hi;
}

Vec3 to_vec(const std::array<Q, 3>& q)
{
    return {boost::rational_cast<double>(q[0]), boost::rational_cast<double>(q[1]), boost::rational_cast<double>(q[2])};
}

Scene free_space(const Vec3& bs)
{
    Scene s;
    s.bs_positions = {bs};
    s.bs_array_normals = {Vec3::UnitX()};
    return s;
}

} // namespace

TEST_CASE("image_reflect examples")
{
    const Plane ground{{0, 0, 0}, Vec3::UnitZ(), 0.3};
    CHECK((image_reflect({0, 0, 2}, ground) - Vec3(0, 0, -2)).norm() < 1e-15);
    CHECK((image_reflect({1, 2, 0}, ground) - Vec3(1, 2, 0)).norm() < 1e-15);
    const Plane wall{{5, 0, 0}, -Vec3::UnitX(), 0.5};
    CHECK((image_reflect({3, 1, 2}, wall) - Vec3(7, 1, 2)).norm() < 1e-12);
}

TEST_CASE("image_reflect is an involution")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 200; ++i)
    {
        const Vec3 n = Vec3(u(rng), u(rng), u(rng)).normalized();
        const Plane p{{u(rng), u(rng), u(rng)}, n, 0.5};
        const Vec3 x(u(rng), u(rng), u(rng));
        CHECK((image_reflect(image_reflect(x, p), p) - x).norm() < 1e-12);
    }
}

TEST_CASE("occluded examples")
{
    const std::vector<AxisAlignedBox> box{{{-1, -1, 0}, {1, 1, 2}}};
    CHECK(occluded({-5, 0, 1}, {5, 0, 1}, box));
    CHECK_FALSE(occluded({-5, 0, 3}, {5, 0, 3}, box));
    // endpoint on the face, not entering
    CHECK_FALSE(occluded({1, 0, 1}, {5, 0, 1}, box));
    // grazing along a face
    CHECK_FALSE(occluded({-5, 1, 1}, {5, 1, 1}, box));
    CHECK_FALSE(occluded({-5, 0, 1}, {5, 0, 1}, {}));
}

TEST_CASE("occluded agrees with an exact rational slab oracle")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coord(-8, 8);
    std::uniform_int_distribution<int> den(1, 4);
    auto q = [&] { return Q(coord(rng), den(rng)); };
    int hits = 0, face_cases = 0, edge_cases = 0;
    for (int trial = 0; trial < 20000; ++trial)
    {
        std::array<Q, 3> lo, hi, a, b;
        for (int i = 0; i < 3; ++i)
        {
            Q x = q(), y = q();
            if (x == y)
                y += Q(1);
            lo[i] = std::min(x, y);
            hi[i] = std::max(x, y);
            a[i] = q();
            b[i] = q();
        }
        // put one endpoint on a face half of the time
        if (trial % 2 == 0)
        {
            const int axis = trial % 3;
            a[axis] = (trial % 4 == 0) ? lo[axis] : hi[axis];
            ++face_cases;
        }
        if (a == b)
            continue;
        bool edge = false;
        const bool want = occluded_exact(a, b, lo, hi, &edge);
        if (edge)
        {
            // touching an edge exactly is a tie that floating point cannot resolve
            ++edge_cases;
            continue;
        }
        const bool got = occluded(to_vec(a), to_vec(b), {{to_vec(lo), to_vec(hi)}});
        hits += want;
        INFO("a=", to_vec(a).transpose(), " b=", to_vec(b).transpose(), " lo=", to_vec(lo).transpose(),
             " hi=", to_vec(hi).transpose());
        REQUIRE(want == got);
    }
    CHECK(hits > 1000);
    CHECK(face_cases > 1000);
    CHECK(edge_cases < 1000);
}

TEST_CASE("trace: LOS in free space")
{
    const Scene s = free_space({0, 0, 0});
    const auto r = trace(s, 0, {50, 0, 0});
    REQUIRE(r.paths.size() == 1);
    const RayPath& p = r.paths.front();
    CHECK(p.bounce_count == 0);
    CHECK(p.path_length == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(std::abs(p.path_length - 50.0) < 1e-9);
    CHECK(p.delay == doctest::Approx(50.0 / 299792458.0).epsilon(1e-12));
    CHECK(p.delay * 1e9 == doctest::Approx(166.782).epsilon(1e-5));
    CHECK(p.aoa_azimuth == doctest::Approx(0.0));
    CHECK(p.aoa_elevation == doctest::Approx(0.0));
}

TEST_CASE("trace: ground reflection length")
{
    Scene s = free_space({0, 0, 6});
    s.surfaces = {Plane{{0, 0, 0}, Vec3::UnitZ(), 0.3}};
    const double d = 20.0;
    const auto r = trace(s, 0, {d, 0, 2});
    REQUIRE(r.paths.size() == 2);
    const auto ground = std::find_if(r.paths.begin(), r.paths.end(), [](const RayPath& p) { return p.bounce_count == 1; });
    REQUIRE(ground != r.paths.end());
    CHECK(ground->path_length == doctest::Approx(std::sqrt(d * d + 64.0)).epsilon(1e-12));
    CHECK(std::abs(ground->complex_gain) == doctest::Approx(0.3));
}

TEST_CASE("trace: bus blocks the third BS")
{
    const Scene bus = street_scene_with_bus();
    const Scene open = street_scene();
    const Vec3 user(0, 0, 2);
    auto has_los = [](const TraceResult& r)
    { return std::any_of(r.paths.begin(), r.paths.end(), [](const RayPath& p) { return p.bounce_count == 0; }); };
    CHECK(has_los(trace(open, 2, user)));
    CHECK_FALSE(has_los(trace(bus, 2, user)));
    CHECK(has_los(trace(bus, 0, user)));
}

TEST_CASE("trace: invariants on the street scene")
{
    const Scene bus = street_scene_with_bus();
    const Scene open = street_scene();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-10, 10), uy(-15, 15);
    for (int i = 0; i < 200; ++i)
    {
        const Vec3 user(ux(rng), uy(rng), 2.0);
        for (std::size_t b = 0; b < bus.num_bs(); ++b)
        {
            const auto blocked = trace(bus, b, user);
            const auto free = trace(open, b, user);
            CHECK(free.paths.size() >= blocked.paths.size());
            const double los = (bus.bs_positions[b] - user).norm();
            double prev_power = std::numeric_limits<double>::infinity();
            for (const auto& p : blocked.paths)
            {
                CHECK(std::abs(p.delay * SPEED_OF_LIGHT - p.path_length) <= 1e-12 * p.path_length);
                CHECK(p.path_length >= los - 1e-9);
                CHECK(p.pathloss >= 1.0);
                CHECK(p.power() <= prev_power);
                prev_power = p.power();
                if (p.bounce_count == 0)
                    CHECK(p.path_length == doctest::Approx(los).epsilon(1e-12));
            }
            // deterministic
            const auto again = trace(bus, b, user);
            REQUIRE(again.paths.size() == blocked.paths.size());
            for (std::size_t k = 0; k < again.paths.size(); ++k)
            {
                CHECK(again.paths[k].delay == blocked.paths[k].delay);
                CHECK(again.paths[k].complex_gain == blocked.paths[k].complex_gain);
            }
        }
    }
}

TEST_CASE("trace: bounce and path limits")
{
    const Scene s = street_scene();
    const Vec3 user(1, 2, 2);
    for (int mb = 0; mb <= 2; ++mb)
    {
        const auto r = trace(s, 0, user, mb);
        for (const auto& p : r.paths)
            CHECK(p.bounce_count <= mb);
        if (mb == 0)
            CHECK(r.paths.size() == 1);
    }
    CHECK(trace(s, 0, user, 2, 3).paths.size() == 3);
    // strongest path is LOS without blockers
    CHECK(trace(s, 0, user).paths.front().bounce_count == 0);
}

TEST_CASE("trace: empty scene when LOS is blocked and nothing reflects")
{
    Scene s = free_space({0, 0, 2});
    s.blockers = {{{4, -1, 0}, {6, 1, 4}}};
    const auto r = trace(s, 0, {10, 0, 2});
    CHECK(r.paths.empty());
    CHECK(r.empty_scene);
}

TEST_CASE("array frame angles")
{
    const Scene s = street_scene();
    // BS 0 faces +x; a user straight ahead at BS height is broadside
    auto [az, el] = array_frame_angles(s, 0, Vec3::UnitX());
    CHECK(az == doctest::Approx(0.0));
    CHECK(el == doctest::Approx(0.0));
    std::tie(az, el) = array_frame_angles(s, 0, Vec3(1, 1, 0).normalized());
    CHECK(std::abs(az) == doctest::Approx(M_PI / 4));
    std::tie(az, el) = array_frame_angles(s, 0, Vec3(0, 0, 1));
    CHECK(el == doctest::Approx(M_PI / 2));
}

TEST_CASE("scene validation and JSON round trip")
{
    Scene s = street_scene_with_bus();
    CHECK_NOTHROW(s.validate());
    const Scene t = scene_from_json(scene_to_json(s));
    CHECK(scene_hash(t) == scene_hash(s));
    CHECK(t.blockers.size() == 1);
    CHECK(t.carrier_freq == doctest::Approx(60e9));

    Scene bad = s;
    bad.surfaces[0].reflection = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidScene);
    bad = s;
    bad.blockers[0].min.x() = 100.0;
    CHECK_THROWS_AS(bad.validate(), InvalidScene);
    bad = s;
    bad.bs_array_normals[1] = Vec3(2, 0, 0);
    CHECK_THROWS_AS(bad.validate(), InvalidScene);
    CHECK(scene_hash(street_scene()) != scene_hash(s));
    // facades closer than the lamp posts put the BSs behind a wall
    CHECK_THROWS_AS(street_scene(20.0).validate(), InvalidScene);
}
