#include <doctest.h>

#include <cmath>

#include "nvscc/config.hpp"
#include "nvscc/constants.hpp"
#include "nvscc/errors.hpp"
#include "nvscc/grid.hpp"
#include "nvscc/io.hpp"

using namespace nvscc;
namespace kc = nvscc::constants;

TEST_CASE("build_grid node counts") {
    const Grid3D g = build_grid({500, 500, 300}, {5, 5, 5});
    CHECK(g.counts == Index3{101, 101, 61});

    const Grid3D tiny = build_grid({10, 10, 10}, {5, 5, 5});
    CHECK(tiny.counts == Index3{3, 3, 3});

    CHECK_THROWS_AS(build_grid({10, 10, 10}, {0, 5, 5}), std::invalid_argument);
    CHECK_THROWS_AS(build_grid({-10, 10, 10}, {5, 5, 5}), std::invalid_argument);
    CHECK_THROWS_AS(build_grid({5, 5, 5}, {5, 5, 5}), std::invalid_argument);  // 2 nodes
}

TEST_CASE("grid memory budget enforced") {
    CHECK_THROWS_AS(Grid3D({0, 0, 0}, {1, 1, 1}, {5000, 5000, 5000}), std::invalid_argument);
}

TEST_CASE("unit round trip ueV <-> GHz") {
    // 1 GHz = 4.135667696 ueV; round trip is identity to 1e-12 relative
    CHECK(kc::ueV_per_GHz == doctest::Approx(4.135667696).epsilon(1e-9));
    for (double e : {1e-3, 1.0, 41.0, 9.945 * kc::ueV_per_GHz, 1e5}) {
        const double rt = kc::GHz_to_ueV(kc::ueV_to_GHz(e));
        CHECK(std::abs(rt - e) <= 1e-12 * e);
    }
}

namespace {

/// Sampled Gaussian envelope, then renormalized on the grid.
ScalarField3D make_gaussian(const Grid3D& g, const Vec3& sigma, const Vec3& center) {
    ScalarField3D f(g, "nm^-3/2");
    for (std::int64_t iz = 0; iz < g.counts[2]; ++iz)
        for (std::int64_t iy = 0; iy < g.counts[1]; ++iy)
            for (std::int64_t ix = 0; ix < g.counts[0]; ++ix) {
                const Vec3 p = g.position(ix, iy, iz);
                double arg = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const double d = (p[a] - center[a]) / sigma[a];
                    arg += d * d;
                }
                f.at(ix, iy, iz) = std::exp(-arg / 4.0);  // |F|^2 has width sigma
            }
    const double n2 = squared_norm(f);
    for (double& v : f.values) v /= std::sqrt(n2);
    return f;
}

} // namespace

TEST_CASE("gaussian_moments recovers analytic sigmas within 1% at 5 nm spacing") {
    const Grid3D g = build_grid({500, 500, 250}, {5, 5, 5});
    const Vec3 sigma{60, 60, 25};
    const Vec3 center{250, 250, 125};
    const ScalarField3D f = make_gaussian(g, sigma, center);
    const GaussianMoments m = gaussian_moments(f);
    for (int a = 0; a < 3; ++a) {
        CHECK(m.sigma_nm[std::size_t(a)] ==
              doctest::Approx(sigma[std::size_t(a)]).epsilon(0.01));
        CHECK(m.center_nm[std::size_t(a)] ==
              doctest::Approx(center[std::size_t(a)]).epsilon(0.005));
    }
}

TEST_CASE("gaussian_moments: symmetric field centers on the grid centroid") {
    const Grid3D g = build_grid({100, 100, 100}, {5, 5, 5});
    const ScalarField3D f = make_gaussian(g, {20, 20, 20}, {50, 50, 50});
    const GaussianMoments m = gaussian_moments(f);
    for (int a = 0; a < 3; ++a) CHECK(m.center_nm[std::size_t(a)] == doctest::Approx(50.0));
}

TEST_CASE("gaussian_moments: single-node field has zero sigma") {
    const Grid3D g = build_grid({100, 100, 100}, {10, 10, 10});
    ScalarField3D f(g, "nm^-3/2");
    f.at(5, 5, 5) = 1.0;
    const double n2 = squared_norm(f);
    f.at(5, 5, 5) /= std::sqrt(n2);
    const GaussianMoments m = gaussian_moments(f);
    for (int a = 0; a < 3; ++a) {
        CHECK(m.sigma_nm[std::size_t(a)] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(m.center_nm[std::size_t(a)] == doctest::Approx(50.0));
    }
}

TEST_CASE("gaussian_moments rejects unnormalized fields") {
    const Grid3D g = build_grid({100, 100, 100}, {10, 10, 10});
    ScalarField3D f(g, "nm^-3/2");
    f.at(5, 5, 5) = 2.0;
    CHECK_THROWS_AS(gaussian_moments(f), PreconditionViolation);
}

TEST_CASE("gaussian_moments is invariant under grid translation") {
    const Vec3 sigma{30, 25, 20};
    const Grid3D g1 = build_grid({300, 300, 200}, {5, 5, 5});
    Grid3D g2 = g1;
    g2.origin = {1000, -500, 77};
    const ScalarField3D f1 = make_gaussian(g1, sigma, {150, 150, 100});
    const ScalarField3D f2 =
        make_gaussian(g2, sigma, {1000 + 150, -500 + 150, 77 + 100});
    const GaussianMoments m1 = gaussian_moments(f1);
    const GaussianMoments m2 = gaussian_moments(f2);
    for (int a = 0; a < 3; ++a)
        CHECK(m1.sigma_nm[std::size_t(a)] ==
              doctest::Approx(m2.sigma_nm[std::size_t(a)]).epsilon(1e-12));
}

TEST_CASE("trilinear sampling matches node values and interpolates linearly") {
    const Grid3D g = build_grid({10, 10, 10}, {1, 1, 1});
    ScalarField3D f(g, "V");
    for (std::int64_t iz = 0; iz < g.counts[2]; ++iz)
        for (std::int64_t iy = 0; iy < g.counts[1]; ++iy)
            for (std::int64_t ix = 0; ix < g.counts[0]; ++ix) {
                const Vec3 p = g.position(ix, iy, iz);
                f.at(ix, iy, iz) = 2.0 * p[0] - 3.0 * p[1] + 0.5 * p[2] + 7.0;
            }
    CHECK(f.sample({3.25, 4.5, 9.75}) ==
          doctest::Approx(2.0 * 3.25 - 3.0 * 4.5 + 0.5 * 9.75 + 7.0).epsilon(1e-13));
    CHECK_THROWS_AS(f.sample({-1, 0, 0}), std::invalid_argument);
}

TEST_CASE("config: defaults load and validation names offending fields") {
    const Config cfg = Config::from_json_text("{}");
    CHECK(cfg.material.m_longitudinal == doctest::Approx(1.40));
    CHECK(cfg.material.epsilon_d == doctest::Approx(5.7));
    CHECK(cfg.spectroscopy.delta_D == doctest::Approx(2.87));

    try {
        Config::from_json_text(R"({"material": {"m_transverse": -1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_name == "material.m_transverse");
    }
    try {
        Config::from_json_text(R"({"geometry": {"bogus_key": 1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_name == "geometry.bogus_key");
    }
    CHECK_THROWS_AS(Config::from_json_text("not json"), ConfigError);
}

TEST_CASE("config: donor layer below the NV is noted, not rejected") {
    const Config cfg = Config::from_json_text(
        R"({"geometry": {"nv_depth": 50.0, "donor_depth_N": 100.0}})");
    CHECK(cfg.notes.size() == 1);
}

TEST_CASE("config snapshot round-trips") {
    const Config cfg = Config::from_json_text(
        R"({"material": {"Theta": 9.1}, "xsection": {"phi_GHz": 2.0}})");
    const Config again = Config::from_json_text(cfg.to_json_text());
    CHECK(again.material.Theta == doctest::Approx(9.1));
    CHECK(again.xsection.phi_GHz == doctest::Approx(2.0));
    CHECK(again.to_json_text() == cfg.to_json_text());
}

TEST_CASE("field binary round trip preserves bytes") {
    const Grid3D g = build_grid({20, 20, 20}, {5, 5, 5});
    ScalarField3D f(g, "V");
    std::uint64_t state = 42;
    for (double& v : f.values) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        v = double(state >> 11) * 0x1.0p-53 - 0.5;
    }
    const std::string path = "/tmp/nvscc_test_field.f64";
    io::write_field(f, path);
    const ScalarField3D back = io::read_field(path);
    CHECK(back.grid == f.grid);
    CHECK(back.values == f.values);
    CHECK(io::hash_file(path) == io::fnv1a64(f.values.data(), f.values.size() * sizeof(double)));
}

TEST_CASE("format_double survives text round trip") {
    for (double v : {1.0 / 3.0, 9.945, 0.004759, 2.418e11, -7.0755e-31}) {
        const double back = std::stod(io::format_double(v));
        CHECK(back == v);
    }
}
