#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "specfuse/metrics.hpp"
#include "support/oracles.hpp"

using namespace specfuse;

namespace {

SpectralCube smooth_cube(std::size_t w, std::size_t h, const std::vector<double>& grid,
                         std::uint64_t seed, double offset = 10.0) {
    std::mt19937_64 rng(seed);
    SpectralCube cube;
    cube.width = w;
    cube.height = h;
    cube.grid = WavelengthGrid(grid);
    cube.data.resize(w * h * grid.size());
    for (std::size_t p = 0; p < cube.pixels(); ++p) {
        const double amp = oracle::uniform(rng, 0.5, 2.0);
        const double phase = oracle::uniform(rng, 0.0, 6.28);
        for (std::size_t b = 0; b < grid.size(); ++b)
            cube.data[b * cube.pixels() + p] =
                static_cast<float>(offset + amp * std::sin(grid[b] / 45.0 + phase));
    }
    return cube;
}

std::vector<double> ten_nm_grid() {
    std::vector<double> g;
    for (double x = 400; x <= 700; x += 10)
        g.push_back(x);
    return g;
}

} // namespace

TEST_CASE("mse basics") {
    CHECK(mse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{2, 2}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(mse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("mse matches a naive two-pass oracle on random vectors") {
    std::mt19937_64 rng(5);
    std::vector<double> a(100), b(100);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = oracle::uniform(rng, -10, 10);
        b[i] = oracle::uniform(rng, -10, 10);
    }
    // oracle: materialize squared differences, then sum
    std::vector<double> sq(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        sq[i] = (a[i] - b[i]) * (a[i] - b[i]);
    double total = 0.0;
    for (double v : sq)
        total += v;
    const double want = total / static_cast<double>(a.size());
    CHECK(mse(a, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("mse is zero iff the vectors are equal") {
    std::vector<double> a{1.5, -2.0, 3.25};
    auto b = a;
    CHECK(mse(a, b) == 0.0);
    b[1] += 1e-9;
    CHECK(mse(a, b) > 0.0);
}

TEST_CASE("cmse_pixel is ~0 when the target contains all in-span source knots") {
    SpectralPixel p;
    p.grid = WavelengthGrid(ten_nm_grid());
    std::mt19937_64 rng(11);
    p.values.resize(p.grid.size());
    for (auto& v : p.values)
        v = oracle::uniform(rng, 1.0, 100.0);

    // target = source knots plus midpoints (a superset within the span)
    std::vector<double> target;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        target.push_back(p.grid[i]);
        if (i + 1 < p.grid.size())
            target.push_back(0.5 * (p.grid[i] + p.grid[i + 1]));
    }
    for (auto m : {InterpolationMethod::linear(), InterpolationMethod::quadratic(),
                   InterpolationMethod::cubic(), InterpolationMethod::pchip()}) {
        CHECK(cmse_pixel(p, WavelengthGrid(target), m) <= 1e-10);
    }
}

TEST_CASE("cmse_pixel of a constant pixel is zero for all methods") {
    SpectralPixel p;
    p.grid = WavelengthGrid(ten_nm_grid());
    p.values.assign(p.grid.size(), 7.5);
    const auto target = WavelengthGrid::arithmetic(430, 4, 690);
    for (auto m : {InterpolationMethod::linear(), InterpolationMethod::quadratic(),
                   InterpolationMethod::cubic(), InterpolationMethod::pchip()})
        CHECK(cmse_pixel(p, target, m) <= 1e-18);
}

TEST_CASE("cmse ordering on a band-limited signal penalizes the linear kernel") {
    SpectralPixel p;
    p.grid = WavelengthGrid(ten_nm_grid());
    p.values.resize(p.grid.size());
    for (std::size_t i = 0; i < p.grid.size(); ++i)
        p.values[i] = 50.0 + 40.0 * std::sin(p.grid[i] / 40.0);
    const auto target = WavelengthGrid::arithmetic(430, 4, 690);

    const double lin = cmse_pixel(p, target, InterpolationMethod::linear());
    const double quad = cmse_pixel(p, target, InterpolationMethod::quadratic());
    const double cub = cmse_pixel(p, target, InterpolationMethod::cubic());
    CHECK(lin > quad);
    CHECK(lin > cub);
}

TEST_CASE("cmse_cube equals the per-pixel loop oracle") {
    const auto cube = smooth_cube(8, 8, ten_nm_grid(), 3);
    const auto target = WavelengthGrid::arithmetic(430, 4, 690);
    for (auto m : {InterpolationMethod::linear(), InterpolationMethod::cubic()}) {
        const double got = cmse_cube(cube, target, m);
        double acc = 0.0;
        for (std::size_t r = 0; r < cube.height; ++r)
            for (std::size_t c = 0; c < cube.width; ++c)
                acc += cmse_pixel(pixel_at(cube, r, c), target, m);
        const double want = acc / static_cast<double>(cube.pixels());
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("cmse_cube of a constant cube is zero") {
    SpectralCube cube;
    cube.width = 3;
    cube.height = 2;
    cube.grid = WavelengthGrid(ten_nm_grid());
    cube.data.assign(cube.pixels() * cube.bands(), 4.5f);
    const auto target = WavelengthGrid::arithmetic(430, 4, 690);
    for (auto m : {InterpolationMethod::linear(), InterpolationMethod::quadratic(),
                   InterpolationMethod::cubic(), InterpolationMethod::pchip()})
        CHECK(cmse_cube(cube, target, m) <= 1e-18);
}

TEST_CASE("cmse_cube of a 2-pixel cube is the mean of the per-pixel values") {
    SpectralCube cube;
    cube.width = 2;
    cube.height = 1;
    cube.grid = WavelengthGrid(ten_nm_grid());
    cube.data.resize(2 * cube.bands());
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        cube.data[b * 2 + 0] = static_cast<float>(20.0 + 10.0 * std::sin(cube.grid[b] / 50.0));
        cube.data[b * 2 + 1] = static_cast<float>(5.0 + 2.0 * std::cos(cube.grid[b] / 35.0));
    }
    const auto target = WavelengthGrid::arithmetic(430, 4, 690);
    const auto m = InterpolationMethod::quadratic();
    const double a = cmse_pixel(pixel_at(cube, 0, 0), target, m);
    const double b = cmse_pixel(pixel_at(cube, 0, 1), target, m);
    CHECK(cmse_cube(cube, target, m) == doctest::Approx(0.5 * (a + b)).epsilon(1e-12));
}

TEST_CASE("cmse is worker-count independent") {
    const auto cube = smooth_cube(9, 7, ten_nm_grid(), 17);
    const auto target = WavelengthGrid::arithmetic(430, 4, 690);
    const double w1 = cmse_cube(cube, target, InterpolationMethod::cubic(), 1);
    const double w5 = cmse_cube(cube, target, InterpolationMethod::cubic(), 5);
    CHECK(w1 == w5);
}

TEST_CASE("trapezoid_area") {
    SUBCASE("constant 1 over [430, 690] integrates to the span length") {
        const auto grid = WavelengthGrid::arithmetic(430, 4, 690);
        const std::vector<double> ones(grid.size(), 1.0);
        CHECK(trapezoid_area(grid, ones) == doctest::Approx(260.0).epsilon(1e-12));
    }
    SUBCASE("y = x over [0, 10] integrates to 50 (exact on affine data)") {
        const WavelengthGrid grid({0, 5, 10});
        CHECK(trapezoid_area(grid, std::vector<double>{0, 5, 10}) == doctest::Approx(50.0));
    }
    SUBCASE("matches a fine-subdivision oracle of the piecewise-linear interpolant") {
        std::mt19937_64 rng(9);
        const auto xs = oracle::random_grid(rng, 30, 400.0, 700.0);
        std::vector<double> ys(xs.size());
        for (auto& y : ys)
            y = oracle::uniform(rng, 0.0, 50.0);
        const double got = trapezoid_area(WavelengthGrid(xs), ys);
        // refine each interval into 64 linear slices
        double want = 0.0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const double h = (xs[i + 1] - xs[i]) / 64.0;
            for (int s = 0; s < 64; ++s) {
                const double t0 = static_cast<double>(s) / 64.0;
                const double t1 = static_cast<double>(s + 1) / 64.0;
                const double y0 = ys[i] + t0 * (ys[i + 1] - ys[i]);
                const double y1 = ys[i] + t1 * (ys[i + 1] - ys[i]);
                want += h * 0.5 * (y0 + y1);
            }
        }
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
    SUBCASE("linearity and additivity over concatenation") {
        std::mt19937_64 rng(13);
        const auto xs = oracle::random_grid(rng, 12, 0.0, 10.0);
        std::vector<double> y1(xs.size()), y2(xs.size()), mix(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            y1[i] = oracle::uniform(rng, -2, 2);
            y2[i] = oracle::uniform(rng, -2, 2);
            mix[i] = 2.0 * y1[i] - 3.0 * y2[i];
        }
        const WavelengthGrid g(xs);
        CHECK(trapezoid_area(g, mix) ==
              doctest::Approx(2.0 * trapezoid_area(g, y1) - 3.0 * trapezoid_area(g, y2))
                  .epsilon(1e-12));

        const std::size_t cut = 5;
        const WavelengthGrid left(std::vector<double>(xs.begin(), xs.begin() + cut + 1));
        const WavelengthGrid right(std::vector<double>(xs.begin() + cut, xs.end()));
        const std::vector<double> yl(y1.begin(), y1.begin() + cut + 1);
        const std::vector<double> yr(y1.begin() + cut, y1.end());
        CHECK(trapezoid_area(g, y1) ==
              doctest::Approx(trapezoid_area(left, yl) + trapezoid_area(right, yr))
                  .epsilon(1e-12));
    }
}

TEST_CASE("surface_avg_difference") {
    SUBCASE("a cube against itself is exactly zero") {
        const auto cube = smooth_cube(6, 5, ten_nm_grid(), 23);
        CHECK(surface_avg_difference(cube, cube) == 0.0);
    }
    SUBCASE("single-pixel hand computation: areas 260 vs 270 over span 260") {
        SpectralCube ref, interp;
        ref.width = ref.height = 1;
        ref.grid = WavelengthGrid({430, 690});
        ref.data = {1.0f, 1.0f}; // area 260
        interp.width = interp.height = 1;
        interp.grid = WavelengthGrid({430, 690});
        const float v = static_cast<float>(270.0 / 260.0);
        interp.data = {v, v}; // area 270
        CHECK(surface_avg_difference(ref, interp) ==
              doctest::Approx(10.0 / 260.0).epsilon(1e-6));
        CHECK(surface_avg_difference(ref, interp, SurfaceNormalization::Raw) ==
              doctest::Approx(10.0).epsilon(1e-6));
    }
    SUBCASE("piecewise-linear reference resampled onto a knot superset differs by ~0") {
        // ref is piecewise linear between its own knots; the linear resample
        // onto a superset grid traces the same polyline
        SpectralCube ref = smooth_cube(4, 4, ten_nm_grid(), 31);
        std::vector<double> target;
        for (std::size_t i = 0; i < ref.grid.size(); ++i) {
            target.push_back(ref.grid[i]);
            if (i + 1 < ref.grid.size())
                target.push_back(0.5 * (ref.grid[i] + ref.grid[i + 1]));
        }
        const auto interp =
            resample_cube(ref, WavelengthGrid(target), InterpolationMethod::linear());
        CHECK(surface_avg_difference(ref, interp) < 1e-7);
    }
    SUBCASE("disjoint spans raise an error") {
        SpectralCube a, b;
        a.width = a.height = 1;
        a.grid = WavelengthGrid({400, 500});
        a.data = {1, 1};
        b.width = b.height = 1;
        b.grid = WavelengthGrid({600, 700});
        b.data = {1, 1};
        CHECK_THROWS_WITH_AS(surface_avg_difference(a, b), doctest::Contains("disjoint"), Error);
    }
    SUBCASE("dimension mismatch raises an error") {
        const auto a = smooth_cube(2, 2, ten_nm_grid(), 1);
        const auto b = smooth_cube(3, 2, ten_nm_grid(), 1);
        CHECK_THROWS_AS(surface_avg_difference(a, b), Error);
    }
}

TEST_CASE("ndvi_map") {
    std::vector<double> grid{600, 665, 700, 830, 900};
    SUBCASE("equal RED and NIR bands give all zeros") {
        SpectralCube cube;
        cube.width = 3;
        cube.height = 2;
        cube.grid = WavelengthGrid(grid);
        cube.data.assign(cube.pixels() * cube.bands(), 0.4f);
        const auto map = ndvi_map(cube);
        for (double v : map.values)
            CHECK(v == 0.0);
    }
    SUBCASE("RED 0.2 / NIR 0.8 gives 0.6") {
        SpectralCube cube;
        cube.width = cube.height = 1;
        cube.grid = WavelengthGrid(grid);
        cube.data = {0.1f, 0.2f, 0.3f, 0.8f, 0.9f};
        const auto map = ndvi_map(cube);
        CHECK(map.values[0] == doctest::Approx(0.6).epsilon(1e-7));
    }
    SUBCASE("nonnegative cubes stay within [-1, 1] and zero denominators map to 0") {
        std::mt19937_64 rng(77);
        SpectralCube cube;
        cube.width = 8;
        cube.height = 8;
        cube.grid = WavelengthGrid(grid);
        cube.data.resize(cube.pixels() * cube.bands());
        for (auto& v : cube.data)
            v = (rng() % 10 == 0) ? 0.0f : static_cast<float>(oracle::uniform(rng, 0.0, 5.0));
        const auto map = ndvi_map(cube);
        for (double v : map.values) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    SUBCASE("a 690 nm-capped cube is refused for lack of NIR coverage") {
        SpectralCube cube;
        cube.width = cube.height = 1;
        cube.grid = WavelengthGrid::arithmetic(430, 4, 690);
        cube.data.assign(cube.bands(), 1.0f);
        CHECK_THROWS_WITH_AS(ndvi_map(cube), doctest::Contains("no NIR coverage"), Error);
    }
    SUBCASE("configuration must order the targets") {
        SpectralCube cube;
        cube.width = cube.height = 1;
        cube.grid = WavelengthGrid(grid);
        cube.data.assign(cube.bands(), 1.0f);
        NdviConfig cfg;
        cfg.red_target_nm = 900;
        cfg.nir_target_nm = 700;
        CHECK_THROWS_AS(ndvi_map(cube, cfg), Error);
    }
}

TEST_CASE("ndvi_mse") {
    std::vector<double> grid{600, 665, 700, 830, 900};
    auto cube = [&](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        SpectralCube c;
        c.width = 6;
        c.height = 6;
        c.grid = WavelengthGrid(grid);
        c.data.resize(c.pixels() * c.bands());
        for (auto& v : c.data)
            v = static_cast<float>(oracle::uniform(rng, 0.5, 2.0));
        return c;
    };
    SUBCASE("identical cubes give zero") {
        const auto c = cube(3);
        CHECK(ndvi_mse(c, c) == 0.0);
    }
    SUBCASE("symmetry in the two cube arguments") {
        const auto a = cube(4), b = cube(5);
        CHECK(ndvi_mse(a, b) == doctest::Approx(ndvi_mse(b, a)).epsilon(1e-15));
    }
    SUBCASE("perturbation scaling is O(eps^2)") {
        const auto ref = cube(6);
        auto perturb = [&](double eps) {
            auto c = ref;
            std::mt19937_64 rng(99); // fixed noise pattern
            for (auto& v : c.data)
                v = static_cast<float>(v + eps * oracle::uniform(rng, -1.0, 1.0));
            return ndvi_mse(ref, c);
        };
        const double e1 = perturb(1e-3);
        const double e2 = perturb(5e-4);
        const double ratio = e1 / e2;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("nearest_band picks the closest wavelength with low-index ties") {
    const WavelengthGrid g({400, 500, 600});
    CHECK(nearest_band(g, 440) == 0);
    CHECK(nearest_band(g, 460) == 1);
    CHECK(nearest_band(g, 450) == 0); // tie toward the lower band
    CHECK(nearest_band(g, 9999) == 2);
}
