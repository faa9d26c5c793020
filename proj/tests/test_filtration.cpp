#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "topo/filtration.hpp"

using namespace topo;
using namespace testsupport;

namespace {

RasterImage gray_image(const ScalarGrid& g) {
    RasterImage img;
    img.width = g.cols;
    img.height = g.rows;
    img.channels = 1;
    img.data = g.values;
    return img;
}

RasterImage rgb_image(int h, int w) {
    RasterImage img;
    img.width = w;
    img.height = h;
    img.channels = 3;
    img.data.resize(3u * h * w);
    return img;
}

}  // namespace

TEST_SUITE_BEGIN("filtration");

TEST_CASE("intensity of grayscale is the identity") {
    Rng rng(5);
    const ScalarGrid g = random_quantized_grid(rng, 6);
    const ScalarGrid f = intensity_filtration(gray_image(g));
    CHECK(f.rows == g.rows);
    CHECK(f.cols == g.cols);
    CHECK(f.values == g.values);
}

TEST_CASE("intensity of RGB is the normalized channel magnitude") {
    RasterImage img = rgb_image(1, 3);
    img.at(0, 0, 0) = 1.0;  // pure red pixel
    img.at(0, 0, 1) = 1.0;  // white pixel
    img.at(1, 0, 1) = 1.0;
    img.at(2, 0, 1) = 1.0;
    img.at(0, 0, 2) = 0.6;  // mixed pixel
    img.at(1, 0, 2) = 0.0;
    img.at(2, 0, 2) = 0.8;

    const ScalarGrid f = intensity_filtration(img);
    CHECK(f.at(0, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(f.at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.at(0, 2) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    for (double v : f.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("laplacian of a centered spike with replicate padding") {
    ScalarGrid g(3, 3, 0.0);
    g.at(1, 1) = 1.0;
    const ScalarGrid lap = laplacian(g);

    const double want[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            CHECK(lap.at(r, c) == want[r][c]);
        }
    }
}

TEST_CASE("replicate padding keeps constant grids flat") {
    const ScalarGrid flat(4, 5, 0.75);
    for (double v : laplacian(flat).values) CHECK(v == 0.0);
}

TEST_CASE("gradient is |laplacian|/8, averaged over channels") {
    ScalarGrid g(3, 3, 0.0);
    g.at(1, 1) = 1.0;
    const ScalarGrid f = gradient_filtration(gray_image(g));
    CHECK(f.at(1, 1) == 0.5);  // |-4| / 8
    CHECK(f.at(0, 1) == 1.0 / 8.0);
    CHECK(f.at(0, 0) == 0.0);

    // identical RGB channels reduce to the grayscale case
    RasterImage rgb = rgb_image(3, 3);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 9; ++i) {
            rgb.data[c * 9 + i] = g.values[i];
        }
    }
    CHECK(gradient_filtration(rgb).values == f.values);
}

TEST_CASE("laplacian is shift-invariant") {
    Rng rng(6);
    ScalarGrid g(5, 4);
    for (double& v : g.values) v = rng.below(5) / 4.0;  // dyadic values
    ScalarGrid shifted = g;
    for (double& v : shifted.values) v += 0.5;
    CHECK(laplacian(shifted).values == laplacian(g).values);
}

TEST_CASE("filtration names round-trip and reject junk") {
    CHECK(filtration_from_string("intensity") == FiltrationKind::Intensity);
    CHECK(filtration_from_string("gradient") == FiltrationKind::Gradient);
    CHECK(to_string(FiltrationKind::Gradient) == "gradient");
    CHECK_THROWS_AS(filtration_from_string("sobel"), std::invalid_argument);
}

TEST_CASE("unsupported channel counts are rejected") {
    RasterImage img;
    img.width = 2;
    img.height = 2;
    img.channels = 2;
    img.data.resize(8);
    CHECK_THROWS_AS(intensity_filtration(img), std::invalid_argument);
    CHECK_THROWS_AS(gradient_filtration(img), std::invalid_argument);
}

TEST_SUITE_END();
