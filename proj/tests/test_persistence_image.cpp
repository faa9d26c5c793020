#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "topo/persistence_image.hpp"

using namespace topo;
using namespace testsupport;

namespace {

// Independent re-derivation of the cell response via erf (the library uses
// erfc), for use as a numeric oracle.
double normal_cdf(double t) {
    return 0.5 * (1.0 + std::erf(t / std::numbers::sqrt2));
}

double cell_mass(double center, double lo, double hi, double sigma) {
    return normal_cdf((hi - center) / sigma) - normal_cdf((lo - center) / sigma);
}

double total(const PersistenceImage& img) {
    double s = 0.0;
    for (double w : img.weights) s += w;
    return s;
}

PersistenceImage single_point(double birth, double pers,
                              const PIConfig& cfg) {
    return rasterize_points({{birth, pers}}, cfg);
}

}  // namespace

TEST_SUITE_BEGIN("persistence_image");

TEST_CASE("a centered high-persistence point concentrates its mass") {
    PIConfig cfg;  // 7x7, sigma 0.05, unit ranges
    const PersistenceImage img = single_point(0.5, 0.5, cfg);

    // nearly all of the weighted Gaussian lands inside the window
    CHECK(total(img) == doctest::Approx(0.5).epsilon(1e-9));

    // center cell, computed independently: x in [3/7,4/7], y in [3/7,4/7]
    const double want = 0.5 * cell_mass(0.5, 3.0 / 7, 4.0 / 7, cfg.sigma) *
                        cell_mass(0.5, 3.0 / 7, 4.0 / 7, cfg.sigma);
    CHECK(img.at(3, 3) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("row 0 is the top of the persistence axis") {
    PIConfig cfg;
    const PersistenceImage high = single_point(0.5, 0.95, cfg);
    const auto max_it = std::max_element(high.weights.begin(),
                                         high.weights.end());
    const int row = static_cast<int>(max_it - high.weights.begin()) / cfg.cols;
    CHECK(row == 0);

    const PersistenceImage late = single_point(0.9, 0.15, cfg);
    const auto max2 = std::max_element(late.weights.begin(),
                                       late.weights.end());
    CHECK(static_cast<int>(max2 - late.weights.begin()) / cfg.cols == 5);
    CHECK(static_cast<int>(max2 - late.weights.begin()) % cfg.cols == 6);
}

TEST_CASE("zero-persistence points are kept but weightless") {
    PIConfig cfg;
    const PersistenceImage img = single_point(0.5, 0.0, cfg);
    for (double w : img.weights) CHECK(w == 0.0);
}

TEST_CASE("rasterization is additive over points") {
    PIConfig cfg;
    Rng rng(41);
    std::vector<std::array<double, 2>> a, b, both;
    for (int i = 0; i < 6; ++i) {
        a.push_back({rng.uniform(), rng.uniform()});
        b.push_back({rng.uniform(), rng.uniform()});
    }
    both = a;
    both.insert(both.end(), b.begin(), b.end());

    const PersistenceImage ia = rasterize_points(a, cfg);
    const PersistenceImage ib = rasterize_points(b, cfg);
    const PersistenceImage iboth = rasterize_points(both, cfg);
    for (std::size_t i = 0; i < iboth.weights.size(); ++i) {
        CHECK(iboth.weights[i] ==
              doctest::Approx(ia.weights[i] + ib.weights[i]).epsilon(1e-12));
    }
}

TEST_CASE("mass grows with persistence away from the window top") {
    PIConfig cfg;
    // Monotonicity holds where Gaussian truncation is negligible; sweep up
    // to 1 - 4*sigma.
    const double top = 1.0 - 4.0 * cfg.sigma;
    double prev = -1.0;
    for (double pers = 0.05; pers <= top + 1e-12; pers += 0.05) {
        const double mass = total(single_point(0.4, pers, cfg));
        CHECK(mass > prev);
        prev = mass;
    }
}

TEST_CASE("at the very top of the window truncation wins") {
    // Documented boundary behavior: half the kernel of a persistence-1.0
    // point falls outside the fixed window, so a slightly lower point can
    // carry more in-window mass. This is why the monotonicity sweep above
    // stops at 1 - 4*sigma.
    PIConfig cfg;
    CHECK(total(single_point(0.5, 0.9, cfg)) >
          total(single_point(0.5, 1.0, cfg)));
}

TEST_CASE("combined mode pools dimensions; per-dimension splits them") {
    PersistenceDiagram d;
    d.pairs.push_back({0, 1.0, 0.0, true});
    d.pairs.push_back({0, 0.8, 0.3, false});
    d.pairs.push_back({1, 0.9, 0.2, false});

    PIConfig cfg;
    const auto combined = vectorize(d, cfg);
    REQUIRE(combined.size() == 1);

    cfg.mode = PIConfig::Mode::PerDimension;
    const auto split = vectorize(d, cfg);
    REQUIRE(split.size() == 2);
    for (std::size_t i = 0; i < combined[0].weights.size(); ++i) {
        CHECK(combined[0].weights[i] ==
              doctest::Approx(split[0].weights[i] + split[1].weights[i])
                  .epsilon(1e-12));
    }

    // flattening concatenates dim 0 first
    const auto flat = flatten(split);
    REQUIRE(flat.size() == vector_length(cfg));
    CHECK(vector_length(cfg) == 98);
    cfg.mode = PIConfig::Mode::Combined;
    CHECK(vector_length(cfg) == 49);
    CHECK(flat[0] == split[0].weights[0]);
    CHECK(flat[49] == split[1].weights[0]);
}

TEST_CASE("birth_persistence_points transforms and filters") {
    PersistenceDiagram d;
    d.pairs.push_back({0, 1.0, 0.25, true});
    d.pairs.push_back({1, 0.75, 0.5, false});

    const auto all = birth_persistence_points(d);
    REQUIRE(all.size() == 2);
    CHECK(all[0] == std::array<double, 2>{1.0, 0.75});
    CHECK(all[1] == std::array<double, 2>{0.75, 0.25});

    const auto dim1 = birth_persistence_points(d, 1);
    REQUIRE(dim1.size() == 1);
    CHECK(dim1[0] == std::array<double, 2>{0.75, 0.25});
}

TEST_CASE("stability constant matches its closed form") {
    PIConfig cfg;
    const double want =
        3.0 / (cfg.sigma * std::sqrt(2.0 * std::numbers::pi)) + 2.0;
    CHECK(stability_constant(cfg) == doctest::Approx(want).epsilon(1e-12));
    CHECK(stability_constant(cfg) > 25.0);
    CHECK(stability_constant(cfg) < 26.0);
}

TEST_CASE("empirical stability under small diagram perturbations") {
    PIConfig cfg;
    const double L = stability_constant(cfg);
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        PersistenceDiagram a, b;
        const int n = rng.below(5) + 1;
        for (int i = 0; i < n; ++i) {
            const double birth = rng.uniform(0.2, 1.0);
            const double death = rng.uniform(0.0, birth);
            a.pairs.push_back({0, birth, death, false});
            const double db = rng.uniform(-0.02, 0.02);
            const double dd = rng.uniform(-0.02, 0.02);
            b.pairs.push_back({0, birth + db, std::min(birth + db, death + dd),
                               false});
        }
        const double w1 = wasserstein1(a, b, 0);
        const auto ia = vectorize(a, cfg), ib = vectorize(b, cfg);
        double linf = 0.0;
        for (std::size_t i = 0; i < ia[0].weights.size(); ++i) {
            linf = std::max(linf,
                            std::abs(ia[0].weights[i] - ib[0].weights[i]));
        }
        CHECK(linf <= L * w1 + 1e-9);
    }
}

TEST_CASE("config validation") {
    PIConfig cfg;
    cfg.sigma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = PIConfig{};
    cfg.rows = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = PIConfig{};
    cfg.persistence_range = {0.5, 0.5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = PIConfig{};
    CHECK_NOTHROW(cfg.validate());
}

TEST_SUITE_END();
