#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "casus/heatmap.hpp"
#include "casus/rng.hpp"

using namespace casus;

TEST_CASE("coordinate map values follow the 1-based formula", "[heatmap]") {
    {
        auto [imap, jmap] = coordinate_maps(1, 2);
        REQUIRE(imap(0, 0) == -0.5);
        REQUIRE(imap(0, 1) == 0.5);
    }
    {
        auto [imap, jmap] = coordinate_maps(1, 1);
        REQUIRE(imap(0, 0) == 0.0);
        REQUIRE(jmap(0, 0) == 0.0);
    }
    {
        auto [imap, jmap] = coordinate_maps(2, 3);
        REQUIRE(imap(0, 0) == Catch::Approx(-2.0 / 3.0).margin(1e-15));
        REQUIRE(imap(0, 1) == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(imap(0, 2) == Catch::Approx(2.0 / 3.0).margin(1e-15));
        REQUIRE(jmap(0, 0) == -0.5);
        REQUIRE(jmap(1, 0) == 0.5);
    }
    REQUIRE_THROWS_AS(coordinate_maps(0, 4), std::invalid_argument);
}

TEST_CASE("normalize: uniform, delta, negative clamp, zero mass", "[heatmap]") {
    Grid ones = Grid::Ones(4, 4);
    Grid n = normalize_grid(ones);
    REQUIRE(n(2, 3) == Catch::Approx(1.0 / 16.0).margin(1e-15));
    REQUIRE(n.sum() == Catch::Approx(1.0).margin(1e-12));

    Grid delta = Grid::Zero(5, 5);
    delta(2, 2) = 3.5;
    Grid nd = normalize_grid(delta);
    REQUIRE(nd(2, 2) == 1.0);

    Grid mixed = Grid::Zero(3, 3);
    mixed(0, 0) = -5.0;
    mixed(1, 1) = 2.0;
    mixed(2, 2) = 2.0;
    Grid nm = normalize_grid(mixed);
    REQUIRE(nm(0, 0) == 0.0);
    REQUIRE(nm(1, 1) == 0.5);
    REQUIRE(nm.sum() == Catch::Approx(1.0).margin(1e-12));

    Grid zeros = Grid::Zero(3, 3);
    REQUIRE_THROWS_AS(normalize_grid(zeros), std::domain_error);
    Grid negative = Grid::Constant(3, 3, -1.0);
    REQUIRE_THROWS_AS(normalize_grid(negative), std::domain_error);
}

TEST_CASE("heatmap mean: delta at center and uniform grid give the origin", "[heatmap]") {
    Grid delta = Grid::Zero(9, 9);
    delta(4, 4) = 1.0;
    const Vec2 m = heatmap_mean(delta);
    REQUIRE(m.x() == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(m.y() == Catch::Approx(0.0).margin(1e-15));

    const Vec2 mu = heatmap_mean(normalize_grid(Grid::Ones(8, 6)));
    REQUIRE(mu.x() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(mu.y() == Catch::Approx(0.0).margin(1e-12));

    Grid unnormalized = Grid::Ones(4, 4);
    REQUIRE_THROWS_AS(heatmap_mean(unnormalized), std::invalid_argument);
}

TEST_CASE("heatmap covariance: delta has zero spread, uniform matches column moments", "[heatmap]") {
    Grid delta = Grid::Zero(9, 9);
    delta(4, 4) = 1.0;
    const Mat2 s0 = heatmap_covariance(delta, heatmap_mean(delta));
    REQUIRE(s0.cwiseAbs().maxCoeff() < 1e-12);

    // uniform 4x4: variance = mean of squared I values = 0.3125
    Grid uni = normalize_grid(Grid::Ones(4, 4));
    const Mat2 s = heatmap_covariance(uni, heatmap_mean(uni));
    REQUIRE(s(0, 0) == Catch::Approx(0.3125).margin(1e-12));
    REQUIRE(s(1, 1) == Catch::Approx(0.3125).margin(1e-12));
    REQUIRE(s(0, 1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("render/extract round trip recovers mean and covariance", "[heatmap]") {
    PointGaussian g;
    g.mu = {0.3, -0.2};
    g.sigma = (Mat2() << 0.05 * 0.05, 0.0, 0.0, 0.05 * 0.05).finished();
    const Grid z = render_gaussian_heatmap(g, 256, 256);
    REQUIRE(std::abs(z.sum() - 1.0) < 1e-9);
    const Vec2 mu = heatmap_mean(z);
    REQUIRE((mu - g.mu).cwiseAbs().maxCoeff() < 1e-3);

    PointGaussian g2;
    g2.mu = {0.1, 0.05};
    g2.sigma = (Mat2() << 0.01, 0.0, 0.0, 0.02).finished();
    const Grid z2 = render_gaussian_heatmap(g2, 256, 256);
    const Mat2 s2 = heatmap_covariance(z2, heatmap_mean(z2));
    REQUIRE((s2 - g2.sigma).norm() / g2.sigma.norm() < 0.05);
}

TEST_CASE("render is 4-fold symmetric for a centered isotropic Gaussian", "[heatmap]") {
    PointGaussian g;
    g.mu = {0.0, 0.0};
    g.sigma = 0.01 * Mat2::Identity();
    const int n = 64;
    const Grid z = render_gaussian_heatmap(g, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            REQUIRE(z(i, j) == Catch::Approx(z(j, n - 1 - i)).margin(1e-15));
    REQUIRE_THROWS_AS(render_gaussian_heatmap(PointGaussian{{0, 0}, Mat2::Zero()}, 8, 8),
                      std::domain_error);
}

TEST_CASE("extracted covariance is symmetric PSD; flip negates the x mean", "[heatmap]") {
    RandomStream rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        RandomStream r = rng.child(rep);
        PointGaussian g;
        g.mu = {0.8 * r.uniform() - 0.4, 0.8 * r.uniform() - 0.4};
        const double sx = 0.03 + 0.12 * r.uniform();
        const double sy = 0.03 + 0.12 * r.uniform();
        const double rho = 1.2 * r.uniform() - 0.6;
        g.sigma = (Mat2() << sx * sx, rho * sx * sy, rho * sx * sy, sy * sy).finished();

        const Grid z = render_gaussian_heatmap(g, 128, 128);
        const Vec2 mu = heatmap_mean(z);
        const Mat2 s = heatmap_covariance(z, mu);
        REQUIRE(s(0, 1) == s(1, 0));
        REQUIRE(s(0, 0) >= 0.0);
        REQUIRE(s.determinant() >= -1e-12);

        const Grid flipped = z.rowwise().reverse();
        const Vec2 mu_f = heatmap_mean(flipped);
        REQUIRE(mu_f.x() == Catch::Approx(-mu.x()).margin(1e-6));
        REQUIRE(mu_f.y() == Catch::Approx(mu.y()).margin(1e-12));
    }
}

TEST_CASE("gaussian NLL hand values", "[heatmap]") {
    // residual zero, identity covariance at every point -> 0
    ContourDistribution d;
    Contour target;
    for (int i = 0; i < 5; ++i) {
        PointGaussian p;
        p.mu = {0.1 * i, -0.1 * i};
        d.points.push_back(p);
        target.points.push_back(p.mu);
    }
    REQUIRE(gaussian_nll(d, target) == Catch::Approx(0.0).margin(1e-6));

    // one point, Sigma = I, residual (1,0) -> 0.5
    ContourDistribution one;
    one.points.push_back({{1.0, 0.0}, Mat2::Identity()});
    Contour t0;
    t0.points.push_back({0.0, 0.0});
    REQUIRE(gaussian_nll(one, t0) == Catch::Approx(0.5).margin(1e-6));

    // one point, Sigma = 4I, residual (2,0) -> log(16)/2 + 0.5 = 1.8863
    ContourDistribution two;
    two.points.push_back({{2.0, 0.0}, 4.0 * Mat2::Identity()});
    REQUIRE(gaussian_nll(two, t0) == Catch::Approx(1.8862943611198906).margin(1e-6));

    Contour mismatch;
    mismatch.points.resize(3, Vec2::Zero());
    REQUIRE_THROWS_AS(gaussian_nll(one, mismatch), std::invalid_argument);
}

TEST_CASE("NLL decreases monotonically as the mean approaches the target", "[heatmap]") {
    ContourDistribution d;
    d.points.push_back({{1.0, 0.5}, (Mat2() << 0.5, 0.1, 0.1, 0.3).finished()});
    Contour target;
    target.points.push_back({0.0, 0.0});
    double prev = 1e300;
    for (int step = 0; step <= 10; ++step) {
        ContourDistribution moved = d;
        const double w = step / 10.0;
        moved.points[0].mu = (1.0 - w) * d.points[0].mu + w * target.points[0];
        const double nll = gaussian_nll(moved, target);
        REQUIRE(nll < prev);
        prev = nll;
    }
}

TEST_CASE("extract_distribution pulls per-point Gaussians from a stack", "[heatmap]") {
    HeatmapStack stack;
    PointGaussian a{{0.2, 0.1}, 0.004 * Mat2::Identity()};
    PointGaussian b{{-0.3, 0.25}, 0.009 * Mat2::Identity()};
    stack.grids.push_back(render_gaussian_heatmap(a, 128, 128));
    stack.grids.push_back(render_gaussian_heatmap(b, 128, 128));
    stack.normalized = true;
    const ContourDistribution d = extract_distribution(stack, {0, 0, 1});
    REQUIRE(d.k() == 2);
    REQUIRE((d.points[0].mu - a.mu).norm() < 1e-3);
    REQUIRE((d.points[1].mu - b.mu).norm() < 1e-3);
}
