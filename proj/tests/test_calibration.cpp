#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "casus/calibration.hpp"
#include "casus/rng.hpp"

using namespace casus;

namespace {

// single-loop reference implementations, kept deliberately naive

double naive_ece(const std::vector<double>& conf, const std::vector<std::uint8_t>& correct, int m) {
    double total = 0.0;
    for (int b = 0; b < m; ++b) {
        double cs = 0.0, as = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < conf.size(); ++i) {
            int bin = static_cast<int>(conf[i] * m);
            if (bin == m) bin = m - 1;
            if (bin != b) continue;
            cs += conf[i];
            as += correct[i];
            ++n;
        }
        if (n == 0) continue;
        total += static_cast<double>(n) / conf.size() * std::abs(as / n - cs / n);
    }
    return total;
}

double naive_uce(std::vector<double> err, std::vector<double> unc, int m) {
    std::vector<std::size_t> order(err.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return unc[a] < unc[b]; });
    const std::size_t n = err.size();
    double total = 0.0;
    std::size_t pos = 0;
    for (int b = 0; b < m; ++b) {
        std::size_t size = n / m + (static_cast<std::size_t>(b) < n % m ? 1 : 0);
        double es = 0.0, us = 0.0;
        for (std::size_t i = pos; i < pos + size; ++i) {
            es += err[order[i]];
            us += unc[order[i]];
        }
        total += static_cast<double>(size) / n * std::abs(es / size - us / size);
        pos += size;
    }
    return total;
}

double naive_mi(const UncertaintyMap& unc, const SegmentationMask& err, int bins) {
    const std::size_t n = unc.data.size();
    std::vector<std::vector<double>> p(bins, std::vector<double>(2, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        int b = static_cast<int>(unc.data[i] * bins);
        if (b == bins) b = bins - 1;
        p[b][err.data[i] ? 1 : 0] += 1.0 / n;
    }
    double mi = 0.0;
    for (int b = 0; b < bins; ++b) {
        for (int e = 0; e < 2; ++e) {
            if (p[b][e] <= 0.0) continue;
            double pb = p[b][0] + p[b][1];
            double pe = 0.0;
            for (int bb = 0; bb < bins; ++bb) pe += p[bb][e];
            mi += p[b][e] * std::log(p[b][e] / (pb * pe));
        }
    }
    return mi;
}

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST_CASE("ece hand values", "[calibration]") {
    // everything confident and correct
    const auto perfect = ece(std::vector<double>(10, 1.0), std::vector<std::uint8_t>(10, 1), 5);
    REQUIRE(perfect.value == 0.0);

    // one bin: confidence 0.8, accuracy 0.5 -> 0.3
    std::vector<double> conf(10, 0.8);
    std::vector<std::uint8_t> correct(10, 0);
    for (int i = 0; i < 5; ++i) correct[i] = 1;
    const auto one = ece(conf, correct, 1);
    REQUIRE(one.value == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(one.bins.size() == 1);
    REQUIRE(one.bins[0].count == 10);

    REQUIRE_THROWS_AS(ece({}, {}, 5), std::invalid_argument);
    REQUIRE_THROWS_AS(ece({1.5}, {1}, 5), std::invalid_argument);
}

TEST_CASE("ece matches the naive reference on random batches", "[calibration]") {
    RandomStream rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        RandomStream r = rng.child(rep);
        std::vector<double> conf(1000);
        std::vector<std::uint8_t> correct(1000);
        for (int i = 0; i < 1000; ++i) {
            conf[i] = r.uniform();
            correct[i] = r.uniform() < conf[i] ? 1 : 0;
        }
        const int m = 5 + rep * 3;
        REQUIRE(ece(conf, correct, m).value == Catch::Approx(naive_ece(conf, correct, m)).margin(1e-12));
    }
}

TEST_CASE("uce hand values and tie handling", "[calibration]") {
    // uncertainty identical to error -> 0 for any bin count
    std::vector<double> e = {0.5, 1.5, 0.25, 2.0, 0.75, 1.0};
    for (int m : {1, 2, 3, 6}) REQUIRE(uce_equal_count(e, e, m).value == 0.0);

    // single bin: mean error 2, mean uncertainty 5 -> 3
    const auto one = uce_equal_count({1.0, 3.0}, {4.0, 6.0}, 1);
    REQUIRE(one.value == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(one.bins[0].mean_x == 5.0);
    REQUIRE(one.bins[0].mean_y == 2.0);

    // ties keep input order (stable sort), so the result is reproducible
    std::vector<double> unc(9, 0.5);
    std::vector<double> err = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto tied1 = uce_equal_count(err, unc, 3);
    const auto tied2 = uce_equal_count(err, unc, 3);
    REQUIRE(tied1.value == tied2.value);
    REQUIRE(tied1.bins[0].mean_y == 2.0);  // first three samples

    REQUIRE_THROWS_AS(uce_equal_count({1.0}, {1.0}, 2), std::invalid_argument);
}

TEST_CASE("uce matches the naive reference on random batches", "[calibration]") {
    RandomStream rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        RandomStream r = rng.child(rep);
        std::vector<double> err(1000), unc(1000);
        for (int i = 0; i < 1000; ++i) {
            unc[i] = 2.0 * r.uniform();
            err[i] = std::abs(unc[i] * r.normal());
        }
        const int m = 7 + rep;  // exercises the remainder-spreading path
        REQUIRE(uce_equal_count(err, unc, m).value == Catch::Approx(naive_uce(err, unc, m)).margin(1e-12));
    }
}

TEST_CASE("uce bins spread the remainder over the leading bins", "[calibration]") {
    std::vector<double> v(10);
    std::iota(v.begin(), v.end(), 0.0);
    const auto out = uce_equal_count(v, v, 3);
    REQUIRE(out.bins[0].count == 4);
    REQUIRE(out.bins[1].count == 3);
    REQUIRE(out.bins[2].count == 3);
}

TEST_CASE("mutual information hand values", "[calibration]") {
    // constant uncertainty is independent of any error map
    UncertaintyMap flat;
    flat.h = flat.w = 8;
    flat.data.assign(64, 0.3);
    SegmentationMask err(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) err.set(i, j, (i + j) % 2);
    REQUIRE(mutual_information(flat, err) == Catch::Approx(0.0).margin(1e-12));

    // uncertainty identical to a balanced binary error map: MI = H(err) = ln 2
    UncertaintyMap match;
    match.h = match.w = 8;
    match.data.resize(64);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) match.data[i * 8 + j] = err.at(i, j) ? 1.0 : 0.0;
    REQUIRE(mutual_information(match, err) == Catch::Approx(std::log(2.0)).margin(1e-12));

    // unbalanced identity channel: MI = H(err)
    SegmentationMask err2(8, 8);
    for (int j = 0; j < 8; ++j) err2.set(0, j, 1);
    UncertaintyMap match2;
    match2.h = match2.w = 8;
    match2.data.resize(64);
    for (int px = 0; px < 64; ++px) match2.data[px] = err2.data[px] ? 1.0 : 0.0;
    const double p = 8.0 / 64.0;
    const double entropy = -(p * std::log(p) + (1 - p) * std::log(1 - p));
    REQUIRE(mutual_information(match2, err2) == Catch::Approx(entropy).margin(1e-12));

    UncertaintyMap small;
    small.h = small.w = 4;
    small.data.assign(16, 0.5);
    REQUIRE_THROWS_AS(mutual_information(small, err), std::invalid_argument);
}

TEST_CASE("mutual information is bounded by the marginal entropies", "[calibration]") {
    RandomStream rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        RandomStream r = rng.child(rep);
        UncertaintyMap u;
        u.h = u.w = 16;
        u.data.resize(256);
        SegmentationMask e(16, 16);
        for (int px = 0; px < 256; ++px) {
            u.data[px] = r.uniform();
            e.data[px] = r.uniform() < 0.2 + 0.6 * u.data[px] ? 1 : 0;
        }
        const double mi = mutual_information(u, e);
        REQUIRE(mi == Catch::Approx(naive_mi(u, e, 10)).margin(1e-12));
        REQUIRE(mi >= 0.0);
        // marginal entropies
        double pe = 0.0;
        for (int px = 0; px < 256; ++px) pe += e.data[px];
        pe /= 256.0;
        const double he = -(pe * std::log(pe) + (1 - pe) * std::log(1 - pe));
        std::vector<int> counts(10, 0);
        for (int px = 0; px < 256; ++px)
            counts[std::min(static_cast<int>(u.data[px] * 10), 9)] += 1;
        double hu = 0.0;
        for (int c : counts)
            if (c > 0) hu -= (c / 256.0) * std::log(c / 256.0);
        REQUIRE(mi <= std::min(he, hu) + 1e-12);
    }
}

TEST_CASE("dice-uncertainty correlation hand values", "[calibration]") {
    std::vector<double> dice = {0.9, 0.8, 0.7, 0.95, 0.6};
    std::vector<double> anti(dice.size());
    for (std::size_t i = 0; i < dice.size(); ++i) anti[i] = 1.0 - dice[i];
    REQUIRE(dice_uncertainty_correlation(dice, anti) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(dice_uncertainty_correlation(dice, dice) == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE_THROWS_AS(dice_uncertainty_correlation(dice, std::vector<double>(5, 0.3)), std::domain_error);
    REQUIRE_THROWS_AS(dice_uncertainty_correlation({0.5}, {0.5}), std::invalid_argument);
}

TEST_CASE("correlation of independent sequences is near zero and matches Pearson", "[calibration]") {
    RandomStream rng(9);
    const int n = 2000;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = rng.uniform();
        b[i] = rng.uniform();
    }
    const double corr = dice_uncertainty_correlation(a, b);
    REQUIRE(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(corr == Catch::Approx(-naive_pearson(a, b)).margin(1e-12));
}

TEST_CASE("calibration metrics are permutation invariant", "[calibration]") {
    RandomStream rng(15);
    std::vector<double> conf(200), err(200), unc(200);
    std::vector<std::uint8_t> correct(200);
    for (int i = 0; i < 200; ++i) {
        conf[i] = rng.uniform();
        correct[i] = rng.uniform() < 0.5 ? 1 : 0;
        unc[i] = rng.uniform() + 1e-3 * i;  // unique values so reordering is benign
        err[i] = rng.uniform();
    }
    auto conf2 = conf;
    auto correct2 = correct;
    auto unc2 = unc;
    auto err2 = err;
    std::reverse(conf2.begin(), conf2.end());
    std::reverse(correct2.begin(), correct2.end());
    std::reverse(unc2.begin(), unc2.end());
    std::reverse(err2.begin(), err2.end());
    REQUIRE(ece(conf, correct, 10).value == Catch::Approx(ece(conf2, correct2, 10).value).margin(1e-12));
    REQUIRE(uce_equal_count(err, unc, 10).value ==
            Catch::Approx(uce_equal_count(err2, unc2, 10).value).margin(1e-12));
}

TEST_CASE("reliability table exports non-empty bins", "[calibration]") {
    const auto one = ece(std::vector<double>(8, 1.0), std::vector<std::uint8_t>(8, 1), 4);
    const auto rows = reliability_table(one.bins);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].mean_x == 1.0);
    REQUIRE(rows[0].mean_y == 1.0);
    REQUIRE(rows[0].count == 8);

    const auto uce = uce_equal_count({1.0, 3.0}, {4.0, 6.0}, 1);
    const auto urows = reliability_table(uce.bins);
    REQUIRE(urows.size() == 1);
    REQUIRE(urows[0].mean_x == 5.0);
    REQUIRE(urows[0].mean_y == 2.0);
    REQUIRE(urows[0].count == 2);
}
