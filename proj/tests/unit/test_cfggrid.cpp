#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qwo/grid.hpp"
#include "qwo/sampling.hpp"
#include "qwo/stats.hpp"

using namespace qwo;

namespace {

std::vector<cplx> gaussian_line(const GridSpec& g, double c, double w, double k = 0.0) {
    std::vector<cplx> v(g.cells());
    for (std::size_t j = 0; j < g.cells(); ++j) {
        const double d = g.periodic_delta(g.position(j), c);
        v[j] = std::polar(std::exp(-d * d / (4 * w * w)), k * d);
    }
    return v;
}

}  // namespace

TEST_CASE("grid geometry") {
    GridSpec g(2, 8, 4.0, -2.0);
    CHECK(g.size() == 64);
    CHECK(g.dx() == doctest::Approx(0.5));
    CHECK(g.cell_volume() == doctest::Approx(0.25));
    CHECK(g.stride(0) == 8);
    CHECK(g.stride(1) == 1);
    CHECK(g.wrap(2.25) == doctest::Approx(-1.75));
    CHECK(g.wrap(-2.0) == doctest::Approx(-2.0));
    CHECK(g.periodic_delta(1.9, -1.9) == doctest::Approx(-0.2));
    CHECK(g.wavenumber(4) == doctest::Approx(-oracle::pi / g.dx()));
    CHECK(g.wavenumber(1) == doctest::Approx(2 * oracle::pi / 4.0));
    CHECK_THROWS_AS(GridSpec(5, 8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(1, 8, -1.0), std::invalid_argument);
}

TEST_CASE("complex fields reject non-finite values and size mismatches") {
    GridSpec g(1, 4, 1.0);
    CHECK_THROWS_AS(ComplexField(g, std::vector<cplx>(3)), std::invalid_argument);
    CHECK_THROWS_AS(ComplexField(g, std::vector<cplx>{1.0, NAN, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ComplexField(g).normalized(), std::exception);
}

TEST_CASE("inner product") {
    GridSpec g(1, 64, 10.0, -5.0);
    const ComplexField a = ComplexField(g, gaussian_line(g, -1.0, 0.7, 1.3)).normalized();
    const ComplexField b = ComplexField(g, gaussian_line(g, 0.5, 0.4, -0.2)).normalized();
    CHECK(std::abs(inner(a, a) - 1.0) < 1e-10);
    CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-14);

    std::vector<cplx> left(64, 0.0), right(64, 0.0);
    for (int j = 0; j < 10; ++j) {
        left[j] = 1.0;
        right[40 + j] = cplx(0.0, 2.0);
    }
    CHECK(std::abs(inner(ComplexField(g, left), ComplexField(g, right))) < 1e-12);
}

TEST_CASE("marginal of a product state is the factor density") {
    GridSpec g(2, 32, 8.0, -4.0);
    const auto a = gaussian_line(g, -1.0, 0.6, 0.4);
    const auto b = gaussian_line(g, 1.5, 0.9);
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j) v[i * 32 + j] = a[i] * b[j];
    const ComplexField psi = ComplexField(g, v).normalized();
    const auto m = marginal(psi, 0);
    double na = 0.0;
    for (auto x : a) na += std::norm(x) * g.dx();
    for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(m.values[i] - std::norm(a[i]) / na) < 1e-10);
}

TEST_CASE("marginal of a uniform state is 1/L") {
    GridSpec g(2, 32, 5.0);
    const ComplexField psi = ComplexField(g, std::vector<cplx>(g.size(), 1.0)).normalized();
    const auto m = marginal(psi, 1);
    for (double v : m.values) CHECK(v == doctest::Approx(1.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("marginal of an entangled state matches nested summation") {
    GridSpec g(2, 64, 12.0, -6.0);
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) {
            const double x = g.position(i), y = g.position(j);
            v[i * 64 + j] = std::exp(-((x - 1) * (x - 1) + (y + 1) * (y + 1))) +
                            cplx(0.0, 0.5) * std::exp(-((x + 2) * (x + 2) + (y - 2) * (y - 2)) / 2.0);
        }
    const ComplexField psi = ComplexField(g, v).normalized();
    for (std::size_t axis : {0u, 1u}) {
        const auto m = marginal(psi, axis);
        for (std::size_t k = 0; k < 64; ++k) {
            double s = 0.0;
            for (std::size_t o = 0; o < 64; ++o) s += std::norm(axis == 0 ? psi[k * 64 + o] : psi[o * 64 + k]) * g.dx();
            CHECK(std::abs(m.values[k] - s) < 1e-10);
        }
    }
}

TEST_CASE("marginal requires a normalized state") {
    GridSpec g(1, 16, 1.0);
    CHECK_THROWS(marginal(ComplexField(g, std::vector<cplx>(16, 3.0)), 0));
    CHECK_NOTHROW(normalized_marginal(ComplexField(g, std::vector<cplx>(16, 3.0)), 0));
}

TEST_CASE("wrapped gaussian normalization") {
    const double c = wrapped_gaussian_norm(50, 10.0, 0.7);
    double s = 0.0;
    for (int j = 0; j < 50; ++j) s += c * oracle::wrapped_gaussian(j * 0.2, 0.7, 10.0) * 0.2;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(wrapped_gaussian(0.3, 0.7, 10.0) == doctest::Approx(oracle::wrapped_gaussian(0.3, 0.7, 10.0)).epsilon(1e-13));
    CHECK(wrapped_gaussian(4.9, 3.0, 10.0) == doctest::Approx(oracle::wrapped_gaussian(4.9, 3.0, 10.0)).epsilon(1e-13));
}

TEST_CASE("gaussian smoothing") {
    const std::size_t n = 64;
    const double L = 8.0, sigma = 0.6, dx = L / n;
    const double c = 1.0 / [&] {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += oracle::wrapped_gaussian(j * dx, sigma, L) * dx;
        return s;
    }();

    SUBCASE("delta gives a wrapped Gaussian") {
        std::vector<double> v(n, 0.0);
        v[5] = 1.0 / dx;
        const auto out = gaussian_smooth(RealField1D(n, L, 0.0, v), sigma);
        for (std::size_t j = 0; j < n; ++j)
            CHECK(std::abs(out.values[j] - c * oracle::wrapped_gaussian((double(j) - 5.0) * dx, sigma, L)) < 1e-12);
    }
    SUBCASE("constants are preserved") {
        const auto out = gaussian_smooth(RealField1D(n, L, 0.0, std::vector<double>(n, 0.125)), sigma);
        for (double v : out.values) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("two deltas match direct convolution") {
        std::vector<double> v(n, 0.0);
        v[3] = 2.0;
        v[40] = 0.5;
        const auto out = gaussian_smooth(RealField1D(n, L, 0.0, v), sigma);
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += c * oracle::wrapped_gaussian((double(j) - double(k)) * dx, sigma, L) * v[k] * dx;
            CHECK(std::abs(out.values[j] - s) < 1e-10);
        }
    }
}

TEST_CASE("spectral derivative of a resolved plane wave") {
    GridSpec g(1, 32, 2 * oracle::pi);
    std::vector<cplx> v(32);
    for (std::size_t j = 0; j < 32; ++j) v[j] = std::polar(1.0, 3.0 * g.position(j));
    const auto d = spectral_derivative(ComplexField(g, v), 0);
    for (std::size_t j = 0; j < 32; ++j) CHECK(std::abs(d[j] - cplx(0, 3) * v[j]) < 1e-12);
}

TEST_CASE("stream seeds follow the documented split") {
    auto sm = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    };
    for (std::uint64_t m : {0ULL, 7ULL, 0xFFFFFFFFFFFFFFFFULL})
        for (std::uint64_t i : {0ULL, 1ULL, 12345ULL}) CHECK(stream_seed(m, i) == sm(sm(m) + i * 0x9E3779B97F4A7C15ULL));
    Rng a = Rng::stream(3, 4), b = Rng::stream(3, 4);
    for (int k = 0; k < 10; ++k) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("sample_density") {
    SUBCASE("delta density lands in its cell") {
        std::vector<double> v(20, 0.0);
        v[7] = 1.0;
        const RealField1D f(20, 4.0, -2.0, v);
        Rng rng(1);
        for (int k = 0; k < 200; ++k) {
            const double x = sample_density(f, rng);
            CHECK(std::abs(x - f.position(7)) <= f.dx() / 2 + 1e-12);
        }
    }
    SUBCASE("uniform density passes KS against the uniform law") {
        const RealField1D f(40, 3.0, 1.0, std::vector<double>(40, 1.0 / 3.0));
        Rng rng(2);
        std::vector<double> xs;
        for (int k = 0; k < 10000; ++k) xs.push_back(sample_density(f, rng));
        const auto r = ks_one_sample(xs, [](double x) { return (x - 1.0) / 3.0; });
        CHECK(r.passed());
    }
    SUBCASE("gaussian density mean within 3 standard errors") {
        const std::size_t n = 128;
        std::vector<double> v(n);
        const double L = 16.0, origin = -8.0, mu = 1.3, s = 0.8;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = origin + j * L / n;
            v[j] = std::exp(-(x - mu) * (x - mu) / (2 * s * s));
        }
        const RealField1D f(n, L, origin, v);
        Rng rng(3);
        std::vector<double> xs;
        for (int k = 0; k < 10000; ++k) xs.push_back(sample_density(f, rng));
        const auto st = mean_stats(xs);
        CHECK(std::abs(st.mean - mu) < 3 * s / std::sqrt(10000.0));
    }
}

TEST_CASE("density_cdf is the piecewise-linear cell CDF") {
    std::vector<double> w{0.1, 0.4, 0.3, 0.2, 0.5, 0.0, 0.25, 0.25};
    const RealField1D f(8, 4.0, -1.0, w);
    for (double x : {-1.0, -0.9, -0.3, 0.6, 1.74, 2.76, 2.99})
        CHECK(density_cdf(f, x) == doctest::Approx(oracle::cell_cdf(w, 4.0, -1.0, x)).epsilon(1e-12));
}
