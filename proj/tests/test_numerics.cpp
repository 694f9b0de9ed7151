#include <cmath>
#include <random>

#include "doctest.h"
#include "scatter_trace/errors.hpp"
#include "scatter_trace/numerics.hpp"

using namespace scatter_trace;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    const auto& gl = gauss_legendre(8);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        s += gl.weights[i] * std::pow(gl.nodes[i], 14);
    CHECK(s == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("adaptive integral of exp") {
    auto r = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0,
                                1e-12);
    CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("cubic spline reproduces smooth functions") {
    std::vector<double> x, y;
    for (int i = 0; i <= 200; ++i) {
        double t = -2.0 + 4.0 * i / 200.0;
        x.push_back(t);
        y.push_back(std::sin(t));
    }
    CubicSpline s(x, y);
    CHECK(s(0.37) == doctest::Approx(std::sin(0.37)).epsilon(1e-7));
    CHECK(s.derivative(0.37) == doctest::Approx(std::cos(0.37)).epsilon(1e-5));
    CHECK(s.integral(-1.0, 1.5) ==
          doctest::Approx(std::cos(1.0) - std::cos(1.5)).epsilon(1e-7));
}

TEST_CASE("spline rejects bad grids") {
    CHECK_THROWS_AS(CubicSpline({1.0, 1.0, 2.0}, {0.0, 0.0, 0.0}), GridError);
    CHECK_THROWS_AS(CubicSpline({1.0}, {0.0}), GridError);
}

TEST_CASE("monotone cubic stays within sample range and clamps outside") {
    MonotoneCubic m({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 0.0});
    for (double t = 0.0; t <= 3.0; t += 0.01) {
        CHECK(m(t) >= -1e-14);
        CHECK(m(t) <= 1.0 + 1e-14);
    }
    CHECK(m(-0.5) == 0.0);
    CHECK(m(3.5) == 0.0);
}

TEST_CASE("brent finds cos root") {
    double r = brent_root([](double x) { return std::cos(x); }, 1.0, 2.0);
    CHECK(r == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
}

TEST_CASE("unwrap removes 2 pi jumps") {
    std::vector<double> a;
    for (int i = 0; i <= 100; ++i) {
        double phi = -3.0 * i / 100.0 * M_PI;  // winds down 3 pi
        a.push_back(std::atan2(std::sin(phi), std::cos(phi)));
    }
    unwrap_angles(a);
    CHECK(a.back() == doctest::Approx(-3.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("power-law fit recovers exponent") {
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        double t = 2.0 + i * 0.5;
        x.push_back(t);
        y.push_back(-3.0 * std::pow(t, -2.5));
    }
    double c = 0.0, s = 0.0;
    REQUIRE(fit_power_law(x, y, 12, c, s));
    CHECK(s == doctest::Approx(-2.5).epsilon(1e-10));
    CHECK(c == doctest::Approx(-3.0).epsilon(1e-8));
}

TEST_CASE("riccati-bessel low orders match closed forms") {
    for (double x : {0.3, 1.7, 9.2, 40.0}) {
        std::vector<double> j, y;
        riccati_bessel(6, x, j, y);
        CHECK(j[0] == doctest::Approx(std::sin(x)).epsilon(1e-12));
        CHECK(y[0] == doctest::Approx(-std::cos(x)).epsilon(1e-12));
        CHECK(j[1] ==
              doctest::Approx(std::sin(x) / x - std::cos(x)).epsilon(1e-11));
        // cross-product identity j^_l y^_{l-1} - j^_{l-1} y^_l = 1
        for (int l = 1; l <= 6; ++l)
            CHECK(j[l] * y[l - 1] - j[l - 1] * y[l] ==
                  doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("riccati-bessel stable above the turning point") {
    std::vector<double> j, y;
    riccati_bessel(25, 3.0, j, y);  // l >> x: j tiny, must not blow up
    CHECK(std::isfinite(j[25]));
    CHECK(std::abs(j[25]) < 1e-12);
    CHECK(j[25] > 0.0);
}

TEST_CASE("legendre recurrence matches closed forms") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        double x = U(rng);
        CHECK(legendre_p(2, x) ==
              doctest::Approx(0.5 * (3.0 * x * x - 1.0)).epsilon(1e-13));
        CHECK(legendre_p(3, x) ==
              doctest::Approx(0.5 * (5.0 * x * x * x - 3.0 * x))
                  .epsilon(1e-12));
    }
    CHECK(legendre_p(17, 1.0) == doctest::Approx(1.0));
    CHECK(legendre_p(17, -1.0) == doctest::Approx(-1.0));
}

TEST_CASE("tridiagonal eigenvalues of the free laplacian") {
    // -u'' on (0, 1), Dirichlet: lambda_n = (n pi)^2 with FD dispersion
    int n = 1999;
    double h = 1.0 / (n + 1);
    std::vector<double> d(n, 2.0 / (h * h)), e(n - 1, -1.0 / (h * h));
    auto w = tridiag_lowest_eigenvalues(d, e, 3);
    for (int i = 0; i < 3; ++i) {
        double exact = 4.0 / (h * h) *
                       std::pow(std::sin((i + 1) * M_PI * h / 2.0), 2);
        CHECK(w[i] == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("numerov reproduces plane waves") {
    double k = 3.0, h = 0.001;
    int n = 2001;
    std::vector<double> w(n, -k * k);
    std::vector<double> u(n);
    u[0] = std::sin(0.0);
    u[1] = std::sin(k * h);
    numerov_forward_real(w, h, u);
    double x_end = h * (n - 1);
    CHECK(u[n - 1] == doctest::Approx(std::sin(k * x_end)).epsilon(1e-8));
}
