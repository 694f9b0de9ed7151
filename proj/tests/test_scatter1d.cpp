#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "scatter_trace/errors.hpp"
#include "scatter_trace/scatter1d.hpp"

using namespace scatter_trace;
using complexd = std::complex<double>;

namespace {

// Rectangular barrier on [0, a], height V0, below the top (k^2 < V0):
// |T|^2 = [1 + V0^2 sinh^2(kappa a) / (4 k^2 kappa^2)]^{-1}.
double barrier_t2(double V0, double a, double k) {
    double kap = std::sqrt(V0 - k * k);
    double s = std::sinh(kap * a);
    return 1.0 / (1.0 + V0 * V0 * s * s / (4.0 * k * k * kap * kap));
}

double barrier_arg_t(double V0, double a, double k) {
    double kap = std::sqrt(V0 - k * k);
    return -k * a -
           std::atan((kap * kap - k * k) / (2.0 * k * kap) *
                     std::tanh(kap * a));
}

std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return g;
}

}  // namespace

TEST_CASE("free potential is trivial") {
    auto d = solve(PotentialModel::gaussian(0.0, 1.0), 1.3);
    CHECK(std::abs(d.R) < 1e-11);
    CHECK(std::abs(d.T - 1.0) < 1e-11);
    CHECK(std::abs(d.eta1) < 1e-11);
    CHECK(std::abs(d.eta2) < 1e-11);
    CHECK(d.unitarity_defect() < 1e-11);
}

TEST_CASE("delta closed form at g=2, k=1") {
    auto d = solve(PotentialModel::delta(2.0), 1.0);
    CHECK(d.T.real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.T.imag() == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(std::norm(d.T) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::norm(d.R) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.arg_T == doctest::Approx(-M_PI / 4.0).epsilon(1e-14));
    CHECK(d.arg_det_s() == doctest::Approx(-M_PI / 2.0).epsilon(1e-14));
    CHECK(d.unitarity_defect() < 1e-14);
}

TEST_CASE("delta arg T closed form on a grid") {
    auto data = solve_grid(PotentialModel::delta(2.0), log_grid(0.5, 2.0, 17));
    for (const auto& d : data)
        CHECK(d.arg_T == doctest::Approx(-std::atan(1.0 / d.k)).epsilon(1e-13));
}

TEST_CASE("square barrier transmission matches the closed form") {
    auto model = PotentialModel::square_barrier(1.0, 1.0);
    for (double k : {0.3, 0.5, 0.8}) {
        auto d = solve(model, k, 1e-11);
        CHECK(std::norm(d.T) ==
              doctest::Approx(barrier_t2(1.0, 1.0, k)).epsilon(1e-8));
        CHECK(d.arg_T ==
              doctest::Approx(barrier_arg_t(1.0, 1.0, k)).epsilon(1e-7));
    }
}

TEST_CASE("unitarity across a wide k range (gaussian)") {
    auto model = PotentialModel::gaussian(1.0, 1.0);
    auto data = solve_grid(model, log_grid(0.05, 50.0, 40), 1e-10);
    for (const auto& d : data) CHECK(d.unitarity_defect() <= 1e-9);
}

TEST_CASE("flux conservation of the asymptotic amplitudes") {
    auto d = solve(PotentialModel::gaussian(1.0, 1.0), 1.1, 1e-11);
    CHECK(std::abs(d.amplitudes().flux_defect()) < 1e-10);
}

TEST_CASE("S matrix structure: det S = T/T*") {
    auto d = solve(PotentialModel::gaussian(0.8, 1.2), 0.9, 1e-11);
    complexd det = d.S(0, 0) * d.S(1, 1) - d.S(0, 1) * d.S(1, 0);
    complexd expect = d.T / std::conj(d.T);
    CHECK(std::abs(det - expect) < 1e-10);
    CHECK(std::abs(std::abs(det) - 1.0) < 1e-10);
    // eigenphases sum to arg T
    CHECK(d.eta1 + d.eta2 == doctest::Approx(d.arg_T).epsilon(1e-12));
    // and e^{2 i eta} are the actual eigenvalues of S
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(d.S);
    double p0 = 0.5 * std::arg(es.eigenvalues()[0]);
    double p1 = 0.5 * std::arg(es.eigenvalues()[1]);
    double lo = std::min(p0, p1), hi = std::max(p0, p1);
    CHECK(std::min(d.eta1, d.eta2) == doctest::Approx(lo).epsilon(1e-8));
    CHECK(std::max(d.eta1, d.eta2) == doctest::Approx(hi).epsilon(1e-8));
}

TEST_CASE("parity: left and right reflection have equal modulus") {
    // asymmetric scatterer: slab on [0, a]
    auto model = PotentialModel::square_barrier(0.7, 1.0);
    auto left = solve(model, 0.8, 1e-11);
    auto right = solve(model.mirrored(), 0.8, 1e-11);
    CHECK(std::abs(left.R) == doctest::Approx(std::abs(right.R)).epsilon(1e-9));
    CHECK(std::abs(left.T - right.T) < 1e-9);  // transmission is two-sided
}

TEST_CASE("born tail: arg T ~ -Int V / 2k at large k") {
    auto model = PotentialModel::gaussian(1.0, 1.0);
    double I = std::sqrt(M_PI);
    for (double k : {25.0, 50.0}) {
        auto d = solve(model, k, 1e-11);
        double born = -I / (2.0 * k);
        CHECK(std::abs(d.arg_T - born) < 2e-3 * std::abs(born) + 1e-12);
    }
}

TEST_CASE("narrow tall barrier converges to the delta closed form") {
    double g = 2.0, k = 1.0;
    auto delta = solve(PotentialModel::delta(g), k);
    double prev = 1e9;
    for (double a : {0.08, 0.02}) {
        auto d = solve(PotentialModel::square_barrier(g / a, a), k, 1e-11);
        double gap = std::abs(d.T - delta.T);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("grid must be ascending and positive") {
    auto model = PotentialModel::delta(1.0);
    std::vector<double> bad = {1.0, 0.5};
    CHECK_THROWS_AS(solve_grid(model, bad), GridError);
    std::vector<double> neg = {-1.0, 0.5};
    CHECK_THROWS_AS(solve_grid(model, neg), GridError);
    CHECK_THROWS_AS(solve(model, 0.0), DomainError);
}

TEST_CASE("csv round trip") {
    auto model = PotentialModel::gaussian(0.5, 1.0);
    auto data = solve_grid(model, log_grid(0.2, 5.0, 20), 1e-10);
    auto path = std::filesystem::temp_directory_path() / "st_test_1d.csv";
    save_scatter1d_csv(path.string(), data);
    auto back = load_scatter1d_csv(path.string());
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].k == data[i].k);
        CHECK(std::abs(back[i].R - data[i].R) == 0.0);
        CHECK(std::abs(back[i].T - data[i].T) == 0.0);
        CHECK(back[i].arg_T == doctest::Approx(data[i].arg_T).epsilon(1e-15));
    }
    std::filesystem::remove(path);
}

TEST_CASE("csv loader rejects non-unitary rows") {
    auto path = std::filesystem::temp_directory_path() / "st_bad_1d.csv";
    {
        std::FILE* f = std::fopen(path.string().c_str(), "w");
        std::fputs("k,re_r,im_r,re_t,im_t,arg_det_s,r_squared\n", f);
        std::fputs("1.0,0.9,0,0.9,0,0,0.81\n", f);  // |R|^2+|T|^2 = 1.62
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_scatter1d_csv(path.string()), UnitarityError);
    std::filesystem::remove(path);
}

TEST_CASE("coarse grids over a winding phase raise BranchError") {
    // a thick slab winds arg T by many pi; three far-apart samples cannot
    // fix the branch
    auto model = PotentialModel::square_barrier(4.0, 6.0);
    std::vector<double> coarse = {1.0, 1.65, 2.3};
    CHECK_THROWS_AS(solve_grid(model, coarse), BranchError);
    // a dense grid over the same span unwraps fine and ends near the Born
    // phase
    std::vector<double> dense;
    for (int i = 0; i <= 400; ++i)
        dense.push_back(0.3 + (60.0 - 0.3) * i / 400.0);
    auto data = solve_grid(model, dense);
    double born = -model.integral_1d(60.0) / (2.0 * 60.0);
    CHECK(data.back().arg_T == doctest::Approx(born).epsilon(0.01));
}
