#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "scatter_trace/errors.hpp"
#include "scatter_trace/scatter3d.hpp"

using namespace scatter_trace;
using complexd = std::complex<double>;

namespace {

// s-wave slab of radius a below the top: eta0 = -ka + atan((k/kap) tanh(kap a))
double swave_barrier_eta0(double V0, double a, double k) {
    double kap = std::sqrt(V0 - k * k);
    return -k * a + std::atan(k / kap * std::tanh(kap * a));
}

PhaseShiftSpectrum make_spectrum(double k, std::vector<double> etas) {
    PhaseShiftSpectrum sp;
    sp.k = k;
    sp.l_max = static_cast<int>(etas.size()) - 1;
    for (std::size_t l = 0; l < etas.size(); ++l)
        sp.channels.push_back({static_cast<int>(l),
                               2 * static_cast<int>(l) + 1, etas[l]});
    return sp;
}

Eigen::MatrixXcd random_unitary(int n, std::mt19937& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = complexd(N(rng), N(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
    Eigen::MatrixXcd Q = qr.householderQ();
    // fix the phase convention so Q is uniquely determined
    Eigen::MatrixXcd Rm = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        complexd d = Rm(i, i) / std::abs(Rm(i, i));
        Q.col(i) *= d;
    }
    return Q;
}

}  // namespace

TEST_CASE("free potential: all phase shifts vanish") {
    auto sp = phase_shifts(PotentialModel::gaussian(0.0, 1.0), 1.3, 4);
    for (const auto& ch : sp.channels) CHECK(std::abs(ch.eta) < 1e-9);
}

TEST_CASE("s-wave square barrier matches the closed form") {
    auto model = PotentialModel::square_barrier(1.0, 1.0);
    for (double k : {0.3, 0.6, 0.9}) {
        auto sp = phase_shifts(model, k, 0, 1e-9);
        CHECK(sp.channels[0].eta ==
              doctest::Approx(swave_barrier_eta0(1.0, 1.0, k)).epsilon(1e-6));
    }
}

TEST_CASE("tall barrier approaches the hard-sphere limit") {
    auto model = PotentialModel::square_barrier(4000.0, 1.0);
    double k = 0.8;
    auto sp = phase_shifts(model, k, 0, 1e-9);
    CHECK(sp.channels[0].eta == doctest::Approx(-k * 1.0).epsilon(0.02));
}

TEST_CASE("smooth radial solve is reproducible across tolerance settings") {
    auto model = PotentialModel::sech2(0.8, 1.0);
    auto a = phase_shifts(model, 1.1, 3, 0.5);
    auto b = phase_shifts(model, 1.1, 3, 0.1);
    for (int l = 0; l <= 3; ++l)
        CHECK(a.channels[l].eta ==
              doctest::Approx(b.channels[l].eta).epsilon(1e-9));
}

TEST_CASE("phase-shift decay beyond k * support") {
    auto model = PotentialModel::gaussian(1.0, 1.0);
    auto sp = phase_shifts(model, 2.0, -1, 1e-8);
    // super-polynomial decay: each of the last channels shrinks fast
    int L = sp.l_max;
    CHECK(std::abs(sp.channels[L].eta) < 1e-8);
    CHECK(std::abs(sp.channels[L - 3].eta) <
          1e-4 * std::abs(sp.channels[0].eta) + 1e-9);
    CHECK_THROWS_AS(phase_shifts(PotentialModel::gaussian(4.0, 2.0), 3.0, 1,
                                 1e-9),
                    TruncationError);
}

TEST_CASE("amplitude: s-wave isotropy and born forward value") {
    auto iso = make_spectrum(1.0, {0.3});
    complexd f0 = amplitude(iso, 1.0);
    complexd f1 = amplitude(iso, -0.5);
    CHECK(std::abs(f0 - f1) < 1e-14);
    complexd expect = (std::exp(complexd(0, 2.0 * 0.3)) - 1.0) /
                      complexd(0, 2.0);
    CHECK(std::abs(f0 - expect) < 1e-14);

    // weak potential: forward amplitude ~ -(1/4pi) Int V d^3x
    auto weak = PotentialModel::gaussian(0.05, 1.0);
    double k = 1.0;
    auto sp = phase_shifts(weak, k, -1, 1e-9);
    double born = -weak.born_integral_3d(k) / (4.0 * M_PI);
    CHECK(amplitude(sp, 1.0).real() == doctest::Approx(born).epsilon(0.1));
}

TEST_CASE("optical theorem holds to rounding") {
    auto model = PotentialModel::sech2(1.2, 0.8);
    for (double k : {0.5, 1.0, 2.5}) {
        auto sp = phase_shifts(model, k, -1, 1e-9);
        double sigma = cross_section(sp).sigma_bar;
        CHECK(amplitude(sp, 1.0).imag() ==
              doctest::Approx(k * sigma / (4.0 * M_PI)).epsilon(1e-10));
    }
}

TEST_CASE("unitarity-limit cross-section for eta0 = pi/2") {
    auto sp = make_spectrum(2.0, {M_PI / 2.0});
    CHECK(cross_section(sp).sigma_bar ==
          doctest::Approx(4.0 * M_PI / 4.0).epsilon(1e-14));
}

TEST_CASE("hilbert-schmidt identity, channel and dense paths") {
    auto sp = make_spectrum(1.7, {0.4, -0.2, 0.05});
    double hs = hs_norm_squared(sp);
    double sigma = cross_section(sp).sigma_bar;
    CHECK(hs == doctest::Approx(sp.k * sp.k * sigma / M_PI).epsilon(1e-14));
    auto op = soperator_from_phases(sp);
    CHECK(hs_norm_squared(op) == doctest::Approx(hs).epsilon(1e-13));
}

TEST_CASE("log det1: worked example eta0 = pi/2") {
    auto sp = make_spectrum(1.0, {M_PI / 2.0});
    complexd v = log_det1(sp);
    CHECK(v.real() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(M_PI).epsilon(1e-14));
    CHECK(std::abs(v) ==
          doctest::Approx(std::sqrt(4.0 + M_PI * M_PI)).epsilon(1e-14));
    auto rep = det1_bound_report(sp);
    CHECK(rep.rhs == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(rep.violated);
    CHECK(rep.max_abs_eta == doctest::Approx(M_PI / 2.0));
}

TEST_CASE("log det1: dense matrix path agrees with the channel formula") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(-1.2, 1.2);
    for (int trial = 0; trial < 5; ++trial) {
        int dim = 16;  // l_max = 3
        std::vector<double> etas(dim);
        for (auto& e : etas) e = U(rng);
        Eigen::MatrixXcd Q = random_unitary(dim, rng);
        Eigen::VectorXcd lam(dim);
        for (int i = 0; i < dim; ++i)
            lam[i] = std::exp(complexd(0.0, 2.0 * etas[i]));
        SOperator op;
        op.k = 1.0;
        op.l_max = 3;
        op.matrix = Q * lam.asDiagonal() * Q.adjoint();

        complexd channel = 0.0;
        for (double e : etas)
            channel += complexd(0.0, 2.0 * e) -
                       (std::exp(complexd(0.0, 2.0 * e)) - 1.0);
        complexd dense = log_det1(op);
        CHECK(std::abs(dense - channel) < 1e-10);
        // Re log det1 = sum (1 - cos 2 eta) >= 0, equal to +2k Im tr f
        CHECK(dense.real() >= -1e-12);
        complexd trf = (op.matrix.trace() - complexd(dim, 0.0)) /
                       (2.0 * complexd(0.0, 1.0) * op.k);
        CHECK(dense.real() ==
              doctest::Approx(2.0 * op.k * trf.imag()).epsilon(1e-10));
    }
}

TEST_CASE("small-eta bound: |log(1+z) - z| <= |z|^2/2 (1-|z|)^-1") {
    auto sp = make_spectrum(1.0, {0.05, -0.03, 0.01, 0.002});
    complexd v = log_det1(sp);
    double bound = 0.0, re_expect = 0.0;
    for (const auto& ch : sp.channels) {
        double z = 2.0 * std::abs(std::sin(ch.eta));  // |e^{2i eta} - 1|
        bound += ch.degeneracy * z * z / 2.0 / (1.0 - z);
        re_expect += ch.degeneracy * 2.0 * ch.eta * ch.eta;
    }
    CHECK(std::abs(v) <= bound * (1.0 + 1e-12));
    // leading magnitude is the real part sum d_a 2 eta_a^2
    CHECK(v.real() == doctest::Approx(re_expect).epsilon(0.01));
}

TEST_CASE("det structure: log det S - log det1 S = 2ik tr f") {
    auto sp = make_spectrum(0.9, {0.7, -0.3, 0.1});
    complexd logdet = 0.0;
    for (const auto& ch : sp.channels)
        logdet += complexd(0.0, 2.0 * ch.eta * ch.degeneracy);
    complexd rhs = log_det1(sp) + 2.0 * complexd(0.0, 1.0) * sp.k *
                                      trace_f(sp);
    CHECK(std::abs(logdet - rhs) < 1e-13);
}

TEST_CASE("s-operator file round trip (dense) is bit exact") {
    auto model = PotentialModel::gaussian(0.6, 1.0);
    std::vector<double> ks = {0.5, 1.0, 1.5, 2.0};
    std::vector<SOperator> ops;
    for (double k : ks)
        ops.push_back(soperator_from_phases(phase_shifts(model, k, 4, 1e-2)));
    auto path = std::filesystem::temp_directory_path() / "st_sop.json";
    save_soperator(path.string(), ops, 1e-6);
    auto file = load_soperator(path.string());
    REQUIRE(!file.compact);
    REQUIRE(file.operators.size() == ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
        CHECK(file.operators[i].k == ops[i].k);
        CHECK((file.operators[i].matrix - ops[i].matrix).cwiseAbs().maxCoeff() ==
              0.0);
    }
    std::filesystem::remove(path);
}

TEST_CASE("s-operator compact round trip recovers phase shifts") {
    auto model = PotentialModel::gaussian(0.6, 1.0);
    std::vector<double> ks = {0.5, 1.0, 1.5};
    std::vector<PhaseShiftSpectrum> spectra;
    for (double k : ks) spectra.push_back(phase_shifts(model, k, 4, 1e-2));
    auto path = std::filesystem::temp_directory_path() / "st_sop_c.json";
    save_soperator_compact(path.string(), spectra, 1e-6);
    auto file = load_soperator(path.string());
    REQUIRE(file.compact);
    REQUIRE(file.spectra.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (int l = 0; l <= 4; ++l)
            CHECK(file.spectra[i].channels[l].eta ==
                  spectra[i].channels[l].eta);
    std::filesystem::remove(path);
}

TEST_CASE("loader rejects non-unitary matrices and bad grids") {
    auto path = std::filesystem::temp_directory_path() / "st_sop_bad.json";
    {
        SOperator op;
        op.k = 1.0;
        op.l_max = 0;
        op.matrix = Eigen::MatrixXcd::Identity(1, 1) * 0.8;  // not unitary
        std::vector<SOperator> ops = {op};
        save_soperator(path.string(), ops, 1e-6);
    }
    CHECK_THROWS_AS(load_soperator(path.string()), UnitarityError);
    {
        std::ofstream f(path);
        f << "{\"l_max\": 0}";
    }
    CHECK_THROWS_AS(load_soperator(path.string()), FormatError);
    std::filesystem::remove(path);
}

TEST_CASE("eigenphase tracking follows smooth channels") {
    // two channels with crossing-free smooth phases in a fixed basis
    std::mt19937 rng(7);
    Eigen::MatrixXcd Q = random_unitary(3, rng);
    std::vector<SOperator> ops;
    std::vector<std::array<double, 3>> truth;
    for (int i = 0; i <= 20; ++i) {
        double k = 0.5 + 0.1 * i;
        std::array<double, 3> etas = {-0.4 - 0.05 * k, 0.3 * std::exp(-k),
                                      0.05};
        Eigen::VectorXcd lam(3);
        for (int c = 0; c < 3; ++c)
            lam[c] = std::exp(complexd(0.0, 2.0 * etas[c]));
        SOperator op;
        op.k = k;
        op.l_max = 0;  // dimension 1 mismatch is fine for tracking tests
        op.matrix = Q * lam.asDiagonal() * Q.adjoint();
        ops.push_back(op);
        truth.push_back(etas);
    }
    auto tracked = track_eigenphases(ops, 1e-8);
    REQUIRE(tracked.size() == ops.size());
    // each tracked channel reproduces one true channel for all k
    for (int c = 0; c < 3; ++c) {
        // find the matching truth channel at the first record
        double e0 = tracked[0].channels[c].eta;
        int match = -1;
        for (int t = 0; t < 3; ++t)
            if (std::abs(truth[0][t] - e0) < 1e-9) match = t;
        REQUIRE(match >= 0);
        for (std::size_t i = 0; i < ops.size(); ++i)
            CHECK(tracked[i].channels[c].eta ==
                  doctest::Approx(truth[i][match]).epsilon(1e-9));
    }
}

TEST_CASE("tracking across unrelated bases raises BranchError") {
    std::mt19937 rng(99);
    std::vector<SOperator> ops;
    const int dim = 16;
    for (int i = 0; i < 2; ++i) {
        Eigen::MatrixXcd Q = random_unitary(dim, rng);  // fresh basis each k
        Eigen::VectorXcd lam(dim);
        for (int c = 0; c < dim; ++c)
            lam[c] = std::exp(complexd(0.0, 0.1 * (c + 1)));
        SOperator op;
        op.k = 1.0 + i;
        op.l_max = 3;
        op.matrix = Q * lam.asDiagonal() * Q.adjoint();
        ops.push_back(op);
    }
    CHECK_THROWS_AS(track_eigenphases(ops, 1e-8), BranchError);
}

TEST_CASE("loader rejects non-ascending k records") {
    auto model = PotentialModel::gaussian(0.6, 1.0);
    std::vector<PhaseShiftSpectrum> spectra = {
        phase_shifts(model, 1.0, 2, 1.0), phase_shifts(model, 0.5, 2, 1.0)};
    auto path = std::filesystem::temp_directory_path() / "st_sop_desc.json";
    save_soperator_compact(path.string(), spectra, 1e-6);
    CHECK_THROWS_AS(load_soperator(path.string()), GridError);
    std::filesystem::remove(path);
}
