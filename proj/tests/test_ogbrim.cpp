// SPDX-License-Identifier: Apache-2.0
//
// obdoa: one-bit off-grid DOA estimation for sparse linear arrays
// Copyright (C) 2026 The obdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "obdoa/ogbrim.hpp"

#include "obdoa/normal.hpp"
#include "support/mills_oracle.hpp"
#include "support/test_util.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <cmath>
#include <fstream>
#include <random>

using namespace obdoa;
using obdoa::testing::TempDir;

namespace {

OneBitSnapshot scene_snapshot(const ArrayGeometry& g, std::vector<double> doas, double snr_db, std::uint64_t seed) {
    SourceScene s;
    s.doas_deg = std::move(doas);
    s.coeffs.assign(s.doas_deg.size(), cplx(0.8, 0.6));
    s.sigma = snr_to_sigma(snr_db);
    return simulate_snapshot(g, s, seed);
}

double log_cdf(double t) { return std::log(0.5 * std::erfc(-t / std::sqrt(2.0))); }

// Negative one-bit log-likelihood plus the smoothed prior, in normalized units.
double objective(const OneBitSnapshot& y, const CMatrix& C, const CVector& x, const SolverConfig& cfg) {
    const CVector fit = C * x;
    double f = 0.0;
    for (Eigen::Index n = 0; n < fit.size(); ++n) {
        f -= log_cdf(y.y()[n].real() * fit[n].real());
        f -= log_cdf(y.y()[n].imag() * fit[n].imag());
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) f += cfg.lambda / cfg.alpha * std::pow(std::norm(x[i]) + cfg.eta, cfg.alpha / 2);
    return f;
}

}  // namespace

TEST_CASE("pseudo-measurement at the origin") {
    const auto y = scene_snapshot(make_geometry("sla18"), {-10.0, 25.0}, 5.0, 3);
    const DictionaryPair d = build_dictionary(make_geometry("sla18"), GridSpec());
    const CVector v = compute_v(y, d.A, CVector::Zero(d.cols()));
    const double k = testing::pdf_over_cdf_oracle(0.0);
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        CHECK(v[n].real() == doctest::Approx(k * y.y()[n].real()).epsilon(1e-14));
        CHECK(v[n].imag() == doctest::Approx(k * y.y()[n].imag()).epsilon(1e-14));
    }
    CHECK(k == doctest::Approx(0.79788456080).epsilon(1e-10));
}

TEST_CASE("pseudo-measurement keeps the sign of y") {
    std::mt19937_64 rng(8);
    const auto y = scene_snapshot(make_geometry("sla10"), {12.0}, 0.0, 4);
    const CMatrix C = testing::random_cmatrix(10, 30, rng);
    for (double scale : {0.01, 1.0, 10.0, 100.0}) {
        const CVector v = compute_v(y, C, scale * testing::random_cvector(30, rng));
        for (Eigen::Index n = 0; n < v.size(); ++n) {
            CHECK(v[n].real() * y.y()[n].real() > 0.0);
            CHECK(v[n].imag() * y.y()[n].imag() > 0.0);
        }
    }
    CHECK_THROWS_AS(compute_v(y, C, CVector::Zero(29)), std::invalid_argument);
}

TEST_CASE("prior weights") {
    CVector x(3);
    x << cplx(0, 0), cplx(3, 4), cplx(1, 0);
    const RVector w = prior_weights(x, 1.0, 1e-6);
    CHECK(w[0] == doctest::Approx(std::pow(1e-6, -0.5)));
    CHECK(w[1] == doctest::Approx(std::pow(25.000001, -0.5)));
    CHECK(prior_weights(x, 2.0, 0.5)[1] == 1.0);
}

TEST_CASE("x update on an identity dictionary") {
    SolverConfig cfg;
    cfg.lambda = 2.0;
    cfg.alpha = 1.0;
    cfg.eta = 0.0;
    CVector v(3), xp(3);
    v << cplx(1, 2), cplx(-3, 0.5), cplx(0.25, -1);
    xp << cplx(1, 0), cplx(0, 2), cplx(4, 3);
    const CVector x = update_x(CMatrix::Identity(3, 3), v, xp, cfg);
    const double w[] = {1.0, 0.5, 0.2};  // 1/|x_prev|
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(x[i] - v[i] / (1.0 + cfg.lambda * w[i])) < 1e-14);
}

TEST_CASE("x update matches a dense solve") {
    std::mt19937_64 rng(21);
    SolverConfig cfg;
    for (auto [rows, cols] : {std::pair{8, 16}, std::pair{16, 8}, std::pair{5, 5}}) {
        const CMatrix C = testing::random_cmatrix(rows, cols, rng);
        const CVector v = testing::random_cvector(rows, rng);
        const CVector xp = testing::random_cvector(cols, rng);
        const RVector w = prior_weights(xp, cfg.alpha, cfg.eta);
        CMatrix G = C.adjoint() * C;
        G += (cfg.lambda * w).cast<cplx>().asDiagonal();
        const CVector ref = G.fullPivLu().solve(C.adjoint() * v);
        CHECK(testing::rel_diff(update_x(C, v, xp, cfg), ref) < 1e-10);
    }
}

TEST_CASE("MM iterations decrease the objective with the gaps fixed") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const auto y = scene_snapshot(g, {-20.4, 14.7}, 10.0, 12);
    for (double alpha : {0.5, 1.0}) {
        SolverConfig cfg;
        cfg.alpha = alpha;
        CVector x = d.A.adjoint() * y.y();
        double prev = objective(y, d.A, x, cfg);
        for (int t = 0; t < 60; ++t) {
            const CVector v = compute_v(y, d.A, x);
            x = update_x(d.A, v, x, cfg);
            const double cur = objective(y, d.A, x, cfg);
            CHECK(cur <= prev + 1e-9 * std::abs(prev));
            prev = cur;
        }
    }
}

TEST_CASE("beta update with no signal") {
    const DictionaryPair d = build_dictionary(make_geometry("sla18"), GridSpec());
    std::mt19937_64 rng(1);
    BetaDiagnostics diag;
    const RVector beta = update_beta(d, CVector::Zero(d.cols()), testing::random_cvector(18, rng), SolverConfig{}, &diag);
    CHECK(beta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(diag.support.empty());
}

TEST_CASE("beta update for a single active bin") {
    const DictionaryPair d = build_dictionary(make_geometry("sla18"), GridSpec());
    std::mt19937_64 rng(2);
    CVector x = CVector::Zero(d.cols());
    x[30] = cplx(0.9, -0.4);
    const CVector v = d.A * x + 0.05 * testing::random_cvector(18, rng);
    const CVector r = v - d.A * x;
    const CVector b = d.B.col(30);
    const double expect_rad = std::real(std::conj(x[30]) * b.dot(r)) / (std::norm(x[30]) * b.squaredNorm());
    const RVector beta = update_beta(d, x, v, SolverConfig{});
    CHECK(beta[30] == doctest::Approx(std::clamp(rad_to_deg(expect_rad), -1.0, 1.0)).epsilon(1e-12));
    CHECK((beta.array() != 0.0).count() <= 1);
}

TEST_CASE("beta update recovers gaps from a first-order model") {
    const DictionaryPair d = build_dictionary(make_geometry("sla18"), GridSpec());
    CVector x = CVector::Zero(d.cols());
    RVector beta0 = RVector::Zero(d.cols());
    x[12] = cplx(1.0, 0.2);
    x[40] = cplx(-0.3, 0.7);
    x[47] = cplx(0.5, 0.5);
    beta0[12] = 0.35;
    beta0[40] = -0.8;
    beta0[47] = 0.05;
    const CVector v = effective_dictionary(d, beta0) * x;
    for (BetaSupport mode : {BetaSupport::threshold, BetaSupport::peaks}) {
        SolverConfig cfg;
        cfg.beta_support = mode;
        BetaDiagnostics diag;
        const RVector beta = update_beta(d, x, v, cfg, &diag);
        CHECK((beta - beta0).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(diag.support == std::vector<Eigen::Index>{12, 40, 47});
        CHECK_FALSE(diag.diagonal_fallback);
    }

    // a gap outside half a grid interval is clipped
    const CVector v_far = d.A * x + d.B.col(12) * (x[12] * deg_to_rad(3.0));
    CHECK(update_beta(d, x, v_far, SolverConfig{})[12] == 1.0);
}

TEST_CASE("beta support rules") {
    const DictionaryPair d = build_dictionary(make_geometry("sla18"), GridSpec());
    std::mt19937_64 rng(9);
    CVector x = CVector::Zero(d.cols());
    x[20] = 1.0;
    x[21] = 0.6;  // shoulder of the same source
    x[35] = 0.5;
    x[50] = 0.001;  // below the threshold
    const CVector v = testing::random_cvector(18, rng);

    SolverConfig cfg;
    cfg.beta_support = BetaSupport::threshold;
    BetaDiagnostics diag;
    update_beta(d, x, v, cfg, &diag);
    CHECK(diag.support == std::vector<Eigen::Index>{20, 21, 35});

    cfg.beta_support = BetaSupport::peaks;
    const RVector beta = update_beta(d, x, v, cfg, &diag);
    CHECK(diag.support == std::vector<Eigen::Index>{20, 35});
    for (Eigen::Index m = 0; m < beta.size(); ++m) {
        if (m != 20 && m != 35) CHECK(beta[m] == 0.0);
        CHECK(std::abs(beta[m]) <= 1.0);
    }

    // a plateau keeps its left edge only
    CVector flat = CVector::Zero(d.cols());
    flat[0] = 1.0;
    flat[1] = 1.0;
    update_beta(d, flat, v, cfg, &diag);
    CHECK(diag.support == std::vector<Eigen::Index>{0});
}

TEST_CASE("surrogate cost") {
    SolverConfig cfg;
    cfg.lambda = 1.0;
    cfg.alpha = 1.0;
    cfg.eta = 0.0;
    CVector x(2), v(2);
    x << cplx(1, 0), cplx(0, 0);
    v << cplx(0, 0), cplx(0, 0);
    CHECK(surrogate_cost(CMatrix::Identity(2, 2), v, x, cfg) == doctest::Approx(1.5));
    v << cplx(1, 0), cplx(0, 2);
    CHECK(surrogate_cost(CMatrix::Identity(2, 2), v, x, cfg) == doctest::Approx(3.0));
    cfg.alpha = 0.5;
    cfg.eta = 3.0;  // (1 + 3)^(1/4) + 3^(1/4), scaled by lambda/alpha
    CHECK(surrogate_cost(CMatrix::Identity(2, 2), v, x, cfg) ==
          doctest::Approx(2.0 + 2.0 * (std::sqrt(2.0) + std::pow(3.0, 0.25))));
}

TEST_CASE("solver finds a noiseless on-grid source") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const auto y = scene_snapshot(g, {16.0}, 60.0, 1);
    const SolveResult r = solve(y, d, SolverConfig{});
    Eigen::Index best;
    r.estimate.magnitudes.maxCoeff(&best);
    CHECK(best == 38);
    CHECK(std::abs(r.estimate.beta_deg[best]) < 0.5);
    CHECK(r.state.iter <= 200);
    CHECK(r.state.cost_history.size() == static_cast<std::size_t>(r.state.iter));
    CHECK(r.estimate.magnitudes.maxCoeff() == 1.0);
    CHECK(r.estimate.magnitudes.minCoeff() >= 0.0);
    CHECK(r.estimate.beta_deg.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("solver is sign-equivariant and deterministic") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const auto y = scene_snapshot(g, {-31.3, 7.6}, 15.0, 77);
    const SolveResult a = solve(y, d, SolverConfig{});
    const SolveResult b = solve(y, d, SolverConfig{});
    const SolveResult neg = solve(y.negated(), d, SolverConfig{});
    CHECK(a.state.x_hat == b.state.x_hat);
    CHECK(a.estimate.beta_deg == b.estimate.beta_deg);
    CHECK(testing::rel_diff(neg.state.x_hat, -a.state.x_hat) < 1e-12);
    CHECK((neg.estimate.beta_deg - a.estimate.beta_deg).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("solver input checks") {
    const ArrayGeometry g = make_geometry("sla18");
    const DictionaryPair d = build_dictionary(g, GridSpec());
    const auto y10 = scene_snapshot(make_geometry("sla10"), {0.0}, 10.0, 1);
    CHECK_THROWS_AS(solve(y10, d, SolverConfig{}), std::invalid_argument);
    SolverConfig other;
    other.grid = GridSpec(-60, 60, 4);
    CHECK_THROWS_AS(solve(scene_snapshot(g, {0.0}, 10.0, 1), d, other), std::invalid_argument);
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK(cfg.lambda == 8.0);
    CHECK(cfg.alpha == 0.5);
    CHECK(cfg.max_iters == 200);
    CHECK(cfg.beta_support == BetaSupport::peaks);
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha = 1.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), "alpha must satisfy 0<α≤1 (got 1.5)", std::invalid_argument);
    cfg.alpha = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg.alpha = 1.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.lambda = 0.0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("solver config key-value round trip") {
    SolverConfig cfg;
    cfg.lambda = 0.123456789012345;
    cfg.alpha = 0.75;
    cfg.max_iters = 33;
    cfg.beta_support = BetaSupport::threshold;
    cfg.grid = GridSpec(-50, 50, 1);
    const SolverConfig back = SolverConfig::from_key_values(cfg.to_key_values());
    CHECK(back.lambda == cfg.lambda);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.max_iters == 33);
    CHECK(back.beta_support == BetaSupport::threshold);
    CHECK(back.grid == cfg.grid);

    TempDir dir("cfg");
    write_solver_config(cfg, dir / "s.conf");
    CHECK(read_solver_config(dir / "s.conf").to_key_values() == cfg.to_key_values());

    {
        std::ofstream out(dir / "hand.conf");
        out << "# tuned\nlambda = 4   # inline\n\nmax-iters=10\nbeta_support = threshold\n";
    }
    const SolverConfig hand = read_solver_config(dir / "hand.conf");
    CHECK(hand.lambda == 4.0);
    CHECK(hand.max_iters == 10);
    CHECK(hand.alpha == 0.5);

    CHECK_THROWS_WITH(SolverConfig::from_key_values({{"lamda", "1"}}), doctest::Contains("unknown solver config key"));
    CHECK_THROWS(SolverConfig::from_key_values({{"alpha", "2"}}));
    CHECK_THROWS(SolverConfig::from_key_values({{"lambda", "abc"}}));
    CHECK_THROWS(read_solver_config(dir / "missing.conf"));
    {
        std::ofstream out(dir / "bad.conf");
        out << "lambda\n";
    }
    CHECK_THROWS_WITH(read_solver_config(dir / "bad.conf"), doctest::Contains(":1: expected key=value"));
}

TEST_CASE("beta support names") {
    CHECK(parse_beta_support("peaks") == BetaSupport::peaks);
    CHECK(parse_beta_support("threshold") == BetaSupport::threshold);
    CHECK(to_string(BetaSupport::peaks) == "peaks");
    CHECK_THROWS_WITH(parse_beta_support("all"), "unknown beta support 'all' (expected peaks or threshold)");
}

TEST_CASE("trajectory csv") {
    SolverState st;
    st.cost_history = {3.5, 2.25};
    st.max_change_history = {1.0, 0.125};
    TempDir dir("traj");
    write_trajectory_csv(st, dir / "t.csv");
    std::ifstream in(dir / "t.csv");
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all == "iteration,cost,max_abs_change\n1,3.5,1\n2,2.25,0.125\n");
}
