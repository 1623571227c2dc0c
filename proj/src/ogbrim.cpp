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
#include "obdoa/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace obdoa {

namespace {

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

void check_shapes(const CMatrix& C, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (C.rows() != rows || C.cols() != cols)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (dictionary is " +
                                    std::to_string(C.rows()) + "x" + std::to_string(C.cols()) +
                                    ", expected " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ")");
}

}  // namespace

std::string to_string(BetaSupport s) { return s == BetaSupport::peaks ? "peaks" : "threshold"; }

BetaSupport parse_beta_support(const std::string& s) {
    if (s == "peaks") return BetaSupport::peaks;
    if (s == "threshold") return BetaSupport::threshold;
    throw std::invalid_argument("unknown beta support '" + s + "' (expected peaks or threshold)");
}

void SolverConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must satisfy 0<α≤1 (got " + format_double(alpha) + ")");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be non-negative");
    if (beta_update_start < 0) throw std::invalid_argument("beta_update_start must be non-negative");
    if (!(support_threshold > 0.0 && support_threshold <= 1.0))
        throw std::invalid_argument("support_threshold must be in (0, 1]");
}

std::map<std::string, std::string> SolverConfig::to_key_values() const {
    return {
        {"lambda", format_double(lambda)},
        {"alpha", format_double(alpha)},
        {"eta", format_double(eta)},
        {"max_iters", std::to_string(max_iters)},
        {"tol", format_double(tol)},
        {"beta_update_start", std::to_string(beta_update_start)},
        {"support_threshold", format_double(support_threshold)},
        {"beta_support", to_string(beta_support)},
        {"grid", grid.describe()},
    };
}

SolverConfig SolverConfig::from_key_values(const std::map<std::string, std::string>& kv) {
    SolverConfig cfg;
    for (const auto& [raw_key, value] : kv) {
        const std::string key = normalize_key(raw_key);
        if (key == "lambda") cfg.lambda = parse_double(value);
        else if (key == "alpha") cfg.alpha = parse_double(value);
        else if (key == "eta") cfg.eta = parse_double(value);
        else if (key == "max_iters") cfg.max_iters = parse_int(value);
        else if (key == "tol") cfg.tol = parse_double(value);
        else if (key == "beta_update_start") cfg.beta_update_start = parse_int(value);
        else if (key == "support_threshold") cfg.support_threshold = parse_double(value);
        else if (key == "beta_support") cfg.beta_support = parse_beta_support(value);
        else if (key == "grid") cfg.grid = GridSpec::parse(value);
        else throw std::invalid_argument("unknown solver config key '" + raw_key + "'");
    }
    cfg.validate();
    return cfg;
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                        ": expected key=value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

SolverConfig read_solver_config(const std::filesystem::path& path) {
    return SolverConfig::from_key_values(read_key_value_file(path));
}

void write_solver_config(const SolverConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path.string());
    for (const auto& [k, v] : cfg.to_key_values()) out << k << " = " << v << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

CVector compute_v(const OneBitSnapshot& y, const CMatrix& C, const CVector& x_hat) {
    check_shapes(C, y.size(), x_hat.size(), "compute_v");
    const CVector fit = C * x_hat;
    const CVector& yv = y.y();
    CVector v(fit.size());
    for (Eigen::Index n = 0; n < fit.size(); ++n) {
        const double yr = yv[n].real();
        const double yi = yv[n].imag();
        const double dr = yr * fit[n].real();
        const double di = yi * fit[n].imag();
        // d - I'(d) adds the positive pdf/cdf ratio to each component.
        v[n] = cplx(yr * (dr + pdf_over_cdf(dr)), yi * (di + pdf_over_cdf(di)));
    }
    return v;
}

RVector prior_weights(const CVector& x_hat, double alpha, double eta) {
    RVector w(x_hat.size());
    const double power = 0.5 * alpha - 1.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::pow(std::norm(x_hat[i]) + eta, power);
    return w;
}

CVector update_x(const CMatrix& C, const CVector& v, const CVector& x_prev, const SolverConfig& cfg) {
    check_shapes(C, v.size(), x_prev.size(), "update_x");
    const RVector weights = prior_weights(x_prev, cfg.alpha, cfg.eta);
    CVector x;
    if (C.rows() < C.cols()) {
        // (C^H C + lambda L)^-1 C^H = L^-1 C^H (C L^-1 C^H + lambda I)^-1, an N x N solve.
        const RVector inv_w = weights.cwiseInverse();
        const CMatrix CW = C * inv_w.cast<cplx>().asDiagonal();
        CMatrix S = CW * C.adjoint();
        S.diagonal().array() += cfg.lambda;
        Eigen::LLT<CMatrix> llt(S);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("update_x: regularized system is not positive definite");
        x = CW.adjoint() * llt.solve(v);
    } else {
        CMatrix G = C.adjoint() * C;
        G.diagonal() += (cfg.lambda * weights).cast<cplx>();
        Eigen::LLT<CMatrix> llt(G);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("update_x: regularized normal equations are not positive definite");
        x = llt.solve(C.adjoint() * v);
    }
    if (!x.allFinite()) throw std::runtime_error("update_x: linear solve produced non-finite values");
    return x;
}

RVector update_beta(const DictionaryPair& dict, const CVector& x_hat, const CVector& v,
                    const SolverConfig& cfg, BetaDiagnostics* diag) {
    check_shapes(dict.A, v.size(), x_hat.size(), "update_beta");
    const Eigen::Index M = x_hat.size();
    RVector beta = RVector::Zero(M);
    if (diag) *diag = BetaDiagnostics{};

    const RVector mag = x_hat.cwiseAbs();
    const double peak = M > 0 ? mag.maxCoeff() : 0.0;
    if (!(peak > 0.0)) return beta;

    std::vector<Eigen::Index> support;
    for (Eigen::Index m = 0; m < M; ++m) {
        if (!(mag[m] >= cfg.support_threshold * peak)) continue;
        if (cfg.beta_support == BetaSupport::peaks) {
            // Neighbouring bins of one source would otherwise split its gap.
            const bool left = m == 0 || mag[m] > mag[m - 1];
            const bool right = m == M - 1 || mag[m] >= mag[m + 1];
            if (!(left && right)) continue;
        }
        support.push_back(m);
    }
    const auto S = static_cast<Eigen::Index>(support.size());

    CMatrix Bs(dict.rows(), S);
    CVector xs(S);
    for (Eigen::Index k = 0; k < S; ++k) {
        Bs.col(k) = dict.B.col(support[k]);
        xs[k] = x_hat[support[k]];
    }
    const CVector residual = v - dict.A * x_hat;

    // Real least squares over beta of || r - B diag(x) beta ||^2:
    //   P = Re{(B^H B)^* o (x x^H)},  q = Re{diag(x^*) B^H r}.
    const CMatrix gram = Bs.adjoint() * Bs;
    const CMatrix outer = xs * xs.adjoint();
    const Eigen::MatrixXd P = gram.conjugate().cwiseProduct(outer).real();
    const Eigen::VectorXd q = xs.conjugate().cwiseProduct(Bs.adjoint() * residual).real();

    Eigen::VectorXd sol;
    bool fallback = false;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(P);
    const double pmax = S > 0 ? P.diagonal().maxCoeff() : 0.0;
    if (ldlt.info() == Eigen::Success && pmax > 0.0 &&
        ldlt.vectorD().minCoeff() > 1e-12 * pmax) {
        sol = ldlt.solve(q);
        fallback = !sol.allFinite();
    } else {
        fallback = true;
    }
    if (fallback) {
        sol = Eigen::VectorXd::Zero(S);
        for (Eigen::Index k = 0; k < S; ++k)
            if (P(k, k) > 0.0) sol[k] = q[k] / P(k, k);
    }

    const double limit = dict.grid.half_step_deg();
    for (Eigen::Index k = 0; k < S; ++k)
        beta[support[k]] = std::clamp(rad_to_deg(sol[k]), -limit, limit);

    if (diag) {
        diag->support = std::move(support);
        diag->diagonal_fallback = fallback;
    }
    return beta;
}

double surrogate_cost(const CMatrix& C, const CVector& v, const CVector& x_hat, const SolverConfig& cfg) {
    check_shapes(C, v.size(), x_hat.size(), "surrogate_cost");
    const double fit = 0.5 * (C * x_hat - v).squaredNorm();
    double prior = 0.0;
    for (Eigen::Index i = 0; i < x_hat.size(); ++i)
        prior += std::pow(std::norm(x_hat[i]) + cfg.eta, 0.5 * cfg.alpha);
    return fit + cfg.lambda / cfg.alpha * prior;
}

SolveResult solve(const OneBitSnapshot& y, const DictionaryPair& dict, const SolverConfig& cfg) {
    cfg.validate();
    if (y.size() != dict.rows())
        throw std::invalid_argument("snapshot length " + std::to_string(y.size()) +
                                    " does not match array size " + std::to_string(dict.rows()));
    if (!(cfg.grid == dict.grid))
        throw std::invalid_argument("solver grid " + cfg.grid.describe() +
                                    " does not match dictionary grid " + dict.grid.describe());

    SolverState st;
    st.beta_deg = RVector::Zero(dict.cols());
    CMatrix C = dict.A;
    st.x_hat = C.adjoint() * y.y();

    for (int t = 0; t < cfg.max_iters; ++t) {
        const CVector v = compute_v(y, C, st.x_hat);
        CVector next = update_x(C, v, st.x_hat, cfg);
        st.cost_history.push_back(surrogate_cost(C, v, next, cfg));

        const CVector delta = next - st.x_hat;
        st.max_change_history.push_back(delta.size() > 0 ? delta.cwiseAbs().maxCoeff() : 0.0);
        const double base = st.x_hat.norm();
        const double rel = delta.norm() / (base > 0.0 ? base : 1.0);
        st.x_hat = std::move(next);
        st.iter = t + 1;

        const bool beta_phase = t + 1 >= cfg.beta_update_start;
        if (beta_phase) {
            BetaDiagnostics diag;
            st.beta_deg = update_beta(dict, st.x_hat, v, cfg, &diag);
            if (diag.diagonal_fallback) ++st.beta_fallbacks;
            C = effective_dictionary(dict, st.beta_deg);
        }
        if (rel < cfg.tol && (beta_phase || cfg.beta_update_start >= cfg.max_iters)) break;
    }

    SpectrumEstimate est;
    est.grid_deg = dict.grid.points();
    est.magnitudes = normalized_magnitudes(st.x_hat);
    est.beta_deg = st.beta_deg;
    return SolveResult{std::move(st), std::move(est)};
}

void write_trajectory_csv(const SolverState& state, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory: " + path.string());
    out << "iteration,cost,max_abs_change\n";
    for (std::size_t i = 0; i < state.cost_history.size(); ++i)
        out << (i + 1) << "," << format_double(state.cost_history[i]) << ","
            << format_double(state.max_change_history[i]) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace obdoa
