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

#include "obdoa/eval.hpp"

#include "obdoa/parallel.hpp"
#include "obdoa/rng.hpp"
#include "obdoa/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace obdoa {

std::string to_string(Method m) { return m == Method::ogbrim ? "ogbrim" : "unrolled"; }

Method parse_method(const std::string& s) {
    if (s == "ogbrim") return Method::ogbrim;
    if (s == "unrolled") return Method::unrolled;
    throw std::invalid_argument("unknown method '" + s + "' (expected ogbrim or unrolled)");
}

std::vector<double> extract_doas(const SpectrumEstimate& est, int K) {
    const Eigen::Index M = est.size();
    if (K < 1) throw std::invalid_argument("extract_doas: K must be at least 1");
    if (K > M) throw std::invalid_argument("extract_doas: K exceeds the number of grid points");
    if (est.grid_deg.size() != M || est.beta_deg.size() != M)
        throw std::invalid_argument("extract_doas: inconsistent spectrum lengths");

    const RVector& mag = est.magnitudes;
    auto by_magnitude = [&](Eigen::Index a, Eigen::Index b) {
        return mag[a] != mag[b] ? mag[a] > mag[b] : a < b;
    };

    std::vector<Eigen::Index> peaks;
    for (Eigen::Index m = 0; m < M; ++m) {
        const bool above_left = m == 0 || mag[m] > mag[m - 1];
        const bool above_right = m == M - 1 || mag[m] > mag[m + 1];
        if (above_left && above_right) peaks.push_back(m);
    }
    std::stable_sort(peaks.begin(), peaks.end(), by_magnitude);
    if (static_cast<int>(peaks.size()) > K) peaks.resize(static_cast<std::size_t>(K));

    if (static_cast<int>(peaks.size()) < K) {
        std::vector<Eigen::Index> rest;
        for (Eigen::Index m = 0; m < M; ++m)
            if (std::find(peaks.begin(), peaks.end(), m) == peaks.end()) rest.push_back(m);
        std::stable_sort(rest.begin(), rest.end(), by_magnitude);
        for (std::size_t i = 0; static_cast<int>(peaks.size()) < K; ++i) peaks.push_back(rest[i]);
        std::stable_sort(peaks.begin(), peaks.end(), by_magnitude);
    }

    std::vector<double> doas;
    for (Eigen::Index m : peaks) doas.push_back(est.grid_deg[m] + est.beta_deg[m]);
    return doas;
}

MatchResult match_and_score(std::vector<double> estimated, std::vector<double> truth, double threshold_deg) {
    if (estimated.size() != truth.size())
        throw std::invalid_argument("match_and_score: " + std::to_string(estimated.size()) +
                                    " estimates for " + std::to_string(truth.size()) + " targets");
    std::sort(estimated.begin(), estimated.end());
    std::sort(truth.begin(), truth.end());
    MatchResult r;
    r.success = true;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double err = std::abs(estimated[k] - truth[k]);
        r.errors_deg.push_back(err);
        if (!(err <= threshold_deg)) r.success = false;
    }
    return r;
}

EvalRow summarize(const std::vector<TrialOutcome>& outcomes, double threshold_deg, double snr_db) {
    EvalRow row;
    row.snr_db = snr_db;
    row.trials = outcomes.size();
    double sum_sq = 0.0;
    std::size_t K = 0;
    for (const auto& o : outcomes) {
        if (!o.solved) continue;
        const MatchResult m = match_and_score(o.estimated_deg, o.truth_deg, threshold_deg);
        if (!m.success) continue;
        ++row.successes;
        K = o.truth_deg.size();
        for (double e : m.errors_deg) sum_sq += e * e;
    }
    row.detection_rate = row.trials ? static_cast<double>(row.successes) / static_cast<double>(row.trials) : 0.0;
    if (row.successes > 0)
        row.rmse_deg = std::sqrt(sum_sq / (static_cast<double>(row.successes) * static_cast<double>(K)));
    return row;
}

void EvalConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (!(success_threshold_deg > 0.0)) throw std::invalid_argument("success threshold must be positive");
    if (true_doas_deg.empty()) throw std::invalid_argument("at least one true DOA is required");
    if (snr_grid_db.empty()) throw std::invalid_argument("SNR grid is empty");
    if (method == Method::unrolled && !weights)
        throw std::invalid_argument("method 'unrolled' requires a weight bundle");
    if (method == Method::ogbrim) solver.validate();
}

std::vector<TrialOutcome> run_trials(const EvalConfig& cfg, double snr_db) {
    cfg.validate();
    DictionaryCache cache;
    const auto dict = cache.get(cfg.geometry, cfg.grid);
    SolverConfig solver = cfg.solver;
    solver.grid = cfg.grid;
    const int K = static_cast<int>(cfg.true_doas_deg.size());

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    parallel_for(outcomes.size(), cfg.jobs, [&](std::size_t t) {
        TrialOutcome& out = outcomes[t];
        out.truth_deg = cfg.true_doas_deg;
        Rng rng(derive_seed(cfg.seed, {seed_component(snr_db), t, 0}));
        std::uniform_real_distribution<double> coeff(cfg.coeff_min, cfg.coeff_max);
        SourceScene scene;
        scene.doas_deg = cfg.true_doas_deg;
        for (int k = 0; k < K; ++k) {
            const double re = coeff(rng);
            const double im = coeff(rng);
            scene.coeffs.emplace_back(re, im);
        }
        scene.sigma = snr_to_sigma(snr_db);
        try {
            const OneBitSnapshot y =
                simulate_snapshot(cfg.geometry, scene, derive_seed(cfg.seed, {seed_component(snr_db), t, 1}));
            const SpectrumEstimate est = cfg.method == Method::ogbrim ? solve(y, *dict, solver).estimate
                                                                      : forward(y, *dict, *cfg.weights);
            out.estimated_deg = extract_doas(est, K);
            out.solved = true;
        } catch (const std::exception&) {
            out.solved = false;  // counted as a failed trial
        }
    });
    return outcomes;
}

EvalReport run_monte_carlo(const EvalConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    EvalReport report;
    report.method = cfg.method;
    for (double snr : cfg.snr_grid_db)
        report.rows.push_back(summarize(run_trials(cfg, snr), cfg.success_threshold_deg, snr));
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
    out << "snr_db,trials,successes,detection_rate,rmse_deg\n";
    for (const auto& r : report.rows) {
        out << format_double(r.snr_db) << "," << r.trials << "," << r.successes << ","
            << format_double(r.detection_rate) << ",";
        if (r.rmse_deg) out << format_double(*r.rmse_deg);
        out << "\n";
    }
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    write_report_csv(report, out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void print_report_table(const EvalReport& report, std::ostream& out) {
    out << "method: " << to_string(report.method) << "\n";
    out << std::setw(8) << "SNR(dB)" << std::setw(10) << "trials" << std::setw(10) << "success"
        << std::setw(12) << "det.rate" << std::setw(14) << "RMSE(deg)" << "\n";
    for (const auto& r : report.rows) {
        out << std::setw(8) << std::fixed << std::setprecision(1) << r.snr_db << std::setw(10) << r.trials
            << std::setw(10) << r.successes << std::setw(12) << std::setprecision(4) << r.detection_rate;
        if (r.rmse_deg)
            out << std::setw(14) << std::setprecision(5) << *r.rmse_deg;
        else
            out << std::setw(14) << "-";
        out << "\n";
    }
    out << std::defaultfloat << std::setprecision(6);
    out << "wall time: " << report.wall_seconds << " s\n";
}

void export_spectrum(const SpectrumEstimate& est, const std::vector<double>& truth_doas_deg,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write spectrum: " + path.string());
    out << "# truth_doas_deg: " << join_doubles(truth_doas_deg, ",") << "\n";
    out << "grid_deg,magnitude,beta_deg,corrected_deg\n";
    for (Eigen::Index m = 0; m < est.size(); ++m)
        out << format_double(est.grid_deg[m]) << "," << format_double(est.magnitudes[m]) << ","
            << format_double(est.beta_deg[m]) << "," << format_double(est.grid_deg[m] + est.beta_deg[m])
            << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SpectrumFile read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spectrum: " + path.string());
    SpectrumFile file;
    std::vector<double> grid, mag, beta;
    std::string line;
    bool header_seen = false;
    const std::string truth_tag = "# truth_doas_deg:";
    while (std::getline(in, line)) {
        if (line.rfind(truth_tag, 0) == 0) {
            const std::string rest = trim(line.substr(truth_tag.size()));
            if (!rest.empty()) file.truth_doas_deg = parse_double_list(rest);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 4) throw std::runtime_error("malformed spectrum row: " + line);
        grid.push_back(parse_double(cols[0]));
        mag.push_back(parse_double(cols[1]));
        beta.push_back(parse_double(cols[2]));
    }
    auto to_vec = [](const std::vector<double>& v) {
        return RVector(Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    file.estimate.grid_deg = to_vec(grid);
    file.estimate.magnitudes = to_vec(mag);
    file.estimate.beta_deg = to_vec(beta);
    return file;
}

}  // namespace obdoa
