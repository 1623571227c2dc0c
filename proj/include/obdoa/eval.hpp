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

#pragma once

#include "obdoa/geometry.hpp"
#include "obdoa/ogbrim.hpp"
#include "obdoa/spectrum.hpp"
#include "obdoa/unrolled.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace obdoa {

enum class Method { ogbrim, unrolled };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// The K largest strict local maxima of the magnitudes, each corrected by its
/// off-grid gap, in descending magnitude order. Ties go to the lower index;
/// missing peaks are padded with the largest remaining bins.
std::vector<double> extract_doas(const SpectrumEstimate& est, int K);

struct MatchResult {
    bool success = false;
    std::vector<double> errors_deg;  // |estimate - truth| after sorting both
};

MatchResult match_and_score(std::vector<double> estimated, std::vector<double> truth, double threshold_deg);

struct TrialOutcome {
    bool solved = false;
    std::vector<double> estimated_deg;
    std::vector<double> truth_deg;
};

struct EvalRow {
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double detection_rate = 0.0;
    std::optional<double> rmse_deg;  // over successful trials only
};

/// Detection rate N_s / N_t and RMSE sqrt(sum ||err||^2 / (N_s K)).
EvalRow summarize(const std::vector<TrialOutcome>& outcomes, double threshold_deg, double snr_db = 0.0);

struct EvalConfig {
    ArrayGeometry geometry = make_geometry("sla18");
    GridSpec grid{};
    std::vector<double> true_doas_deg = {-10.28, 20.56};
    std::vector<double> snr_grid_db = {0, 5, 10, 15, 20, 25, 30};
    int trials = 1024;
    double success_threshold_deg = 0.5;
    Method method = Method::ogbrim;
    std::uint64_t seed = 0;
    SolverConfig solver{};
    std::shared_ptr<const WeightBundle> weights;
    double coeff_min = 0.5;
    double coeff_max = 1.0;
    unsigned jobs = 1;

    void validate() const;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    Method method = Method::ogbrim;
    double wall_seconds = 0.0;
};

/// Runs the configured estimator on `trials` random scenes at one SNR.
std::vector<TrialOutcome> run_trials(const EvalConfig& cfg, double snr_db);

EvalReport run_monte_carlo(const EvalConfig& cfg);

void write_report_csv(const EvalReport& report, std::ostream& out);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
void print_report_table(const EvalReport& report, std::ostream& out);

/// CSV with a `# truth_doas_deg:` comment line, then
/// grid_deg,magnitude,beta_deg,corrected_deg per grid point.
void export_spectrum(const SpectrumEstimate& est, const std::vector<double>& truth_doas_deg,
                     const std::filesystem::path& path);

struct SpectrumFile {
    SpectrumEstimate estimate;
    std::vector<double> truth_doas_deg;
};

SpectrumFile read_spectrum_csv(const std::filesystem::path& path);

}  // namespace obdoa
