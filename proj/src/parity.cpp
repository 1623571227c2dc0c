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

#include "obdoa/parity.hpp"

#include "obdoa/text.hpp"

#include <fstream>
#include <stdexcept>

namespace obdoa {

std::vector<ParityRow> read_parity_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parity file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parity file is empty: " + path.string());
    const auto header = split(line, ',');
    if (header.size() < 3 || header.size() % 2 == 0 || trim(header[0]) != "sample_id")
        throw std::runtime_error("parity file has an unexpected header: " + path.string());
    const auto M = static_cast<Eigen::Index>((header.size() - 1) / 2);

    std::vector<ParityRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " columns, got " +
                                     std::to_string(cols.size()));
        ParityRow row;
        const int id = parse_int(cols[0]);
        if (id < 0) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": negative sample_id");
        row.sample_id = static_cast<std::uint64_t>(id);
        row.magnitudes.resize(M);
        row.beta_deg.resize(M);
        for (Eigen::Index m = 0; m < M; ++m) {
            row.magnitudes[m] = parse_double(cols[static_cast<std::size_t>(1 + m)]);
            row.beta_deg[m] = parse_double(cols[static_cast<std::size_t>(1 + M + m)]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_parity_csv(const std::vector<ParityRow>& rows, const std::filesystem::path& path) {
    if (rows.empty()) throw std::invalid_argument("write_parity_csv: no rows");
    const Eigen::Index M = rows.front().magnitudes.size();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write parity file: " + path.string());
    out << "sample_id";
    for (Eigen::Index m = 0; m < M; ++m) out << ",mag_" << m;
    for (Eigen::Index m = 0; m < M; ++m) out << ",beta_" << m;
    out << "\n";
    for (const auto& row : rows) {
        if (row.magnitudes.size() != M || row.beta_deg.size() != M)
            throw std::invalid_argument("write_parity_csv: rows disagree on the grid size");
        out << row.sample_id;
        for (Eigen::Index m = 0; m < M; ++m) out << "," << format_double(row.magnitudes[m]);
        for (Eigen::Index m = 0; m < M; ++m) out << "," << format_double(row.beta_deg[m]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

ParityReport check_parity(const std::vector<ParityRow>& reference, DatasetReader& dataset,
                          const WeightBundle& weights) {
    const DatasetHeader& h = dataset.header();
    const DictionaryPair dict = build_dictionary(h.geometry(), h.grid);
    ParityReport report;
    for (const auto& row : reference) {
        if (row.sample_id >= dataset.size())
            throw std::out_of_range("parity sample_id " + std::to_string(row.sample_id) +
                                    " is outside the dataset (" + std::to_string(dataset.size()) +
                                    " records)");
        if (row.magnitudes.size() != dict.cols())
            throw std::invalid_argument("parity rows have M=" + std::to_string(row.magnitudes.size()) +
                                        " but the dataset grid has M=" + std::to_string(dict.cols()));
        const SpectrumEstimate est = forward(dataset.read(row.sample_id).y, dict, weights);
        const double dm = (est.magnitudes - row.magnitudes).cwiseAbs().maxCoeff();
        const double db = (est.beta_deg - row.beta_deg).cwiseAbs().maxCoeff();
        if (std::max(dm, db) > report.max_abs()) report.worst_sample = row.sample_id;
        report.max_abs_magnitude = std::max(report.max_abs_magnitude, dm);
        report.max_abs_beta_deg = std::max(report.max_abs_beta_deg, db);
        ++report.rows;
    }
    return report;
}

}  // namespace obdoa
