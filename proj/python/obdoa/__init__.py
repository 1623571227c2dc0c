# SPDX-License-Identifier: Apache-2.0
#
# obdoa: one-bit off-grid DOA estimation for sparse linear arrays
# Copyright (C) 2026 The obdoa authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------

"""One-bit off-grid DOA estimation for sparse linear arrays."""

from ._core import (
    ArrayGeometry,
    BetaSupport,
    DatasetConfig,
    DatasetReader,
    Dictionary,
    FormatError,
    GridSpec,
    NetArchitecture,
    SolverConfig,
    benchmark,
    check_parity,
    csgn,
    forward,
    generate_dataset,
    i_prime,
    load_weights,
    normal_cdf,
    pdf_over_cdf,
    random_weights,
    save_weights,
    simulate_snapshot,
    snr_to_sigma,
    solve,
    steering_derivative,
    steering_vector,
    zero_weights,
)

__version__ = "0.1.0"
