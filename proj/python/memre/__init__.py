# Copyright 2026 The memre Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python access to the memre core: losses, metrics, PCA and the CLI."""

from ._memre import (
    ConfigError,
    DimensionError,
    InputError,
    InvalidPriorError,
    NumericError,
    ParseError,
    PreconditionError,
    corpus_stats,
    micro_prf,
    normalize_config,
    pca,
    prior_shift,
    risk,
    run_cli,
    shift_coefficients,
)
from ._memre import __build__

__all__ = [
    "ConfigError",
    "DimensionError",
    "InputError",
    "InvalidPriorError",
    "NumericError",
    "ParseError",
    "PreconditionError",
    "corpus_stats",
    "main",
    "micro_prf",
    "normalize_config",
    "pca",
    "prior_shift",
    "risk",
    "run_cli",
    "shift_coefficients",
]


def main(argv=None):
    """Console entry point mirroring the memre executable."""
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
