# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

# flake8: noqa

from ._env import env as env
from .errors import ConfigError, NumericalFailure, BlowUpSuspected
from .spectral import make_grid, SpectralField, GaugeSpec, FilterSpec

__version__ = "0.1.0"
