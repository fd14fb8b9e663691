# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.

"""Exceptions raised by vort1d.

`vort1d.simulation.execute` turns them into exit codes, see `EXIT_CODES`.
"""
import typing as tp


class Vort1dError(Exception):
    pass


class ConfigError(Vort1dError, ValueError):
    """Invalid configuration value. `key` and `line` point at the offending entry
    of a config document when known.
    """
    def __init__(self, message: str, key: tp.Optional[str] = None,
                 line: tp.Optional[int] = None) -> None:
        self.key = key
        self.line = line
        self.reason = message
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NumericalFailure(Vort1dError, FloatingPointError):
    """Non finite value detected. `quantity` names the array, `stage` the Runge-Kutta
    stage and `time` the model time, whichever are known.
    """
    def __init__(self, quantity: str, stage: tp.Optional[int] = None,
                 time: tp.Optional[float] = None) -> None:
        self.quantity = quantity
        self.stage = stage
        self.time = time
        super().__init__(self._describe())

    def _describe(self) -> str:
        message = f"non finite values in {self.quantity}"
        if self.stage is not None:
            message += f" at stage {self.stage}"
        if self.time is not None:
            message += f" at t={self.time:.6g}"
        return message

    def at(self, time: float) -> "NumericalFailure":
        """Returns a copy that also carries the time of failure."""
        return NumericalFailure(self.quantity, self.stage, time)

    def in_stage(self, stage: int) -> "NumericalFailure":
        return NumericalFailure(self.quantity, stage, self.time)


class BlowUpSuspected(Vort1dError, RuntimeError):
    """The run looks singular: either the CFL step fell under `dt_min`
    (reason="dt-underflow") or the criterion integrand exceeded its threshold
    (reason="bkm-threshold").
    """
    def __init__(self, reason: str, time: float, value: float) -> None:
        self.reason = reason
        self.time = time
        self.value = value
        super().__init__(f"blow-up suspected ({reason}) at t={time:.6g}, value={value:.6g}")


class SamplerRangeError(Vort1dError, ValueError):
    pass


EXIT_CODES: tp.Dict[tp.Type[Exception], int] = {
    ConfigError: 2,
    NumericalFailure: 3,
    BlowUpSuspected: 4,
}
