"""Typed errors shared across the library and surfaced by the CLI.

Every error carries a short machine-readable code; the CLI prints them as a
single ``error[CODE]: message`` line and maps each class to a stable exit
code.
"""

from __future__ import annotations


class TflocError(Exception):
    """Base class for errors the CLI reports as a one-line diagnostic."""

    code = "E_GENERIC"
    exit_code = 1


class ConfigError(TflocError):
    """Invalid configuration (flags, config file, or generator settings)."""

    code = "E_CONFIG"
    exit_code = 2


class SchemaError(TflocError):
    """Malformed or version-incompatible interchange file."""

    code = "E_SCHEMA"
    exit_code = 3


class InputError(TflocError):
    """Structurally valid input that violates a cross-file contract."""

    code = "E_INPUT"
    exit_code = 4


class InfeasibleTargetError(TflocError):
    """Refinement target excluded by the attention mass budget.

    ``slack`` is ``mean(attention) - forged_target_mass`` (negative here).
    """

    code = "E_INFEASIBLE"
    exit_code = 5

    def __init__(self, slack: float):
        self.slack = float(slack)
        super().__init__(
            f"refinement target is infeasible (slack {self.slack:.6g}); "
            "rerun with target rescaling enabled"
        )
