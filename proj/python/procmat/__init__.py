"""Process matrices, quantum circuit classes and their SDP membership tests.

Documents are the same JSON objects the ``procmat`` command-line tool reads
and writes; here they are plain dicts.
"""

import json

from . import _core
from ._core import InputError, __version__

__all__ = [
    "InputError",
    "apply_pattern",
    "build_example",
    "build_switch",
    "check_validity",
    "decompose",
    "dump_system",
    "membership",
    "process_matrix",
    "run_cli",
    "verify_decomposition",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def build_switch(with_decomposition=False):
    return json.loads(_core.build_switch(with_decomposition))


def build_example(n):
    return json.loads(_core.build_example(n))


def apply_pattern(process, pattern):
    """`pattern` is a pattern document or one of "w1", "w2", "w3", "dephase-all"."""
    if isinstance(pattern, str) and not pattern.lstrip().startswith("{"):
        return json.loads(_core.apply_builtin_pattern(_text(process), pattern))
    return json.loads(_core.apply_pattern(_text(process), _text(pattern)))


def check_validity(process, tol=1e-10):
    return json.loads(_core.check_validity(_text(process), tol))


def membership(process, cls, facial_reduction=True, tol=1e-8):
    """Verdict document for `cls` in {"qcqc", "qccc"}."""
    return json.loads(_core.membership(_text(process), cls, facial_reduction, tol))


def dump_system(process, cls, facial_reduction=True):
    """Constraint system as written by ``check-qcqc/check-qccc --dump-system``."""
    return json.loads(_core.dump_system(_text(process), cls, facial_reduction))


def decompose(process, method):
    """`method` is "dephased-all", "dephased-inputs" or "qccc-from-qcqc"."""
    return json.loads(_core.decompose(_text(process), method))


def verify_decomposition(bundle, tol=1e-8):
    return json.loads(_core.verify_decomposition(_text(bundle), tol))


def process_matrix(process):
    """Dense complex matrix of the process operator, in registry order."""
    return _core.process_matrix(_text(process))


def run_cli(args, input=""):
    """Runs the command-line tool in-process; returns (exit code, stdout, stderr)."""
    return _core.run_cli(list(args), _text(input))
