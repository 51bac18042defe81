"""Fourier neural operators with quantum-circuit Fourier layers.

Thin Python layer over the compiled core: circuits and transforms, layer
variants, Burgers data generation, model training and verification suites.
"""

import json as _json

from ._core import (
    QfnoError,
    apply_layer,
    bit_reversal_permutation,
    burgers_solve,
    classical_fourier_layer,
    compound_order2,
    dft_matrix,
    grf_sample,
    make_dataset,
    measure_sample,
    param_circuit_matrix,
    read_dataset,
    relative_l2,
    slot_count,
    unary_weight,
    uqft_matrix,
    write_dataset,
)
from ._core import _Model

__all__ = [
    "Model",
    "QfnoError",
    "apply_layer",
    "bit_reversal_permutation",
    "burgers_solve",
    "classical_fourier_layer",
    "complexity_report",
    "compound_order2",
    "dft_matrix",
    "grf_sample",
    "make_dataset",
    "measure_sample",
    "param_circuit_matrix",
    "read_dataset",
    "relative_l2",
    "slot_count",
    "unary_weight",
    "uqft_matrix",
    "verify",
    "write_dataset",
]

VARIANTS = ("classical", "sequential", "parallel", "composite")


def complexity_report(n_c, n_s, k, variant):
    """Qubits, circuits, gates, depths and parameter count of one layer variant."""
    from ._core import complexity_report_json

    return _json.loads(complexity_report_json(n_c, n_s, k, variant))


def verify(suite="all", seed=0):
    """Run an invariant suite; returns the per-property report."""
    from ._core import verify_json

    return _json.loads(verify_json(suite, seed))


class Model:
    """Seeded model. `config` takes the checkpoint's config keys (n_c, k, variant, ...)."""

    def __init__(self, config=None, *, _core=None):
        self._m = _core if _core is not None else _Model(_json.dumps(config or {}))

    @classmethod
    def from_json(cls, text):
        return cls(_core=_Model.from_json(text))

    @classmethod
    def load(cls, path):
        return cls(_core=_Model.load(str(path)))

    @property
    def config(self):
        return _json.loads(self._m.config_json())

    def to_json(self):
        return self._m.to_json()

    def save(self, path):
        self._m.save(str(path))

    @property
    def params(self):
        return list(self._m.get_params())

    @params.setter
    def params(self, x):
        self._m.set_params(list(x))

    def forward(self, u0):
        """Prediction for one input vector, plus the imaginary/real norm ratio."""
        return self._m.forward(u0)

    def evaluate(self, inputs, targets):
        return self._m.evaluate(inputs, targets)

    def grad(self, inputs, targets):
        return self._m.grad(inputs, targets)

    def train(self, train_inputs, train_targets, test_inputs, test_targets, timing=True):
        return self._m.train(train_inputs, train_targets, test_inputs, test_targets, timing)
