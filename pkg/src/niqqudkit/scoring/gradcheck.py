"""Finite-difference validation of the analytic gradients."""

from __future__ import annotations

import numpy as np

from .model import Example, Scorer

# Below this magnitude both gradients are treated as numerically zero when
# forming the relative error; central differences cannot resolve finer.
_DENOM_FLOOR = 1e-6


def grad_check(scorer: Scorer, example: Example, eps: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients,
    over every coordinate of every parameter group.

    The step is scaled per coordinate (``eps * max(1, |value|)``); relative
    error is ``|a - n| / max(|a|, |n|, 1e-6)``.
    """
    if not (1e-6 <= eps <= 1e-3):
        raise ValueError("eps must lie in [1e-6, 1e-3]")
    _, grads = scorer.loss_and_grads(example)
    worst = 0.0
    for name, param in scorer.params.items():
        flat = param.reshape(-1)
        analytic = grads[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            step = eps * max(1.0, abs(original))
            flat[i] = original + step
            loss_plus = scorer.total_loss(example)
            flat[i] = original - step
            loss_minus = scorer.total_loss(example)
            flat[i] = original
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            denom = max(abs(numeric), abs(analytic[i]), _DENOM_FLOOR)
            worst = max(worst, abs(numeric - analytic[i]) / denom)
    return worst
