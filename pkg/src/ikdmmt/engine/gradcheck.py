"""Central finite-difference checks of analytic gradients."""

from dataclasses import dataclass
import logging
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
import torch

from ..errors import ContractError

LOG = logging.getLogger(__name__)


@dataclass
class GradCheckReport:
    name: str
    max_rel_error: float
    tol: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol

    def json_data(self):
        return {
            'name': self.name,
            'max_rel_error': self.max_rel_error,
            'tol': self.tol,
            'n_checked': self.n_checked,
            'passed': self.passed,
        }


def relative_error(analytic: float, numeric: float, floor: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def _scalar(value: torch.Tensor) -> float:
    if value.numel() != 1:
        raise ContractError('grad_check: function must be scalar-valued, got shape {}'.format(
            tuple(value.shape)))
    return float(value)


def grad_check(f: Callable[[torch.Tensor], torch.Tensor], x: torch.Tensor, *,
               eps=1e-5, tol=1e-4, floor=1e-5, name=None,
               n_samples: Optional[int] = None, seed=0) -> GradCheckReport:
    """Compare the autograd gradient of scalar ``f`` at ``x`` with central differences.

    With ``n_samples`` only that many randomly chosen entries of ``x`` are
    perturbed.
    """
    x = x.detach().clone()
    with torch.no_grad():
        first = _scalar(f(x))
        second = _scalar(f(x))
    if first != second:
        raise ContractError('grad_check: f is not deterministic ({} != {})'.format(first, second))

    leaf = x.clone().requires_grad_(True)
    analytic, = torch.autograd.grad(f(leaf), leaf)
    analytic = analytic.reshape(-1)

    indices = range(x.numel())
    if n_samples is not None and n_samples < x.numel():
        indices = np.random.default_rng(seed).choice(x.numel(), n_samples, replace=False)

    flat = x.view(-1)
    max_error = 0.0
    n_checked = 0
    with torch.no_grad():
        for i in indices:
            original = float(flat[i])
            flat[i] = original + eps
            f_plus = _scalar(f(x))
            flat[i] = original - eps
            f_minus = _scalar(f(x))
            flat[i] = original
            numeric = (f_plus - f_minus) / (2.0 * eps)
            max_error = max(max_error, relative_error(float(analytic[i]), numeric, floor))
            n_checked += 1

    report = GradCheckReport(name or getattr(f, '__name__', 'f'), max_error, tol, n_checked)
    LOG.debug(report.json_data())
    return report


def grad_check_parameters(loss_fn: Callable[[], torch.Tensor],
                          named_parameters: Iterable[Tuple[str, torch.nn.Parameter]], *,
                          n_samples=20, seed=0, eps=1e-6, tol=1e-3, floor=1e-5,
                          name='parameters') -> GradCheckReport:
    """Check d loss / d parameter for randomly sampled scalar parameter entries.

    ``loss_fn`` re-runs the full forward pass on every call.
    """
    named_parameters = [(n, p) for n, p in named_parameters if p.requires_grad]
    if not named_parameters:
        raise ContractError('grad_check_parameters: no trainable parameters')
    parameters = [p for _, p in named_parameters]

    with torch.no_grad():
        if _scalar(loss_fn()) != _scalar(loss_fn()):
            raise ContractError('grad_check_parameters: loss is not deterministic')
    analytic = torch.autograd.grad(loss_fn(), parameters, allow_unused=True)

    sizes = np.array([p.numel() for p in parameters])
    rng = np.random.default_rng(seed)
    flat_choices = rng.choice(int(sizes.sum()), min(n_samples, int(sizes.sum())), replace=False)
    offsets = np.cumsum(sizes) - sizes

    max_error = 0.0
    with torch.no_grad():
        for flat_i in flat_choices:
            p_i = int(np.searchsorted(offsets, flat_i, side='right') - 1)
            entry = int(flat_i - offsets[p_i])
            flat = parameters[p_i].data.view(-1)
            original = float(flat[entry])
            flat[entry] = original + eps
            f_plus = _scalar(loss_fn())
            flat[entry] = original - eps
            f_minus = _scalar(loss_fn())
            flat[entry] = original
            numeric = (f_plus - f_minus) / (2.0 * eps)
            grad = analytic[p_i]
            a = float(grad.reshape(-1)[entry]) if grad is not None else 0.0
            error = relative_error(a, numeric, floor)
            LOG.debug('%s[%d]: analytic = %.6e, numeric = %.6e',
                      named_parameters[p_i][0], entry, a, numeric)
            max_error = max(max_error, error)

    return GradCheckReport(name, max_error, tol, len(flat_choices))
