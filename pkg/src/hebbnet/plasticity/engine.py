"""Batched application of the SoftHebb rules to a neuron bank."""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from hebbnet.core.exceptions import NumericError, ShapeError
from hebbnet.core.utils import chunk_ranges, ordered_map
from hebbnet.plasticity.bank import NeuronBank
from hebbnet.plasticity.models import Aggregation, PlasticityConfig, PlasticityMode
from hebbnet.plasticity.rules import (
    anti_hebbian_signs,
    hard_competition,
    neuron_learning_rates,
    soft_competition,
)
from hebbnet.tensor.models import PatchMatrix

logger = logging.getLogger(__name__)


@dataclass
class UpdateSummary:
    """Outcome of one plasticity step."""

    mean_abs_delta: float
    mean_lr: float
    radii: npt.NDArray[np.float32]
    patches: int


def postsynaptic(u: npt.NDArray[np.floating], cfg: PlasticityConfig) -> npt.NDArray[np.floating]:
    """Signed competition outputs for rows of pre-activations ``(N, K)``.

    Soft modes use the softmax; the anti-Hebbian mode flips the sign for
    every neuron but each row's winner.
    """
    if cfg.mode is PlasticityMode.HARD_WTA:
        return hard_competition(u, axis=1)
    y = soft_competition(u, cfg.inverse_temperature, axis=1)
    if cfg.mode is PlasticityMode.SOFT_ANTI_HEBBIAN:
        y = y * anti_hebbian_signs(u, axis=1)
    return y


def _accumulate(
    rows: npt.NDArray[np.float32],
    u: npt.NDArray[np.float32],
    cfg: PlasticityConfig,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Per-chunk sums ``Y^T X`` and ``sum_n y_nk u_nk``."""
    y = postsynaptic(u, cfg).astype(np.float32)
    return (y.T @ rows).astype(np.float64), (y * u).sum(axis=0, dtype=np.float64)


def batch_delta(
    bank: NeuronBank,
    rows: npt.NDArray[np.float32],
    cfg: PlasticityConfig,
    lrs: npt.NDArray[np.float64],
    pre_activations: npt.NDArray[np.float32] | None = None,
    threads: int = 1,
) -> npt.NDArray[np.float64]:
    """Aggregate SoftHebb delta of a batch of patches.

    For neuron k the summed update is
    ``lr_k * (sum_n y_nk x_n - (sum_n y_nk u_nk) w_k)``.
    Chunks are reduced in a fixed order, so the result only depends on the
    chunk count.
    """
    n = rows.shape[0]
    u = rows @ bank.weights.T if pre_activations is None else pre_activations

    def run(bounds: tuple[int, int]) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        lo, hi = bounds
        return _accumulate(rows[lo:hi], u[lo:hi], cfg)

    parts = ordered_map(run, chunk_ranges(n, threads), threads=threads)
    yx = parts[0][0]
    yu = parts[0][1]
    for part_yx, part_yu in parts[1:]:
        yx = yx + part_yx
        yu = yu + part_yu

    raw = yx - yu[:, None] * bank.weights.astype(np.float64)
    if cfg.aggregation is Aggregation.MEAN:
        raw /= n
    elif cfg.aggregation is Aggregation.MAX_NORM:
        raw /= max(float(np.abs(raw).max()), 1e-30)
    return lrs[:, None] * raw


def _apply_checked(bank: NeuronBank, delta: npt.NDArray[np.float64]) -> None:
    """Add ``delta`` to the bank, leaving it untouched if anything is non-finite."""
    if not np.isfinite(delta).all():
        raise NumericError("non-finite plasticity delta")
    if not np.any(delta):
        return
    with np.errstate(over="ignore", invalid="ignore"):
        updated = (bank.weights + delta).astype(np.float32)
    if not np.isfinite(updated).all():
        raise NumericError("plasticity update overflowed the weights")
    bank.weights[...] = updated
    bank.refresh_radii()


def apply_batch_update(
    bank: NeuronBank,
    patches: PatchMatrix | npt.NDArray[np.float32],
    cfg: PlasticityConfig,
    progress: float = 0.0,
    pre_activations: npt.NDArray[np.float32] | None = None,
    threads: int = 1,
) -> UpdateSummary:
    """Apply one plasticity step to ``bank`` from a mini-batch of patches.

    Learning rates come from the radii cached at batch start. The
    aggregated delta is applied once and the radius cache refreshed.
    With ``cfg.sequential`` the patches are instead applied one at a time,
    each seeing the weights left by the previous one.

    Args:
        bank: Neuron bank, updated in place
        patches: PatchMatrix or raw ``(N, D)`` rows
        cfg: Plasticity configuration
        progress: Fraction of planned steps done (for decaying schemes)
        pre_activations: Optional precomputed ``rows @ W^T``
        threads: Worker threads for the accumulation

    Returns:
        UpdateSummary

    Raises:
        ShapeError: If the patch width differs from the bank's synapse count
        NumericError: If the delta or the updated weights are non-finite;
            the bank keeps its previous weights
    """
    rows = patches.rows if isinstance(patches, PatchMatrix) else np.asarray(patches, np.float32)
    if rows.ndim != 2 or rows.shape[1] != bank.synapses:
        raise ShapeError(
            "patch width does not match bank", patch_width=rows.shape[-1], synapses=bank.synapses
        )
    if rows.shape[0] == 0:
        return UpdateSummary(0.0, 0.0, bank.radii.copy(), 0)

    if cfg.sequential:
        return _apply_sequential(bank, rows, cfg, progress)

    lrs = neuron_learning_rates(bank.radii, cfg, progress)
    delta = batch_delta(bank, rows, cfg, lrs, pre_activations=pre_activations, threads=threads)
    _apply_checked(bank, delta)
    return UpdateSummary(
        mean_abs_delta=float(np.abs(delta).mean()),
        mean_lr=float(lrs.mean()),
        radii=bank.radii.copy(),
        patches=int(rows.shape[0]),
    )


def _apply_sequential(
    bank: NeuronBank, rows: npt.NDArray[np.float32], cfg: PlasticityConfig, progress: float
) -> UpdateSummary:
    total = 0.0
    rates = 0.0
    for row in rows:
        lrs = neuron_learning_rates(bank.radii, cfg, progress)
        delta = batch_delta(bank, row[None, :], cfg, lrs)
        _apply_checked(bank, delta)
        total += float(np.abs(delta).mean())
        rates += float(lrs.mean())
    logger.debug(f"Sequential update over {len(rows)} patches")
    return UpdateSummary(
        mean_abs_delta=total / len(rows),
        mean_lr=rates / len(rows),
        radii=bank.radii.copy(),
        patches=int(rows.shape[0]),
    )
