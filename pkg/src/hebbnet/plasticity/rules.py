"""SoftHebb learning rules.

Every rule is local: a synapse's update only needs its presynaptic input,
the neuron's pre-activation, its competition output and its own weight.
"""

import numpy as np
import numpy.typing as npt

from hebbnet.plasticity.models import LearningRateScheme, PlasticityConfig

FloatArray = npt.NDArray[np.floating]


def soft_competition(u: npt.ArrayLike, inv_temp: float, axis: int = -1) -> FloatArray:
    """Softmax competition ``exp(u_k / tau) / sum_l exp(u_l / tau)``.

    The maximum along ``axis`` is subtracted and the exponentials are
    taken in float64; the result is cast back to the input's float dtype
    once. Adding a constant to ``u`` that is exact in its dtype leaves the
    output bitwise unchanged.
    """
    u = np.asarray(u)
    dtype = u.dtype if np.issubdtype(u.dtype, np.floating) else np.dtype(np.float64)
    wide = u.astype(np.float64)
    e = np.exp((wide - wide.max(axis=axis, keepdims=True)) * float(inv_temp))
    return (e / e.sum(axis=axis, keepdims=True)).astype(dtype, copy=False)


def winners(u: npt.ArrayLike, axis: int = -1) -> npt.NDArray[np.intp]:
    """Index of the largest pre-activation; ties go to the lowest index."""
    return np.asarray(np.argmax(u, axis=axis))


def hard_competition(u: npt.ArrayLike, axis: int = -1) -> FloatArray:
    """One-hot winner-take-all along ``axis``."""
    u = np.asarray(u)
    dtype = u.dtype if np.issubdtype(u.dtype, np.floating) else np.float64
    idx = np.expand_dims(winners(u, axis=axis), axis)
    y = np.zeros(u.shape, dtype=dtype)
    np.put_along_axis(y, idx, 1.0, axis=axis)
    return y


def softhebb_delta(
    x: npt.ArrayLike,
    u_k: float | None,
    y_k: float,
    w_k: npt.ArrayLike,
    lr_k: float,
) -> npt.NDArray[np.float64]:
    """Single-neuron SoftHebb update ``lr * y * (x - u * w)`` in float64.

    With ``u_k=None`` the pre-activation is computed here as ``w . x``.
    At ``w = x / |x|`` the delta then vanishes up to float64 rounding,
    a few ulps of ``|x|`` per synapse.
    """
    x = np.asarray(x, dtype=np.float64)
    w_k = np.asarray(w_k, dtype=np.float64)
    u = float(w_k @ x) if u_k is None else float(u_k)
    return lr_k * y_k * (x - u * w_k)


def anti_hebbian_signs(u: npt.ArrayLike, axis: int = -1) -> FloatArray:
    """+1 for the winning neuron, -1 for every other neuron."""
    return 2.0 * hard_competition(u, axis=axis) - 1.0


def anti_hebbian_deltas(
    x: FloatArray, u: FloatArray, y: FloatArray, weights: FloatArray, lrs: FloatArray
) -> FloatArray:
    """Soft anti-Hebbian deltas for one patch.

    The winner (argmax of ``u``) gets its SoftHebb delta; every other
    neuron gets the negated delta.

    Args:
        x: Patch (D,)
        u: Pre-activations (K,)
        y: Competition outputs (K,)
        weights: Weight matrix (K, D)
        lrs: Per-neuron learning rates (K,)

    Returns:
        Deltas (K, D)
    """
    x = np.asarray(x)
    u = np.asarray(u)
    weights = np.asarray(weights)
    hebbian = (np.asarray(lrs) * np.asarray(y))[:, None] * (x[None, :] - u[:, None] * weights)
    return anti_hebbian_signs(u)[:, None] * hebbian


def adaptive_lr(radius: npt.ArrayLike, base_lr: float, power: float) -> FloatArray:
    """Norm-dependent rate ``eta * |r - 1| ** q``; zero on the unit sphere."""
    return base_lr * np.abs(np.asarray(radius, dtype=np.float64) - 1.0) ** power


def linear_decay_lr(base_lr: float, progress: float) -> float:
    """Time-dependent rate ``eta * (1 - progress)``, clamped at zero."""
    return base_lr * max(0.0, 1.0 - progress)


def neuron_learning_rates(
    radii: npt.ArrayLike, cfg: PlasticityConfig, progress: float = 0.0
) -> FloatArray:
    """Per-neuron learning rates for the configured scheme.

    Args:
        radii: Cached weight-row norms (K,)
        cfg: Plasticity configuration
        progress: Fraction of the planned update steps already done

    Returns:
        Rates (K,)
    """
    radii = np.asarray(radii, dtype=np.float64)
    if cfg.lr_scheme is LearningRateScheme.LINEAR_DECAY:
        return np.full(radii.shape, linear_decay_lr(cfg.base_lr, progress))
    rates = adaptive_lr(radii, cfg.base_lr, cfg.lr_power)
    if cfg.lr_scheme is LearningRateScheme.ADAPTIVE_DECAY:
        rates = rates * max(0.0, 1.0 - progress)
    return rates
