"""
Error bars and convergence diagnostics for MCMC traces.
"""
import numpy as np
import scipy.stats

from heislab import defaults


def batch_means(x, batches=defaults.batches):
    """Mean and standard error of traces of shape (n,) or (chains, n).

    Each chain is cut into `batches` contiguous batches (the earliest
    leftover samples are dropped); chains are treated as independent.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    c, n = x.shape
    if n < 2:
        raise ValueError("batch means needs at least two samples per chain, got %d" % n)
    if np.all(x == x.flat[0]):
        return float(x.flat[0]), 0.0
    b = min(int(batches), n)
    m = n // b
    x = x[:, n - m * b:]
    means = x.reshape(c, b, m).mean(axis=2)
    var = means.var(axis=1, ddof=1) / b
    return float(means.mean()), float(np.sqrt(var.sum()) / c)


def _autocorrelation(x):
    n = len(x)
    f = np.fft.rfft(x - x.mean(), n=2 * n)
    acf = np.fft.irfft(f * np.conjugate(f))[:n]
    return acf / acf[0]


def integrated_autocorrelation_time(x, c=defaults.tau_window):
    """tau_int with Sokal's automatic window: the first lag M with M >= c tau(M).

    x is (n,) or (chains, n); autocorrelations are averaged over chains.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    live = x[np.ptp(x, axis=1) > 0]
    if not len(live):
        return 1.0
    rho = np.mean([_autocorrelation(row) for row in live], axis=0)
    taus = 2.0 * np.cumsum(rho) - 1.0
    inside = np.arange(len(taus)) < c * taus
    window = int(np.argmin(inside)) if not np.all(inside) else len(taus) - 1
    return float(taus[window])


def symmetry_test(before, after, bins=10):
    """Bowker's chi-square test that the binned joint law of (before, after)
    is symmetric, as it is for a reversible chain in equilibrium.

    Returns (statistic, degrees of freedom, p-value).
    """
    before = np.asarray(before, dtype=float).ravel()
    after = np.asarray(after, dtype=float).ravel()
    edges = np.quantile(np.concatenate([before, after]), np.linspace(0, 1, bins + 1))
    a = np.clip(np.searchsorted(edges, before, side="right") - 1, 0, bins - 1)
    b = np.clip(np.searchsorted(edges, after, side="right") - 1, 0, bins - 1)
    N = np.zeros((bins, bins))
    np.add.at(N, (a, b), 1)
    iu = np.triu_indices(bins, 1)
    upper, lower = N[iu], N.T[iu]
    total = upper + lower
    keep = total > 0
    stat = float(np.sum((upper[keep] - lower[keep]) ** 2 / total[keep]))
    dof = int(np.count_nonzero(keep))
    return stat, dof, float(scipy.stats.chi2.sf(stat, max(dof, 1)))
