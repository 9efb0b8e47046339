import numpy as np

from exclusion_bounds.measurements import MeasurementBasis, MeasurementEnsemble


def random_basis(d, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return MeasurementBasis(q)


def random_ensemble(d, n, seed):
    return MeasurementEnsemble([random_basis(d, [seed, m]) for m in range(n)])


def bloch_grid(n_theta=181, n_phi=360):
    """Pure qubit states on a regular (theta, phi) grid, shape (M, 2)."""
    t, p = np.meshgrid(np.linspace(0, np.pi, n_theta), np.linspace(0, 2 * np.pi, n_phi, endpoint=False))
    t, p = t.ravel(), p.ravel()
    return np.stack([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)], axis=1)


def brute_force_capitals(ensemble, psis):
    """Max over the given pure states of the top-k sums of the joint distribution."""
    probs = [np.abs(psis @ b.matrix.conj()) ** 2 for b in ensemble]
    joint = probs[0]
    for p in probs[1:]:
        joint = (joint[:, :, None] * p[:, None, :]).reshape(len(psis), -1)
    joint = -np.sort(-joint, axis=1)
    return np.cumsum(joint, axis=1).max(axis=0)
