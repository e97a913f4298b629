"""Heuristic global maximizers that produce certified *lower* bounds:
2->q operator norms, injective norms of symmetric 4-tensors and 3-tensors,
and the separability support function h_Sep via seesaw alternation.

Every oracle re-evaluates its witness before returning, so the reported value
is exactly the objective at the returned feasible point.  Restarts draw their
own seeds from the caller's seed plus the restart index, which makes results
reproducible and monotone in the restart budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import OperatorInstance

__all__ = [
    "OracleResult",
    "norm_2_to_q_lower",
    "inj_sym4_lower",
    "inj3_lower",
    "h_sep_lower",
    "elementary_norms",
]

GRID_POINTS = 10_000


@dataclass
class OracleResult:
    value: float
    witness: tuple
    restarts: int
    trace: dict = field(default_factory=dict)


def _unit(x):
    nrm = np.linalg.norm(x)
    return x / nrm if nrm > 0 else x


def _quartic_value(rows, x, q):
    u = rows @ x
    return float(np.sum(np.abs(u) ** q))


def _power_ascent(rows, x, q, iters=300, rtol=1e-14):
    """Iterate x <- normalize(R^H |Rx|^(q-2) Rx); monotone for this convex objective."""
    val = _quartic_value(rows, x, q)
    for _ in range(iters):
        u = rows @ x
        g = rows.conj().T @ (np.abs(u) ** (q - 2) * u)
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        x_new = g / gn
        val_new = _quartic_value(rows, x_new, q)
        if val_new <= val * (1 + rtol):
            x, val = (x_new, val_new) if val_new > val else (x, val)
            break
        x, val = x_new, val_new
    return x, val


def _linesearch_polish(fun, grad, x, iters=60):
    """Projected gradient on the sphere with doubling/halving step search."""
    val = fun(x)
    step = 1.0
    for _ in range(iters):
        g = grad(x)
        g = g - np.real(np.vdot(x, g)) * x
        gn = np.linalg.norm(g)
        if gn < 1e-15 * max(1.0, abs(val)):
            break
        improved = False
        while step > 1e-18:
            cand = _unit(x + step * g)
            cv = fun(cand)
            if cv > val:
                x, val = cand, cv
                improved = True
                step *= 2.0
                break
            step /= 2.0
        if not improved:
            break
    return x, val


def _fibonacci_sphere(k):
    """k nearly uniform points on S^2."""
    i = np.arange(k) + 0.5
    phi = np.arccos(1 - 2 * i / k)
    theta = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


def _grid_starts(n):
    if n == 1:
        return np.array([[1.0]])
    if n == 2:
        ang = np.linspace(0, np.pi, 4096, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if n == 3:
        return _fibonacci_sphere(GRID_POINTS)
    return None


def _starts(rows, n, restarts, seed, complex_field):
    rng = np.random.default_rng(seed)
    starts = []
    # largest rows and the top right-singular vector are good deterministic seeds
    norms = np.linalg.norm(rows, axis=1)
    for i in np.argsort(norms)[::-1][:4]:
        if norms[i] > 0:
            starts.append(_unit(rows[i].conj()))
    try:
        _, _, vt = np.linalg.svd(rows, full_matrices=False)
        starts.append(vt[0].conj())
    except np.linalg.LinAlgError:
        pass
    for r in range(restarts):
        sub = np.random.default_rng(np.random.SeedSequence([seed, r]))
        x = sub.normal(size=n)
        if complex_field:
            x = x + 1j * sub.normal(size=n)
        starts.append(_unit(x))
    return starts


def norm_2_to_q_lower(instance: OperatorInstance, q: int = 4, restarts: int = 64, seed: int = 0) -> OracleResult:
    """Lower bound on the 2->q norm (declared convention) by multistart ascent.

    For real inputs with at most 3 columns a deterministic coarse grid is run
    first, which makes those cases effectively exhaustive.
    """
    if q < 4 or q % 2 != 0:
        raise ValueError("q must be even and >= 4")
    if restarts < 1:
        raise ValueError("need at least one restart")
    rows = instance.quartic_rows(q)
    n = instance.n
    if not np.any(rows):
        return OracleResult(0.0, (np.zeros(n),), restarts)

    best_x, best = None, -np.inf
    starts = _starts(rows, n, restarts, seed, instance.is_complex)
    grid = None if instance.is_complex else _grid_starts(n)
    if grid is not None:
        vals = np.sum(np.abs(grid @ rows.T) ** q, axis=1)
        top = np.argsort(vals)[::-1][:8]
        starts = [grid[i] for i in top] + starts
    improvements = 0
    for x0 in starts:
        x, val = _power_ascent(rows, x0, q)
        if val > best:
            best_x, best = x, val
            improvements += 1

    def fun(x):
        return _quartic_value(rows, x, q)

    def grad(x):
        u = rows @ x
        return q * rows.conj().T @ (np.abs(u) ** (q - 2) * u)

    best_x, best = _linesearch_polish(fun, grad, best_x)
    best_x = _unit(best_x)
    value = fun(best_x) ** (1.0 / q)
    trace = {"objective_power": q, "starts": len(starts), "improving_starts": improvements,
             "grid_pass": grid is not None}
    return OracleResult(float(value), (best_x,), restarts, trace=trace)


def _check_sym4(t, tol=1e-8):
    scale = max(1.0, np.abs(t).max())
    for pi in itertools.permutations(range(4)):
        if np.abs(np.transpose(t, pi) - t).max() > tol * scale:
            raise ValueError("tensor is not symmetric under index permutations")


def _shifted_power(fun, grad, x, iters=300, rtol=1e-15):
    """Symmetric tensor power iteration x <- normalize(grad f + shift x).

    The shift starts at zero and grows whenever a step fails to be monotone,
    which restores the ascent property for indefinite tensors.
    """
    val = fun(x)
    shift = 0.0
    for _ in range(iters):
        g = grad(x) / 4.0 + shift * x
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        x_new = g / gn
        val_new = fun(x_new)
        if val_new < val - abs(val) * 1e-15:
            shift = max(2.0 * shift, 1.0, abs(val))
            continue
        if val_new <= val * (1 + rtol) + rtol:
            if val_new > val:
                x, val = x_new, val_new
            break
        x, val = x_new, val_new
    return x, val


def inj_sym4_lower(t: np.ndarray, restarts: int = 64, seed: int = 0) -> OracleResult:
    """Lower bound on the injective norm max |<T, x^(x)4>| of a symmetric 4-tensor."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 4 or len(set(t.shape)) != 1:
        raise ValueError("expected an n x n x n x n tensor")
    _check_sym4(t)
    n = t.shape[0]

    def fun_signed(sign):
        def fun(x):
            return sign * float(np.einsum("ijkl,i,j,k,l->", t, x, x, x, x))

        def grad(x):
            return sign * 4.0 * np.einsum("ijkl,j,k,l->i", t, x, x, x)

        return fun, grad

    best_x, best = None, -np.inf
    grid = _grid_starts(n)
    for sign in (1.0, -1.0):
        fun, grad = fun_signed(sign)
        starts = []
        if grid is not None:
            vals = np.array([fun(g) for g in grid[:: max(1, len(grid) // 2000)]])
            sub = grid[:: max(1, len(grid) // 2000)]
            starts += [sub[i] for i in np.argsort(vals)[::-1][:4]]
        for r in range(restarts):
            rng = np.random.default_rng(np.random.SeedSequence([seed, r, int(sign > 0)]))
            starts.append(_unit(rng.normal(size=n)))
        for x0 in starts:
            x, val = _shifted_power(fun, grad, x0)
            x, val = _linesearch_polish(fun, grad, x, iters=60)
            if val > best:
                best_x, best = x, val
    best_x = _unit(best_x)
    value = abs(float(np.einsum("ijkl,i,j,k,l->", t, best_x, best_x, best_x, best_x)))
    return OracleResult(value, (best_x,), restarts)


def inj3_lower(t: np.ndarray, restarts: int = 64, seed: int = 0) -> OracleResult:
    """Lower bound on the injective norm of a 3-tensor by alternating maximization."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise ValueError("expected a 3-tensor")
    dims = t.shape
    best, best_w = -np.inf, None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        x, y, z = (_unit(rng.normal(size=d)) for d in dims)
        val = 0.0
        for _ in range(200):
            x = _unit(np.einsum("ijk,j,k->i", t, y, z))
            y = _unit(np.einsum("ijk,i,k->j", t, x, z))
            z = _unit(np.einsum("ijk,i,j->k", t, x, y))
            new = float(np.einsum("ijk,i,j,k->", t, x, y, z))
            if abs(new - val) <= 1e-14 * max(1.0, abs(new)):
                val = new
                break
            val = new
        if abs(val) > best:
            best, best_w = abs(val), (x, y, z)
    x, y, z = best_w
    value = abs(float(np.einsum("ijk,i,j,k->", t, x, y, z)))
    return OracleResult(value, best_w, restarts)


def _contract_left(m4, y):
    # <x (x) y, M (x (x) y)> as a quadratic form in x
    return np.einsum("ajbl,j,l->ab", m4, y.conj(), y)


def _contract_right(m4, x):
    return np.einsum("ajbl,a,b->jl", m4, x.conj(), x)


def h_sep_lower(m: np.ndarray, dims: tuple[int, int], restarts: int = 64, seed: int = 0,
                dim_limit: int = 64, psd_tol: float = 1e-9) -> OracleResult:
    """Lower bound on max <x (x) y, M (x (x) y)> over unit x, y, by seesaw.

    Each half-step replaces one factor by the top eigenvector of the operator
    obtained by contracting the other factor, so the value never decreases.
    For 2x2 problems a coarse product-state grid seeds the polish pass.
    """
    na, nb = dims
    m = np.asarray(m)
    if m.shape != (na * nb, na * nb):
        raise ValueError("matrix shape does not match subsystem dimensions")
    if na * nb > dim_limit:
        raise ValueError(f"dimension {na * nb} exceeds limit {dim_limit}")
    scale = max(1.0, float(np.abs(m).max()))
    lam_min = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0)[0])
    if lam_min < -psd_tol * scale:
        raise ValueError(f"matrix is not PSD within tolerance (min eig {lam_min:.3e})")
    m4 = m.reshape(na, nb, na, nb)
    cplx = np.iscomplexobj(m)

    def value(x, y):
        v = np.kron(x, y)
        return float(np.real(np.vdot(v, m @ v)))

    def seesaw(x, y, iters=300):
        val = value(x, y)
        for _ in range(iters):
            mx = _contract_left(m4, y)
            w, v = np.linalg.eigh((mx + mx.conj().T) / 2.0)
            x = v[:, -1]
            my = _contract_right(m4, x)
            w, v = np.linalg.eigh((my + my.conj().T) / 2.0)
            y = v[:, -1]
            new = value(x, y)
            if new - val <= 1e-14 * max(1.0, abs(new)):
                return x, y, new
            val = new
        return x, y, val

    starts = []
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        x = rng.normal(size=na) + (1j * rng.normal(size=na) if cplx else 0.0)
        y = rng.normal(size=nb) + (1j * rng.normal(size=nb) if cplx else 0.0)
        starts.append((_unit(x), _unit(y)))
    if na == 2 and nb == 2:
        for xa in _bloch_grid(cplx):
            for yb in _bloch_grid(cplx)[::3]:
                starts.append((xa, yb))

    best, best_w = -np.inf, None
    for x0, y0 in starts:
        x, y, val = seesaw(x0, y0)
        if val > best:
            best, best_w = val, (x, y)
    x, y = best_w
    return OracleResult(value(x, y), (x, y), restarts)


def _bloch_grid(cplx, k=8):
    out = []
    for theta in np.linspace(0, np.pi, k):
        phis = np.linspace(0, 2 * np.pi, k, endpoint=False) if cplx else [0.0, np.pi]
        for phi in phis:
            out.append(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
                       if cplx else np.array([np.cos(theta / 2), np.cos(phi) * np.sin(theta / 2)]))
    return out


def elementary_norms(instance: OperatorInstance) -> dict:
    """Closed-form norms: 2->2, 2->infinity, and their Hoelder product Z."""
    two_two = instance.two_to_two()
    two_inf = instance.two_to_infty()
    return {"two_to_two": two_two, "two_to_infty": two_inf, "Z": two_two**2 * two_inf**2}
