"""Large-L behaviour of the probability that no loop surrounds a face.

P(L, 0) is known exactly for every even L.  Multiplying by L^(5/48) leaves
a power series in L^(-1/2) whose first, second, fifth and sixth
coefficients vanish; the remaining coefficients are extracted by solving
square systems on sliding windows of consecutive even L and comparing
neighbouring windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .formulas import aht_even, q_lm

EXPONENT = Fraction(5, 48)
ZERO_ORDERS = (1, 2, 5, 6)


def p_l0_exact(L: int) -> Fraction:
    """P(L, 0) = Q(L, 0) / A_HT(L)^2."""
    return Fraction(q_lm(L, 0), aht_even(L) ** 2)


def model_orders(k_max: int, imposed_zeros=ZERO_ORDERS) -> list[int]:
    if k_max < 4:
        raise ValueError("k_max must be at least 4")
    return [k for k in range(k_max + 1) if k not in imposed_zeros]


def scaled_values(Ls, digits: int) -> dict:
    """y(L) = P(L,0) L^(5/48) at ``digits`` decimal digits."""
    with mpmath.workdps(digits):
        e = mpmath.mpf(EXPONENT.numerator) / EXPONENT.denominator
        out = {}
        for L in Ls:
            p = p_l0_exact(L)
            out[L] = mpmath.mpf(p.numerator) / p.denominator * mpmath.mpf(L) ** e
        return out


def _solve_window(y, window, orders):
    A = mpmath.matrix([[mpmath.mpf(L) ** (-mpmath.mpf(k) / 2) for k in orders] for L in window])
    b = mpmath.matrix([y[L] for L in window])
    sol = mpmath.lu_solve(A, b)
    return [sol[i] for i in range(len(orders))]


def _evaluate(coeffs, orders, L):
    return mpmath.fsum(c * mpmath.mpf(L) ** (-mpmath.mpf(k) / 2) for c, k in zip(coeffs, orders))


@dataclass
class WindowFit:
    window: list[int]
    coeffs: dict  # order -> mpf
    forecast_residual: object | None = None  # |y - model| at the next even L


@dataclass
class AsymptoticFit:
    L_min: int
    L_max: int
    k_max: int
    digits: int
    orders: list[int]
    windows: list[WindowFit] = field(default_factory=list)
    tolerance: float = 1e-6
    compare_last: int = 3

    @property
    def final(self) -> WindowFit:
        return self.windows[-1]

    def coefficient(self, k: int) -> float:
        if k not in self.orders:
            return 0.0
        return float(self.final.coeffs[k])

    def spread(self, k: int) -> float:
        """Largest change of a_k across the last ``compare_last`` windows."""
        vals = [w.coeffs[k] for w in self.windows[-self.compare_last:]]
        return float(max(vals) - min(vals))

    def flagged(self) -> list[int]:
        """Orders whose window spread exceeds the tolerance relative to |a_k|."""
        out = []
        for k in self.orders[:3]:
            ref = max(abs(self.coefficient(k)), 1e-300)
            if self.spread(k) > self.tolerance * max(1.0, ref):
                out.append(k)
        return out

    def forecast_residuals(self) -> list[tuple[int, float]]:
        return [(w.window[-1], float(w.forecast_residual)) for w in self.windows if w.forecast_residual is not None]

    def to_json(self) -> dict:
        return {
            "L_range": [self.L_min, self.L_max],
            "k_max": self.k_max,
            "precision_digits": self.digits,
            "exponent": f"{EXPONENT.numerator}/{EXPONENT.denominator}",
            "imposed_zero_orders": [k for k in ZERO_ORDERS if k <= self.k_max],
            "final_window": self.final.window,
            "coefficients": {
                f"a_{k}": mpmath.nstr(self.final.coeffs[k], 15) for k in self.orders
            },
            "spread": {f"a_{k}": self.spread(k) for k in self.orders},
            "flagged": [f"a_{k}" for k in self.flagged()],
            "windows_compared": self.compare_last,
        }


def fit_a_coefficients(
    L_min: int = 40,
    L_max: int = 120,
    k_max: int = 10,
    precision_digits: int = 60,
    imposed_zeros=ZERO_ORDERS,
) -> AsymptoticFit:
    """Window-by-window extraction of the expansion coefficients.

    Each window is the smallest run of consecutive even L giving a square
    system; windows slide by 2 from ``L_min`` to ``L_max``.
    """
    if precision_digits < 50:
        raise ValueError("use at least 50 digits")
    orders = model_orders(k_max, imposed_zeros)
    n = len(orders)
    Ls = [L for L in range(L_min + L_min % 2, L_max + 1, 2)]
    if len(Ls) < n:
        raise ValueError(f"need at least {n} even L values in [{L_min}, {L_max}]")
    fit = AsymptoticFit(Ls[0], Ls[-1], k_max, precision_digits, orders)
    with mpmath.workdps(precision_digits):
        y = scaled_values(Ls, precision_digits)
        for start in range(len(Ls) - n + 1):
            window = Ls[start:start + n]
            coeffs = _solve_window(y, window, orders)
            nxt = start + n
            resid = None
            if nxt < len(Ls):
                resid = abs(y[Ls[nxt]] - _evaluate(coeffs, orders, Ls[nxt]))
            fit.windows.append(WindowFit(window, dict(zip(orders, coeffs)), resid))
    return fit


def to_csv(Ls, digits: int = 30) -> str:
    y = scaled_values(Ls, max(digits, 50))
    lines = ["L,P_L0,y_L"]
    for L in Ls:
        p = p_l0_exact(L)
        lines.append(f"{L},{p.numerator}/{p.denominator},{mpmath.nstr(y[L], digits)}")
    return "\n".join(lines) + "\n"
