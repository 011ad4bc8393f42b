"""Phonon thermodynamics from spectral samples, plus Debye and Einstein models.

Samples carry squared angular frequencies lambda; the energy quantum of a
mode is hbar * sqrt(lambda).  Integrals against d(phi) are evaluated as
weighted sums over the samples.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics

# exp(700) is close to the largest finite double
_OVERFLOW_X = 700.0


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    boltzmann: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.boltzmann > 0):
            raise ValueError("hbar and the Boltzmann constant must be positive")


NATURAL = PhysicalConstants()
SI = PhysicalConstants(hbar=1.054571817e-34, boltzmann=1.380649e-23)


def constants_for(units):
    if units == "natural":
        return NATURAL
    if units == "si":
        return SI
    raise ValueError(f"unknown unit system {units!r}")


@dataclass(frozen=True)
class ThermoCurve:
    temperatures: np.ndarray
    u1: np.ndarray
    c: np.ndarray


def _check_T(T):
    if not np.all(np.asarray(T) > 0):
        raise ValueError("temperature must be positive")


def _reduced(lam, T, consts):
    """x = hbar sqrt(lambda) / (K T)."""
    return consts.hbar * np.sqrt(np.maximum(lam, 0.0)) / (consts.boltzmann * T)


def mode_energy(lam, T, consts=NATURAL):
    """hbar sqrt(lam) / (exp(x) - 1), equal to K T at lam = 0."""
    x = _reduced(np.asarray(lam, float), T, consts)
    kT = consts.boltzmann * T
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = kT * x / np.expm1(x)
    g = np.where(x == 0, kT, g)
    return np.where(x > _OVERFLOW_X, 0.0, g)


def mode_heat(lam, T, consts=NATURAL):
    """K x^2 e^x / (e^x - 1)^2, equal to K at lam = 0."""
    x = _reduced(np.asarray(lam, float), T, consts)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = x / -np.expm1(-x)
        h = r * r * np.exp(-x)
    h = np.where(x == 0, 1.0, h)
    return consts.boltzmann * np.where(x > _OVERFLOW_X, 0.0, h)


def zero_point_energy(samples, consts=NATURAL):
    """U0 = (hbar/2) sum_i w_i sqrt(lambda_i)."""
    return 0.5 * consts.hbar * float(np.dot(samples.weights, np.sqrt(np.maximum(samples.lambdas, 0.0))))


def internal_energy(samples, T, consts=NATURAL):
    """Thermal part U1(T) of the internal energy per unit cell."""
    _check_T(T)
    return float(np.dot(samples.weights, mode_energy(samples.lambdas, T, consts)))


def specific_heat(samples, T, consts=NATURAL):
    """C(T) = dU1/dT per unit cell."""
    _check_T(T)
    return float(np.dot(samples.weights, mode_heat(samples.lambdas, T, consts)))


def thermo_curve(samples, temperatures, consts=NATURAL):
    T = np.asarray(temperatures, dtype=float)
    _check_T(T)
    u = np.array([internal_energy(samples, t, consts) for t in T])
    c = np.array([specific_heat(samples, t, consts) for t in T])
    return ThermoCurve(T, u, c)


def debye_lambda(c0, n):
    """Cutoff lambda_D at which the Debye distribution holds 3n modes."""
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    return (3.0 * n / c0) ** (2.0 / 3.0)


def debye_temperature(lam_D, consts=NATURAL):
    if not lam_D > 0:
        raise ValueError("lambda_D must be positive")
    return consts.hbar / consts.boltzmann * np.sqrt(lam_D)


def debye_integral(x_max):
    """Integral of x^4 e^x / (e^x - 1)^2 from 0 to x_max."""
    if x_max <= 0:
        return 0.0
    # the integrand is below 1e-280 past x = 750
    upper = min(float(x_max), 750.0)
    return numerics.integrate_interval(lambda x: numerics.bose_squared(x, 4), 0.0, upper)


def debye_specific_heat(theta_D, n, T, consts=NATURAL):
    """9 n K (T/Theta)^3 times the Debye integral up to Theta/T."""
    _check_T(T)
    r = theta_D / T
    return 9.0 * n * consts.boltzmann * r ** -3 * debye_integral(r)


def einstein_specific_heat(lam0, n, T, consts=NATURAL):
    """3 n K x^2 e^x / (e^x - 1)^2 with x = hbar sqrt(lam0) / K T."""
    if not lam0 > 0:
        raise ValueError("lambda_0 must be positive")
    _check_T(T)
    return 3.0 * n * float(mode_heat(lam0, T, consts))


def t3_coefficients(c0, consts=NATURAL):
    """Low-temperature coefficients: U1 ~ u T^4 and C ~ c T^3."""
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    base = np.pi ** 4 * c0 * consts.boltzmann ** 4 / consts.hbar ** 3
    return base / 5.0, 4.0 * base / 5.0


def debye_t3_coefficient(theta_D, n, consts=NATURAL):
    """(12/5) pi^4 n K / Theta^3, the Debye model's own T^3 coefficient."""
    return 12.0 / 5.0 * np.pi ** 4 * n * consts.boltzmann / theta_D ** 3
