# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-mode hot kernels.

Fused single-pass versions of the loops in ``_kernels_np``; selected at
import time when the extension is available. Norm reductions accumulate
sequentially in ascending-|n| order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin

cnp.import_array()

BACKEND_NAME = "cython"


def semigroup_factors(cnp.ndarray[cnp.float64_t, ndim=1] modes,
                      double t, double eps, double nu):
    cdef Py_ssize_t i, n = modes.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double m, n2, n4, damp, phase
    for i in range(n):
        m = modes[i]
        n2 = m * m
        n4 = n2 * n2
        damp = exp(-eps * n4 * t)
        phase = (-n2 + nu * n4) * t
        out[i] = damp * (cos(phase) + 1j * sin(phase))
    return out


def apply_multiplier(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
                     cnp.ndarray[cnp.complex128_t, ndim=1] factors):
    cdef Py_ssize_t i, n = coeffs.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        out[i] = coeffs[i] * factors[i]
    return out


def nonlinear_combine(cnp.ndarray[cnp.complex128_t, ndim=1] u,
                      cnp.ndarray[cnp.complex128_t, ndim=1] du,
                      cnp.ndarray[cnp.complex128_t, ndim=1] d2u,
                      lam):
    cdef double l1 = lam[0], l2 = lam[1], l3 = lam[2]
    cdef double l4 = lam[3], l5 = lam[4], l6 = lam[5]
    cdef Py_ssize_t i, n = u.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double complex ui, dui, d2ui
    cdef double au2, adu2
    for i in range(n):
        ui = u[i]
        dui = du[i]
        d2ui = d2u[i]
        au2 = ui.real * ui.real + ui.imag * ui.imag
        adu2 = dui.real * dui.real + dui.imag * dui.imag
        out[i] = ((l1 * au2 + l2 * au2 * au2 + l4 * adu2) * ui
                  + l3 * dui * dui * ui.conjugate()
                  + l5 * ui * ui * d2ui.conjugate()
                  + l6 * au2 * d2ui)
    return out


def weighted_norm_sq(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
                     cnp.ndarray[cnp.float64_t, ndim=1] weights,
                     cnp.ndarray[cnp.intp_t, ndim=1] order):
    cdef Py_ssize_t i, j, n = order.shape[0]
    cdef double acc = 0.0
    cdef double complex c
    for i in range(n):
        j = order[i]
        c = coeffs[j]
        acc += weights[j] * (c.real * c.real + c.imag * c.imag)
    return acc


def weighted_diff_norm_sq(cnp.ndarray[cnp.complex128_t, ndim=1] a,
                          cnp.ndarray[cnp.complex128_t, ndim=1] b,
                          cnp.ndarray[cnp.float64_t, ndim=1] weights,
                          cnp.ndarray[cnp.intp_t, ndim=1] order):
    cdef Py_ssize_t i, j, n = order.shape[0]
    cdef double acc = 0.0
    cdef double complex d
    for i in range(n):
        j = order[i]
        d = a[j] - b[j]
        acc += weights[j] * (d.real * d.real + d.imag * d.imag)
    return acc
