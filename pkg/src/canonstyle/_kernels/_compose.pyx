# cython: boundscheck=False, wraparound=False, cdivision=True
"""Alpha-compositing scan over ray samples (forward + analytic backward).

Sequential per-ray recurrences; the pure fallback in ``pure.py`` is the
reference implementation these loops must match.
"""

from libc.math cimport exp, expf

ctypedef fused real:
    float
    double


def compose_forward(real[:, ::1] sigma, real[:, :, ::1] color, real[:, ::1] delta,
                    real[::1] background, real[:, ::1] pixel, real[::1] trans,
                    real[:, ::1] alpha, real[:, ::1] tpre):
    """pixel = sum_j alpha_j * prod_{m<j}(1-alpha_m) * c_j + T_final * bg.

    alpha and tpre (transmittance before each sample) are stashed for backward.
    """
    cdef Py_ssize_t n = sigma.shape[0], s = sigma.shape[1]
    cdef Py_ssize_t i, j
    cdef real t, a, w
    with nogil:
        for i in range(n):
            t = 1.0
            pixel[i, 0] = 0.0
            pixel[i, 1] = 0.0
            pixel[i, 2] = 0.0
            for j in range(s):
                if real is float:
                    a = 1.0 - expf(-sigma[i, j] * delta[i, j])
                else:
                    a = 1.0 - exp(-sigma[i, j] * delta[i, j])
                alpha[i, j] = a
                tpre[i, j] = t
                w = a * t
                pixel[i, 0] += w * color[i, j, 0]
                pixel[i, 1] += w * color[i, j, 1]
                pixel[i, 2] += w * color[i, j, 2]
                t *= 1.0 - a
            trans[i] = t
            pixel[i, 0] += t * background[0]
            pixel[i, 1] += t * background[1]
            pixel[i, 2] += t * background[2]


def compose_backward(real[:, ::1] sigma, real[:, :, ::1] color, real[:, ::1] delta,
                     real[::1] background, real[::1] trans,
                     real[:, ::1] alpha, real[:, ::1] tpre,
                     real[:, ::1] grad_pixel, real[::1] grad_trans,
                     real[:, ::1] dsigma, real[:, :, ::1] dcolor,
                     real[:, ::1] ddelta, real[::1] dbackground):
    """Reverse scan; the (1-alpha) factor of the suffix term is kept multiplied
    through so saturated alphas never divide by zero."""
    cdef Py_ssize_t n = sigma.shape[0], s = sigma.shape[1]
    cdef Py_ssize_t i, j
    cdef real g0, g1, g2, gt, b, cg, w, base
    dbackground[0] = 0.0
    dbackground[1] = 0.0
    dbackground[2] = 0.0
    with nogil:
        for i in range(n):
            g0 = grad_pixel[i, 0]
            g1 = grad_pixel[i, 1]
            g2 = grad_pixel[i, 2]
            gt = grad_trans[i]
            dbackground[0] += trans[i] * g0
            dbackground[1] += trans[i] * g1
            dbackground[2] += trans[i] * g2
            # suffix of d(output)/d(alpha_j), excluding the (1-alpha_j) factor
            b = trans[i] * (background[0] * g0 + background[1] * g1 + background[2] * g2 + gt)
            for j in range(s - 1, -1, -1):
                cg = color[i, j, 0] * g0 + color[i, j, 1] * g1 + color[i, j, 2] * g2
                w = alpha[i, j] * tpre[i, j]
                base = tpre[i, j] * cg * (1.0 - alpha[i, j]) - b
                dsigma[i, j] = delta[i, j] * base
                ddelta[i, j] = sigma[i, j] * base
                dcolor[i, j, 0] = w * g0
                dcolor[i, j, 1] = w * g1
                dcolor[i, j, 2] = w * g2
                b += w * cg
