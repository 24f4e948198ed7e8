# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused FiLM-SIREN radiance field evaluation (forward + analytic backward).

Hidden layers compute h_{l+1} = sin(gamma_l * (W_l h_l + b_l) + beta_l);
heads are softplus (density) and sigmoid (color, conditioned on direction).
GEMMs go through BLAS; elementwise passes are flat unit-stride loops so the
compiler can vectorize the transcendentals. The pure fallback in ``pure.py``
is the reference these loops must match.
"""

from libc.math cimport sin, sinf, cos, cosf, exp, expf, log1p, log1pf
from scipy.linalg.cython_blas cimport sgemm, dgemm

ctypedef fused real:
    float
    double


cdef void _gemm(bint ta, bint tb, int m, int n, int k, real* a, int lda,
                real* b, int ldb, real beta, real* c, int ldc) noexcept nogil:
    # Row-major C(m,n) = op(A)(m,k) @ op(B)(k,n) + beta*C, evaluated as the
    # transposed product in column-major BLAS. lda/ldb/ldc are row strides.
    cdef char cta = b'T' if ta else b'N'
    cdef char ctb = b'T' if tb else b'N'
    cdef int mm = n, nn = m, kk = k
    cdef int la = lda, lb = ldb, lc = ldc
    cdef float af = 1.0, bf
    cdef double ad = 1.0, bd
    if real is float:
        bf = beta
        sgemm(&ctb, &cta, &mm, &nn, &kk, &af, b, &lb, a, &la, &bf, c, &lc)
    else:
        bd = beta
        dgemm(&ctb, &cta, &mm, &nn, &kk, &ad, b, &lb, a, &la, &bd, c, &lc)


cdef inline real _sigmoid(real x) noexcept nogil:
    cdef real e
    if x >= 0:
        if real is float:
            return 1.0 / (1.0 + expf(-x))
        else:
            return 1.0 / (1.0 + exp(-x))
    if real is float:
        e = expf(x)
    else:
        e = exp(x)
    return e / (1.0 + e)


cdef void _film_sin(Py_ssize_t p, int h, real* pre, real* hid, real* bias,
                    real* gamma, real* beta) noexcept nogil:
    # pre += bias; hid = sin(gamma*pre + beta), row-wise over (p, h)
    cdef Py_ssize_t i
    cdef int j
    cdef real* pr
    cdef real* hr
    cdef real z
    for i in range(p):
        pr = pre + i * h
        hr = hid + i * h
        for j in range(h):
            pr[j] += bias[j]
            z = gamma[j] * pr[j] + beta[j]
            if real is float:
                hr[j] = sinf(z)
            else:
                hr[j] = sin(z)


def field_forward(real[:, ::1] x, real[:, ::1] v,
                  real[:, ::1] w0, real[::1] b0,
                  real[:, :, ::1] wh, real[:, ::1] bh,
                  real[:, ::1] wd, real[::1] bd,
                  real[:, ::1] wc, real[::1] bc,
                  real[:, ::1] gamma, real[:, ::1] beta,
                  real[:, :, ::1] pre, real[:, :, ::1] hid,
                  real[::1] ad, real[:, ::1] ac,
                  real[::1] sigma, real[:, ::1] rgb):
    """pre[l] stashes W_l h + b (pre-FiLM); hid[l] stashes sin(...) outputs."""
    cdef Py_ssize_t p = x.shape[0]
    cdef int np_ = <int>p
    cdef int h = <int>w0.shape[0]
    cdef int nl = <int>gamma.shape[0]
    cdef int l, j
    cdef Py_ssize_t i
    cdef real z
    with nogil:
        _gemm(False, True, np_, h, 3, &x[0, 0], 3, &w0[0, 0], 3, <real>0.0,
              &pre[0, 0, 0], h)
        _film_sin(p, h, &pre[0, 0, 0], &hid[0, 0, 0], &b0[0],
                  &gamma[0, 0], &beta[0, 0])
        for l in range(1, nl):
            _gemm(False, True, np_, h, h, &hid[l - 1, 0, 0], h,
                  &wh[l - 1, 0, 0], h, <real>0.0, &pre[l, 0, 0], h)
            _film_sin(p, h, &pre[l, 0, 0], &hid[l, 0, 0], &bh[l - 1, 0],
                      &gamma[l, 0], &beta[l, 0])
        # density head: softplus((P,H) @ (1,H)^T + bd)
        _gemm(False, True, np_, 1, h, &hid[nl - 1, 0, 0], h, &wd[0, 0], h,
              <real>0.0, &ad[0], 1)
        for i in range(p):
            ad[i] += bd[0]
            z = ad[i]
            if z > 0:
                if real is float:
                    sigma[i] = z + log1pf(expf(-z))
                else:
                    sigma[i] = z + log1p(exp(-z))
            else:
                if real is float:
                    sigma[i] = log1pf(expf(z))
                else:
                    sigma[i] = log1p(exp(z))
        # color head: sigmoid(hid @ wc[:, :h]^T + v @ wc[:, h:]^T + bc)
        _gemm(False, True, np_, 3, h, &hid[nl - 1, 0, 0], h, &wc[0, 0], h + 3,
              <real>0.0, &ac[0, 0], 3)
        _gemm(False, True, np_, 3, 3, &v[0, 0], 3, &wc[0, h], h + 3, <real>1.0,
              &ac[0, 0], 3)
        for i in range(p):
            for j in range(3):
                ac[i, j] += bc[j]
                rgb[i, j] = _sigmoid(ac[i, j])


cdef void _film_sin_bwd(Py_ssize_t p, int h, real* dh, real* pre, real* gamma,
                        real* beta, real* dgamma, real* dbeta,
                        real* dz, real* tmp, real* ones) noexcept nogil:
    # dz = dh * cos(gamma*pre + beta) * gamma; accumulate dgamma/dbeta.
    # Split into branch-free elementwise passes plus BLAS column sums so the
    # cos loop vectorizes.
    cdef Py_ssize_t i
    cdef int j
    cdef int np_ = <int>p
    cdef real* pr
    cdef real* dhr
    cdef real* dzr
    cdef real* tr
    for i in range(p):
        pr = pre + i * h
        dhr = dh + i * h
        tr = tmp + i * h
        for j in range(h):
            if real is float:
                tr[j] = dhr[j] * cosf(gamma[j] * pr[j] + beta[j])
            else:
                tr[j] = dhr[j] * cos(gamma[j] * pr[j] + beta[j])
    # dbeta += ones^T @ tmp
    _gemm(True, False, 1, h, np_, ones, 1, tmp, h, <real>1.0, dbeta, h)
    for i in range(p):
        pr = pre + i * h
        tr = tmp + i * h
        dzr = dz + i * h
        for j in range(h):
            dzr[j] = tr[j] * gamma[j]
            tr[j] = tr[j] * pr[j]
    # dgamma += ones^T @ (c * pre)
    _gemm(True, False, 1, h, np_, ones, 1, tmp, h, <real>1.0, dgamma, h)


def field_backward(real[:, ::1] x, real[:, ::1] v,
                   real[:, ::1] w0, real[:, :, ::1] wh,
                   real[:, ::1] wd, real[:, ::1] wc,
                   real[:, ::1] gamma, real[:, ::1] beta,
                   real[:, :, ::1] pre, real[:, :, ::1] hid,
                   real[::1] ad, real[:, ::1] ac,
                   real[::1] gsigma, real[:, ::1] grgb,
                   real[:, ::1] dw0, real[::1] db0,
                   real[:, :, ::1] dwh, real[:, ::1] dbh,
                   real[:, ::1] dwd, real[::1] dbd,
                   real[:, ::1] dwc, real[::1] dbc,
                   real[:, ::1] dgamma, real[:, ::1] dbeta,
                   real[:, ::1] dh, real[:, ::1] dz, real[:, ::1] dhead,
                   real[:, ::1] tmp, real[::1] ones):
    """Accumulates parameter grads in place; dh/dz/dhead/tmp/ones are scratch."""
    cdef Py_ssize_t p = x.shape[0]
    cdef int np_ = <int>p
    cdef int h = <int>dh.shape[1]
    cdef int nl = <int>gamma.shape[0]
    cdef int l, j
    cdef Py_ssize_t i
    cdef real s, g
    with nogil:
        # density head: dad = gsigma * sigmoid(ad), stored in dz[:, 0]
        for i in range(p):
            dz[i, 0] = gsigma[i] * _sigmoid(ad[i])
            dbd[0] += dz[i, 0]
        _gemm(True, False, 1, h, np_, &dz[0, 0], h, &hid[nl - 1, 0, 0], h,
              <real>1.0, &dwd[0, 0], h)
        # color head: dhead = grgb * s * (1 - s)
        for i in range(p):
            for j in range(3):
                s = _sigmoid(ac[i, j])
                dhead[i, j] = grgb[i, j] * s * (1.0 - s)
                dbc[j] += dhead[i, j]
        _gemm(True, False, 3, h, np_, &dhead[0, 0], 3, &hid[nl - 1, 0, 0], h,
              <real>1.0, &dwc[0, 0], h + 3)
        _gemm(True, False, 3, 3, np_, &dhead[0, 0], 3, &v[0, 0], 3, <real>1.0,
              &dwc[0, h], h + 3)
        # into the trunk: dh = dad (x) wd + dhead @ wc[:, :h]
        for i in range(p):
            g = dz[i, 0]
            for j in range(h):
                dh[i, j] = g * wd[0, j]
        _gemm(False, False, np_, h, 3, &dhead[0, 0], 3, &wc[0, 0], h + 3,
              <real>1.0, &dh[0, 0], h)
        for l in range(nl - 1, -1, -1):
            _film_sin_bwd(p, h, &dh[0, 0], &pre[l, 0, 0], &gamma[l, 0],
                          &beta[l, 0], &dgamma[l, 0], &dbeta[l, 0],
                          &dz[0, 0], &tmp[0, 0], &ones[0])
            if l > 0:
                _gemm(True, False, h, h, np_, &dz[0, 0], h, &hid[l - 1, 0, 0],
                      h, <real>1.0, &dwh[l - 1, 0, 0], h)
                _gemm(True, False, 1, h, np_, &ones[0], 1, &dz[0, 0], h,
                      <real>1.0, &dbh[l - 1, 0], h)
                _gemm(False, False, np_, h, h, &dz[0, 0], h, &wh[l - 1, 0, 0],
                      h, <real>0.0, &dh[0, 0], h)
            else:
                _gemm(True, False, h, 3, np_, &dz[0, 0], h, &x[0, 0], 3,
                      <real>1.0, &dw0[0, 0], 3)
                _gemm(True, False, 1, h, np_, &ones[0], 1, &dz[0, 0], h,
                      <real>1.0, &db0[0], h)
