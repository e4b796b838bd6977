"""Jitted inner loops for 3x3 convolution on NCHW batches.

These kernels carry the bulk of the training FLOPs; everything else in the
network stack is plain numpy. Weight layout is (Cout, Cin, 3, 3), activations
are (N, C, H, W) with one pixel of zero padding already applied to the input.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def conv3x3_forward(xpad, w, b, out):
    # xpad (N,Cin,H+2,W+2), w (Cout,Cin,3,3), b (Cout), out (N,Cout,H,W)
    N, Cin, Hp, Wp = xpad.shape
    Cout = w.shape[0]
    H = Hp - 2
    W = Wp - 2
    acc = np.empty(W, xpad.dtype)
    for n in range(N):
        xs = xpad[n]
        for co in range(Cout):
            wc = w[co]
            bias = b[co]
            for y in range(H):
                for x in range(W):
                    acc[x] = bias
                for ci in range(Cin):
                    wci = wc[ci]
                    r0 = xs[ci, y]
                    r1 = xs[ci, y + 1]
                    r2 = xs[ci, y + 2]
                    w00 = wci[0, 0]; w01 = wci[0, 1]; w02 = wci[0, 2]
                    w10 = wci[1, 0]; w11 = wci[1, 1]; w12 = wci[1, 2]
                    w20 = wci[2, 0]; w21 = wci[2, 1]; w22 = wci[2, 2]
                    for x in range(W):
                        acc[x] += (w00 * r0[x] + w01 * r0[x + 1] + w02 * r0[x + 2]
                                   + w10 * r1[x] + w11 * r1[x + 1] + w12 * r1[x + 2]
                                   + w20 * r2[x] + w21 * r2[x + 1] + w22 * r2[x + 2])
                out[n, co, y, :] = acc


@njit(cache=True, fastmath=True)
def conv3x3_grad_w(xpad, dout, dw, db):
    # dw (Cout,Cin,3,3) and db (Cout) are accumulated in place.
    N, Cin, Hp, Wp = xpad.shape
    Cout = dout.shape[1]
    H = Hp - 2
    W = Wp - 2
    zero = xpad.dtype.type(0.0)
    for co in range(Cout):
        s = zero
        for n in range(N):
            for y in range(H):
                grow = dout[n, co, y]
                for x in range(W):
                    s += grow[x]
        db[co] += s
        for ci in range(Cin):
            a00 = zero; a01 = zero; a02 = zero
            a10 = zero; a11 = zero; a12 = zero
            a20 = zero; a21 = zero; a22 = zero
            for n in range(N):
                for y in range(H):
                    grow = dout[n, co, y]
                    r0 = xpad[n, ci, y]
                    r1 = xpad[n, ci, y + 1]
                    r2 = xpad[n, ci, y + 2]
                    for x in range(W):
                        g = grow[x]
                        a00 += r0[x] * g; a01 += r0[x + 1] * g; a02 += r0[x + 2] * g
                        a10 += r1[x] * g; a11 += r1[x + 1] * g; a12 += r1[x + 2] * g
                        a20 += r2[x] * g; a21 += r2[x + 1] * g; a22 += r2[x + 2] * g
            dw[co, ci, 0, 0] += a00; dw[co, ci, 0, 1] += a01; dw[co, ci, 0, 2] += a02
            dw[co, ci, 1, 0] += a10; dw[co, ci, 1, 1] += a11; dw[co, ci, 1, 2] += a12
            dw[co, ci, 2, 0] += a20; dw[co, ci, 2, 1] += a21; dw[co, ci, 2, 2] += a22
