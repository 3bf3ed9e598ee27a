"""Compiled inner loops."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def best_prefix_csr(indptr, indices, valid, values, row_start, row_stop, out_len, out_mean):
    # running sums carry a TwoSum error term, so (s + c) is the correctly
    # rounded prefix sum except in vanishingly rare half-way cases
    for i in range(row_start, row_stop):
        s = 0.0
        c = 0.0
        best = -np.inf
        best_p = 0
        lo = indptr[i]
        for k in range(lo, indptr[i + 1]):
            x = values[indices[k]]
            t = s + x
            z = t - s
            c += (s - (t - z)) + (x - z)
            s = t
            if valid[k]:
                p = k - lo + 1
                mean = (s + c) / p
                # strict: ties keep the shorter prefix
                if mean > best:
                    best = mean
                    best_p = p
        out_len[i] = best_p
        out_mean[i] = best
