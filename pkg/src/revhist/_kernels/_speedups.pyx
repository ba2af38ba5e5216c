# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels in ``_fallback``.

Semantics must match the fallback exactly; parity is property-tested.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cdef extern from "Python.h":
    bint Py_UNICODE_ISALNUM(Py_UCS4 ch)
    Py_ssize_t PyUnicode_GET_LENGTH(object o)
    Py_UCS4 PyUnicode_READ_CHAR(object o, Py_ssize_t i)

IMPLEMENTATION = "c"


def tokenize(text):
    """Case-folded Unicode word tokens, in order."""
    folded = text.casefold()
    cdef Py_ssize_t n = PyUnicode_GET_LENGTH(folded)
    cdef Py_ssize_t i = 0, start
    cdef Py_UCS4 ch
    out = []
    while i < n:
        ch = PyUnicode_READ_CHAR(folded, i)
        if Py_UNICODE_ISALNUM(ch) or ch == u'_':
            start = i
            i += 1
            while i < n:
                ch = PyUnicode_READ_CHAR(folded, i)
                if not (Py_UNICODE_ISALNUM(ch) or ch == u'_'):
                    break
                i += 1
            out.append(folded[start:i])
        else:
            i += 1
    return out


def match_blocks(a, b, max_edits):
    """Greedy shortest-edit-script matcher; see the fallback docstring."""
    cdef Py_ssize_t n = len(a), m = len(b)
    cdef Py_ssize_t max_d = max_edits if max_edits < n + m else n + m
    cdef Py_ssize_t diff = n - m if n > m else m - n
    if max_d < diff:
        return None

    # one slack slot each side: the k == -d branch reads V[k + 1] at d == max_d
    cdef Py_ssize_t width = 2 * max_d + 3
    cdef Py_ssize_t offset = max_d + 1
    cdef long *ca = NULL
    cdef long *cb = NULL
    cdef long *v = NULL
    cdef long *trace = NULL
    cdef Py_ssize_t i, d, x, y, final_d, k, prev_k, prev_x, prev_y
    cdef Py_ssize_t mid_x, mid_y, snake
    cdef long *vprev

    ca = <long *> malloc((n if n > 0 else 1) * sizeof(long))
    cb = <long *> malloc((m if m > 0 else 1) * sizeof(long))
    v = <long *> malloc(width * sizeof(long))
    trace = <long *> malloc((max_d + 1) * width * sizeof(long))
    if ca == NULL or cb == NULL or v == NULL or trace == NULL:
        free(ca); free(cb); free(v); free(trace)
        raise MemoryError()
    try:
        for i in range(n):
            ca[i] = a[i]
        for i in range(m):
            cb[i] = b[i]
        for i in range(width):
            v[i] = 0

        final_d = -1
        for d in range(max_d + 1):
            memcpy(trace + d * width, v, width * sizeof(long))
            k = -d
            while k <= d:
                if k == -d or (k != d and v[offset + k - 1] < v[offset + k + 1]):
                    x = v[offset + k + 1]
                else:
                    x = v[offset + k - 1] + 1
                y = x - k
                while x < n and y < m and ca[x] == cb[y]:
                    x += 1
                    y += 1
                v[offset + k] = x
                if x >= n and y >= m:
                    final_d = d
                    break
                k += 2
            if final_d >= 0:
                break
        if final_d < 0:
            return None

        blocks = []
        x = n
        y = m
        for d in range(final_d, 0, -1):
            vprev = trace + d * width
            k = x - y
            if k == -d or (k != d and vprev[offset + k - 1] < vprev[offset + k + 1]):
                prev_k = k + 1
            else:
                prev_k = k - 1
            prev_x = vprev[offset + prev_k]
            prev_y = prev_x - prev_k
            if prev_k == k + 1:
                mid_x = prev_x
                mid_y = prev_y + 1
            else:
                mid_x = prev_x + 1
                mid_y = prev_y
            snake = x - mid_x
            if snake > 0:
                blocks.append((mid_x, mid_y, snake))
            x = prev_x
            y = prev_y
        if x > 0:
            blocks.append((0, 0, x))
        blocks.reverse()
        return blocks
    finally:
        free(ca)
        free(cb)
        free(v)
        free(trace)
