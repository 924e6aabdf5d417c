# Compiled distance kernels: the hot loops behind k-means, DBSCAN and the
# silhouette score. The pure-NumPy twin lives in pykernels.py; both backends
# must keep identical scan orders and tie-breaking so partitions agree.

from libc.math cimport sqrt, INFINITY

import numpy as np

NAME = "c"


def sq_dists_to_point(double[:, ::1] X, double[::1] p):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double acc, diff
    for i in range(n):
        acc = 0.0
        for j in range(d):
            diff = X[i, j] - p[j]
            acc += diff * diff
        o[i] = acc
    return out


def assign_to_centroids(double[:, ::1] X, double[:, ::1] C):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t k = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    cdef long long[::1] lab = labels
    cdef double[::1] b = best
    cdef Py_ssize_t i, j, c, argbest
    cdef double acc, diff, bestval
    for i in range(n):
        bestval = INFINITY
        argbest = 0
        for c in range(k):
            acc = 0.0
            for j in range(d):
                diff = X[i, j] - C[c, j]
                acc += diff * diff
            if acc < bestval:
                bestval = acc
                argbest = c
        lab[i] = argbest
        b[i] = bestval
    return labels, best


def accumulate_clusters(double[:, ::1] X, long long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    sums = np.zeros((k, d), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] s = sums
    cdef long long[::1] cnt = counts
    cdef Py_ssize_t i, j
    cdef long long c
    for i in range(n):
        c = labels[i]
        cnt[c] += 1
        for j in range(d):
            s[c, j] += X[i, j]
    return sums, counts


def dbscan_labels(double[:, ::1] X, double eps, Py_ssize_t min_pts):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef double eps2 = eps * eps
    cdef long long UNDEFINED = -2
    cdef long long NOISE = -1

    labels = np.full(n, UNDEFINED, dtype=np.int64)
    cdef long long[::1] lab = labels
    nbuf_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    inq_arr = np.zeros(n, dtype=np.uint8)
    cdef long long[::1] nbuf = nbuf_arr
    cdef long long[::1] queue = queue_arr
    cdef unsigned char[::1] inq = inq_arr

    cdef Py_ssize_t i, j, t, head, tail, cnt
    cdef long long h, cur, cluster = -1
    cdef double acc, diff

    for i in range(n):
        if lab[i] != UNDEFINED:
            continue
        cnt = _region(X, i, eps2, nbuf)
        if cnt < min_pts:
            lab[i] = NOISE
            continue
        cluster += 1
        lab[i] = cluster
        head = 0
        tail = 0
        for t in range(cnt):
            h = nbuf[t]
            if h != i and (lab[h] == UNDEFINED or lab[h] == NOISE) and inq[h] == 0:
                queue[tail] = h
                tail += 1
                inq[h] = 1
        while head < tail:
            cur = queue[head]
            head += 1
            inq[cur] = 0
            if lab[cur] == NOISE:
                lab[cur] = cluster
                continue
            lab[cur] = cluster
            cnt = _region(X, cur, eps2, nbuf)
            if cnt >= min_pts:
                for t in range(cnt):
                    h = nbuf[t]
                    if (lab[h] == UNDEFINED or lab[h] == NOISE) and inq[h] == 0:
                        queue[tail] = h
                        tail += 1
                        inq[h] = 1
    return labels


cdef Py_ssize_t _region(double[:, ::1] X, Py_ssize_t i, double eps2, long long[::1] out):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t j, f, cnt = 0
    cdef double acc, diff
    for j in range(n):
        acc = 0.0
        for f in range(d):
            diff = X[j, f] - X[i, f]
            acc += diff * diff
        if acc <= eps2:
            out[cnt] = j
            cnt += 1
    return cnt


def cluster_pair_distance_sums(double[:, ::1] X, long long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    sums = np.zeros((n, k), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] s = sums
    cdef long long[::1] cnt = counts
    cdef Py_ssize_t i, j, f
    cdef long long c
    cdef double acc, diff
    for j in range(n):
        c = labels[j]
        if c >= 0:
            cnt[c] += 1
    for i in range(n):
        for j in range(n):
            c = labels[j]
            if c < 0:
                continue
            acc = 0.0
            for f in range(d):
                diff = X[i, f] - X[j, f]
                acc += diff * diff
            s[i, c] += sqrt(acc)
    return sums, counts
