#!/usr/bin/env python3
"""Regenerate the bundled point-set tables under data/.

Sobol' direction numbers come from the Joe & Kuo "new-joe-kuo-6.21201" table
(as redistributed with SciPy in scipy/stats/_sobol_direction_numbers.npz).
The lattice generating vector is Kuo's embedded base-2 lattice sequence
"lattice-33002-1024-1048576.9125" (as redistributed with QMCPy).

usage: make_data_files.py QMCPY_LATTICE_NPY OUTDIR
"""
import os
import sys

import numpy as np
import scipy.stats

SOBOL_DIMS = 1111
LATTICE_DIMS = 250


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def write_table(path, header_lines, body_lines):
    body = "".join(line + "\n" for line in body_lines).encode()
    with open(path, "wb") as out:
        for line in header_lines:
            out.write((line + "\n").encode())
        out.write(f"# fnv1a64 {fnv1a64(body):016x}\n".encode())
        out.write(body)


def main():
    lattice_npy, outdir = sys.argv[1], sys.argv[2]
    npz = np.load(os.path.join(os.path.dirname(scipy.stats.__file__),
                               "_sobol_direction_numbers.npz"))
    poly, vinit = npz["poly"], npz["vinit"]
    rows = []
    for d in range(2, SOBOL_DIMS + 1):
        p = int(poly[d - 1])
        s = p.bit_length() - 1
        a = (p >> 1) & ((1 << (s - 1)) - 1) if s > 1 else 0
        m = [int(v) for v in vinit[d - 1][:s]]
        rows.append(" ".join(str(v) for v in [d, s, a] + m))
    write_table(os.path.join(outdir, "sobol_joe_kuo_6_1111.txt"),
                ["# Sobol' direction numbers, Joe & Kuo (2008) new-joe-kuo-6.21201, dimensions 2..1111",
                 "# columns: d s a m_1 .. m_s (dimension 1 is the van der Corput sequence)",
                 f"# dimensions {SOBOL_DIMS}"],
                rows)

    z = np.load(lattice_npy)
    write_table(os.path.join(outdir, "lattice_kuo_33002_250.txt"),
                ["# Rank-1 lattice generating vector, F. Y. Kuo, lattice-33002-1024-1048576.9125",
                 "# embedded base-2 lattice sequence, first 250 components, one odd integer per line",
                 f"# dimensions {LATTICE_DIMS}"],
                [str(int(v)) for v in z[:LATTICE_DIMS]])


if __name__ == "__main__":
    main()
