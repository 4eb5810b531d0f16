"""Time the assembly kernels with the numba backend and the numpy fallback.

Each backend runs in its own interpreter because the choice is made at
import time from GUILLOTINE_GMRF_NO_NUMBA.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from guillotine_gmrf import _kernels
from guillotine_gmrf.face_weight import domain_precision, scalar_dihedral
from guillotine_gmrf.folds_halfstrips import halfstrip_fixed_point

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
Q = scalar_dihedral(2.0, -0.5, -0.25)
coeffs = rng.standard_normal((4 * 128 + 1, 2, 2)) + 0j
q = rng.standard_normal((16, 16)) + 0j
idx = rng.integers(0, 2000, size=(20000, 16))

cases = {
    "index_blocks n=128": lambda: _kernels.index_blocks(coeffs, 256, 128, 1, -1, 0),
    "scatter_faces 20000 faces": lambda: _kernels.scatter_faces(np.zeros((2000, 2000), complex), q, idx),
    "domain_precision 40x40": lambda: domain_precision(Q, 40, 40),
    "halfstrip_fixed_point n=64": lambda: halfstrip_fixed_point(Q, "W", 64),
}
out = {"backend": _kernels.backend()}
for name, fn in cases.items():
    fn()  # warm-up, includes jit compilation
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    out[name] = min(ts)
print(json.dumps(out))
"""


def run(no_numba: bool, repeat: int) -> dict:
    env = dict(os.environ, GUILLOTINE_GMRF_NO_NUMBA="1" if no_numba else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'case':<30}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for name in fast:
        if name == "backend":
            continue
        print(f"{name:<30}{fast[name] * 1e3:>10.2f}ms{slow[name] * 1e3:>10.2f}ms{slow[name] / fast[name]:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
