"""Compare the compiled and numpy kernels on a Barbot boundary-map workload.

    python3 benchmarks/bench_kernels.py [--repeat N]

Inputs are real: the box vertices and letter matrices of (3,3,5) at twice
the reducible parameter, chained along 30-letter codes.
"""

import argparse
import time

import numpy as np

from anosov_triangle import _kernels_py, cartan, classify, limitcurve

try:
    from anosov_triangle import _kernels
except ImportError:
    _kernels = None


def workload(n_codes=200, depth=30):
    sig = cartan.TriangleSignature(3, 3, 5)
    t = 2 * classify.t_red(sig)
    rep = cartan.build_representation(cartan.normal_form(sig, cartan.barbot_type(sig), t))
    bm = limitcurve.boundary_map(rep)
    xs = np.linspace(0, 2 * np.pi, n_codes, endpoint=False)
    jobs = []
    for x in xs:
        code = bm.coder.code(float(x), depth)
        frames = [code.frame_after(n) for n in range(depth + 1)]
        steps = np.array([bm._word(w) for w in code.letters])
        verts = np.array([bm._verts[f] for f in frames])
        jobs.append((steps, verts))
    gens = np.asarray(rep.gens)
    idx = np.random.default_rng(0).integers(0, 3, size=2000)
    return jobs, gens, idx


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    jobs, gens, idx = workload()
    impls = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    results = {}
    for name, mod in impls:
        results[name] = {
            "box_chain": timed(lambda: [mod.box_chain(s, v) for s, v in jobs], args.repeat),
            "chain_product": timed(lambda: mod.chain_product(gens, idx), args.repeat),
            "max_angle": timed(lambda: [mod.max_angle(v[-1]) for _, v in jobs], args.repeat),
        }
    print(f"{'kernel':<14} " + " ".join(f"{n:>12}" for n, _ in impls) + "   speedup")
    for k in results["python"]:
        row = " ".join(f"{results[n][k] * 1e3:10.2f}ms" for n, _ in impls)
        sp = results["python"][k] / results["cython"][k] if _kernels else float("nan")
        print(f"{k:<14} {row}   {sp:6.1f}x")
    if _kernels:
        err = max(float(np.max(np.abs(_kernels.box_chain(s, v)[0] - _kernels_py.box_chain(s, v)[0])))
                  for s, v in jobs)
        print(f"max diameter difference between backends: {err:.2e}")


if __name__ == "__main__":
    main()
