"""Compare the compiled kernels with the numpy fallback.

Times the three segment kernels on synthetic batches and a fixed number of FD-ADMM
rounds on a BA(30,4) instance, once per backend, and prints a table:

    python benchmarks/bench_kernels.py [--repeat 5] [--rounds 200]
"""

import argparse
import contextlib
import timeit

import numpy as np

from fairshare import admm, kernels
from fairshare.topology import random_ba_instance

NAMES = ("project_segments", "prox_segments", "prox_l1_segments", "positive_roots")


@contextlib.contextmanager
def use_backend(module):
    saved = {n: getattr(kernels, n) for n in NAMES}
    try:
        for n in NAMES:
            setattr(kernels, n, getattr(module, n))
        yield
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def segment_batch(rng, segments=2000, max_len=6):
    counts = rng.integers(1, max_len + 1, size=segments)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return offsets, rng.normal(5, 10, offsets[-1])


def run(repeat: int, rounds: int) -> list[tuple[str, float, float | None]]:
    rng = np.random.default_rng(0)
    offsets, vals = segment_batch(rng)
    caps = rng.uniform(1, 20, len(offsets) - 1)
    lw = rng.uniform(0.5, 5, len(offsets) - 1)
    x0 = np.abs(rng.normal(2, 1, len(vals)))
    inst = random_ba_instance(30, 50, (1, 4), seed=0)

    def rounds_job():
        state = admm.init_state(inst)
        for _ in range(rounds):
            admm.iterate(state)

    jobs = {
        "project_segments (2000 links)": lambda b: b.project_segments(vals, offsets, caps),
        "prox_segments (2000 requests)": lambda b: b.prox_segments(vals, offsets, lw, 2.0),
        "prox_l1_segments (2000 requests)": lambda b: b.prox_l1_segments(vals, offsets, 0.7, lw, 1.0, 0.3, x0),
        f"{rounds} rounds BA(30,4), 50 requests": None,
    }
    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("compiled", kernels.compiled_backend))

    out = []
    for label, job in jobs.items():
        times = {}
        for name, mod in backends:
            if job is None:
                with use_backend(mod):
                    times[name] = min(timeit.repeat(rounds_job, number=1, repeat=repeat))
            else:
                times[name] = min(timeit.repeat(lambda: job(mod), number=1, repeat=repeat))
        out.append((label, times["python"], times.get("compiled")))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rounds", type=int, default=200)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        print("compiled kernels not built; timing the python backend only")
    print(f"{'workload':<40} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}")
    for label, py, cc in run(args.repeat, args.rounds):
        if cc is None:
            print(f"{label:<40} {py * 1e3:12.2f} {'-':>14} {'-':>8}")
        else:
            print(f"{label:<40} {py * 1e3:12.2f} {cc * 1e3:14.2f} {py / cc:7.1f}x")


if __name__ == "__main__":
    main()
