"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np
from scipy import ndimage

from pavetex._kernels import available_backends
from pavetex.synth import disc_mask


def watershed_case():
    rng = np.random.default_rng(0)
    circles = list(zip(rng.uniform(20, 236, 60), rng.uniform(20, 236, 60), rng.uniform(6, 14, 60)))
    bits = disc_mask(256, 256, circles)
    edm = ndimage.distance_transform_edt(bits)
    markers, _ = ndimage.label(edm > 0.8 * ndimage.maximum_filter(edm, 9))
    return (-edm, markers.astype(np.int32), bits.view(np.uint8))


def bilateral_case():
    return (np.random.default_rng(1).uniform(size=(128, 128)), 5, 2.0, 0.1)


def best_split_case():
    rng = np.random.default_rng(2)
    X = np.ascontiguousarray(rng.uniform(size=(400, 3)))
    return (X, rng.normal(size=400), np.arange(400, dtype=np.intp), [0, 1, 2], 1)


CASES = {
    "watershed_flood 256x256": ("watershed_flood", watershed_case),
    "bilateral 128x128 w5": ("bilateral", bilateral_case),
    "best_split 400x3": ("best_split", best_split_case),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = available_backends()
    names = sorted(backends)
    print(f"{'kernel':<26}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for label, (fn_name, make) in CASES.items():
        case = make()
        times = {}
        for name in names:
            fn = getattr(backends[name], fn_name)
            times[name] = min(timeit.repeat(lambda: fn(*case), number=1, repeat=args.repeat)) * 1e3
        speed = f"{times['python'] / times['cython']:.1f}x" if "cython" in times else "n/a"
        print(f"{label:<26}" + "".join(f"{times[n]:>16.2f}" for n in names) + f"{speed:>10}")


if __name__ == "__main__":
    main()
