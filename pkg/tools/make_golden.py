"""Write the frozen synthetic-returns fixture used by the determinism test.

Uses a sequential SplitMix64 on Python integers, written independently of
the vectorized generator in ``pdportfolio.dataio``, so the fixture checks
that implementation rather than repeating it.

    python3 tools/make_golden.py tests/data/golden_seed42_omega4_n2.csv
"""

import sys

MASK = 2**64 - 1


def splitmix64_stream(seed):
    state = seed & MASK
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        yield z ^ (z >> 31)


def main(path, seed=42, omega=4, n_assets=2, a=-1.0, b=1.0):
    stream = splitmix64_stream(seed)
    rows = []
    for _ in range(omega):
        rows.append([a + (b - a) * ((next(stream) >> 11) * 2.0**-53) for _ in range(n_assets)])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"asset_{i + 1}" for i in range(n_assets)) + "\n")
        for r in rows:
            fh.write(",".join(repr(v) for v in r) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
