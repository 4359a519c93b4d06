#!/usr/bin/env python3
"""Benchmark the compiled cascade kernel against the pure-numpy fallback.

Builds one synthetic dependency network, then times many cascade simulations
with random threshold vectors on each backend and checks that both produce
bit-identical traces. The workload mirrors what a GA calibration run spends
almost all of its time on.

Usage:
    python benchmarks/bench_kernels.py [--nodes 2000] [--sims 300] [--horizon 18]
"""

import argparse
import time

import numpy as np

from recoverynet import _kernels_py, diffusion, network, synth

try:
    from recoverynet import _kernels as compiled
except ImportError:
    compiled = None


def time_backend(run_cascade, net, thetas, seed_mask, horizon):
    start = time.perf_counter()
    checksum = 0
    last = None
    for theta in thetas:
        states, weeks, fixed = run_cascade(net.in_indptr, net.in_src, theta,
                                           seed_mask, horizon)
        checksum += int(states[-1].sum())
        last = (states, weeks, fixed)
    return time.perf_counter() - start, checksum, last


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--sims", type=int, default=300)
    parser.add_argument("--horizon", type=int, default=18)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    scenario = synth.generate_scenario(
        synth.SynthParams(n_pois=args.nodes, m=3, horizon=args.horizon,
                          rng_seed=args.seed)
    )
    net = network.build_network(scenario.pois, scenario.flows)
    rng = np.random.default_rng(args.seed)
    thetas = [rng.random(net.order) for _ in range(args.sims)]
    seed_mask = diffusion.seed_mask(net, scenario.seeds)

    print(f"network: {net.order} nodes, {net.size} edges; "
          f"{args.sims} simulations x {args.horizon} weeks")

    py_time, py_sum, py_last = time_backend(
        _kernels_py.run_cascade, net, thetas, seed_mask, args.horizon
    )
    print(f"pure python : {py_time:8.3f}s  ({1e3 * py_time / args.sims:7.3f} ms/sim)")

    if compiled is None:
        print("compiled kernel not built; install with the Cython extension to compare")
        return

    cy_time, cy_sum, cy_last = time_backend(
        compiled.run_cascade, net, thetas, seed_mask, args.horizon
    )
    print(f"cython      : {cy_time:8.3f}s  ({1e3 * cy_time / args.sims:7.3f} ms/sim)")
    print(f"speedup     : {py_time / cy_time:8.2f}x")

    assert cy_sum == py_sum, "backends disagree on final recovered counts"
    assert np.array_equal(cy_last[0], py_last[0]), "backends disagree on states"
    assert np.array_equal(cy_last[1], py_last[1]), "backends disagree on weeks"
    assert cy_last[2] == py_last[2], "backends disagree on fixed point"
    print("outputs identical across backends")


if __name__ == "__main__":
    main()
