"""Smoke test for the `bdca` extension module.

Build and install first, for example:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/bdca-*.whl
"""

import json
import math
import tempfile
from pathlib import Path

import bdca


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok: {what}")


def main():
    quartic = bdca.Problem.builtin("quartic")
    check(quartic.dim == 1, "quartic is one-dimensional")
    check(abs(quartic.phi([1.0]) + 0.25) < 1e-15, "phi(1) = -1/4")

    dca = bdca.solve(quartic, [27 / 125], variant="dca")
    qi = bdca.solve(quartic, [27 / 125], variant="bdca-qi")
    check(dca.status == "stationary-point", f"DCA converges ({dca!r})")
    check(abs(dca.x[0] - 1.0) < 1e-7, "DCA ends near x = 1")
    check(qi.iterations < dca.iterations, f"BDCA-QI needs fewer iterations ({qi.iterations} < {dca.iterations})")
    first = dca.trace[0]
    check(abs(first["phi_x"] - (0.25 * (27 / 125) ** 4 - 0.5 * (27 / 125) ** 2)) < 1e-12, "trace starts at phi(x0)")
    check(qi.audit(quartic)["passed"], "boosted trace passes the audit")

    net = bdca.Network.generate(12, 18, seed=3)
    check(net.conservation_residual() == 0.0, "generated network conserves mass")
    ones_sum = sum(net.rates([0.3] * net.m))
    check(abs(ones_sum) < 1e-9 * (1 + max(abs(v) for v in net.rates([0.3] * net.m))), "net production sums to zero")
    again = bdca.Network.from_json(net.to_json())
    check(again.to_json() == net.to_json(), "model JSON round trip")
    with tempfile.TemporaryDirectory() as d:
        path = str(Path(d) / "net.json")
        net.save(path)
        check(bdca.Network.load(path).w == net.w, "save and load")

    problem = net.problem()
    check(problem.rho == 100.0, "network problems default to rho = 100")
    x0 = [0.5] * net.m
    res = bdca.solve(problem, x0, max_iters=200)
    check(res.phi < problem.phi(x0), f"network solve decreases phi ({res.phi:.3e})")
    check(res.audit(problem)["passed"], "network trace passes the audit")

    rep = bdca.classify_rate([0.9**k for k in range(100)])
    check(rep["regime"] == "Linear" and abs(rep["rate"] - 0.9) < 0.02, "0.9^k is linear")
    rep = bdca.classify_rate([k**-2.0 for k in range(1, 300)])
    check(rep["regime"] == "Sublinear", "k^-2 is sublinear")
    check(bdca.verify_rate_inequality([0.5**k for k in range(40)], 1.0, 2.0), "rate inequality holds at beta = 2")
    check(not bdca.verify_rate_inequality([0.5**k for k in range(40)], 1.0, 1.9), "and fails at beta = 1.9")

    spec = {"problems": [{"kind": "builtin", "name": "quartic"}], "trials": 3, "bdca_iters": 5, "seed": 1}
    rows = bdca.compare(json.dumps(spec))
    check(len(rows) == 1 and rows[0]["instances_trials"] == 3, "compare returns one row")
    check(math.isfinite(rows[0]["ratio_iters"]), "iteration ratio is finite")

    try:
        bdca.solve(quartic, [0.2], beta=1.5)
    except ValueError as e:
        check("beta" in str(e), "invalid beta is rejected")
    else:
        raise SystemExit("FAIL: beta = 1.5 accepted")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
