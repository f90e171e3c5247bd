"""Policy runs and their machine-readable reports."""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import blockfill, oracle, scalar_greedy, waterfill
from .errors import ConfigError
from .linalg import random_orthonormal
from .model import PolicyTrace, evaluate_policy, initial_state
from .scenario import with_policy

LN2 = math.log(2.0)


@dataclass(eq=False)
class RunReport:
    scenario: dict
    policy: str
    units: str
    stages: list
    summary: dict
    extras: dict = field(default_factory=dict)
    theorems: list = None
    provenance: dict = field(default_factory=dict)
    table: dict = None

    def to_dict(self, timestamp=True):
        prov = dict(self.provenance)
        if not timestamp:
            prov.pop("timestamp", None)
        out = {
            "scenario": self.scenario,
            "policy": self.policy,
            "units": self.units,
            "stages": self.stages,
            "summary": self.summary,
            "extras": self.extras,
            "provenance": prov,
        }
        if self.theorems is not None:
            out["theorems"] = self.theorems
        if self.table is not None:
            out["table"] = self.table
        return out

    def to_json(self, timestamp=True):
        return json.dumps(self.to_dict(timestamp), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.table is not None:
            w.writerow(self.table["columns"])
            for row in self.table["rows"]:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])
            return buf.getvalue()
        w.writerow(["policy", "k", "label", "compressor", "stage_gain", "det_P", "entropy"])
        for row in self.stages:
            w.writerow([self.policy, row["k"], row["label"], json.dumps(row["compressor"]),
                        repr(row["stage_gain"]), repr(row["det_P"]), repr(row["entropy"])])
        return buf.getvalue()


def _units(x, bits):
    return x / LN2 if bits else x


def _clean(x):
    """Recursively convert numpy values to JSON-friendly Python values."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def stage_table(trace, labels=None, bits=False):
    rows = []
    for k, (A, g) in enumerate(zip(trace.choices, trace.stage_gains), start=1):
        post = trace.posteriors[k]
        label = labels[k - 1] if labels else f"A{k}"
        rows.append({
            "k": k,
            "label": label,
            "compressor": np.asarray(A, dtype=float).tolist(),
            "stage_gain": _units(float(g), bits),
            "det_P": float(np.linalg.det(post.P)),
            "entropy": float(post.entropy),
        })
    return rows


def _empty_trace(model):
    return PolicyTrace([], [], 0.0, [initial_state(model)])


def _scalar_setup(model):
    state = scalar_greedy.init_state(model)
    return state, state.sigma2


def _relaxed_value(state, m):
    return waterfill.solve(state.lambdas, m, state.sigma2).H_R


def _run_policy(config):
    """Return ``(trace, labels, named_gains, extras)`` for the configured policy."""
    model, m, policy = config.model, config.m, config.policy
    named, extras = {}, {}

    if m == 0:
        return _empty_trace(model), [], named, extras

    if policy == "greedy_scalar":
        state, _ = _scalar_setup(model)
        trace = scalar_greedy.greedy_run(state, m)
        named["H_G"] = trace.net_gain
        named["H_R"] = _relaxed_value(state, m)
        extras["eigenvalues"] = state.lambdas
        return trace, [f"v{i}" for i in trace.picks], named, extras

    if policy == "greedy_finite":
        trace = oracle.greedy_over_finite_set(model, config.actions, m)
        named["H_G"] = trace.net_gain
        return trace, [config.actions.labels[i] for i in trace.picks], named, extras

    if policy == "alternating":
        cycle = config.schedule or (0, 1)
        if max(cycle) >= len(config.actions):
            raise ConfigError("alternating policy needs at least two actions or a schedule")
        seq = oracle.alternating_schedule(m, cycle)
        trace = evaluate_policy(model, [config.actions.actions[i] for i in seq])
        return trace, [config.actions.labels[i] for i in seq], named, extras

    if policy == "oracle_exhaustive":
        res = oracle.exhaustive_optimal(model, config.actions, m)
        greedy = oracle.greedy_over_finite_set(model, config.actions, m)
        named["H_O"] = res.best_trace.net_gain
        named["H_G"] = greedy.net_gain
        extras["best_sequence"] = list(res.best_sequence)
        return res.best_trace, [config.actions.labels[i] for i in res.best_sequence], named, extras

    state, s2 = _scalar_setup(model)

    if policy == "waterfill":
        sol = waterfill.solve(state.lambdas, m, s2)
        U1 = None
        if config.seed is not None:
            U1 = random_orthonormal(m, np.random.default_rng(config.seed))
        gt = waterfill.construct_gtilde(sol, state.lambdas, U1)
        comps = waterfill.recover_compressors(gt, state.V, m, state.sigma_n2, state.sigma_w2)
        trace = evaluate_policy(model, comps)
        named["H_R"] = sol.H_R
        named["H_G"] = scalar_greedy.greedy_run(state, m).net_gain
        extras.update(Lambdas=sol.Lambdas, r=sol.r, mu=sol.mu, p=sol.p,
                      mean_compressor_norm=float(np.mean([np.linalg.norm(a) for a in comps])))
        return trace, [f"a{k}" for k in range(1, m + 1)], named, extras

    if policy == "blockfill":
        lam = state.lambdas[state.lambdas > 0]
        Lam = m * lam / s2
        greedy = blockfill.greedy_blockfill(Lam, m)
        best = blockfill.optimal_blockfill(Lam, m)
        seq = [i for i, c in enumerate(best.counts) for _ in range(c)]
        trace = evaluate_policy(model, [state.V[:, i] for i in seq])
        named["H_G"] = greedy.gain
        named["H_O"] = best.gain
        named["H_R"] = _relaxed_value(state, m)
        extras.update(
            Lambdas=Lam,
            greedy_counts=list(greedy.counts), optimal_counts=list(best.counts),
            greedy_heights=greedy.heights, optimal_heights=best.heights,
            greedy_certified=blockfill.lemma6_certificate(greedy, Lam, m),
            optimal_certified=blockfill.lemma6_certificate(best, Lam, m),
        )
        return trace, [f"v{i}" for i in seq], named, extras

    if policy == "oracle_grid":
        res = oracle.grid_search_scalar_m2(model, config.grid_resolution)
        named["H_O"] = res.best_trace.net_gain
        named["H_G"] = scalar_greedy.greedy_run(state, m).net_gain
        named["H_R"] = _relaxed_value(state, m)
        a1 = res.best_trace.choices[0]
        extras.update(grid_index=res.best_sequence[0], resolution=config.grid_resolution,
                      a1_product=float(a1[0] * a1[1]))
        return res.best_trace, ["a1", "a2"], named, extras

    raise ConfigError(f"unknown policy {policy!r}")


def _provenance(config):
    return {
        "artifact": "adaptcomp",
        "version": __version__,
        "config_hash": config.config_hash,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _summary(net, named, bits):
    out = {
        "net_gain": _units(net, bits),
        "net_gain_nats": net,
        "net_gain_bits": net / LN2,
    }
    for key in ("H_G", "H_O", "H_R"):
        if key in named:
            out[key] = _units(float(named[key]), bits)
    return out


def run(config, bits=False):
    """Execute the configured policy and build a :class:`RunReport`."""
    trace, labels, named, extras = _run_policy(config)
    stages = stage_table(trace, labels, bits)
    net = float(trace.net_gain)
    return RunReport(
        scenario=_clean(config.raw),
        policy=config.policy,
        units="bits" if bits else "nats",
        stages=stages,
        summary=_clean(_summary(net, named, bits)),
        extras=_clean(extras),
        provenance=_provenance(config),
    )


def compare(config, policies, bits=False, jobs=1):
    """Run several policies on one scenario; results keep the requested order."""
    configs = [with_policy(config, p) for p in policies]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda c: run(c, bits), configs))
    else:
        reports = [run(c, bits) for c in configs]
    return reports


def check_theorems(config, bits=False):
    """Evaluate both sufficient conditions for greedy optimality on a scalar scenario."""
    model, m = config.model, config.m
    state, s2 = _scalar_setup(model)
    lam = state.lambdas[state.lambdas > 0]
    Lam = m * lam / s2
    subset = config.subset if config.subset is not None else tuple(range(len(lam)))

    t4 = blockfill.check_theorem4(subset, Lam, m)
    t5 = blockfill.check_theorem5(lam, s2, m)
    greedy = scalar_greedy.greedy_run(state, m)
    H_R = waterfill.solve(state.lambdas, m, s2).H_R

    sub_actions = oracle.FiniteActionSet([state.V[:, i] for i in subset],
                                         [f"v{i}" for i in subset])
    named = {"H_G": greedy.net_gain, "H_R": H_R}
    theorems = [
        {"theorem": t4.theorem, "holds": t4.holds, "details": _clean(t4.details)},
        {"theorem": t5.theorem, "holds": t5.holds, "details": _clean(t5.details)},
    ]
    n = len(subset)
    if n and n**m <= oracle.SEARCH_BUDGET:
        sub_greedy = oracle.greedy_over_finite_set(model, sub_actions, m)
        sub_best = oracle.exhaustive_optimal(model, sub_actions, m)
        theorems[0]["details"]["greedy_over_subset"] = _units(sub_greedy.net_gain, bits)
        theorems[0]["details"]["optimal_over_subset"] = _units(sub_best.best_trace.net_gain, bits)

    return RunReport(
        scenario=_clean(config.raw),
        policy="check-theorems",
        units="bits" if bits else "nats",
        stages=stage_table(greedy, [f"v{i}" for i in greedy.picks], bits),
        summary=_clean(_summary(greedy.net_gain, named, bits)),
        theorems=theorems,
        provenance=_provenance(config),
    )
