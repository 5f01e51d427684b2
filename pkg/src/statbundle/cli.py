"""Command-line front end.

Subcommands:

* ``statbundle verify`` -- run the seeded verification suite and print a
  per-check residual table; exits nonzero when any check fails.
* ``statbundle bayes``  -- marginalize/condition a joint density from a
  JSON file, report the divergence chain rule, and (optionally) push a
  velocity through both derivative maps; results land as CSV.
* ``statbundle flow``   -- natural-gradient descent of a parameterized KL
  objective for an exponential family loaded from JSON.
* ``statbundle demo``   -- generate the bundled example files and run the
  three commands above over them.

All randomness flows through the single ``--seed`` value; reruns with the
same configuration produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .bayes import conditional_derivative, condition, kl_chain, marginal_derivative, marginalize
from .core import StatBundleError, uniform_density
from .expfam import natural_gradient_flow
from .verify import format_report, run_verification


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        part = part.strip().lower()
        try:
            a, b = part.split("x")
            out.append((int(a), int(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad size {part!r}; expected entries like 2x2,3x4"
            )
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statbundle",
        description="Dually affine information geometry on finite sample spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the seeded verification suite")
    p.add_argument("--seed", type=_nonneg_int, default=42)
    p.add_argument("--trials", type=_positive_int, default=25,
                   help="instances per check and size entry")
    p.add_argument("--sizes", type=_sizes, default=[(2, 2), (3, 4)],
                   help="comma-separated joint sizes, e.g. 2x2,3x4")
    p.add_argument("--tol", type=_positive_float, default=1.0,
                   help="multiplicative slack on every check threshold")

    p = sub.add_parser("bayes", help="marginalize and condition a joint density")
    p.add_argument("--joint", required=True, help="joint density JSON file")
    p.add_argument("--velocity", default=None,
                   help="optional fiber-vector JSON file at the joint")
    p.add_argument("--out", required=True, help="output directory for CSV files")

    p = sub.add_parser("flow", help="natural-gradient descent of a KL objective")
    p.add_argument("--family", required=True, help="exponential-family JSON file")
    p.add_argument("--target", required=True, help="target margin density JSON file")
    p.add_argument("--mode", choices=("left", "right"), default="left")
    p.add_argument("--theta0", type=_floats, default=[0.0],
                   help="comma-separated starting parameter")
    p.add_argument("--step", type=_positive_float, default=0.5)
    p.add_argument("--iters", type=_positive_int, default=200)
    p.add_argument("--tol", type=_positive_float, default=1e-8,
                   help="stop when the gradient norm drops below this")
    p.add_argument("--out", required=True, help="output directory for CSV files")

    p = sub.add_parser("demo", help="generate example files and run everything")
    p.add_argument("--out", default="statbundle-demo")
    p.add_argument("--seed", type=_nonneg_int, default=7)
    return parser


def run_verify(seed: int, trials: int, sizes, slack: float,
               report_path=None) -> int:
    report = run_verification(seed=seed, trials=trials, sizes=sizes, slack=slack)
    print(format_report(report))
    if report_path is not None:
        fileio.write_report_csv(report_path, report)
    return 0 if report.overall else 1


def run_bayes(joint_path, velocity_path, out_dir) -> int:
    out = Path(out_dir)
    q12 = fileio.load_joint(joint_path)
    q1 = marginalize(q12)
    n1 = q12.space.left.size
    conditionals = [condition(q12, x) for x in range(n1)]
    p1 = uniform_density(q12.space.left)
    p2 = uniform_density(q12.space.right)
    chain = kl_chain(p1, p2, q12)

    fileio.write_marginal_csv(out / "marginal.csv", q1)
    fileio.write_conditionals_csv(out / "conditionals.csv", conditionals)
    fileio.write_kl_chain_csv(out / "kl_chain.csv", chain)
    written = ["marginal.csv", "conditionals.csv", "kl_chain.csv"]

    if velocity_path is not None:
        v = fileio.load_velocity(velocity_path, q12)
        fileio.write_vector_csv(
            out / "marginal_derivative.csv",
            "value",
            marginal_derivative(q12, v).values,
        )
        table = np.stack(
            [conditional_derivative(q12, x, v).values for x in range(n1)]
        )
        fileio.write_table_csv(out / "conditional_derivatives.csv", "value", table)
        written += ["marginal_derivative.csv", "conditional_derivatives.csv"]

    print(f"bayes: wrote {', '.join(written)} to {out}")
    print(
        "bayes: divergence chain total="
        f"{chain.total:.12g} marginal={chain.marginal_term:.12g} "
        f"conditional={chain.conditional_term:.12g} residual={chain.residual:.3e}"
    )
    return 0


def run_flow(family_path, target_path, mode, theta0, step, iters, tol, out_dir) -> int:
    out = Path(out_dir)
    family = fileio.load_family(family_path)
    target = fileio.load_density(target_path)
    trace = natural_gradient_flow(
        family, theta0, target, mode=mode, step=step, iters=iters, tol=tol
    )
    fileio.write_trace_csv(out / "trace.csv", trace)
    fileio.write_flow_summary_csv(out / "flow_summary.csv", trace)
    final = trace.final
    theta_text = ",".join(format(t, ".12g") for t in final.theta)
    print(
        f"flow: converged={trace.converged} iterations={final.iteration} "
        f"theta=[{theta_text}] objective={final.objective:.12g} "
        f"grad_norm={final.grad_norm:.3e}"
    )
    return 0 if trace.converged else 1


# ---------------------------------------------------------------------------
# demo fixtures: the worked 2-point and 2x2 examples used across the docs
# ---------------------------------------------------------------------------

_HALF_SPACE = {"weights": [0.5, 0.5]}

DEMO_FILES = {
    "two_point_p.json": {"space": _HALF_SPACE, "values": [1.0, 1.0]},
    "two_point_q.json": {"space": _HALF_SPACE, "values": [1.2, 0.8]},
    "two_point_r.json": {"space": _HALF_SPACE, "values": [0.6, 1.4]},
    "coupled_joint.json": {
        "left": _HALF_SPACE,
        "right": _HALF_SPACE,
        "values": [[1.6, 0.4], [0.4, 1.6]],
    },
    "coupled_joint_velocity.json": {"values": [[0.4, -1.6], [-1.6, 0.4]]},
    "diag_family.json": {
        "left": _HALF_SPACE,
        "right": _HALF_SPACE,
        "base1": [1.0, 1.0],
        "base2": [1.0, 1.0],
        "stats": [[[1.0, -1.0], [-1.0, 1.0]]],
    },
    "margin_family.json": {
        "left": _HALF_SPACE,
        "right": _HALF_SPACE,
        "base1": [1.0, 1.0],
        "base2": [1.0, 1.0],
        "stats": [[[1.0, 1.0], [-1.0, -1.0]]],
    },
    "flow_target.json": {"space": _HALF_SPACE, "values": [1.0, 1.0]},
}


def run_demo(out_dir, seed: int) -> int:
    out = Path(out_dir)
    fixtures = out / "fixtures"
    for name, obj in DEMO_FILES.items():
        fileio.write_json(fixtures / name, obj)
    print(f"demo: wrote {len(DEMO_FILES)} fixture files to {fixtures}")

    print("demo: [1/3] verification suite")
    verify_rc = run_verify(
        seed=seed,
        trials=10,
        sizes=[(2, 2), (3, 4)],
        slack=1.0,
        report_path=out / "verify_report.csv",
    )

    print("demo: [2/3] bayes computations on the 2x2 example")
    bayes_rc = run_bayes(
        fixtures / "coupled_joint.json",
        fixtures / "coupled_joint_velocity.json",
        out / "bayes",
    )

    print("demo: [3/3] natural-gradient flow on the margin-moving family")
    flow_rc = run_flow(
        fixtures / "margin_family.json",
        fixtures / "flow_target.json",
        mode="left",
        theta0=[1.0],
        step=0.5,
        iters=200,
        tol=1e-7,
        out_dir=out / "flow",
    )

    overall = verify_rc == 0 and bayes_rc == 0 and flow_rc == 0
    print(f"demo: overall {'PASS' if overall else 'FAIL'}")
    return 0 if overall else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return run_verify(args.seed, args.trials, args.sizes, args.tol)
        if args.command == "bayes":
            return run_bayes(args.joint, args.velocity, args.out)
        if args.command == "flow":
            return run_flow(
                args.family,
                args.target,
                args.mode,
                args.theta0,
                args.step,
                args.iters,
                args.tol,
                args.out,
            )
        if args.command == "demo":
            return run_demo(args.out, args.seed)
    except (StatBundleError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
