"""Command-line entry point: ``nlpredprey <command> --config run.json --out dir``.

Exit codes: 0 success, 2 configuration error, 3 mathematical precondition
not met, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds as bnd
from . import dispersion as disp
from . import kernels as ker
from . import simulate as sim
from . import wave as wv
from .config import ConfigError, RunConfig, load_config
from .fileio import read_json, read_profile, write_columns, write_json, write_profile

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3, 4


class CommandFailed(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class Context:
    def __init__(self, cfg: RunConfig, base: Path, out: Path, quiet: bool):
        self.cfg, self.base, self.out, self.quiet = cfg, base, out, quiet
        self.params = cfg.params.build()
        self.k1 = cfg.J1.build(base)
        self.k2 = cfg.J2.build(base)

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def path(self, ref: str) -> Path:
        p = Path(ref)
        return p if p.is_absolute() else self.base / p


def _speed_value(s) -> float | None:
    return None if s == "critical" else float(s)


def cmd_speed(ctx: Context) -> int:
    rep = disp.minimal_speed(ctx.params, ctx.k2)
    write_json(ctx.out / "speed.json", rep.to_dict())
    if not rep.attained:
        raise CommandFailed(
            f"minimal speed not attained below lambda_hat = {ctx.k2.lambda_hat!r}; "
            f"infimum approached at {rep.s_star!r}",
            EXIT_PRECONDITION,
        )
    ctx.say(f"s_star = {rep.s_star!r}  lambda_star = {rep.lambda_star!r}")
    return EXIT_OK


def cmd_roots(ctx: Context) -> int:
    if ctx.cfg.roots is None:
        raise ConfigError("the roots command needs a 'roots' block with a speed s")
    s = ctx.cfg.roots.s
    speed = disp.minimal_speed(ctx.params, ctx.k2)
    if speed.attained and s < speed.s_star:
        raise CommandFailed(
            f"speed s = {s!r} is below the minimal speed s_star = {speed.s_star!r}", EXIT_PRECONDITION
        )
    pair = disp.a_roots(ctx.params, ctx.k2, s, speed)
    doc = pair.to_dict()
    doc.update(s_star=speed.s_star, lambda0=disp.choose_lambda0(ctx.params, ctx.k1, s, pair.lambda1))
    write_json(ctx.out / "roots.json", doc)
    ctx.say(f"lambda1 = {pair.lambda1!r}  lambda2 = {pair.lambda2!r}")
    return EXIT_OK


def cmd_bounds(ctx: Context) -> int:
    blk = ctx.cfg.bounds
    speed = disp.minimal_speed(ctx.params, ctx.k2)
    s = _speed_value(blk.s)
    if s is not None and speed.attained and s < speed.s_star and not disp.is_critical(s, speed.s_star):
        raise CommandFailed(
            f"speed s = {s!r} is below the minimal speed s_star = {speed.s_star!r}", EXIT_PRECONDITION
        )
    bundle = bnd.construct(ctx.params, ctx.k1, ctx.k2, s, speed=speed, q_rule=blk.q_rule)
    write_json(ctx.out / "bundle.json", bundle.to_document())
    rep = bnd.verify(bundle, ctx.k1, ctx.k2, grid_span=blk.grid_span, grid_n=blk.grid_n)
    doc = rep.to_dict()
    doc["kink_jumps"] = bnd.kink_jumps(bundle)
    write_json(ctx.out / "verification.json", doc)
    if not rep.passed:
        raise CommandFailed("bundle failed verification; see verification.json", EXIT_NUMERICAL)
    ctx.say(f"{bundle.regime.value} bundle at s = {bundle.s!r} verified on {rep.n_points} points")
    return EXIT_OK


def cmd_wave(ctx: Context) -> int:
    blk = ctx.cfg.wave
    if blk.bundle:
        ref = ctx.path(blk.bundle)
        bundle = bnd.BoundsBundle.from_document(read_json(ref))
        bundle_ref = str(blk.bundle)
    else:
        speed = disp.minimal_speed(ctx.params, ctx.k2)
        s = _speed_value(blk.s)
        if s is not None and speed.attained and s < speed.s_star and not disp.is_critical(s, speed.s_star):
            raise CommandFailed(
                f"speed s = {s!r} is below the minimal speed s_star = {speed.s_star!r}", EXIT_PRECONDITION
            )
        bundle = bnd.construct(ctx.params, ctx.k1, ctx.k2, s, speed=speed)
        write_json(ctx.out / "bundle.json", bundle.to_document())
        bundle_ref = "bundle.json"
    try:
        prof = wv.solve(ctx.params, ctx.k1, ctx.k2, bundle, L=blk.L, n=blk.n, tol=blk.tol, max_iter=blk.max_iter)
    except wv.WaveConvergenceError as exc:
        write_profile(exc.profile, ctx.out / "profile.csv", bundle_ref)
        raise CommandFailed(f"{exc}; best iterate written with converged = false", EXIT_NUMERICAL)
    write_profile(prof, ctx.out / "profile.csv", bundle_ref)
    tail = wv.tail_check(prof)
    doc = tail.to_dict()
    doc["in_sandwich"] = wv.in_sandwich(prof, bundle)
    write_json(ctx.out / "tail.json", doc)
    ctx.say(f"converged in {prof.iterations} sweeps, residual {max(prof.residual):.3g}")
    return EXIT_OK


def cmd_simulate(ctx: Context) -> int:
    blk = ctx.cfg.simulate
    p = ctx.params
    profile = None
    if blk.initial == "wave":
        profile = read_profile(ctx.path(blk.profile))
        if profile.params != p:
            raise CommandFailed("profile parameters differ from the configuration", EXIT_PRECONDITION)
        init = sim.wave_state(profile)
    else:
        init = sim.invasion_state(blk.X, blk.h)
    level = blk.level if blk.level is not None else 0.5 * p.a_star
    traj = sim.run(
        p, ctx.k1, ctx.k2, init, blk.T, blk.dt,
        snapshot_every=blk.snapshot_every, levels=(level,), sample_every=blk.sample_every, order=blk.order,
    )
    snap_dir = ctx.out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    files = []
    for i, st in enumerate(traj.snapshots):
        name = f"snapshot_{i:04d}.csv"
        write_columns(snap_dir / name, "x,U,V", st.x, st.U, st.V)
        files.append({"file": f"snapshots/{name}", "t": st.t})
    manifest = {
        "params": {"a": p.a, "b": p.b, "d": p.d},
        "kernels": {"J1": ctx.k1.describe(), "J2": ctx.k2.describe()},
        "grid": {"x0": float(init.x[0]), "h": init.h, "n": int(init.x.size)},
        "initial": blk.initial,
        "dt": traj.dt,
        "dt_max": traj.dt_max,
        "steps": traj.steps,
        "order": blk.order,
        "u_floor": init.u_floor,
        "guard_hits": traj.guard_hits,
        "min_U": traj.min_U,
        "snapshots": files,
    }
    write_json(ctx.out / "manifest.json", manifest)
    trace = traj.fronts[level]
    write_columns(ctx.out / "front.csv", "t,x_front", trace.t, trace.x_front)
    summary = {"level": level, "guard_hits": traj.guard_hits}
    try:
        fitted = sim.fit_front(trace, blk.fit_skip)
        summary.update(fitted.to_dict())
    except ValueError as exc:
        summary.update(speed=None, note=str(exc))
    speed = disp.minimal_speed(p, ctx.k2)
    summary["s_star"] = speed.s_star
    if summary.get("speed") is not None:
        summary["ratio_to_s_star"] = summary["speed"] / speed.s_star
    write_json(ctx.out / "spreading.json", summary)
    if profile is not None:
        margin = blk.margin if blk.margin is not None else 0.1 * float(init.x[-1])
        drift = sim.drift_report(profile, traj, margin)
        write_json(ctx.out / "drift.json", drift.to_dict())
        ctx.say(f"drift after T = {drift.T!r}: {drift.discrepancy:.3g}")
    if summary.get("speed") is not None:
        ctx.say(f"front speed {summary['speed']!r} (s_star = {speed.s_star!r})")
    return EXIT_OK


def cmd_validate_kernel(ctx: Context) -> int:
    tol = ctx.cfg.validate_kernel.tol
    reports = {name: ker.validate(k, tol) for name, k in (("J1", ctx.k1), ("J2", ctx.k2))}
    write_json(ctx.out / "kernel_validation.json", {n: r.to_dict() for n, r in reports.items()})
    bad = [f"{n}: {issue}" for n, r in reports.items() for issue in r.issues]
    if bad:
        raise CommandFailed("kernel hypotheses violated:\n  " + "\n  ".join(bad), EXIT_PRECONDITION)
    ctx.say("both kernels pass validation")
    return EXIT_OK


COMMANDS = {
    "speed": cmd_speed,
    "roots": cmd_roots,
    "bounds": cmd_bounds,
    "wave": cmd_wave,
    "simulate": cmd_simulate,
    "validate-kernel": cmd_validate_kernel,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlpredprey", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output directory (overrides the config's 'out')")
        sp.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, base = load_config(args.config)
        out = Path(args.out or cfg.out or "out")
        out.mkdir(parents=True, exist_ok=True)
        ctx = Context(cfg, base, out, args.quiet)
        write_json(out / "config.resolved.json", cfg.model_dump(mode="json"))
        return COMMANDS[args.command](ctx)
    except (ConfigError, ker.KernelFileError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (disp.PreconditionError, ker.KernelDomainError, wv.BundleMismatchError) as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except bnd.NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
