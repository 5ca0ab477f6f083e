"""``geomech <subcommand> <file>``: derivations, checks and simulations from a system file."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

from .. import dynamics, frames, hamiltonian, lagrangian, newtonian, numerics, symmetry
from ..linalg import SingularMatrixError
from ..symcore import (EvaluationError, Expr, JetOrderError, ParseError, Verdict, ZERO,
                       combine, set_default_seed, total_derivative, zero_test)
from .sysfile import SystemFile, SystemFileError, load_system

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(ValueError):
    """The system file lacks what the subcommand needs."""


@dataclass
class Report:
    command: str
    system: dict
    results: list = field(default_factory=list)
    passed: bool = True
    _exact: set = field(default_factory=set, repr=False)   # stats rows printed at full precision

    def expr(self, name: str, e: Expr) -> None:
        self.results.append({"name": name, "expression": show(e)})

    def verdict(self, name: str, v: Verdict, fail_on: tuple = (Verdict.NONZERO,)) -> None:
        self.results.append({"name": name, "verdict": str(v)})
        if v in fail_on:
            self.passed = False

    def label(self, name: str, value: str) -> None:
        """A classification that does not by itself decide pass or fail."""
        self.results.append({"name": name, "verdict": value})

    def stats(self, name: str, stats: dict, ok: bool = True, exact: bool = False) -> None:
        self.results.append({"name": name, "stats": stats})
        if exact:
            self._exact.add(len(self.results) - 1)
        if not ok:
            self.passed = False

    def as_dict(self) -> dict:
        return {"command": self.command, "system": self.system, "results": self.results,
                "status": "pass" if self.passed else "fail"}

    def render(self) -> str:
        lines = [f"# {self.command} {self.system['path']} (sha256 {self.system['digest']})"]
        for k, r in enumerate(self.results):
            if "expression" in r:
                lines.append(f"{r['name']} = {r['expression']}")
            elif "verdict" in r:
                lines.append(f"{r['name']}: {r['verdict']}")
            elif "stats" in r:
                fmt = (lambda v: f"{v:.17g}" if isinstance(v, float) else str(v)) \
                    if k in self._exact else _num
                body = ", ".join(f"{key}={fmt(v)}" for key, v in r["stats"].items())
                lines.append(f"{r['name']}: {body}")
        lines.append("status: " + ("pass" if self.passed else "fail"))
        return "\n".join(lines)


def _num(v) -> str:
    return f"{v:.6e}" if isinstance(v, float) else str(v)


def show(e: Expr) -> str:
    """Canonical text; rational expressions that are exactly zero print as 0."""
    if e:
        zt = zero_test(e)
        if zt.exact and zt.verdict is Verdict.ZERO:
            return "0"
    return str(e)


# ---------------------------------------------------------------- system objects

def _frames(sf: SystemFile) -> dict:
    return {n: frames.ReferenceFrame(sf.cs, sf.exprs("frame", "Gamma", n, sf.cs.dim))
            for n in sf.named("frame")}


def _changes(sf: SystemFile) -> dict:
    return {n: frames.CoordinateChange(sf.cs, sf.exprs("change", "forward", n, sf.cs.dim),
                                       sf.exprs("change", "inverse", n, sf.cs.dim))
            for n in sf.named("change")}


def _lagrangian(sf: SystemFile) -> lagrangian.Lagrangian:
    if sf.target != "lagrangian":
        raise UsageError("this subcommand needs a [lagrangian] section")
    return lagrangian.Lagrangian(sf.cs, sf.expr("lagrangian", "L"))


def _operator(sf: SystemFile) -> lagrangian.LagrangeOperator:
    if sf.target == "lagrangian":
        return lagrangian.euler_lagrange(_lagrangian(sf))
    if sf.target == "equation" and "E" in sf.section("equation"):
        return lagrangian.LagrangeOperator(sf.cs, sf.exprs("equation", "E", length=sf.cs.dim))
    raise UsageError("this subcommand needs a [lagrangian] or an [equation] with an operator E")


def _equation(sf: SystemFile) -> dynamics.SecondOrderEquation:
    if sf.target == "lagrangian":
        return lagrangian.lagrangian_connection(_lagrangian(sf))
    if sf.target == "equation" and "xi" in sf.section("equation"):
        return dynamics.SecondOrderEquation(sf.cs, sf.exprs("equation", "xi", length=sf.cs.dim))
    raise UsageError("this subcommand needs a [lagrangian] or an [equation] with xi")


def _hamiltonian(sf: SystemFile) -> hamiltonian.Hamiltonian:
    if sf.target == "hamiltonian":
        return hamiltonian.Hamiltonian(sf.cs, sf.expr("hamiltonian", "H"))
    if sf.target == "lagrangian":
        return hamiltonian.legendre_invert(_lagrangian(sf))
    raise UsageError("this subcommand needs a [hamiltonian] or a quadratic [lagrangian]")


def _integrals(sf: SystemFile) -> dict:
    """Named integrals from the file plus the built-in ``energy`` when defined."""
    out = {}
    if sf.target == "lagrangian":
        out["energy"] = lagrangian.energy_function(_lagrangian(sf))
    elif sf.target == "hamiltonian":
        out["energy"] = _hamiltonian(sf).H
    for key in sf.section("integrals"):
        out[key] = sf.expr("integrals", key)
    return out


def _to_velocities(sf: SystemFile, F: Expr) -> Expr:
    """Rewrite momenta through the Legendre map ``p_i = d^t_i L``."""
    cs = sf.cs
    if not cs.depends_on_momenta(F):
        return F
    if sf.target != "lagrangian":
        raise UsageError(f"cannot express {F} in velocities without a Lagrangian")
    pi = lagrangian.momenta(_lagrangian(sf))
    return F.subs({p: pi[i] for i, p in enumerate(cs.momenta)})


def _to_momenta(H: hamiltonian.Hamiltonian, F: Expr) -> Expr:
    cs = H.cs
    if cs.jet_order(F) == 0:
        return F
    dq, _ = hamiltonian.hamilton_equations(H)
    return F.subs({cs.jet(i, 1): dq[i] for i in range(cs.dim)})


def _sym_fields(sf: SystemFile) -> dict:
    out = {}
    for n in sf.named("symmetry"):
        ut = int(sf.value("symmetry", "ut", 0, n))
        u = sf.exprs("symmetry", "u", n, sf.cs.dim)
        sigma = sf.expr("symmetry", "sigma", n) if "sigma" in sf.section("symmetry", n) else None
        out[n] = (symmetry.VectorFieldOnJets(sf.cs, ut, u), sigma)
    if not out:
        raise UsageError("no [symmetry.NAME] sections")
    return out


def _idx(*ks) -> str:
    return "".join(str(k + 1) for k in ks)


# ---------------------------------------------------------------- subcommands

def cmd_derive_el(sf, args, rep: Report) -> None:
    op = _operator(sf)
    for i, e in enumerate(op.E):
        rep.expr(f"E_{_idx(i)}", e)


def cmd_helmholtz(sf, args, rep: Report) -> None:
    hr = lagrangian.helmholtz_check(_operator(sf), args.seed)
    for cond in "abc":
        for (i, j), t in sorted(getattr(hr, cond).items()):
            rep.verdict(f"condition {cond} ({_idx(i, j)})", t.verdict)
            if t.verdict is not Verdict.ZERO:
                rep.expr(f"residual {cond} ({_idx(i, j)})", hr.residuals[(cond, i, j)])
    for cond, ij in hr.flagged:
        rep.label(f"flagged {cond} ({_idx(*ij)})", "Unknown (all samples below tolerance)")
    rep.verdict("helmholtz", hr.verdict)


def cmd_legendre(sf, args, rep: Report) -> None:
    data = lagrangian.legendre(_lagrangian(sf), args.seed)
    for i, p in enumerate(data.pi):
        rep.expr(f"pi_{_idx(i)}", p)
    rep.expr("det", data.det)
    rep.label("regularity", str(data.regularity))
    rep.label("certified", "yes" if data.certified else "no (sampled)")
    for loc in data.locus:
        rep.label("degenerate on", loc)
    if data.regularity is lagrangian.Regularity.DEGENERATE:
        rep.passed = False


def cmd_hamiltonize(sf, args, rep: Report) -> None:
    L = _lagrangian(sf)
    H = hamiltonian.legendre_invert(L)
    rep.expr("H", H.H)
    rep.verdict("legendre consistency", hamiltonian.legendre_consistency(H, L))


def cmd_hamilton_eqs(sf, args, rep: Report) -> None:
    H = _hamiltonian(sf)
    dq, dp = hamiltonian.hamilton_equations(H)
    cs = H.cs
    for i in range(cs.dim):
        rep.expr(cs.jet(i, 1), dq[i])
    for i in range(cs.dim):
        rep.expr(cs.momenta[i] + "_t", dp[i])
    if sf.target == "hamiltonian":
        rep.verdict("L_H reproduces the Hamilton equations", hamiltonian.lagrangian_LH(H).verdict)


def cmd_connection(sf, args, rep: Report) -> None:
    eq = _equation(sf)
    g = dynamics.connection_from_equation(eq)
    n = sf.cs.dim
    for i in range(n):
        rep.expr(f"xi_{_idx(i)}", eq.xi[i])
    for i in range(n):
        rep.expr(f"gamma_{_idx(i)}0", g.gamma0[i])
        for j in range(n):
            rep.expr(f"gamma_{_idx(i, j)}", g.gammaj[i][j])
    rep.verdict("torsion", dynamics.is_symmetric(g))


def cmd_curvature(sf, args, rep: Report) -> None:
    g = dynamics.connection_from_equation(_equation(sf))
    cr = dynamics.curvature_report(g)
    n = sf.cs.dim
    for i in range(n):
        for lam in range(n + 1):
            for mu in range(lam + 1, n + 1):
                e = cr.R[i][lam][mu]
                if e:
                    rep.expr(f"R_{_idx(i)}({lam},{mu})", e)
    rep.expr("Rtilde", cr.Rtilde)
    rep.verdict("curvature", cr.verdict())


def cmd_geodesic(sf, args, rep: Report) -> None:
    eq = _equation(sf)
    try:
        K = dynamics.geodesic_connection(eq)
    except dynamics.NotQuadratic as exc:
        rep.label("geodesic", "NotQuadratic")
        rep.label("reason", str(exc))
        rep.passed = False
        return
    n = sf.cs.dim
    for i in range(n):
        for lam in range(n + 1):
            for nu in range(lam, n + 1):
                e = K.K(lam, i, nu)
                if e:
                    rep.expr(f"K_{lam}{_idx(i)}{nu}", e)
    rep.verdict("geodesic equation reproduces xi", dynamics.geodesic_check(eq, K))
    for name, fr in _frames(sf).items():
        rep.verdict(f"frame {name} geodesic", frames.is_geodesic_frame(eq, fr),
                    fail_on=())


def cmd_frame_transform(sf, args, rep: Report) -> None:
    changes = _changes(sf)
    if not changes:
        raise UsageError("no [change.NAME] sections")
    eq = _equation(sf) if sf.target != "hamiltonian" else None
    for name, ch in changes.items():
        rep.verdict(f"{name}: inverse", ch.check_inverse())
        new = frames.transform_equation(eq, ch) if eq is not None else frames.free_motion_equation(ch)
        for i, x in enumerate(new.xi):
            rep.expr(f"{name}: xi_{_idx(i)}", x)


def cmd_relative_accel(sf, args, rep: Report) -> None:
    eq = _equation(sf)
    frs = _frames(sf)
    if not frs:
        raise UsageError("no [frame.NAME] sections")
    for name, fr in frs.items():
        for i, a in enumerate(frames.relative_acceleration(eq, fr)):
            rep.expr(f"{name}: a_{_idx(i)}", a)


def cmd_coriolis(sf, args, rep: Report) -> None:
    eq = _equation(sf)
    frs = _frames(sf)
    if not frs:
        raise UsageError("no [frame.NAME] sections")
    for name, fr in frs.items():
        dec = frames.coriolis_decomposition(eq, fr)
        rel = frames.relative_acceleration(eq, fr)
        for i in range(sf.cs.dim):
            rep.expr(f"{name}: frame_{_idx(i)}", dec.frame_term[i])
            rep.expr(f"{name}: coriolis_{_idx(i)}", dec.coriolis_term[i])
        v = combine(zero_test(a - b, args.seed).verdict for a, b in zip(dec.total, rel))
        rep.verdict(f"{name}: decomposition equals relative acceleration", v,
                    fail_on=(Verdict.NONZERO, Verdict.UNKNOWN))


def cmd_newton_check(sf, args, rep: Report) -> None:
    cs = sf.cs
    n = cs.dim
    if "m" not in sf.section("mass"):
        raise UsageError("no [mass] section")
    flat = sf.exprs("mass", "m", length=n * n)
    mass = newtonian.MassTensor(cs, tuple(flat[i * n:(i + 1) * n] for i in range(n)))
    eq = _equation(sf)
    nr = newtonian.check_newtonian(mass, eq)
    rep.verdict("mass symmetry", nr.symmetry)
    rep.verdict("compatibility", nr.compatibility)
    for (i, j), r in sorted(nr.compatibility_residuals.items()):
        if zero_test(r, args.seed).verdict is not Verdict.ZERO:
            rep.expr(f"compatibility residual ({_idx(i, j)})", r)
    if nr.verdict is not Verdict.ZERO:
        rep.passed = False
    if "f" in sf.section("force"):
        force = newtonian.ExternalForce(cs, sf.exprs("force", "f", length=n))
        fe = newtonian.apply_force(newtonian.NewtonianSystem(mass, eq), force)
        rep.verdict("force admissible", fe.admissible)
        for i, x in enumerate(fe.equation.xi):
            rep.expr(f"xi_f_{_idx(i)}", x)


def cmd_symmetry_check(sf, args, rep: Report) -> None:
    fields = _sym_fields(sf)
    if sf.target == "hamiltonian":
        H = _hamiltonian(sf)
        for name, (u, _) in fields.items():
            hs = hamiltonian.hamiltonian_symmetry_current(u, H)
            rep.label(name, str(hs.kind))
            if hs.kind is symmetry.SymmetryKind.NOT_SHOWN:
                rep.expr(f"{name}: residual", hs.residual)
                rep.passed = False
        return
    L = _lagrangian(sf)
    for name, (u, sigma) in fields.items():
        sc = symmetry.classify_symmetry(u, L, sigma, args.seed)
        rep.label(name, str(sc.kind))
        if not sc.is_symmetry:
            rep.expr(f"{name}: residual", sc.residual)
            rep.passed = False


def cmd_current(sf, args, rep: Report) -> None:
    fields = _sym_fields(sf)
    if sf.target == "hamiltonian":
        H = _hamiltonian(sf)
        for name, (u, _) in fields.items():
            hs = hamiltonian.hamiltonian_symmetry_current(u, H)
            rep.expr(f"T_{name}", hs.current)
            rep.verdict(f"{name}: conserved", zero_test(hamiltonian.evolution(hs.current, H), args.seed).verdict)
        return
    L = _lagrangian(sf)
    for name, (u, sigma) in fields.items():
        T = symmetry.symmetry_current(u, L, sigma)
        rep.expr(f"T_{name}", T)
        res = symmetry.conservation_residual(T, u, L)
        if sigma is not None:
            res = res - symmetry.lie_derivative_L(u, L) + total_derivative(sigma, sf.cs)
        rep.verdict(f"{name}: d_t T + (u - q_t u^t) E", zero_test(res, args.seed).verdict)


def cmd_noether_identities(sf, args, rep: Report) -> None:
    op = _operator(sf)
    n = sf.cs.dim
    gauges = sf.named("gauge")
    if not gauges:
        raise UsageError("no [gauge.NAME] sections")
    coeffs = []
    for name in gauges:
        sec = sf.section("gauge", name)
        coeffs.append(tuple(sf.exprs("gauge", k, name, n) if k in sec else (ZERO,) * n
                            for k in ("chi", "chi_t", "chi_tt")))
    g = symmetry.GaugeSymmetry(sf.cs, tuple(coeffs))
    res = symmetry.noether_identity_residuals(g, op)
    for name, r in zip(gauges, res):
        v = zero_test(r, args.seed).verdict
        rep.verdict(f"{name}: Noether identity", v)
        if v is not Verdict.ZERO:
            rep.expr(f"{name}: residual", r)


def cmd_conserve(sf, args, rep: Report) -> None:
    integrals = _selected(sf, args)
    if sf.target == "hamiltonian":
        H = _hamiltonian(sf)
        for name, F in integrals.items():
            d = hamiltonian.evolution(_to_momenta(H, F), H)
            rep.verdict(f"{name}: d_t F + {{H, F}}", zero_test(d, args.seed).verdict,
                        fail_on=(Verdict.NONZERO, Verdict.UNKNOWN))
        return
    eq = _equation(sf)
    for name, F in integrals.items():
        d = symmetry.on_shell_derivative(_to_velocities(sf, F), eq)
        rep.verdict(f"{name}: d_t F on shell", zero_test(d, args.seed).verdict,
                    fail_on=(Verdict.NONZERO, Verdict.UNKNOWN))


def _selected(sf: SystemFile, args) -> dict:
    integrals = _integrals(sf)
    if not args.conserve or args.conserve == "all":
        return integrals
    out = {}
    for name in args.conserve.split(","):
        name = name.strip()
        if name not in integrals:
            raise UsageError(f"unknown integral {name!r}; known: {', '.join(integrals) or 'none'}")
        out[name] = integrals[name]
    return out


def _floats(sf: SystemFile, key: str, n: int) -> list:
    v = sf.value("simulate", key)
    if v is None:
        raise UsageError(f"[simulate] needs {key}")
    v = v if isinstance(v, list) else [v]
    if len(v) != n or not all(isinstance(x, (int, float)) for x in v):
        raise UsageError(f"[simulate] {key} needs {n} numbers")
    return [float(x) for x in v]


def cmd_simulate(sf, args, rep: Report) -> None:
    cs = sf.cs
    n = cs.dim
    h = args.step if args.step is not None else float(sf.value("simulate", "step", 1e-3))
    t0 = float(sf.value("simulate", "t0", 0.0))
    t1 = args.tmax if args.tmax is not None else sf.value("simulate", "tmax")
    if t1 is None:
        raise UsageError("[simulate] needs tmax (or pass --tmax)")
    cfg = numerics.IntegratorConfig(h=h, t0=t0, t1=float(t1), stride=int(sf.value("simulate", "stride", 1)))
    q0 = _floats(sf, "q0", n)
    if sf.target == "hamiltonian":
        H = _hamiltonian(sf)
        traj = numerics.integrate_hamilton(H, q0, _floats(sf, "p0", n), cfg)
        convert = lambda F: _to_momenta(H, F)  # noqa: E731
    else:
        eq = _equation(sf)
        traj = numerics.integrate_dynamic(eq, q0, _floats(sf, "v0", n), cfg)
        convert = lambda F: _to_velocities(sf, F)  # noqa: E731
    nsteps, h_used = cfg.steps()
    rep.stats("integrator", {"method": "rk4", "steps": nsteps, "h": h_used, "samples": len(traj.times)},
              exact=True)
    rep.stats("final state", {c: float(v) for c, v in zip(traj.columns, traj.states[-1])}, exact=True)
    if args.csv:
        traj.to_csv(args.csv)
        rep.stats("csv", {"path": args.csv, "rows": len(traj.times)})
    if args.conserve:
        for name, F in _selected(sf, args).items():
            d = numerics.conservation_drift(convert(F), traj)
            rel = d.max_rel if abs(d.initial) > numerics.integrate.REL_FLOOR else d.max_abs
            stats = d.as_dict()
            stats["tolerance"] = args.tol
            rep.stats(f"drift {name}", stats, ok=rel < args.tol)


COMMANDS: dict = {
    "derive-el": (cmd_derive_el, "Euler-Lagrange operator of the Lagrangian"),
    "helmholtz": (cmd_helmholtz, "Helmholtz conditions for a second-order operator"),
    "legendre": (cmd_legendre, "momenta, Hessian determinant and regularity"),
    "hamiltonize": (cmd_hamiltonize, "Hamiltonian of a quadratic Lagrangian"),
    "hamilton-eqs": (cmd_hamilton_eqs, "Hamilton equations"),
    "connection": (cmd_connection, "dynamic connection of the equation and its torsion"),
    "curvature": (cmd_curvature, "curvature of the dynamic connection"),
    "geodesic": (cmd_geodesic, "tangent connection of a quadratic equation"),
    "frame-transform": (cmd_frame_transform, "equation written in new coordinates"),
    "relative-accel": (cmd_relative_accel, "relative acceleration with respect to each frame"),
    "coriolis": (cmd_coriolis, "frame and Coriolis parts of the relative acceleration"),
    "newton-check": (cmd_newton_check, "Newtonian compatibility of the mass tensor"),
    "symmetry-check": (cmd_symmetry_check, "classify [symmetry.NAME] fields"),
    "current": (cmd_current, "symmetry currents and their conservation"),
    "noether-identities": (cmd_noether_identities, "gauge Noether identities"),
    "simulate": (cmd_simulate, "RK4 trajectory with optional drift table"),
    "conserve": (cmd_conserve, "symbolic conservation of the named integrals"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geomech", description=__doc__)
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__import__('geomech').__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="system definition file")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--json", action="store_true", help="print JSON instead of text")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled zero tests (default 0)")
        if name in ("simulate", "conserve"):
            p.add_argument("--conserve", default=None,
                           help="comma-separated integral names, or 'all'")
        if name == "simulate":
            p.add_argument("--csv", help="write the trajectory as CSV")
            p.add_argument("--step", type=float, help="step size (overrides the file)")
            p.add_argument("--tmax", type=float, help="final time (overrides the file)")
            p.add_argument("--tol", type=float, default=1e-6,
                           help="largest accepted relative drift (default 1e-6)")
    return ap


def run(argv: Optional[list] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    fn: Callable = COMMANDS[args.command][0]
    set_default_seed(args.seed)
    try:
        sf = load_system(args.file)
        rep = Report(args.command, {"path": sf.path, "digest": sf.digest, "target": sf.target})
        fn(sf, args, rep)
    except (SystemFileError, UsageError, ParseError, JetOrderError, EvaluationError,
            SingularMatrixError, numerics.IntegrationError, ValueError) as exc:
        print(f"geomech {args.command}: error: {exc}", file=stderr)
        return EXIT_ERROR
    finally:
        set_default_seed(0)
    payload = rep.as_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(json.dumps(payload, indent=2) if args.json else rep.render(), file=stdout)
    return EXIT_OK if rep.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
