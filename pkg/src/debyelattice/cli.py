"""Command-line front end.

    debyelattice validate lattices/cubic.spec
    debyelattice c0 lattices/cubic.spec --sphere-order 16
    debyelattice heat lattices/cubic.spec --grid 24 --tmin 0.01 --tmax 100 --tsteps 60

Exit status: 0 on success, 1 when the lattice is invalid or inadmissible,
2 on usage errors.
"""

import argparse
from dataclasses import dataclass
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import acoustic, bloch, dos, lattice, numerics, thermo

COMMANDS = ("validate", "bands", "dos", "acoustic", "c0", "heat", "debye", "oracle")


class UsageError(ValueError):
    pass


class ValidationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str
    grid_n: int = 16
    sphere_order: int = 16
    tmin: float = 0.01
    tmax: float = 100.0
    tsteps: int = 60
    lambda0: float = None
    units: str = "natural"
    output: str = None
    as_json: bool = False
    eigensolver: str = None
    path: str = "0,0,0;0.5,0,0;0.5,0.5,0;0.5,0.5,0.5;0,0,0"
    steps: int = 20
    points: int = 200

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.grid_n < 1:
            raise UsageError("--grid must be >= 1")
        if self.sphere_order < 4:
            raise UsageError("--sphere-order must be >= 4")
        if not (0 < self.tmin < self.tmax):
            raise UsageError("need 0 < --tmin < --tmax")
        if self.tsteps < 2:
            raise UsageError("--tsteps must be >= 2")
        if self.steps < 1 or self.points < 1:
            raise UsageError("--steps and --points must be >= 1")
        if self.lambda0 is not None and not self.lambda0 > 0:
            raise UsageError("--lambda0 must be positive")


def fmt(x):
    return "%.17g" % x


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) if not isinstance(v, str) else v for v in row) + "\n")
    return buf.getvalue()


def _table(header, rows, as_json):
    rows = [list(r) for r in rows]
    if as_json:
        doc = {"columns": list(header),
               "rows": [[float(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    return _csv(header, rows)


def _report(pairs, as_json):
    if as_json:
        doc = {k: (v if isinstance(v, (str, bool)) or v is None else float(v)) for k, v in pairs}
        return json.dumps(doc, indent=2) + "\n"
    lines = ["quantity,value"]
    for k, v in pairs:
        if isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{k},{v if isinstance(v, str) else fmt(v)}")
    return "\n".join(lines) + "\n"


def write_output(text, path):
    """Write to `path` atomically (temp file then rename), or to stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _admissible(crystal):
    resid = lattice.validate_rotation_invariance(crystal)
    if resid > lattice.ADMISSIBILITY_TOL:
        raise ValidationFailure(
            f"crystal {crystal.name!r} is inadmissible: rotation-invariance "
            f"residual {resid:.3g} exceeds {lattice.ADMISSIBILITY_TOL:g}")
    return resid


def cmd_validate(crystal, cfg):
    resid = lattice.validate_rotation_invariance(crystal)
    connected = bloch.connectivity_certificate(crystal, 3, cfg.eigensolver)
    admissible = resid <= lattice.ADMISSIBILITY_TOL
    pairs = [("name", crystal.name), ("atoms_per_cell", crystal.n),
             ("edge_classes", len(crystal.edges)), ("cell_volume", crystal.volume),
             ("total_mass", crystal.total_mass), ("rotation_residual", resid),
             ("connected", connected),
             ("status", "admissible" if admissible and connected else "inadmissible")]
    text = _report(pairs, cfg.as_json)
    if not (admissible and connected):
        write_output(text, cfg.output)
        reason = "rotation-invariance residual too large" if not admissible \
            else "supercell kernel is not three rigid translations"
        raise ValidationFailure(f"crystal {crystal.name!r} is inadmissible: {reason}")
    return text


def _parse_path(spec):
    try:
        pts = [[float(x) for x in p.split(",")] for p in spec.split(";") if p.strip()]
    except ValueError:
        raise UsageError(f"bad --path {spec!r}") from None
    if len(pts) < 2 or any(len(p) != 3 for p in pts):
        raise UsageError("--path needs at least two 'k1,k2,k3' points separated by ';'")
    return pts


def cmd_bands(crystal, cfg):
    _admissible(crystal)
    table = bloch.band_path(crystal, _parse_path(cfg.path), cfg.steps, cfg.eigensolver)
    nb = table.branches.shape[1]
    header = ["segment", "t", "k1", "k2", "k3"] + [f"lambda_{i + 1}" for i in range(nb)]
    rows = [[s, t, *k, *b] for s, t, k, b in
            zip(table.segment, table.t, table.path, table.branches)]
    return _table(header, rows, cfg.as_json)


def cmd_dos(crystal, cfg):
    _admissible(crystal)
    samples = dos.sample_spectrum(crystal, cfg.grid_n, cfg.eigensolver)
    top = samples.max_lambda
    thresholds = np.linspace(0.0, 1.05 * top, cfg.points)
    phi = dos.ids(samples, thresholds)
    return _table(["lambda", "phi"], zip(thresholds, np.atleast_1d(phi)), cfg.as_json)


def cmd_acoustic(crystal, cfg):
    _admissible(crystal)
    rule = numerics.sphere_rule(cfg.sphere_order)
    s = np.sqrt(np.maximum(acoustic.squared_speeds(crystal, rule.nodes, cfg.eigensolver), 0.0))
    header = ["omega_x", "omega_y", "omega_z", "s1", "s2", "s3"]
    return _table(header, (list(o) + list(v) for o, v in zip(rule.nodes, s)), cfg.as_json)


def cmd_c0(crystal, cfg):
    _admissible(crystal)
    c0 = acoustic.c0_quadrature(crystal, cfg.sphere_order, cfg.eigensolver)
    pairs = [("c0", c0)]
    fit = acoustic.isotropy_fit(crystal)
    pairs.append(("isotropic", fit is not None))
    if fit is not None:
        pairs += [("lame_a", fit.a), ("lame_b", fit.b), ("degenerate", fit.degenerate),
                  ("c_l", fit.c_l), ("c_t", fit.c_t)]
        if fit.c_l > 0 and fit.c_t > 0:
            pairs.append(("c0_isotropic", acoustic.c0_isotropic(fit.c_l, fit.c_t, crystal.volume)))
    return _report(pairs, cfg.as_json)


def _debye_parameters(crystal, cfg, consts):
    c0 = acoustic.c0_quadrature(crystal, cfg.sphere_order, cfg.eigensolver)
    lam_D = thermo.debye_lambda(c0, crystal.n)
    return c0, lam_D, thermo.debye_temperature(lam_D, consts)


def cmd_debye(crystal, cfg):
    _admissible(crystal)
    consts = thermo.constants_for(cfg.units)
    c0, lam_D, theta = _debye_parameters(crystal, cfg, consts)
    u_coef, c_coef = thermo.t3_coefficients(c0, consts)
    pairs = [("c0", c0), ("lambda_D", lam_D), ("theta_D", theta),
             ("U1_T4_coefficient", u_coef), ("C_T3_coefficient", c_coef),
             ("debye_C_T3_coefficient", thermo.debye_t3_coefficient(theta, crystal.n, consts))]
    return _report(pairs, cfg.as_json)


def cmd_heat(crystal, cfg):
    _admissible(crystal)
    consts = thermo.constants_for(cfg.units)
    samples = dos.sample_spectrum(crystal, cfg.grid_n, cfg.eigensolver)
    _, lam_D, theta = _debye_parameters(crystal, cfg, consts)
    lam0 = cfg.lambda0 if cfg.lambda0 is not None else lam_D
    temps = np.geomspace(cfg.tmin, cfg.tmax, cfg.tsteps)
    curve = thermo.thermo_curve(samples, temps, consts)
    rows = [[T, u, c,
             thermo.debye_specific_heat(theta, crystal.n, T, consts),
             thermo.einstein_specific_heat(lam0, crystal.n, T, consts)]
            for T, u, c in zip(curve.temperatures, curve.u1, curve.c)]
    return _table(["T", "U1", "C", "C_debye", "C_einstein"], rows, cfg.as_json)


def oracle_report(crystal, N, method=None):
    """Bloch-grid versus supercell discrepancies at size N.

    Returns the relative eigenvalue-multiset gap and the relative gap in the
    trace of exp(-H) between the supercell (per cell) and the grid average.
    """
    sc = bloch.supercell_spectrum(crystal, N, method)
    grid = bloch.grid_dispersion(crystal, N, method)
    gap = bloch.multiset_discrepancy(sc, grid)
    lhs = np.sum(np.exp(-sc)) / N ** 3
    rhs = np.mean(np.sum(np.exp(-grid), axis=1))
    return {"grid": N, "dimension": sc.size, "multiset_discrepancy": gap,
            "trace_discrepancy": abs(lhs - rhs) / abs(rhs)}


def cmd_oracle(crystal, cfg):
    _admissible(crystal)
    rep = oracle_report(crystal, cfg.grid_n, cfg.eigensolver)
    return _report(list(rep.items()), cfg.as_json)


HANDLERS = {"validate": cmd_validate, "bands": cmd_bands, "dos": cmd_dos,
            "acoustic": cmd_acoustic, "c0": cmd_c0, "heat": cmd_heat,
            "debye": cmd_debye, "oracle": cmd_oracle}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="debyelattice",
        description="Phonon spectra, density of states and specific heat of periodic lattices.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input_path", metavar="LATTICE", help="lattice-spec document")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--json", dest="as_json", action="store_true",
                        help="emit a single JSON document")
    common.add_argument("--eigensolver", choices=("jacobi", "lapack"),
                        help="dense eigensolver backend")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check lattice invariants")
    p = sub.add_parser("bands", parents=[common], help="dispersion along a path")
    p.add_argument("--path", default=RunConfig.path,
                   help="fractional waypoints 'k1,k2,k3;k1,k2,k3;...'")
    p.add_argument("--steps", type=int, default=20, help="points per segment")
    p = sub.add_parser("dos", parents=[common], help="integrated density of states")
    p.add_argument("--grid", dest="grid_n", type=int, default=16)
    p.add_argument("--points", type=int, default=200, help="number of lambda thresholds")
    p = sub.add_parser("acoustic", parents=[common], help="sound speeds on the sphere rule")
    p.add_argument("--sphere-order", type=int, default=16)
    p = sub.add_parser("c0", parents=[common], help="Debye constant and isotropy fit")
    p.add_argument("--sphere-order", type=int, default=16)
    p = sub.add_parser("debye", parents=[common], help="Debye temperature and T^3 coefficients")
    p.add_argument("--sphere-order", type=int, default=16)
    p.add_argument("--units", choices=("natural", "si"), default="natural")
    p = sub.add_parser("heat", parents=[common], help="U1(T) and C(T) table")
    p.add_argument("--grid", dest="grid_n", type=int, default=16)
    p.add_argument("--sphere-order", type=int, default=16)
    p.add_argument("--tmin", type=float, default=0.01)
    p.add_argument("--tmax", type=float, default=100.0)
    p.add_argument("--tsteps", type=int, default=60, help="log-spaced temperatures")
    p.add_argument("--lambda0", type=float, help="Einstein frequency squared (default lambda_D)")
    p.add_argument("--units", choices=("natural", "si"), default="natural")
    p = sub.add_parser("oracle", parents=[common], help="Bloch grid vs supercell check")
    p.add_argument("--grid", dest="grid_n", type=int, default=2)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
    except UsageError as exc:
        print(f"debyelattice: {exc}", file=sys.stderr)
        return 2
    try:
        crystal = lattice.load_crystal(cfg.input_path)
        text = HANDLERS[cfg.command](crystal, cfg)
        write_output(text, cfg.output)
    except (UsageError, bloch.SupercellTooLarge) as exc:
        print(f"debyelattice: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"debyelattice: {exc}", file=sys.stderr)
        return 2
    except (lattice.LatticeError, ValidationFailure, acoustic.InadmissibleCrystal) as exc:
        print(f"debyelattice: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
