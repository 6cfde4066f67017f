"""Command-line front end.

Every command writes one artifact (CSV or JSON) to --out, or to stdout when
--out is omitted.  CSV files start with a '#' line carrying the tool
version, a hash of the effective configuration and the seed.  Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import aaqst, dd, macrorealism, noon, sspt
from .core import compose_pulse_program, embed, thermal_deviation
from .measurement import NoiseSpec, SpectralReadout, add_noise, single_quantum_lines
from .quadrature import QuadratureError
from .sysfile import (ConfigError, check_keys, load_model, load_system, read_json,
                      steps_from_list)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

PATH_KEYS = {"system", "model", "readout", "unitaries", "seq", "data", "gate"}


def fmt(x) -> str:
    return f"{float(x):.12g}"


class Artifact:
    """Collects output text and writes it atomically."""

    def __init__(self, args, config_hash: str):
        self.args = args
        self.hash = config_hash

    def header(self) -> str:
        return f"# aaqip {__version__} config_sha256={self.hash} seed={self.args.seed}\n"

    def meta(self) -> dict:
        return {"tool": "aaqip", "version": __version__, "config_sha256": self.hash,
                "seed": self.args.seed}

    def csv(self, columns, rows, digits: str = ".12g") -> str:
        out = [self.header(), ",".join(columns) + "\n"]
        for row in rows:
            out.append(",".join(v if isinstance(v, str) else format(float(v), digits) for v in row) + "\n")
        return "".join(out)

    def json(self, payload: dict) -> str:
        return json.dumps({"meta": self.meta(), **payload}, indent=2) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require_seed(args, why: str):
    if args.seed is None:
        raise ConfigError(f"--seed is required when {why}")


# ------------------------------------------------------------------ commands

def cmd_aaqst_optimize(args, art):
    _require_seed(args, "optimizing")
    system = load_system(args.system)
    model = load_model(args.model) if args.model else aaqst.two_delay_model()
    params, c = aaqst.optimize_delays(system, model, args.budget, args.seed)
    return art.json({"params": dict(zip(model.params, [float(fmt(p)) for p in params])),
                     "condition_number": float(fmt(c))})


def _load_unitaries(path, system):
    data = read_json(path)
    check_keys(data, {"experiments"}, ("experiments",), str(path))
    out = []
    for k, e in enumerate(data["experiments"]):
        steps = steps_from_list(e, f"{path}: experiments[{k}]")
        if any(isinstance(s, str) for s in steps):
            raise ConfigError(f"{path}: experiments[{k}] has unresolved parameters")
        out.append(compose_pulse_program(system, steps))
    return out


def cmd_aaqst_simulate(args, art):
    system = load_system(args.system)
    us = _load_unitaries(args.unitaries, system)
    spins = aaqst.tomography_spins(system)
    n = system.n_spins
    rho = embed(np.kron(thermal_deviation(len(spins)), np.eye(2 ** (n - len(spins))) / 2 ** (n - len(spins))),
                spins + [s for s in range(n) if s not in spins], n)
    parts = [single_quantum_lines(u @ rho @ u.conj().T, n, experiment=k) for k, u in enumerate(us)]
    readout = SpectralReadout.concatenate(parts)
    if args.eta > 0:
        _require_seed(args, "adding noise")
        readout = add_noise(readout, NoiseSpec(args.eta, args.seed))
    return art.header() + readout.to_csv()


def cmd_aaqst_reconstruct(args, art):
    system = load_system(args.system)
    us = _load_unitaries(args.unitaries, system)
    try:
        readout = SpectralReadout.from_csv(Path(args.readout).read_text())
    except OSError as exc:
        raise ConfigError(f"{args.readout}: cannot read ({exc.strerror})") from None
    M = aaqst.build_constraint_matrix(system, us)
    parts = [SpectralReadout(*(getattr(readout, f)[readout.experiment == k]
                               for f in ("experiment", "spin", "nu", "R", "S")))
             for k in range(len(us))]
    rho = aaqst.reconstruct_state(M, parts)
    rows = [(i, j, rho[i, j].real, rho[i, j].imag) for i in range(rho.shape[0]) for j in range(rho.shape[1])]
    return art.csv(["row", "col", "re", "im"], rows)


def _gate(spec: str):
    if spec in sspt.GATES:
        return sspt.GATES[spec]
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"--gate: {spec!r} is neither a known gate {sorted(sspt.GATES)} nor a file")
    data = read_json(path)
    check_keys(data, {"re", "im"}, ("re",), str(path))
    u = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data.get("im", 0.0), dtype=float)
    if u.shape != (2, 2):
        raise ConfigError(f"{path}: gate matrix must be 2x2")
    return u


def _chi_json(chi):
    return {"basis": list(sspt.FIXED_LABELS_1Q),
            "re": [[float(fmt(v)) for v in row] for row in chi.real],
            "im": [[float(fmt(v)) for v in row] for row in chi.imag]}


def cmd_sspt_run(args, art):
    system = load_system(args.system)
    u = _gate(args.gate)
    noise = None
    if args.eta > 0:
        _require_seed(args, "adding noise")
        noise = NoiseSpec(args.eta, args.seed)
    res = sspt.run_sspt(system, sspt.unitary_channel(u), noise, full=True)
    fid = sspt.gate_fidelity(res.chi, sspt.chi_of_kraus([u]))
    return art.json({"gate": args.gate, "eta": args.eta, "chi": _chi_json(res.chi),
                     "gate_fidelity": float(fmt(fid)),
                     "readout_condition_number": float(fmt(res.condition_number))})


def cmd_sspt_twirl(args, art):
    system = load_system(args.system)
    rows = []
    for phi in np.linspace(0.0, args.phi_max, args.points):
        chi = sspt.run_sspt(system, sspt.twirl_channel(phi))
        th = sspt.chi_of_twirl(phi)
        rows.append((phi, chi[0, 0].real, chi[3, 3].real, th[0, 0].real, th[3, 3].real))
    return art.csv(["phi_rad", "chi_EE", "chi_ZZ", "chi_EE_theory", "chi_ZZ_theory"], rows)


def cmd_elgi_sweep(args, art):
    thetas, d3 = macrorealism.d3_sweep(args.theta_max, args.points)
    return art.csv(["theta_rad", "D3_bits"], zip(thetas, d3))


def cmd_moments_sweep(args, art):
    keys = list(macrorealism.OUTCOMES_3)
    cols = ["theta_rad", "mu110", "mu011", "mu101", "mu111"]
    cols += [f"Pmu_{macrorealism.outcome_label(k)}" for k in keys]
    cols += [f"Pd_{macrorealism.outcome_label(k)}" for k in keys]
    rows = []
    w = macrorealism.DEFAULT_OMEGA
    for th in np.linspace(0.0, args.theta_max, args.points):
        m = macrorealism.quantum_moments(th, w)
        pm = macrorealism.invert_moments(m)
        pd = macrorealism.sequential_jp([0.0, th / w, 2 * th / w], w) if th > 0 \
            else macrorealism.direct_three_time(0.0)
        rows.append([th, m[(1, 1, 0)], m[(0, 1, 1)], m[(1, 0, 1)], m[(1, 1, 1)]]
                    + [pm[k] for k in keys] + [pd[k] for k in keys])
    return art.csv(cols, rows)


def cmd_dd_gen(args, art):
    seq = dd.make_sequence(args.scheme, args.n, args.tau, args.tau_pi, args.alternate)
    return json.dumps({"meta": art.meta(), **seq.to_dict()}, indent=2) + "\n"


def _load_seq(path):
    data = read_json(path)
    check_keys(data, {"meta", "scheme", "T", "pulses"}, ("T",), str(path))
    try:
        return dd.DDSequence.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: invalid sequence ({exc})") from None


def cmd_dd_ff(args, art):
    seq = _load_seq(args.seq)
    if not 0 < args.omega_lo < args.omega_hi:
        raise ConfigError("--omega-lo and --omega-hi must satisfy 0 < lo < hi")
    w = np.geomspace(args.omega_lo, args.omega_hi, args.points)
    f = dd.filter_function(seq, w)
    return art.csv(["omega_rad_per_s", "F", "F_over_omega2_s2"], zip(w, f, f / w ** 2))


def cmd_dd_area(args, art):
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        row = [n]
        for scheme in ("cpmg", "udd", "rudd"):
            row.append(dd.ff_area(dd.make_sequence(scheme, n, args.tau, args.tau_pi, strict=False),
                                  (args.omega_lo, args.omega_hi)))
        rows.append(row)
    return art.csv(["n_pulses", "area_cpmg_s", "area_udd_s", "area_rudd_s"],
                   [[str(r[0])] + r[1:] for r in rows])


def _star(path):
    data = read_json(path)
    src = str(path)
    if "central" in data:
        check_keys(data, {"central", "satellite", "n_satellites"},
                   ("central", "satellite", "n_satellites"), src)
        try:
            return noon.StarSystem.from_species(data["central"], data["satellite"], int(data["n_satellites"]))
        except KeyError as exc:
            raise ConfigError(f"{src}: {exc.args[0]}") from None
    check_keys(data, {"gamma_A", "gamma_M", "N_total"}, ("gamma_A", "gamma_M", "N_total"), src)
    return noon.StarSystem(float(data["gamma_A"]), float(data["gamma_M"]), int(data["N_total"]))


def cmd_noon_gfactor(args, art):
    ge, g = noon.effective_gamma(_star(args.system))
    return art.json({"gamma_eff": float(fmt(ge)), "g": float(fmt(g))})


def _read_columns(path, names):
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    if not lines:
        raise ConfigError(f"{path}: no data")
    header = [h.strip() for h in lines[0].split(",")]
    for name in names:
        if name not in header:
            raise ConfigError(f"{path}: missing column {name!r}")
    cols = {h: [] for h in header}
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ConfigError(f"{path}: data row {lineno}: expected {len(header)} fields")
        for h, v in zip(header, parts):
            try:
                cols[h].append(float(v))
            except ValueError:
                raise ConfigError(f"{path}: data row {lineno}: field {h!r} is not a number") from None
    return {n: np.array(cols[n]) for n in names}


def cmd_noon_diffusion_fit(args, art):
    c = _read_columns(args.data, ["G1", "S"])
    D, sD = noon.fit_diffusion(c["G1"], c["S"], args.delta, args.Delta, args.gamma_eff)
    return art.json({"D": float(fmt(D)), "sigma_D": None if np.isnan(sD) else float(fmt(sD)),
                     "points": int(c["G1"].size)})


def cmd_noon_rfi_fit(args, art):
    try:
        text = Path(args.data).read_text()
    except OSError as exc:
        raise ConfigError(f"{args.data}: cannot read ({exc.strerror})") from None
    header = [ln for ln in text.splitlines() if ln and not ln.startswith("#")][:1]
    if header and "nuH" in header[0]:
        c = _read_columns(args.data, ["nuH", "nuP", "p"])
        prof = noon.corr_fit(c["nuH"], c["nuP"], c["p"], args.nu0_h, args.nu0_p, args.lambda0)
        return art.json({"lambda0": float(fmt(prof.lambda0)),
                         "lambda_H": [float(fmt(v)) for v in prof.lam_H],
                         "lambda_P": [float(fmt(v)) for v in prof.lam_P],
                         "ratios": [float(fmt(v)) for v in prof.ratios()],
                         "lambda0_fixed": args.lambda0 is not None})
    c = _read_columns(args.data, ["nu", "p"])
    if args.nu0 is None:
        raise ConfigError("--nu0 is required for a single-channel profile")
    prof = noon.rfi_fit(c["nu"], c["p"], args.nu0)
    return art.json({"nu0": args.nu0, "lambda_minus": float(fmt(prof.lambda_minus)),
                     "lambda_plus": float(fmt(prof.lambda_plus)), "a": float(fmt(prof.a))})


# -------------------------------------------------------------------- parser

def _common(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d, help="RNG seed (required for noise/optimization)")
    parser.add_argument("--out", default=d, help="output file (default: stdout)")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="suppress status messages on stderr")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aaqip", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"aaqip {__version__}")
    _common(p, suppress=False)
    top = p.add_subparsers(dest="command", required=True)

    def leaf(group, name, func, help_):
        sp = group.add_parser(name, help=help_)
        _common(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    g = top.add_parser("aaqst", help="state tomography").add_subparsers(dest="action", required=True)
    sp = leaf(g, "optimize", cmd_aaqst_optimize, "minimize the constraint-matrix condition number")
    sp.add_argument("--system", required=True)
    sp.add_argument("--model")
    sp.add_argument("--budget", type=int, default=200)
    sp = leaf(g, "simulate", cmd_aaqst_simulate, "readout of the thermal state")
    sp.add_argument("--system", required=True)
    sp.add_argument("--unitaries", required=True)
    sp.add_argument("--eta", type=float, default=0.0)
    sp = leaf(g, "reconstruct", cmd_aaqst_reconstruct, "least-squares reconstruction")
    sp.add_argument("--system", required=True)
    sp.add_argument("--readout", required=True)
    sp.add_argument("--unitaries", required=True)

    g = top.add_parser("sspt", help="process tomography").add_subparsers(dest="action", required=True)
    sp = leaf(g, "run", cmd_sspt_run, "chi matrix of a single-qubit gate")
    sp.add_argument("--system", required=True)
    sp.add_argument("--gate", required=True)
    sp.add_argument("--eta", type=float, default=0.0)
    sp = leaf(g, "twirl", cmd_sspt_twirl, "chi of the twirling channel versus phi")
    sp.add_argument("--system", required=True)
    sp.add_argument("--phi-max", type=float, default=3.5 * np.pi)
    sp.add_argument("--points", type=int, default=49)

    g = top.add_parser("elgi", help="entropic Leggett-Garg deficit").add_subparsers(dest="action", required=True)
    sp = leaf(g, "sweep", cmd_elgi_sweep, "D3 versus theta")
    sp.add_argument("--theta-max", type=float, default=np.pi)
    sp.add_argument("--points", type=int, default=97)

    g = top.add_parser("moments", help="moment inversion").add_subparsers(dest="action", required=True)
    sp = leaf(g, "sweep", cmd_moments_sweep, "moments and three-time tables versus theta")
    sp.add_argument("--theta-max", type=float, default=np.pi)
    sp.add_argument("--points", type=int, default=97)

    g = top.add_parser("dd", help="dynamical decoupling").add_subparsers(dest="action", required=True)
    sp = leaf(g, "gen", cmd_dd_gen, "generate a sequence")
    sp.add_argument("--scheme", choices=["cpmg", "udd", "rudd"], required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--tau", type=float, default=dd.DEFAULT_TAU)
    sp.add_argument("--tau-pi", type=float, default=dd.DEFAULT_TAU_PI)
    sp.add_argument("--alternate", action="store_true")
    sp = leaf(g, "ff", cmd_dd_ff, "filter function on a log grid")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--omega-lo", type=float, default=1e3)
    sp.add_argument("--omega-hi", type=float, default=1e7)
    sp.add_argument("--points", type=int, default=400)
    sp = leaf(g, "area", cmd_dd_area, "area under F/w^2 versus pulse count")
    sp.add_argument("--n-min", type=int, default=3)
    sp.add_argument("--n-max", type=int, default=10)
    sp.add_argument("--tau", type=float, default=dd.DEFAULT_TAU)
    sp.add_argument("--tau-pi", type=float, default=4.27e-6)
    sp.add_argument("--omega-lo", type=float, default=dd.DEFAULT_WINDOW[0])
    sp.add_argument("--omega-hi", type=float, default=dd.DEFAULT_WINDOW[1])

    g = top.add_parser("noon", help="NOON-state models").add_subparsers(dest="action", required=True)
    sp = leaf(g, "gfactor", cmd_noon_gfactor, "effective gyromagnetic ratio")
    sp.add_argument("--system", required=True)
    sp = leaf(g, "diffusion-fit", cmd_noon_diffusion_fit, "fit D from (G1, S) data")
    sp.add_argument("--data", required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--Delta", type=float, required=True)
    sp.add_argument("--gamma-eff", type=float, required=True)
    sp = leaf(g, "rfi-fit", cmd_noon_rfi_fit, "fit an RFI profile or correlation map")
    sp.add_argument("--data", required=True)
    sp.add_argument("--nu0", type=float)
    sp.add_argument("--nu0-h", type=float, default=1.0)
    sp.add_argument("--nu0-p", type=float, default=1.0)
    sp.add_argument("--lambda0", type=float)

    sp = top.add_parser("run", help="run an experiment config file")
    _common(sp, suppress=True)
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=None)
    return p


def _leaf_parser(parser, command, action):
    for a in parser._subparsers._group_actions:
        sub = a.choices.get(command)
        if sub is None:
            continue
        if action is None:
            return sub
        for b in sub._subparsers._group_actions:
            if action in b.choices:
                return b.choices[action]
    return None


CONFIG_KEYS = {"kind", "action", "seed", "output", "params"}


def config_to_argv(parser, path) -> tuple[list, dict]:
    """Translate a JSON experiment config into an argument vector."""
    data = read_json(path)
    src = str(path)
    check_keys(data, CONFIG_KEYS, ("kind", "action"), src)
    kind, action = data["kind"], data["action"]
    if kind not in ("aaqst", "sspt", "elgi", "moments", "dd", "noon"):
        raise ConfigError(f"{src}: field 'kind': unknown kind {kind!r}")
    leaf = _leaf_parser(parser, kind, action)
    if leaf is None:
        raise ConfigError(f"{src}: field 'action': {kind} has no action {action!r}")
    options = {a.dest: a for a in leaf._actions if a.option_strings}
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{src}: field 'params' must be an object")
    argv = [kind, action]
    base = Path(path).parent
    for key, value in params.items():
        dest = key.replace("-", "_")
        if dest not in options or dest in ("seed", "out", "quiet", "help"):
            raise ConfigError(f"{src}: params: unknown field {key!r}")
        opt = options[dest]
        if isinstance(opt, argparse._StoreTrueAction):
            if not isinstance(value, bool):
                raise ConfigError(f"{src}: params.{key} must be true or false")
            if value:
                argv.append(opt.option_strings[0])
            continue
        if dest in PATH_KEYS and isinstance(value, str) and not (dest == "gate" and value in sspt.GATES):
            value = str((base / value).resolve()) if not Path(value).is_absolute() else value
            if not Path(value).exists():
                raise ConfigError(f"{src}: params.{key}: file {value} does not exist")
        argv += [opt.option_strings[0], str(value)]
    if "seed" in data:
        if not isinstance(data["seed"], int):
            raise ConfigError(f"{src}: field 'seed' must be an integer")
        argv += ["--seed", str(data["seed"])]
    if "output" in data:
        out = Path(data["output"])
        argv += ["--out", str(out if out.is_absolute() else (base / out))]
    return argv, data


def _config_hash(args) -> str:
    skip = {"func", "out", "quiet", "config"}
    items = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps(items, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            cfg_argv, _ = config_to_argv(parser, args.config)
            if args.seed is not None and "--seed" not in cfg_argv:
                cfg_argv += ["--seed", str(args.seed)]
            if args.out is not None:
                cfg_argv += ["--out", args.out]
            quiet = args.quiet
            args = parser.parse_args(cfg_argv)
            args.quiet = args.quiet or quiet
        art = Artifact(args, _config_hash(args))
        text = args.func(args, art)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    except (np.linalg.LinAlgError, QuadratureError, RuntimeError, FloatingPointError) as exc:
        # LinAlgError is a ValueError, so it has to be caught first
        print(f"aaqip: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"aaqip: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        write_atomic(args.out, text)
        if not args.quiet:
            print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
