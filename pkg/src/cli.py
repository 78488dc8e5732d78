"""
HJF — Command line
Run: python -m src.cli <verb> [flags]

Every verb prints one JSON document on stdout (or writes --out) and exits
0 on success, 2 on a precondition or parse error, 3 when a bounded search
comes back empty. --dry-run parses and validates the inputs and stops.
"""
import argparse
import sys
from fractions import Fraction

from src.characters import build_G, character_to_dict, extensions_of, g_characters
from src.config import (
    EXIT_NOT_FOUND, EXIT_OK, EXIT_PRECONDITION, SHELL_BOUND, SIEVE_PRIMES_BELOW, SIEVE_TRUNCATION,
    supported_discriminants,
)
from src.elliptic import (
    B_op, Constraints, QExpansion, U_op, coprime_sieve, deligne_diagnostic, descend_sequence,
    eisenstein, eliminate_component, eta_quotient, eta_quotient_level_character, hecke_T,
    nonvanish_count, predicted_moment_ratio, second_moment, squarefree_select, squarefree_sieve_constant,
)
from src.errors import HJFError, ParseError, PreconditionError
from src.formats import (
    decode_value, dumps, encode_value, parse_form, read_qexpansion, read_system, read_table,
    system_to_dict, write_qexpansion, write_system,
)
from src.hermitian_lattice import fj_extract, gl2_conjugate, prime_rep_search, scaled_det
from src.jacobi_coeffs import (
    all_twisted_maps, apply_U_rho, apply_u_rho, apply_V_l, ez_map, is_spez, psi_combination,
    spez_profile, theta_components, twisted_ez_map, w_mu,
)
from src.pipeline import PipelineConfig, emit_report, run_reduction_pipeline
from src.ring_ok import exponential_sum, exponential_sum_bruteforce, parse_element


# ═════════════════════════════════════════════════════════════════════
# 1. ARGUMENT HELPERS
# ═════════════════════════════════════════════════════════════════════

def _pairs(text: str) -> list[tuple[int, int]]:
    """"1:24,2:-3" -> [(1, 24), (2, -3)]."""
    try:
        pairs = [tuple(int(x) for x in item.split(":")) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ParseError(f"bad pair list {text!r}; expected 'a:b,c:d'") from e
    if not pairs or any(len(p) != 2 for p in pairs):
        raise ParseError(f"bad pair list {text!r}; expected 'a:b,c:d'")
    return pairs


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ParseError(f"bad integer list {text!r}") from e


def _eigen(text: str) -> dict:
    """"2:-24,3:252" or "2:-24:-1472" (lambda(p) and lambda(p^2))."""
    out = {}
    for item in text.split(","):
        parts = item.split(":")
        try:
            p, values = int(parts[0]), [Fraction(v) for v in parts[1:]]
        except ValueError as e:
            raise ParseError(f"bad eigenvalue entry {item!r}") from e
        if len(values) not in (1, 2):
            raise ParseError(f"bad eigenvalue entry {item!r}; expected p:lambda or p:lambda:lambda2")
        out[p] = values[0] if len(values) == 1 else tuple(values)
    return out


def _load_form(args) -> QExpansion | None:
    """The input form; None for a dry run on an eta spec."""
    if args.qexp:
        return read_qexpansion(args.qexp)
    if args.eta:
        spec = _pairs(args.eta)
        if args.dry_run:
            eta_quotient_level_character(spec)
            return None
        return eta_quotient(spec, args.X)
    raise ParseError("an elliptic form is needed: give --qexp PATH or --eta SPEC with --X")


def _constraints(args) -> Constraints:
    return Constraints(args.modulus, args.residue, args.coprime_to, args.squarefree)


def qexpansion_to_dict(f: QExpansion) -> dict:
    return {
        "k": str(f.weight), "N": f.level, "precision": f.precision,
        "character": None if f.character is None else character_to_dict(f.character),
        "coeffs": [encode_value(c) for c in f.coeffs],
    }


def _dry(args, **facts) -> dict:
    return {"verb": args.verb, "dry_run": True, "valid": True, **facts}


def _emit_form(f: QExpansion, args) -> dict:
    if args.out:
        write_qexpansion(f, args.out)
        return {"written": args.out, "precision": f.precision, "N": f.level}
    return qexpansion_to_dict(f)


def _emit_system(result, args) -> dict:
    if args.out:
        write_system(result, args.out)
        return {"written": args.out, "classes": len(result.classes)}
    return system_to_dict(result)


# ═════════════════════════════════════════════════════════════════════
# 2. VERBS
# ═════════════════════════════════════════════════════════════════════

# ── ring_ok / hermitian_lattice ─────────────────────────────────────
def cmd_expsum(args) -> dict:
    x, s = parse_element(args.x), parse_element(args.s)
    if args.dry_run:
        return _dry(args, x=str(x), s=str(s))
    out = {"x": str(x), "s": str(s), "closed_form": exponential_sum(x, s)}
    if args.bruteforce:
        out["bruteforce"] = encode_value(exponential_sum_bruteforce(x, s))
    return out


def cmd_prime_search(args) -> dict:
    T = parse_form(args.form)
    det = scaled_det(T)
    if args.dry_run:
        return _dry(args, form=str(T), scaled_det=det)
    g, p = prime_rep_search(T, args.bound)
    return {"form": str(T), "g": str(g), "prime": p, "image": str(gl2_conjugate(g, T))}


def cmd_fj_extract(args) -> dict:
    table = read_table(args.table, args.k, args.D)
    if args.dry_run:
        return _dry(args, entries=len(table), indices=table.indices())
    return _emit_system(fj_extract(table, args.m), args)


# ── jacobi_coeffs ───────────────────────────────────────────────────
def cmd_theta(args) -> dict:
    system = read_system(args.system)
    if args.dry_run:
        return _dry(args, classes=len(system.classes))
    return {"components": {str(r): {str(d): encode_value(v) for d, v in sorted(comp.series.items())}
                           for r, comp in theta_components(system).items()}}


def cmd_ez(args) -> dict:
    system = read_system(args.system)
    if args.dry_run:
        return _dry(args, classes=len(system.classes))
    return _emit_form(ez_map(system), args)


def _pick(items: list, label: int, what: str):
    if not 0 <= label < len(items):
        raise PreconditionError(f"{what} label {label} out of range 0..{len(items) - 1}")
    return items[label]


def _image_entry(eta, ext, f: QExpansion) -> dict:
    return {"eta": eta.label, "extension": ext.label, "extended_character": character_to_dict(ext),
            "image": qexpansion_to_dict(f)}


def cmd_ez_twist(args) -> dict:
    """All images, every extension of one eta (--eta), or a single one (--eta, --ext)."""
    system = read_system(args.system)
    if args.ext is not None and args.eta is None:
        raise ParseError("--ext needs --eta")
    if args.dry_run:
        return _dry(args, classes=len(system.classes), eta=args.eta, ext=args.ext)
    if args.eta is None:
        return {"images": [_image_entry(eta, ext, f) for eta, ext, f in all_twisted_maps(system)]}
    eta = _pick(g_characters(build_G(system.field, system.m), system.k), args.eta, "eta")
    exts = extensions_of(eta)
    if args.ext is None:
        return {"images": [_image_entry(eta, ext, twisted_ez_map(system, ext)) for ext in exts]}
    ext = _pick(exts, args.ext, "extension")
    f = twisted_ez_map(system, ext)
    return _emit_form(f, args) if args.out else _image_entry(eta, ext, f)


def cmd_op(args) -> dict:
    system = read_system(args.system)
    if args.kind == "V":
        if args.l is None:
            raise ParseError("--l is required for V")
        argument = args.l
    else:
        if args.rho is None:
            raise ParseError(f"--rho is required for {args.kind}")
        argument = parse_element(args.rho)
    if args.dry_run:
        return _dry(args, kind=args.kind, argument=str(argument))
    ops = {"U": apply_U_rho, "u": apply_u_rho, "V": apply_V_l, "W": w_mu}
    return _emit_system(ops[args.kind](system, argument), args)


def cmd_spez_check(args) -> dict:
    system = read_system(args.system)
    if args.dry_run:
        return _dry(args, classes=len(system.classes))
    profile = spez_profile(system)
    return {"spez": is_spez(system),
            "profile": None if profile is None else {str(d): encode_value(v) for d, v in sorted(profile.items())}}


def cmd_psi(args) -> dict:
    system, pi = read_system(args.system), parse_element(args.pi)
    if args.dry_run:
        return _dry(args, pi=str(pi))
    return _emit_system(psi_combination(system, pi), args)


# ── elliptic ────────────────────────────────────────────────────────
def cmd_eta(args) -> dict:
    spec = _pairs(args.spec)
    if args.dry_run:
        return _dry(args, spec=spec)
    return _emit_form(eta_quotient(spec, args.X), args)


def cmd_eisenstein(args) -> dict:
    if args.dry_run:
        return _dry(args, k=args.k)
    return _emit_form(eisenstein(args.k, args.X), args)


def cmd_hecke(args) -> dict:
    f = _load_form(args)
    if args.dry_run:
        return _dry(args, kind=args.kind, precision=None if f is None else f.precision)
    ops = {"T": hecke_T, "U": U_op, "B": B_op}
    return _emit_form(ops[args.kind](f, args.n), args)


def cmd_sieve(args) -> dict:
    if args.constant:
        if args.dry_run:
            return _dry(args, level=args.level)
        c = squarefree_sieve_constant(args.level, args.below, args.truncation)
        return {"lower_bound": str(c.lower_bound), "estimate": c.estimate,
                "positive": c.positive, "tail_ok": c.tail_ok}
    if args.coprime_to == 1 and not args.squarefree:
        raise ParseError("nothing to sieve: give --coprime-to M, --squarefree or --constant")
    f = _load_form(args)
    if args.dry_run:
        return _dry(args, coprime_to=args.coprime_to, squarefree=args.squarefree,
                    precision=None if f is None else f.precision)
    if args.coprime_to > 1:
        f = coprime_sieve(f, args.coprime_to)
    if args.squarefree:
        f = squarefree_select(f)
    return _emit_form(f, args)


def cmd_eliminate(args) -> dict:
    f, b = _load_form(args), decode_value(args.b)
    if args.dry_run:
        return _dry(args, p=args.p, b=encode_value(b))
    g, ledger = eliminate_component(f, args.p, b)
    out = _emit_form(g, args)
    out["ledger"] = {str(gamma): encode_value(beta) for gamma, beta in sorted(ledger.items())}
    return out


def cmd_moments(args) -> dict:
    f, grid = _load_form(args), _ints(args.grid)
    if args.dry_run:
        return _dry(args, precision=None if f is None else f.precision, grid=grid)
    report = second_moment(f, grid, _constraints(args), args.dilation)
    if args.out:
        report.to_frame().to_csv(args.out, index=False)
    return {"grid": report.grid, "sums": report.sums, "slope": report.slope,
            "residual": report.residual, "drift": report.drift, "dilation": report.dilation,
            "deligne": deligne_diagnostic(f.window(grid[-1]))}


def cmd_predict_ratio(args) -> dict:
    eigen = _eigen(args.eigen)
    if args.dry_run:
        return _dry(args, primes=sorted(eigen))
    pred = predicted_moment_ratio(args.k, args.N, eigen, args.r)
    return {"ratio": str(pred.ratio), "ratio_float": float(pred.ratio),
            "bound": pred.bound, "within_bound": pred.within_bound}


def cmd_count_nonvanishing(args) -> dict:
    f = _load_form(args)
    if args.dry_run:
        return _dry(args, precision=None if f is None else f.precision)
    X = args.upto or f.precision
    return {"X": X, "count": nonvanish_count(f, X, _constraints(args))}


def cmd_descend(args) -> dict:
    f, primes = _load_form(args), _ints(args.primes)
    if args.dry_run:
        return _dry(args, primes=primes)
    steps = descend_sequence(f, primes)
    if args.out:
        write_qexpansion(steps[-1], args.out)
    return {"steps": [{"N": g.level, "precision": g.precision, "first_support": (g.support() or [None])[0]}
                      for g in steps]}


def cmd_reduce(args) -> dict:
    cfg = PipelineConfig(D=args.D, table_path=args.table, k=args.k, index_policy=args.policy,
                         search_bound=args.bound, output_dir=args.out_dir, backend=args.backend,
                         dry_run=args.dry_run)
    result = run_reduction_pipeline(cfg)
    if args.report:
        emit_report([result], args.format, args.report)
    return result


# ═════════════════════════════════════════════════════════════════════
# 3. PARSER
# ═════════════════════════════════════════════════════════════════════

def _add_form_source(p):
    p.add_argument("--qexp", help="q-expansion CSV (sidecar JSON next to it)")
    p.add_argument("--eta", help="eta quotient spec 'delta:r,...', e.g. 1:24 for Delta")
    p.add_argument("--X", type=int, default=1000, help="precision for --eta")


def _add_constraints(p):
    p.add_argument("--modulus", type=int, default=None)
    p.add_argument("--residue", type=int, default=0)
    p.add_argument("--coprime-to", type=int, default=1)
    p.add_argument("--squarefree", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hjf", description="Hermitian Jacobi form coefficient toolkit.")
    verbs = parser.add_subparsers(dest="verb", required=True)

    def verb(name: str, handler, help_text: str):
        p = verbs.add_parser(name, help=help_text)
        p.add_argument("--dry-run", action="store_true", help="validate inputs without computing")
        p.add_argument("--out", default=None, help="write the result here instead of stdout")
        p.set_defaults(handler=handler)
        return p

    p = verb("expsum", cmd_expsum, "exponential sum over O/sO")
    p.add_argument("--x", required=True, help="ring element 'a+b*w@D'")
    p.add_argument("--s", required=True, help="modulus 'a+b*w@D'")
    p.add_argument("--bruteforce", action="store_true", help="also evaluate the cyclotomic sum")

    p = verb("prime-search", cmd_prime_search, "GL_2(O_K) move to an odd prime bottom-right entry")
    p.add_argument("--form", required=True, help="'n,m,a+b*w@D'")
    p.add_argument("--bound", type=int, default=SHELL_BOUND, help="shell bound (HJF_SHELL_BOUND)")

    p = verb("fj-extract", cmd_fj_extract, "index-m Fourier-Jacobi slice of a coefficient table")
    p.add_argument("--table", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--D", type=int, default=None, choices=supported_discriminants())

    for name, handler, text in (("theta", cmd_theta, "theta components h_s"),
                                ("ez", cmd_ez, "Eichler-Zagier image"),
                                ("spez-check", cmd_spez_check, "discriminant-only dependence test")):
        p = verb(name, handler, text)
        p.add_argument("--system", required=True)

    p = verb("ez-twist", cmd_ez_twist, "twisted Eichler-Zagier images, all or one by label")
    p.add_argument("--system", required=True)
    p.add_argument("--eta", type=int, default=None, help="label of eta in the G-characters of weight k")
    p.add_argument("--ext", type=int, default=None, help="label of the extension of eta (needs --eta)")

    p = verb("op", cmd_op, "index operators U_rho, u_rho, V_l and the relabelling W_mu")
    p.add_argument("--system", required=True)
    p.add_argument("--kind", choices=("U", "u", "V", "W"), required=True)
    p.add_argument("--rho", default=None, help="rho for U and u, mu in G for W")
    p.add_argument("--l", type=int, default=None)

    p = verb("psi", cmd_psi, "psi combination at a split prime")
    p.add_argument("--system", required=True)
    p.add_argument("--pi", required=True)

    p = verb("eta", cmd_eta, "eta quotient q-expansion")
    p.add_argument("--spec", required=True)
    p.add_argument("--X", type=int, required=True)

    p = verb("eisenstein", cmd_eisenstein, "normalised Eisenstein series E_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--X", type=int, required=True)

    p = verb("hecke", cmd_hecke, "Hecke operator T_n, or U_n / B_n")
    _add_form_source(p)
    p.add_argument("--kind", choices=("T", "U", "B"), default="T")
    p.add_argument("--n", type=int, required=True)

    p = verb("sieve", cmd_sieve, "coprime / square-free sieve of a form, or the sieve constant")
    _add_form_source(p)
    p.add_argument("--coprime-to", type=int, default=1, help="square-free M; keep a(n) with gcd(n, M) = 1")
    p.add_argument("--squarefree", action="store_true", help="keep square-free n only")
    p.add_argument("--constant", action="store_true", help="compute the square-free sieve constant instead")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--below", type=int, default=SIEVE_PRIMES_BELOW)
    p.add_argument("--truncation", type=int, default=SIEVE_TRUNCATION)

    p = verb("moments", cmd_moments, "second moment of normalised coefficients")
    _add_form_source(p)
    _add_constraints(p)
    p.add_argument("--grid", required=True, help="comma-separated X values")
    p.add_argument("--dilation", type=int, default=1)

    p = verb("predict-ratio", cmd_predict_ratio, "predicted dilated/plain slope ratio")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--eigen", required=True, help="'p:lambda(p)[:lambda(p^2)],...'")

    p = verb("count-nonvanishing", cmd_count_nonvanishing, "count nonzero coefficients")
    _add_form_source(p)
    _add_constraints(p)
    p.add_argument("--upto", type=int, default=None)

    p = verb("eliminate", cmd_eliminate, "T_p - b elimination with its ledger")
    _add_form_source(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--b", required=True, help="eigenvalue to remove, 'p/q'")

    p = verb("descend", cmd_descend, "coprime-support descent over a prime list")
    _add_form_source(p)
    p.add_argument("--primes", required=True)

    p = verb("reduce", cmd_reduce, "full reduction pipeline on a coefficient table")
    p.add_argument("--table", required=True)
    p.add_argument("--D", type=int, required=True, choices=supported_discriminants())
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--policy", choices=("first", "smallest-det"), default="first")
    p.add_argument("--bound", type=int, default=SHELL_BOUND)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--backend", choices=("exact", "float-report"), default="exact")
    p.add_argument("--report", default=None, help="report file path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


# ═════════════════════════════════════════════════════════════════════
# 4. ENTRY POINT
# ═════════════════════════════════════════════════════════════════════

def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload = args.handler(args)
    except HJFError as e:
        print(f"❌ {args.verb} FAILED: {e}", file=sys.stderr)
        return e.exit_code
    print(dumps(payload), end="")
    if args.verb == "reduce":
        if payload.get("status") == "not_found":
            return EXIT_NOT_FOUND
        if payload.get("status") == "failed":
            return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
