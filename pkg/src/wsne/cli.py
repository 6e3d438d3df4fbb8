"""Command-line front end.

Every subcommand writes a run report (JSON by default, ``--format csv`` for
a flat key/value table) to ``--out`` or stdout. Exit codes: 0 the property
holds or the search completed, 1 the property is violated, 2 usage or I/O
error, 3 budget exceeded or result not established.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__, auxgame, equilibrium, extremal, ratlp, tournament
from .auxgame import WinLoseGame
from .errors import CapacityError, InvalidParameter, WsneError
from .ratlp import frac_str

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("wsne")


class CommandError(Exception):
    pass


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CommandError(f"cannot read {path}: {exc}") from None


def _save_json(path, obj):
    try:
        Path(path).write_text(json.dumps(obj, indent=2) + "\n")
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc}") from None


def _index_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CommandError(f"expected comma-separated indices, got {text!r}") from None


# -- input resolution --------------------------------------------------------


def _add_tournament_source(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tournament", metavar="FILE", help="tournament JSON file")
    g.add_argument("--paley", type=int, metavar="Q", help="Paley tournament on a prime Q = 3 mod 4")
    g.add_argument("--random", type=int, metavar="N", help="random tournament on N nodes (uses --seed)")


def _resolve_tournament(args, inputs, required=True):
    if args.tournament:
        data = _load_json(args.tournament)
        inputs["tournament"] = _digest(data)
        return tournament.Tournament.from_json(data)
    if args.paley is not None:
        return tournament.paley_tournament(args.paley)
    if args.random is not None:
        return tournament.random_tournament(args.random, args.seed)
    if required:
        raise CommandError("a tournament source is required (--tournament, --paley or --random)")
    return None


def _resolve_game(args, inputs):
    """A game from --game, or G(T, k) from a tournament source and --k."""
    if getattr(args, "game", None):
        data = _load_json(args.game)
        g = WinLoseGame.from_json(data)
        inputs["game"] = g.digest()
        return g, None
    T = _resolve_tournament(args, inputs, required=False)
    if T is None:
        raise CommandError("give --game FILE or a tournament source with --k")
    if args.k is None:
        raise CommandError("--k is required when building the game from a tournament")
    g, _ = auxgame.build_auxiliary_game(T, args.k)
    inputs["game"] = g.digest()
    return g, T


# -- commands ----------------------------------------------------------------


def cmd_gen_tournament(args, inputs):
    if args.kind == "paley":
        if args.q is None:
            raise CommandError("--q is required for a Paley tournament")
        T = tournament.paley_tournament(args.q)
    else:
        if args.n is None:
            raise CommandError("--n is required for a random tournament")
        T = tournament.random_tournament(args.n, args.seed)
    if args.save:
        _save_json(args.save, T.to_json())
    res = {
        "tournament": T.to_json(),
        "out_degrees": [T.out_degree(u) for u in range(T.n)],
    }
    return res, EXIT_OK


def cmd_build_game(args, inputs):
    T = _resolve_tournament(args, inputs)
    g, cmap = auxgame.build_auxiliary_game(T, args.k, max_columns=args.max_columns)
    if args.save:
        _save_json(args.save, g.to_json())
    res = {"m": g.m, "n": g.n, "k": args.k, "game_sha256": g.digest(), "column_order": "colex",
           "tournament": T.to_json()}
    if not args.save:
        res["game"] = g.to_json()
    return res, EXIT_OK


def cmd_check_coverage(args, inputs):
    g, T = _resolve_game(args, inputs)
    G = auxgame.game_to_digraph(g)
    k = args.cover_k if args.cover_k is not None else args.k
    if k is None:
        raise CommandError("--cover-k is required with --game")
    budget = args.budget or auxgame.DEFAULT_COVER_BUDGET
    if args.mode == "sufficient":
        if T is None:
            raise CommandError("sufficient mode needs a tournament source with --k")
        cert = auxgame.is_k_covered(G, k, "sufficient", tournament=T, construction_k=args.k, budget=budget)
    else:
        cert = auxgame.is_k_covered(G, k, "exact", budget=budget)
    code = {True: EXIT_OK, False: EXIT_VIOLATED, None: EXIT_BUDGET}[cert.holds]
    return {"certificate": cert.to_json()}, code


def cmd_check_cycles(args, inputs):
    g, _ = _resolve_game(args, inputs)
    G = auxgame.game_to_digraph(g)
    digon = auxgame.has_digon(G)
    cyc = auxgame.shortest_cycle(G)
    girth = None if cyc is None else len(cyc)
    ok = digon is None and (girth is None or girth > 4)
    res = {
        "digon": None if digon is None else [auxgame.vertex_json(v) for v in digon],
        "shortest_cycle_length": girth,
        "shortest_cycle": None if cyc is None else [auxgame.vertex_json(v) for v in cyc],
        "no_digon_no_4cycle": ok,
    }
    return res, EXIT_OK if ok else EXIT_VIOLATED


def _log_base(text):
    if text == "e":
        return "e"
    try:
        return int(text)
    except ValueError:
        return float(text)


def cmd_eval_bound(args, inputs):
    if args.N is None and args.n is None and not args.threshold:
        raise CommandError("give --N (union bound), --n (asymptotic inequality) or --threshold")
    res = {"k": args.k, "log_base": str(args.log_base)}
    verdicts = []
    if args.N is not None:
        v = auxgame.union_bound_value(args.N, args.k)
        res["union_bound"] = {"N": args.N, "value": frac_str(v), "value_float": float(v), "below_one": v < 1}
        verdicts.append(v < 1)
    if args.n is not None:
        left, right = auxgame.asymptotic_sides(args.n, args.k, args.log_base)
        holds = auxgame.check_asymptotic_inequality(args.n, args.k, args.log_base)
        res["asymptotic"] = {
            "n": args.n,
            "left": [mpf_str(left.a), mpf_str(left.b)],
            "right": [mpf_str(right.a), mpf_str(right.b)],
            "holds": holds,
        }
        verdicts.append(holds)
    if args.threshold:
        res["union_bound_threshold_N"] = auxgame.union_bound_threshold(args.k)
        res["asymptotic_threshold_n"] = auxgame.asymptotic_threshold(args.k, args.log_base)
    return res, EXIT_OK if all(verdicts) else EXIT_VIOLATED


def mpf_str(x):
    # interval endpoints come back as degenerate intervals
    return mpmath.nstr(mpmath.mpf(x), 20)


def cmd_min_eps(args, inputs):
    g, _ = _resolve_game(args, inputs)
    sp = equilibrium.SupportPair(_index_list(args.rows), _index_list(args.cols))
    res, lps = equilibrium.min_eps_for_supports(g, sp, return_lps=True)
    checks = [ratlp.verify(lp, sol) for lp, sol in lps]
    out = res.to_json()
    out["witness_eps"] = frac_str(equilibrium.wsne_epsilon(g, res.witness))
    out["lp_certificates_verified"] = all(checks)
    out["solver"] = ratlp.SOLVER_ID
    return out, EXIT_OK if all(checks) else EXIT_VIOLATED


def cmd_search_wsne(args, inputs):
    g, _ = _resolve_game(args, inputs)
    budget = args.budget or equilibrium.DEFAULT_SEARCH_BUDGET
    sr = equilibrium.best_wsne_up_to_support(g, args.max_support, budget=budget, seed=args.seed, jobs=args.jobs)
    out = sr.to_json()
    out["game_sha256"] = g.digest()
    return out, EXIT_OK if sr.exhaustive else EXIT_BUDGET


def cmd_certify(args, inputs):
    g, T = _resolve_game(args, inputs)
    cert = equilibrium.certify_no_small_wsne(g, args.s, tournament=T, construction_k=args.k,
                                             cover_budget=args.budget or auxgame.DEFAULT_COVER_BUDGET)
    out = cert.to_json()
    code = EXIT_OK if cert.holds else EXIT_VIOLATED
    if not cert.holds and cert.details["coverage"]["holds"] is None:
        code = EXIT_BUDGET
    return out, code


def cmd_verify_ch(args, inputs):
    budget = args.budget or extremal.DEFAULT_CH_BUDGET
    iso = {"auto": None, "on": True, "off": False}[args.isomorph_rejection]
    v = extremal.verify_bipartite_ch(args.k, args.d, args.property, budget=budget, isomorph_rejection=iso)
    code = {True: EXIT_OK, False: EXIT_VIOLATED, None: EXIT_BUDGET}[v.holds]
    return v.to_json(), code


def cmd_tight_example(args, inputs):
    H = extremal.sixcycle_blowup(args.t)
    girth = auxgame.shortest_cycle_length(H)
    res = {
        "t": args.t,
        "k": 3 * args.t,
        "min_in_degree": extremal.min_in_degree(H),
        "max_out_degree": extremal.max_out_degree(H),
        "shortest_cycle_length": girth,
        "has_cycle_le_4": extremal.has_short_cycle(H, 4) is not None,
    }
    ok = res["min_in_degree"] == args.t and girth == 6
    if args.save:
        _save_json(args.save, H.to_json())
    return res, EXIT_OK if ok else EXIT_VIOLATED


def _matching_pennies():
    return WinLoseGame([[1, 0], [0, 1]], [[0, 1], [1, 0]])


def cmd_blowup_demo(args, inputs):
    if args.game:
        g, _ = _resolve_game(args, inputs)
    else:
        g = _matching_pennies()
        inputs["game"] = g.digest()
    if args.profile:
        data = _load_json(args.profile)
        inputs["profile"] = _digest(data)
        prof = equilibrium.Profile.from_json(data)
    else:
        prof = equilibrium.Profile(equilibrium.MixedStrategy.uniform_on(g.m, range(g.m)),
                                   equilibrium.MixedStrategy.uniform_on(g.n, range(g.n)))
    eps = equilibrium.wsne_epsilon(g, prof)
    W = extremal.profile_to_weighted_graph(g, prof)
    L = args.L or W.default_scale()
    H = extremal.blowup(W, L)
    mind = extremal.min_in_degree(H)
    cyc = extremal.has_short_cycle(H, 4)
    res = {
        "eps": frac_str(eps),
        "supports": {"S1": list(W.left_labels), "S2": list(W.right_labels)},
        "L": L,
        "blowup_size": [H.left_size, H.right_size],
        "min_in_degree": mind,
        "min_in_degree_exceeds_L_over_3": 3 * mind > L,
        "short_cycle": None if cyc is None else [auxgame.vertex_json(v) for v in cyc],
    }
    # eps < 2/3 with every best response worth 1 forces in-degree > L/3 and a short cycle
    below = eps < Fraction(2, 3)
    res["eps_below_two_thirds"] = below
    consistent = (not below) or cyc is not None
    res["pipeline_consistent"] = consistent
    return res, EXIT_OK if consistent else EXIT_VIOLATED


def cmd_check_conjecture(args, inputs):
    if args.digraph:
        data = _load_json(args.digraph)
        inputs["digraph"] = _digest(data)
        D = extremal.GeneralDigraph.from_json(data)
    else:
        T = _resolve_tournament(args, inputs)
        D = extremal.GeneralDigraph.from_tournament(T)
    verdict, witness = extremal.check_conjecture_dmp(D)
    res = {"n": D.n, "verdict": verdict, "witness": witness}
    if verdict == extremal.COUNTEREXAMPLE:
        log.error("digraph has no cycle of length <= 3 and no undominated triple")
        res["digraph"] = D.to_json()
        return res, EXIT_VIOLATED
    return res, EXIT_OK


# -- parser and report -------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for enumerations")
    common.add_argument("--budget", type=int, default=None, help="work limit; command-specific default")
    common.add_argument("--out", metavar="FILE", help="write the run report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wsne", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tournament", parents=[common], help="generate a random or Paley tournament")
    p.add_argument("--kind", choices=("random", "paley"), default="random")
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--save", metavar="FILE", help="also write the tournament JSON here")
    p.set_defaults(func=cmd_gen_tournament)

    p = sub.add_parser("build-game", parents=[common], help="build the auxiliary game G(T, k)")
    _add_tournament_source(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-columns", type=int, default=auxgame.DEFAULT_MAX_COLUMNS)
    p.add_argument("--save", metavar="FILE", help="write the game JSON here")
    p.set_defaults(func=cmd_build_game)

    def game_source(p, need_k=False):
        p.add_argument("--game", metavar="FILE", help="game JSON file")
        _add_tournament_source(p)
        p.add_argument("--k", type=int, help="column size when building G(T, k) from a tournament")

    p = sub.add_parser("check-coverage", parents=[common], help="check k-coverage of a game digraph")
    game_source(p)
    p.add_argument("--cover-k", type=int, help="set size to cover (default: --k)")
    p.add_argument("--mode", choices=("exact", "sufficient"), default="exact")
    p.set_defaults(func=cmd_check_coverage)

    p = sub.add_parser("check-cycles", parents=[common], help="look for digons and short cycles")
    game_source(p)
    p.set_defaults(func=cmd_check_cycles)

    p = sub.add_parser("eval-bound", parents=[common], help="evaluate the union-bound inequalities")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--N", type=int, help="tournament size for the exact union bound")
    p.add_argument("--n", type=int, help="column count for the asymptotic inequality")
    p.add_argument("--log-base", type=_log_base, default="e", help="'e' (default), 2, ...")
    p.add_argument("--threshold", action="store_true", help="scan for the first N / n where each holds")
    p.set_defaults(func=cmd_eval_bound)

    p = sub.add_parser("min-eps", parents=[common], help="exact minimum epsilon for given supports")
    game_source(p)
    p.add_argument("--rows", required=True, help="row support, e.g. 0,2")
    p.add_argument("--cols", required=True, help="column support, e.g. 1,3")
    p.set_defaults(func=cmd_min_eps)

    p = sub.add_parser("search-wsne", parents=[common], help="best epsilon over bounded supports")
    game_source(p)
    p.add_argument("--max-support", type=int, required=True)
    p.set_defaults(func=cmd_search_wsne)

    p = sub.add_parser("certify", parents=[common], help="certify no small-support WSNE below 1")
    game_source(p)
    p.add_argument("--s", type=int, default=2, help="support size bound (default 2)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify-ch", parents=[common], help="exhaustive bipartite short-cycle threshold check")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True, help="minimum in-degree")
    p.add_argument("--property", choices=(extremal.CYCLE_LE_4, extremal.PURE_4_CYCLE), default=extremal.CYCLE_LE_4)
    p.add_argument("--isomorph-rejection", choices=("auto", "on", "off"), default="auto")
    p.set_defaults(func=cmd_verify_ch)

    p = sub.add_parser("tight-example", parents=[common], help="6-cycle blow-up with in-degree k/3")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--save", metavar="FILE")
    p.set_defaults(func=cmd_tight_example)

    p = sub.add_parser("blowup-demo", parents=[common], help="profile -> weighted graph -> blow-up pipeline")
    p.add_argument("--game", metavar="FILE", help="game JSON (default: matching pennies)")
    p.add_argument("--profile", metavar="FILE", help="profile JSON (default: uniform)")
    p.add_argument("--L", type=int, help="blow-up scale (default: lcm of denominators)")
    p.set_defaults(func=cmd_blowup_demo, paley=None, random=None, tournament=None, k=None)

    p = sub.add_parser("check-conjecture", parents=[common], help="short cycle or undominated triple")
    p.add_argument("--digraph", metavar="FILE", help="digraph JSON {n, arcs}")
    _add_tournament_source(p)
    p.set_defaults(func=cmd_check_conjecture)
    return parser


def _parameters(args):
    skip = {"func", "out", "format", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _flatten(prefix, obj, rows):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for t, v in enumerate(obj):
            _flatten(f"{prefix}.{t}", v, rows)
    else:
        rows.append((prefix, json.dumps(obj) if isinstance(obj, list) else obj))


def render(report, fmt) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows = []
    _flatten("", report, rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerows(rows)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    inputs = {}
    t0 = time.perf_counter()
    try:
        results, code = args.func(args, inputs)
    except (CommandError, InvalidParameter, CapacityError) as exc:
        print(f"wsne {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WsneError as exc:
        print(f"wsne {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    report = {
        "command": args.command,
        "parameters": _parameters(args),
        "inputs": inputs,
        "prng": {"id": tournament.PRNG_ID, "seed": args.seed},
        "results": results,
        "exit_code": code,
        "version": __version__,
        "wall_time": round(time.perf_counter() - t0, 6),
    }
    text = render(report, args.format)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"wsne {args.command}: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
