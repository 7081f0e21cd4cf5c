"""Command line: adlab gen|separate|encode|verify|ranks|refine.

Exit codes: 0 certified, 1 refuted or nothing found, 2 usage or I/O error.
Every JSON document carries a "type" field so ``verify`` can dispatch on it.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import generators as gen
from .errors import AdlabError, WitnessExhausted
from .forcing import Avoid, EscapeWitness, Hit, generic_run, in_ideal, replay_trace
from .lazyset import AdFamily, check_promises, from_json as set_from_json
from .omega_tree import ad_check_subtrees, tree_from_json, validate_tree
from .ranks import RankInstance, check_table, compute_ranks, validate_instance
from .separation import SeparationInstance, SeparatorCertificate, refine_to_ad, verify_separator
from .topology import (LeveledBase, Space, build_leveled_base, check_urysohn_witness, encode_tree,
                       gdelta_from_separator, separator_for, validate_space, verify_leveled_base)
from .verdict import certified, violated

EXIT_OK, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---- I/O --------------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def write_json(obj, path: str | None) -> None:
    text = dumps(obj)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".adlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str | None):
    if path is None:
        raise UsageError("--in is required")
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from e


def expect(obj, *types: str) -> dict:
    if not isinstance(obj, dict) or obj.get("type") not in types:
        raise UsageError(f"expected a document of type {' or '.join(types)}")
    return obj


# ---- encodings --------------------------------------------------------------

def instance_to_json(inst: SeparationInstance) -> dict:
    return {"type": "instance", "tree": inst.tree.to_json(), "family": inst.family.to_json(),
            "targets": sorted(inst.targets)}


def instance_from_json(obj) -> SeparationInstance:
    tree = tree_from_json(obj["tree"])
    fam = AdFamily.from_json(obj["family"], tree)
    return SeparationInstance(fam, frozenset(int(t) for t in obj["targets"]), tree)


def rank_instance_to_json(inst: RankInstance) -> dict:
    return {"type": "rank_instance", "tree": inst.tree.to_json(), "depth": inst.depth,
            "avoided": [sorted(a) for a in inst.avoided],
            "bases": {str(l): sorted(list(s) for s in b) for l, b in sorted(inst.bases.items())},
            "theta": inst.theta}


def rank_instance_from_json(obj) -> RankInstance:
    return RankInstance(tree_from_json(obj["tree"]), int(obj["depth"]),
                        [frozenset(int(x) for x in a) for a in obj.get("avoided", [])],
                        {l: frozenset(tuple(int(c) for c in s) for s in b) for l, b in obj["bases"].items()},
                        int(obj.get("theta", 2)))


# ---- commands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    seed = args.seed
    if args.kind == "tree":
        tree = gen.random_tree(seed, args.branching).truncated(args.depth)
        out = {"type": "tree", "tree": tree.to_json(), "depth": args.depth}
    elif args.kind == "family":
        fam = gen.random_omega_family(seed, args.members)
        out = {"type": "family", "family": fam.to_json(), "depth": args.depth}
    elif args.kind == "space":
        sp = gen.random_space(seed, kind=args.space_kind) if args.points is None else (
            gen.discrete_space(args.points) if args.space_kind in (None, "discrete")
            else gen.rationals_space(args.points, gen.make_rng(seed, "space")))
        out = {"type": "space", **sp.to_json()}
    elif args.kind == "instance":
        inst = gen.random_tree_family(seed, args.members, args.branching, args.targets)
        out = instance_to_json(inst)
    elif args.kind == "ranks":
        out = rank_instance_to_json(gen.random_rank_instance(seed))
    else:  # sets
        rng = gen.make_rng(seed, "sets")
        out = {"type": "sets", "sets": [gen.random_lazy_set(rng).to_json() for _ in range(args.members)]}
    v = _verify_doc(out, args)
    if not v:
        print(f"generated {args.kind} failed validation: {v}", file=sys.stderr)
        return EXIT_REFUTED
    write_json(out, args.out)
    return EXIT_OK


def _separate(inst: SeparationInstance, args):
    """Run the engine; returns (certificate document, None) or (None, refutation)."""
    tree, fam = inst.tree, inst.family
    horizon = tree.offset(args.depth)
    v = check_promises(fam, horizon)
    if not v:
        return None, {"reason": "promise", "witness": v.witness}
    others = inst.others
    for y in sorted(inst.targets):
        probe = in_ideal(fam[y], fam, others, 0, horizon)
        if probe:
            return None, {"reason": "target covered by the other members", "target": y}
    tasks = [Avoid(z) for z in others] + [Hit(EscapeWitness(fam[y], tree), target=y) for y in sorted(inst.targets)]
    try:
        res = generic_run(tree, fam, tasks, args.fuel)
    except WitnessExhausted as e:
        return None, {"reason": "witness exhausted", "detail": str(e)}
    stem = res.final.stem
    depth = max(horizon, tree.offset(max(tree.height(c) for c in stem) + 1) if stem else 0)
    doc = {"type": "certificate", "instance": instance_to_json(inst),
           "certificate": res.certificate.to_json(), "depth": depth, "k": args.k}
    v = verify_separator(inst, res.certificate, depth, args.k)
    r = replay_trace(tree, fam, res.trace)
    if not (v and r):
        bad = v if not v else r
        return None, {"reason": "verification failed", "witness": bad.witness, "trace": res.trace}
    return doc, None


def cmd_separate(args) -> int:
    inst = instance_from_json(expect(read_json(args.input), "instance"))
    doc, refutation = _separate(inst, args)
    if doc is None:
        write_json({"type": "refutation", **refutation}, args.out)
        return EXIT_REFUTED
    write_json(doc, args.out)
    return EXIT_OK


def _encoding_doc(sp: Space) -> dict:
    pairs = list(sp.urysohn_pairs)
    lb = build_leveled_base(sp, pairs)
    enc = encode_tree(sp, lb, pairs)
    return {"type": "encoding", "space": sp.to_json(), "leveled_base": lb.to_json(),
            "encoding": enc.to_json()}


def _round_trip(sp: Space, tau: int):
    """Every subset A is recovered as the intersection of the W_F.

    D is finite, so tau is capped by the smallest |T_x & D| over x in A.
    """
    pairs = list(sp.urysohn_pairs)
    enc = encode_tree(sp, build_leveled_base(sp, pairs), pairs)
    for mask in range(1 << sp.n):
        A = [x for x in range(sp.n) if mask >> x & 1]
        D = separator_for(enc, A)
        room = min((sum(1 for t in D if t in enc.subtrees[x]) for x in A), default=tau)
        v = gdelta_from_separator(enc, D, A, min(tau, room)).verdict
        if not v:
            return violated((A, v.witness), "subset not recovered")
    return certified()


def cmd_encode(args) -> int:
    obj = expect(read_json(args.input), "space")
    sp = Space.from_json(obj)
    v = _verify_doc(obj, args)
    if not v:
        write_json({"type": "refutation", "reason": "not a certified presentation", "witness": v.witness}, args.out)
        return EXIT_REFUTED
    doc = _encoding_doc(sp)
    v = _verify_doc(doc, args)
    if v and sp.n <= 10:
        v = _round_trip(sp, args.tau)
    if not v:
        write_json({"type": "refutation", "reason": "encoding failed", "witness": v.witness}, args.out)
        return EXIT_REFUTED
    write_json(doc, args.out)
    return EXIT_OK


def _rank_doc(inst: RankInstance) -> dict:
    return {"type": "rank_table", "instance": rank_instance_to_json(inst),
            "table": compute_ranks(inst).to_json()}


def cmd_ranks(args) -> int:
    if args.input is None:
        inst = gen.random_rank_instance(args.seed)
    else:
        inst = rank_instance_from_json(expect(read_json(args.input), "rank_instance"))
    if args.theta is not None:
        inst = RankInstance(inst.tree, inst.depth, inst.avoided, inst.bases, args.theta)
    v = validate_instance(inst)
    if not v:
        write_json({"type": "refutation", "reason": "invalid base stem", "witness": v.witness}, args.out)
        return EXIT_REFUTED
    doc = _rank_doc(inst)
    write_json(doc, args.out)
    return EXIT_OK if _verify_doc(doc, args) else EXIT_REFUTED


def _refine_doc(sets, depth: int) -> dict:
    refined = refine_to_ad(sets, depth)
    return {"type": "refinement", "sets": [s.to_json() for s in sets], "depth": depth,
            "refined": [r.elements_below(depth) for r in refined]}


def cmd_refine(args) -> int:
    if args.input is None:
        rng = gen.make_rng(args.seed, "sets")
        sets = [gen.random_lazy_set(rng) for _ in range(args.members)]
    else:
        sets = [set_from_json(s) for s in expect(read_json(args.input), "sets")["sets"]]
    doc = _refine_doc(sets, args.depth)
    write_json(doc, args.out)
    return EXIT_OK if _verify_doc(doc, args) else EXIT_REFUTED


# ---- verification -----------------------------------------------------------

def _verify_doc(obj, args):
    """Re-check a document with the validator of its type."""
    kind = obj.get("type")
    if kind == "tree":
        return validate_tree(tree_from_json(obj["tree"]), int(obj["depth"]))
    if kind == "family":
        tree_free = AdFamily.from_json(obj["family"])
        return check_promises(tree_free, int(obj.get("depth", 64)))
    if kind == "space":
        sp = Space.from_json(obj)
        v = validate_space(sp)
        return v if not v else check_urysohn_witness(sp, sp.urysohn_pairs)
    if kind == "instance":
        inst = instance_from_json(obj)
        return check_promises(inst.family, inst.tree.offset(gen.DIVERGE_BY))
    if kind == "certificate":
        inst = instance_from_json(obj["instance"])
        cert = SeparatorCertificate.from_json(obj["certificate"], inst.tree)
        return verify_separator(inst, cert, int(obj["depth"]), int(obj["k"]))
    if kind == "encoding":
        sp = Space.from_json(obj["space"])
        pairs = list(sp.urysohn_pairs)
        lb = LeveledBase.from_json(obj["leveled_base"])
        report = verify_leveled_base(sp, lb, pairs)
        if not report.ok:
            return violated("leveled base", "leveled-base properties fail")
        if _encoding_doc(sp) != obj:
            return violated("mismatch", "encoding differs from a fresh build")
        enc = encode_tree(sp, lb, pairs)
        top = len(lb.levels) + 1
        for (x, y), b in enc.bounds.items():
            v = ad_check_subtrees(enc.subtrees[x], enc.subtrees[y], b, top)
            if not v:
                return violated((x, y, v.witness), "subtrees meet above their bound")
        return certified()
    if kind == "rank_table":
        inst = rank_instance_from_json(obj["instance"])
        v = check_table(compute_ranks(inst))
        if not v:
            return v
        return certified() if _rank_doc(inst) == obj else violated("mismatch", "table differs from recomputation")
    if kind == "rank_instance":
        return validate_instance(rank_instance_from_json(obj))
    if kind == "refinement":
        depth = int(obj["depth"])
        sets = [set_from_json(s) for s in obj["sets"]]
        refined = [list(r) for r in obj["refined"]]
        if len(refined) != len(sets):
            return violated("count", "one refined set per input needed")
        seen = {}
        for i, (r, s) in enumerate(zip(refined, sets)):
            for x in r:
                if x >= depth or x not in s:
                    return violated((i, x), "refined element outside its source")
                if x in seen:
                    return violated((seen[x], i, x), "refined sets overlap")
                seen[x] = i
        return certified() if _refine_doc(sets, depth) == obj else violated("mismatch", "refinement differs")
    if kind == "sets":
        for i, s in enumerate(obj["sets"]):
            if not set_from_json(s).infinite:
                return violated(i, "set carries no infinitude witness")
        return certified()
    raise UsageError(f"unknown document type {kind!r}")


def cmd_verify(args) -> int:
    obj = read_json(args.input)
    if not isinstance(obj, dict):
        raise UsageError("expected a JSON object")
    v = _verify_doc(obj, args)
    print("Certified" if v else f"Violated: {v.witness} ({v.reason})")
    return EXIT_OK if v else EXIT_REFUTED


# ---- entry point ------------------------------------------------------------

def positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def seed64(text: str) -> int:
    n = int(text)
    if not 0 <= n < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=seed64, default=0)
    common.add_argument("--depth", type=positive, default=30)
    common.add_argument("--fuel", type=positive, default=200)
    common.add_argument("--theta", type=positive, default=None)
    common.add_argument("--tau", type=positive, default=1)
    common.add_argument("--k", type=positive, default=10)
    common.add_argument("--in", dest="input", default=None, help="input JSON path ('-' for stdin)")
    common.add_argument("--out", default=None, help="output JSON path (stdout if omitted)")

    p = argparse.ArgumentParser(prog="adlab", description="Almost disjoint families at desk scale.")
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gen", parents=[common], help="generate a seeded instance")
    g.add_argument("kind", choices=("tree", "family", "space", "instance", "ranks", "sets"))
    g.add_argument("--branching", type=positive, default=3)
    g.add_argument("--members", type=positive, default=6)
    g.add_argument("--targets", type=positive, default=2)
    g.add_argument("--points", type=positive, default=None)
    g.add_argument("--space-kind", choices=("discrete", "rationals"), default=None)
    sub.add_parser("separate", parents=[common], help="build and verify a weak separator")
    sub.add_parser("encode", parents=[common], help="encode a space as subtrees")
    sub.add_parser("verify", parents=[common], help="re-verify any output document")
    sub.add_parser("ranks", parents=[common], help="compute a rank table")
    r = sub.add_parser("refine", parents=[common], help="refine sets to a disjoint family")
    r.add_argument("--members", type=positive, default=4)
    return p


COMMANDS = {"gen": cmd_gen, "separate": cmd_separate, "encode": cmd_encode, "verify": cmd_verify,
            "ranks": cmd_ranks, "refine": cmd_refine}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"adlab: {e}", file=sys.stderr)
    except (KeyError, TypeError, ValueError, IndexError, AttributeError, AdlabError) as e:
        print(f"adlab: malformed input: {type(e).__name__}: {e}", file=sys.stderr)
    except OSError as e:
        print(f"adlab: {e}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
