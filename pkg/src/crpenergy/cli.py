"""Command-line harness: ``crpenergy {train,evaluate,report,calibrate,generate,trace}``.

Exit codes: 0 success, 2 usage or configuration error, 3 dataset problem,
4 infeasible instance (deadlock), 5 missing run artifacts.

Instance sources are either a path (directory, zip or tar archive, or a
single instance file) or ``gen:KIND:COUNT:SEED`` for a generated set.
Relative paths that do not exist are looked up under ``$CRPENERGY_DATA``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from crpenergy import errors, gp, grh
from crpenergy.energy import (
    LIFT_MODES,
    calibrate,
    candidate_space,
    config_as_dict,
    dump_config,
    load_config,
)
from crpenergy.evolution import REPRESENTATIONS, RunConfig, evolve
from crpenergy.fast import STATUS_NAMES, Evaluator
from crpenergy.instances import (
    DATA_ENV,
    attach_weights,
    generate_training_set,
    load_adapted_dataset,
    parse_any,
    write_instances,
)
from crpenergy.rules import BUILTINS, SCHEMES, GPRule, GRHRule, format_trace, run_scheme
from crpenergy.stats import ALPHA, ResultSample, dunn_bonferroni, kruskal_wallis, summarize

EXIT_OK, EXIT_CONFIG, EXIT_DATASET, EXIT_INFEASIBLE, EXIT_ARTIFACTS = 0, 2, 3, 4, 5
REFERENCE_TARGETS = {"tlp": 2416040.0, "ri": 2277610.0}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# -- shared helpers -----------------------------------------------------------


def resolve_instances(source, weights_seed=None, require_weights=True):
    """Load instances from ``gen:KIND:COUNT:SEED`` or a filesystem source."""
    if source.startswith("gen:"):
        try:
            _, kind, count, seed = source.split(":")
            insts = generate_training_set(kind, int(count), int(seed))
        except ValueError as exc:
            raise CliError(f"bad generator source {source!r}: {exc}", EXIT_CONFIG) from None
        return insts
    path = Path(source)
    if not path.exists() and not path.is_absolute() and os.environ.get(DATA_ENV):
        path = Path(os.environ[DATA_ENV]) / source
    if path.is_dir() and not any(p.is_file() and not p.name.startswith(".") for p in path.rglob("*")):
        insts = []
    elif path.is_file() and not _is_archive(path):
        insts = [parse_any(path.read_text(), path.stem)]
    else:
        insts = load_adapted_dataset(path, require_weights=False)
    if weights_seed is not None:
        insts = [i if i.weights else attach_weights(i, weights_seed) for i in insts]
    if require_weights:
        missing = [i.id for i in insts if i.weights is None]
        if missing:
            raise errors.DatasetUnavailable(f"{missing[0]}: no container weights (use --weights-seed)")
    return insts


def _is_archive(path):
    import tarfile
    import zipfile

    return zipfile.is_zipfile(path) or tarfile.is_tarfile(path)


def energy_config(args):
    return load_config(args.config) if args.config else load_config()


def load_rule(spec):
    """A builtin name, a genome file (``.sexp`` tree or ``.csv`` GRH vector) or a run-rep directory."""
    if spec in BUILTINS:
        return BUILTINS[spec]()
    path = Path(spec)
    if path.is_dir():
        for name in ("best.sexp", "best.csv"):
            if (path / name).exists():
                path = path / name
                break
        else:
            raise errors.MissingArtifacts(f"{spec}: no best.sexp or best.csv")
    if not path.exists():
        raise CliError(f"unknown rule {spec!r}: not a builtin ({', '.join(BUILTINS)}) or file", EXIT_CONFIG)
    text = path.read_text()
    if path.suffix == ".csv":
        return GRHRule(grh.parse_params(text))
    return GPRule(gp.parse_sexpr(text.strip()))


def _rep_seed(seed, rep):
    return int(np.random.SeedSequence([seed, rep]).generate_state(1)[0])


def _chunks(n, parts):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def _pool(jobs):
    return ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None


def _map(jobs, fn, items):
    # Results always come back in submission order, so output is independent of --jobs.
    pool = _pool(jobs)
    if pool is None:
        return [fn(x) for x in items]
    with pool:
        return list(pool.map(fn, items))


# -- train --------------------------------------------------------------------


def _train_rep(task):
    method, scheme, rep, seed, run_kw, train, test, cfg, all_genes = task
    rep_cls = REPRESENTATIONS[method]
    representation = rep_cls(mutate_all_genes=all_genes) if method == "grh-ga" else rep_cls()
    config = RunConfig(scheme=scheme, seed=seed, **run_kw)
    res = evolve(config, representation, Evaluator(train, cfg))
    ext = "sexp" if method == "gp" else "csv"
    result = {
        "method": method,
        "scheme": scheme,
        "rep": rep,
        "seed": seed,
        "evaluations": res.evaluations,
        "train_fitness": res.best.fitness,
        "train_instances": len(train),
    }
    if test is not None:
        out = Evaluator(test, cfg).run(representation.to_pf(res.best.genome), scheme)
        if not out.ok:
            raise errors.InfeasibleGenomeEvaluation(test[int(np.flatnonzero(out.status)[0])].id)
        result["test_total"] = out.total
        result["test_instances"] = len(test)
    genomes = "".join(
        f"{e}\t{representation.dumps(g).strip().replace(chr(10), ' | ')}\n" for e, _, g in res.log.samples
    )
    return {
        "config.json": json.dumps({"run": config.as_dict(), "method": method, "energy": config_as_dict(cfg)}, indent=2) + "\n",
        f"best.{ext}": representation.dumps(res.best.genome),
        "convergence.csv": res.log.to_csv(),
        "convergence_genomes.txt": genomes,
        "result.json": json.dumps(result, indent=2) + "\n",
        "runtime.txt": f"{res.runtime:.3f}\n",
    }


def _baseline_rep(method, scheme, train, test, cfg):
    pf = BUILTINS[method]()
    result = {"method": method, "scheme": scheme, "rep": 0, "seed": None}
    for name, insts in (("train", train), ("test", test)):
        if insts is None:
            continue
        out = Evaluator(insts, cfg).run(pf, scheme)
        if not out.ok:
            raise errors.InfeasibleGenomeEvaluation(insts[int(np.flatnonzero(out.status)[0])].id)
        result[f"{name}_fitness" if name == "train" else "test_total"] = out.total
        result[f"{name}_instances"] = len(insts)
    return {
        "config.json": json.dumps({"method": method, "scheme": scheme, "energy": config_as_dict(cfg)}, indent=2) + "\n",
        "result.json": json.dumps(result, indent=2) + "\n",
        "runtime.txt": "0.000\n",
    }


def cmd_train(args):
    if args.reps < 1:
        raise CliError("--reps must be >= 1", EXIT_CONFIG)
    cfg = energy_config(args)
    train_src = args.train or f"gen:caserta-like:50:{args.seed}"
    train = resolve_instances(train_src, args.weights_seed)
    test = resolve_instances(args.test, args.weights_seed) if args.test else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.method in BUILTINS:
        # deterministic rules: one repetition carries all the information
        reps = [_baseline_rep(args.method, args.scheme, train, test, cfg)]
    else:
        run_kw = {
            "population_size": args.pop,
            "max_evaluations": args.evals,
            "mutation_probability": args.mutation_prob,
            "init_counts": not args.no_init_count,
            "log_interval": args.log_interval,
        }
        RunConfig(scheme=args.scheme, **run_kw)  # validate before spawning workers
        if args.pop > args.evals and not args.no_init_count:
            raise errors.BudgetTooSmall(f"--evals {args.evals} < --pop {args.pop}")
        tasks = [
            (args.method, args.scheme, r, _rep_seed(args.seed, r), run_kw, train, test, cfg, args.all_genes)
            for r in range(args.reps)
        ]
        reps = _map(args.jobs, _train_rep, tasks)
    run = {
        "method": args.method,
        "scheme": args.scheme,
        "seed": args.seed,
        "reps": len(reps),
        "train": train_src,
        "test": args.test,
    }
    (out / "run.json").write_text(json.dumps(run, indent=2) + "\n")
    for r, files in enumerate(reps):
        d = out / f"rep-{r:02d}"
        d.mkdir(exist_ok=True)
        for name, text in files.items():
            (d / name).write_text(text)
    totals = [json.loads(f["result.json"]).get("test_total") for f in reps]
    line = f"{args.method}-{args.scheme}: {len(reps)} rep(s) written to {out}"
    if all(t is not None for t in totals):
        line += f"; test totals {', '.join(f'{t:.0f}' for t in totals)}"
    print(line)
    return EXIT_OK


# -- evaluate -----------------------------------------------------------------


def _evaluate_chunk(task):
    insts, rule, scheme, cfg = task
    res = Evaluator(insts, cfg).run(load_rule(rule), scheme)
    return [
        (i.id, int(m), int(r), float(e), int(s))
        for i, m, r, e, s in zip(insts, res.moves, res.relocations, res.energies, res.status)
    ]


def evaluate_rows(insts, rule, scheme, cfg, jobs=1):
    chunks = _chunks(len(insts), max(1, jobs)) if insts else []
    parts = _map(jobs, _evaluate_chunk, [(insts[a:b], rule, scheme, cfg) for a, b in chunks])
    return [row for part in parts for row in part]


def cmd_evaluate(args):
    cfg = energy_config(args)
    load_rule(args.rule)  # fail fast on a bad rule spec
    insts = resolve_instances(args.test or os.environ.get(DATA_ENV) or _missing_test(), args.weights_seed)
    rows = evaluate_rows(insts, args.rule, args.scheme, cfg, args.jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance_id", "moves", "relocations", "total_energy"])
    total, failed = 0.0, []
    for iid, moves, rel, energy, status in rows:
        if status:
            failed.append(iid)
            w.writerow([iid, moves, rel, STATUS_NAMES[status]])
        else:
            total += energy
            w.writerow([iid, moves, rel, repr(energy)])
    summary = f"total {total:.6f} instances {len(rows)} failed {len(failed)}"
    if args.target is not None:
        summary += f" target {args.target:.0f} deviation {100 * (total - args.target) / args.target:+.3f}%"
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        print(summary)
    else:
        sys.stdout.write(buf.getvalue())
        print(summary, file=sys.stderr)
    for iid in failed:
        print(f"deadlock on instance {iid}", file=sys.stderr)
    return EXIT_INFEASIBLE if failed else EXIT_OK


def _missing_test():
    raise errors.DatasetUnavailable(f"no --test source given and ${DATA_ENV} is unset")


# -- report -------------------------------------------------------------------


def _read_runs(dirs):
    runs = []
    for d in dirs:
        d = Path(d)
        meta = d / "run.json"
        if not meta.exists():
            raise errors.MissingArtifacts(f"{d}: run.json not found")
        run = json.loads(meta.read_text())
        reps = []
        for r in range(run["reps"]):
            rd = d / f"rep-{r:02d}"
            if not (rd / "result.json").exists():
                raise errors.MissingArtifacts(f"{rd}: result.json not found")
            res = json.loads((rd / "result.json").read_text())
            res["dir"] = rd
            res["runtime"] = float((rd / "runtime.txt").read_text()) if (rd / "runtime.txt").exists() else None
            reps.append(res)
        label = f"{run['method']}-{run['scheme'][0].upper()}"
        runs.append({"label": label, "run": run, "reps": reps, "dir": d})
    seen = {}
    for r in runs:
        n = seen.get(r["label"], 0)
        seen[r["label"]] = n + 1
        if n:
            r["label"] = f"{r['label']}#{n + 1}"
    return runs


def _fmt(v):
    return f"{v:.0f}" if abs(v) >= 100 else f"{v:.4g}"


def _markdown(header, rows):
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines)


def build_report(runs, alpha=ALPHA, test=None, cfg=None, jobs=1):
    """Return ``{filename: text}`` for the summary, significance, census and runtime tables."""
    files, md, notices = {}, [], []
    samples = []
    for r in runs:
        vals = [rep.get("test_total") for rep in r["reps"]]
        key = "test_total"
        if any(v is None for v in vals):
            vals = [rep["train_fitness"] for rep in r["reps"]]
            key = "train_fitness"
            notices.append(f"{r['label']}: no test totals recorded, summarising training fitness")
        samples.append(ResultSample(r["label"], vals))
        r["value_key"] = key
    rows = []
    for s in samples:
        mn, med, mx, sd = summarize(s)
        rows.append([s.method, len(s.values), _fmt(mn), _fmt(med), _fmt(mx), _fmt(sd)])
    header = ["method", "n", "min", "median", "max", "sd"]
    files["summary.csv"] = _csv([header] + [[s.method, len(s.values), *map(repr, summarize(s))] for s in samples])
    md += ["## Summary", "", _markdown(header, rows), ""]

    if len(samples) < 2:
        notices.append("significance matrix omitted: fewer than two methods")
    else:
        h, p = kruskal_wallis(samples)
        md += [f"Kruskal-Wallis H = {h:.4f}, p = {p:.4g}", ""]
        files["kruskal.csv"] = _csv([["H", "p"], [repr(h), repr(p)]])
        if p < alpha:
            d = dunn_bonferroni(samples, alpha)
            mat = [[m] + d.relations[i] for i, m in enumerate(d.methods)]
            files["relations.csv"] = _csv([[""] + d.methods] + mat)
            md += ["## Pairwise comparisons", "", "`>` row significantly better (lower energy), `<` worse, `≈` no significant difference.", ""]
            md += [_markdown([""] + d.methods, mat), ""]
        else:
            notices.append(f"significance matrix omitted: Kruskal-Wallis p = {p:.4g} >= {alpha}")

    trees = []
    for r in runs:
        if r["run"]["method"] == "gp":
            for rep in r["reps"]:
                trees.append(gp.parse_sexpr((rep["dir"] / "best.sexp").read_text().strip()))
    if trees:
        census = gp.node_census(trees)
        ordered = [(lab, census.get(lab, 0)) for lab in gp.LABELS]
        files["node_census.csv"] = _csv([["label", "count"]] + [list(x) for x in ordered])
        md += ["## Node census (best GP trees)", "", _markdown(["label", "count"], ordered), ""]

    rt_rows = []
    for r in runs:
        t = [rep["runtime"] for rep in r["reps"] if rep.get("runtime") is not None]
        if t and r["run"]["method"] not in BUILTINS:
            rt_rows.append([r["label"], len(t), f"{min(t):.2f}", f"{sum(t) / len(t):.2f}", f"{max(t):.2f}"])
    if rt_rows:
        header = ["method", "n", "min_s", "mean_s", "max_s"]
        files["runtime.csv"] = _csv([header] + rt_rows)
        md += ["## Runtime (seconds per run)", "", _markdown(header, rt_rows), ""]

    if test is not None:
        rows = [["method", "rep", "evaluations", "test_total"]]
        for r in runs:
            if r["run"]["method"] in BUILTINS:
                continue
            rep_cls = REPRESENTATIONS[r["run"]["method"]]()
            ev = Evaluator(test, cfg)
            for rep in r["reps"]:
                for line in (rep["dir"] / "convergence_genomes.txt").read_text().splitlines():
                    e, text = line.split("\t", 1)
                    g = rep_cls.loads(text.replace(" | ", "\n"))
                    rows.append([r["label"], rep["rep"], e, repr(ev.total(rep_cls.to_pf(g), r["run"]["scheme"]))])
        files["test_convergence.csv"] = _csv(rows)

    if notices:
        md += ["## Notices", ""] + [f"- {n}" for n in notices] + [""]
    files["report.md"] = "\n".join(md)
    return files


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_report(args):
    runs = _read_runs(args.runs)
    cfg = energy_config(args)
    test = resolve_instances(args.test, args.weights_seed) if args.test else None
    files = build_report(runs, args.alpha, test, cfg)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    print(files["report.md"])
    return EXIT_OK


# -- calibrate / generate / trace --------------------------------------------


def cmd_calibrate(args):
    base = energy_config(args)
    insts = resolve_instances(args.dataset or os.environ.get(DATA_ENV) or _missing_test(), args.weights_seed)
    modes = tuple(args.lift_modes.split(","))
    bad = [m for m in modes if m not in LIFT_MODES]
    if bad:
        raise CliError(f"unknown lift mode(s): {bad}", EXIT_CONFIG)
    target = args.target if args.target is not None else REFERENCE_TARGETS[args.rule]
    pf = BUILTINS[args.rule]()

    def total(kin):
        return Evaluator(insts, replace(base, kinematics=kin)).total(pf)

    best, totals = calibrate(candidate_space(modes), total, target)
    for kin, t in totals.items():
        mark = "*" if kin == best else " "
        print(
            f"{mark} lift={kin.lift_mode:6s} empty={int(kin.count_empty_moves)} initial={int(kin.count_initial_approach)} "
            f"truck_tier={kin.truck_tier} total={t:.1f} dev={100 * (t - target) / target:+.3f}%"
        )
    chosen = replace(base, kinematics=best)
    cross = {}
    for name, pfc in BUILTINS.items():
        cross[name] = Evaluator(insts, chosen).total(pfc())
        ref = REFERENCE_TARGETS.get(name)
        dev = f" ({100 * (cross[name] - ref) / ref:+.3f}% vs {ref:.0f})" if ref else ""
        print(f"{name}: {cross[name]:.1f}{dev}")
    if args.write:
        comment = (
            f"Calibrated on {len(insts)} instances with rule {args.rule} against {target:.0f}.\n"
            + "\n".join(f"{k} total {v:.1f}" for k, v in cross.items())
        )
        Path(args.write).write_text(dump_config(chosen, comment))
        print(f"wrote {args.write}")
    return EXIT_OK


def cmd_generate(args):
    insts = generate_training_set(args.kind, args.count, args.seed, weighted=not args.no_weights)
    write_instances(insts, args.out)
    print(f"{len(insts)} {args.kind} instances written to {args.out}")
    return EXIT_OK


def cmd_trace(args):
    cfg = energy_config(args)
    insts = resolve_instances(args.instance, args.weights_seed)
    pf = load_rule(args.rule)
    chunks = []
    for inst in insts:
        ep = run_scheme(inst.to_bay(cfg.kinematics, cfg.params.crane_weight), pf, args.scheme, cfg.params)
        body = format_trace(ep.moves, cfg.params)
        chunks.append(body if len(insts) == 1 else f"# {inst.id} energy {ep.energy!r}\n{body}")
    text = "".join(chunks)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="crpenergy", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", help="energy/kinematics configuration file (default: packaged default.cfg)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, jobs=True):
        sp.add_argument("--scheme", choices=sorted(SCHEMES), default="restricted")
        sp.add_argument("--weights-seed", type=int, help="attach U[1,30] weights to unweighted instances")
        if jobs:
            sp.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")

    t = sub.add_parser("train", help="run seeded evolutions and persist their artifacts")
    t.add_argument("--method", choices=["gp", "grh-ga", *BUILTINS], required=True)
    t.add_argument("--reps", type=int, default=1)
    t.add_argument("--pop", type=int, default=1000)
    t.add_argument("--evals", type=int, default=50_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--mutation-prob", type=float, default=None)
    t.add_argument("--log-interval", type=int, default=500)
    t.add_argument("--no-init-count", action="store_true", help="do not charge initial evaluations to the budget")
    t.add_argument("--all-genes", action="store_true", help="GA mutation resamples every gene")
    t.add_argument("--train", help="training instances (default gen:caserta-like:50:SEED)")
    t.add_argument("--test", help="held-out instances evaluated with each best rule")
    t.add_argument("--out", required=True)
    common(t)

    e = sub.add_parser("evaluate", help="per-instance energies of one rule on a test set")
    e.add_argument("--rule", required=True, help="tlp, ri, a genome file or a rep directory")
    e.add_argument("--test", help=f"instances (default ${DATA_ENV})")
    e.add_argument("--out", help="CSV path (default stdout)")
    e.add_argument("--target", type=float, help="reference total to report the deviation from")
    common(e)

    r = sub.add_parser("report", help="summary, significance, census and runtime tables")
    r.add_argument("runs", nargs="+", help="train output directories")
    r.add_argument("--out")
    r.add_argument("--alpha", type=float, default=ALPHA)
    r.add_argument("--test", help="re-evaluate logged genomes on these instances")
    r.add_argument("--weights-seed", type=int)

    c = sub.add_parser("calibrate", help="pick the kinematics convention closest to a reference total")
    c.add_argument("--dataset", help=f"calibration instances (default ${DATA_ENV})")
    c.add_argument("--rule", choices=sorted(BUILTINS), default="tlp")
    c.add_argument("--target", type=float)
    c.add_argument("--lift-modes", default="direct", help="comma list from " + ",".join(LIFT_MODES))
    c.add_argument("--write", help="write the chosen configuration here")
    c.add_argument("--weights-seed", type=int)

    g = sub.add_parser("generate", help="write a seeded generated instance set")
    g.add_argument("--kind", choices=["caserta-like", "zhu-like"], required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--no-weights", action="store_true")
    g.add_argument("--out", required=True)

    tr = sub.add_parser("trace", help="export the move trace of one rule on instances")
    tr.add_argument("--rule", required=True)
    tr.add_argument("--instance", required=True)
    tr.add_argument("--out")
    common(tr, jobs=False)
    return p


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "calibrate": cmd_calibrate,
    "generate": cmd_generate,
    "trace": cmd_trace,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("crpenergy: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"crpenergy: {exc}", file=sys.stderr)
        return exc.code
    except errors.DatasetUnavailable as exc:
        print(f"crpenergy: dataset unavailable: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except errors.InstanceFormatError as exc:
        print(f"crpenergy: bad instance file: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except (errors.Deadlock, errors.InfeasibleGenomeEvaluation) as exc:
        print(f"crpenergy: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except errors.MissingArtifacts as exc:
        print(f"crpenergy: missing artifacts: {exc}", file=sys.stderr)
        return EXIT_ARTIFACTS
    except (errors.BudgetTooSmall, ValueError, OSError) as exc:
        print(f"crpenergy: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
