#!/usr/bin/env python3
"""Generate uniform random 3-SAT suites in SATLIB layout (uf/uuf at the
100-variable, 430-clause threshold), labelled by an independent solver.

Usage: gen_rnd3sat.py OUTDIR [--vars 100] [--clauses 430] [--count 100] [--seed 2019]

Requires python-sat (MiniSat 2.2 bindings) for labelling.
"""
import argparse
import os
import random

from pysat.solvers import Minisat22


def random_instance(rng, nvars, nclauses):
    clauses = []
    for _ in range(nclauses):
        vs = rng.sample(range(1, nvars + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


def write(path, nvars, clauses, label):
    with open(path, "w") as f:
        f.write("c uniform random 3-SAT, %d variables, %d clauses\n" % (nvars, len(clauses)))
        f.write("c labelled %s by MiniSat 2.2\n" % label)
        f.write("p cnf %d  %d \n" % (nvars, len(clauses)))
        for c in clauses:
            f.write(" " + " ".join(str(l) for l in c) + " 0\n")
        # SATLIB files end with this trailer
        f.write("%\n0\n\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir")
    ap.add_argument("--vars", type=int, default=100)
    ap.add_argument("--clauses", type=int, default=430)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    tag = "%d-%d" % (args.vars, args.clauses)
    dirs = {True: os.path.join(args.outdir, "uf" + tag), False: os.path.join(args.outdir, "uuf" + tag)}
    for d in dirs.values():
        os.makedirs(d, exist_ok=True)
    counts = {True: 0, False: 0}
    while min(counts.values()) < args.count:
        clauses = random_instance(rng, args.vars, args.clauses)
        with Minisat22(bootstrap_with=clauses) as s:
            sat = s.solve()
        if counts[sat] >= args.count:
            continue
        counts[sat] += 1
        prefix = "uf" if sat else "uuf"
        name = "%s%d-%02d.cnf" % (prefix, args.vars, counts[sat])
        write(os.path.join(dirs[sat], name), args.vars, clauses, "SAT" if sat else "UNSAT")


if __name__ == "__main__":
    main()
