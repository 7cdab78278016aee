"""Write the CSV data behind the three profile figures into an output folder.

    python scripts/reproduce_figures.py [outdir]
"""

import sys
from pathlib import Path

from tfpainleve.cli import main

EPS = 0.0067


def run(*argv):
    code = main([str(a) for a in argv])
    if code not in (0, 2):
        raise SystemExit(f"{' '.join(map(str, argv))} exited with {code}")


def reproduce(outdir: Path):
    outdir.mkdir(parents=True, exist_ok=True)
    # Thomas-Fermi components for several eta
    for eta in (0.0, 0.25, 0.5, 0.75, 0.9):
        run("tf", "--eta", eta, "--out", outdir / f"tf_eta{eta}.csv")
    # coupled solutions for eta = eps^p and the Hastings-McLeod profile
    for p in (1.0, 0.5, 0.25):
        run("coupled", "--eps", EPS, "--eta-exp", p, "--out", outdir / f"coupled_p{p}.csv")
    run("hm", "--out", outdir / "hm.csv")


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figures")
    reproduce(out)
    print(f"wrote CSV files to {out}/")
