import csv
import sys

import numpy as np


def load(path):
    with open(path, newline="") as f:
        return [row for row in csv.DictReader(f) if row["status"] == "ok" and row["max_relative_difference"]]


def main():
    rows = load(sys.argv[1] if len(sys.argv) > 1 else "run/bench.csv")
    stretches = sorted({float(row["stretch"]) for row in rows})
    for stretch in stretches:
        values = np.array([float(row["max_relative_difference"]) for row in rows if float(row["stretch"]) == stretch])
        print("stretch {:.2f}: mean {:.4f}, max {:.4f} over {} rows".format(
            stretch, values.mean(), values.max(), len(values)))


if __name__ == '__main__':
    main()
