"""Plot singular-value profiles written by `stk hankel-complete` (fig1.csv) or `stk mnist` (fig2.csv)."""

import argparse

import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="fig1.csv or fig2.csv")
    parser.add_argument("--out", default=None, help="image file; shows a window when omitted")
    args = parser.parse_args()

    table = pd.read_csv(args.csv)
    fig, ax = plt.subplots(figsize=(6, 4))
    for column in table.columns[1:]:
        values = table[column]
        ax.semilogy(table["i"][values > 0], values[values > 0], label=column)
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.legend()
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
