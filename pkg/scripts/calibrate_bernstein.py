"""Recompute the Bernstein constant C_B from the frozen corpus.

Prints twice the largest ratio; paste it into littlewood_paley.BERNSTEIN_CONSTANT.
"""

from rpslab.littlewood_paley import CALIBRATION_GRID, corpus_max_ratio

if __name__ == "__main__":
    worst = corpus_max_ratio(CALIBRATION_GRID)
    print(f"max ratio {worst!r}")
    print(f"C_B = {2 * worst!r}")
