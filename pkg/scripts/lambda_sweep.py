"""Accuracy as a function of lambda on simulated modular networks.

    python3 scripts/lambda_sweep.py --config scripts/configs/lambda_sweep.json
"""
import argparse
import json
import os

from topoclust.experiment import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=os.path.join(os.path.dirname(__file__), "configs",
                                                     "lambda_sweep.json"))
    ap.add_argument("--out", help="override output_dir")
    args = ap.parse_args()

    with open(args.config) as fh:
        doc = json.load(fh)
    if args.out:
        doc["output_dir"] = args.out
    cfg = ExperimentConfig.from_json(doc, os.path.dirname(os.path.abspath(args.config)))
    print(f"{'lambda':>7} {'accuracy':>9} {'std':>7} {'ARI':>7} {'p-value':>9}")
    for row in run_experiment(cfg):
        print(f"{row['lambda']:7.2f} {row['accuracy_mean']:9.3f} {row['accuracy_std']:7.3f} "
              f"{row['ari_mean']:7.3f} {row['p_value_mean']:9.2e}")


if __name__ == "__main__":
    main()
