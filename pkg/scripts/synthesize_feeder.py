"""Write the synthetic 106-bus feeder with two weeks of profiles to a directory."""

import argparse

from grid_planning.cli import main as cli_main


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out_dir", help="Destination directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--buses", type=int, default=106)
    p.add_argument("--feeders", type=int, default=4)
    p.add_argument("--days", type=int, default=14)
    args = p.parse_args()
    cli_main(
        [
            "synth",
            "--out-dir", args.out_dir,
            "--seed", str(args.seed),
            "--buses", str(args.buses),
            "--feeders", str(args.feeders),
            "--days", str(args.days),
        ]
    )


if __name__ == "__main__":
    main()
