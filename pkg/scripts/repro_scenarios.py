#!/usr/bin/env python3
"""Replay the two scripted scenarios and print what each one establishes:
the naive scan that returns an impossible snapshot, and the forwarding
scan that returns a snapshot the array never held yet linearizes."""
import json

from snaplab import Linearization, brute_force_linearize, derive, linearize, repro


def main() -> None:
    res = repro("naive_03")
    verdict = brute_force_linearize(derive(res.history))
    print(f"naive_03      scan={tuple(res.scan_output)}  "
          f"linearizable={isinstance(verdict, Linearization)}  "
          f"(searched {getattr(verdict, 'searched', '-')} orders)")

    res = repro("jayanti1_fig3")
    lin = linearize(derive(res.history))
    names = {v: k for k, v in res.ids.items()}
    order = [names.get(e, f"init{e}") for e in lin.order]
    print(f"jayanti1_fig3 scan={tuple(res.scan_output)}  legal={lin.legal}")
    print(f"              order: {' -> '.join(order)}")
    print(json.dumps(lin.to_obj()["replay"], indent=2))


if __name__ == "__main__":
    main()
