"""Smoke test for the tracklab_py extension.

Build and install it first:
    pip install -e crates/tracklab-py --no-build-isolation
"""

from fractions import Fraction
from pathlib import Path

import tracklab_py as tl

DATA = Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    two = tl.Track.parse((DATA / "two_disjoint_edges.tt").read_text())
    assert two.edge_names() == ["a", "b"]
    assert sorted(two.rays()) == [["0", "1"], ["1", "0"]]

    one = tl.Track.parse((DATA / "one_sided_only.tt").read_text())
    assert one.validate(strict=True) == (True, [])
    report = one.two_sided()
    assert all(report.conditions)
    assert not report.carries_two_sided
    assert report.witness is None and report.oracle_agrees
    assert all(side == "one-sided" for _, side in one.loops(2))

    demo = tl.Structure.parse((DATA / "uniformize_demo.tt").read_text())
    total, least = map(Fraction, demo.totals())
    result = demo.uniformize()
    assert result.uniform
    assert Fraction(result.ratio) <= Fraction(result.ratio_bound)
    assert all(c.holds and Fraction(c.mw1) >= 2 * Fraction(c.mw0) for c in result.certificates)
    new_total, _ = map(Fraction, result.structure.totals())
    assert new_total >= 10 * total
    again = tl.Structure.parse(result.structure.to_text())
    assert again.to_text() == result.structure.to_text()

    generic = demo.uniformize(generic=True)
    assert generic.uniform

    assert tl.twist_bounds([5], ["1"], ["1"], "0") == ("3", "5", "5")
    assert tl.atom_check("3", ["1", "0"]) == "4"
    assert tl.atom_check("2", ["2", "1"]) is None
    assert len(tl.n12_pml()) == 2

    try:
        tl.Track.parse((DATA / "bad_duplicate_slot.tt").read_text())
    except ValueError as e:
        assert "slot" in str(e)
    else:
        raise AssertionError("duplicate slot accepted")

    print(f"smoke test passed: {len(result.certificates)} runs, ratio {result.ratio}, min {least} -> {Fraction(result.structure.totals()[1])}")


if __name__ == "__main__":
    main()
