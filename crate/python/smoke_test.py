"""Smoke test for the Python bindings.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/python/Cargo.toml`.
"""

import pyoshusp


def main() -> None:
    db = pyoshusp.Database.running_example()
    assert db.num_sequences == 5, db
    assert db.periods == [1, 2, 3]
    assert db.total_utility == 110

    results = {}
    for algo in ("osums", "osums-plus", "oracle"):
        report = pyoshusp.mine(db, "0.05", algo=algo)
        results[algo] = {(p.pattern, p.ou) for p in report.patterns}
    assert results["osums"] == results["osums-plus"] == results["oracle"]

    report = pyoshusp.mine(db, "0.25")
    found = {p.pattern: p for p in report.patterns}
    ac = found["{1}{3}"]
    assert ac.ou == 28 and (ac.our_num, ac.our_den) == (28, 110), ac
    assert ac.ot == [1, 2, 3]

    ablated = pyoshusp.mine(db, "0.25", disable=["gdp", "gwp"])
    assert {p.pattern for p in ablated.patterns} == set(found)
    assert ablated.candidates >= report.candidates

    synth = pyoshusp.Database.synthetic(sequences=60, items=12, periods=3, seed=5)
    bigger = synth.scaled(2, 4, seed=1)
    assert bigger.num_sequences == 120
    two = pyoshusp.mine(bigger, "0.02", algo="osums")
    one = pyoshusp.mine(bigger, "0.02", algo="osums-plus")
    assert {p.pattern for p in two.patterns} == {p.pattern for p in one.patterns}

    try:
        pyoshusp.mine(db, "1.5")
    except ValueError:
        pass
    else:
        raise AssertionError("threshold above 1 accepted")

    print(f"ok: {len(report)} patterns at 0.25, {len(two)} on the scaled synthetic set")


if __name__ == "__main__":
    main()
