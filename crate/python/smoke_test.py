"""Smoke test for the pykmsat extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
then run:
    python3 python/smoke_test.py
"""

import pykmsat

PHI_BNF = (
    "(& (| (~ (box 1 (~ p1))) (~ (box 1 (& (~ p2) (~ p3))))) "
    "(box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))"
)


def main():
    f = pykmsat.Formula.parse(PHI_BNF)
    assert f.depth() == 1
    assert not pykmsat.oracle(f)

    enc = pykmsat.encode(f, simplify=False)
    assert len(enc.clauses) == 14 and enc.labels == 3
    assert enc.dimacs().startswith("p cnf ")
    assert len(enc.trace()) == 14
    assert pykmsat.solve_cnf(enc.num_vars, enc.clauses) is None
    assert pykmsat.encode(f, bcp=True).trivial_unsat

    out = pykmsat.decide(pykmsat.Formula.parse("(& (dia 1 p1) (box 1 p2))"))
    assert out["verdict"] == "sat" and out["model_check"] is True
    assert out["model"].startswith("s 1\n")

    for h in (1, 2, 3):
        assert pykmsat.decide(pykmsat.branch_n(h), bcp=True)["verdict"] == "sat"
        assert pykmsat.decide(pykmsat.branch_p(h), bcp=True)["verdict"] == "unsat"

    # random instances exceed the default modal-atom guard
    for i in range(20):
        g = pykmsat.random_boxcnf(d=1, l=12, n=3, seed=pykmsat.derive_seed(5, i))
        want = "sat" if pykmsat.oracle(g, max_modal_atoms=64) else "unsat"
        for lift in ("no", "yes", "ctrl"):
            assert pykmsat.decide(g, lift=lift, plr=True, bcp=True)["verdict"] == want

    try:
        pykmsat.Formula.parse("(&")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")
    print("pykmsat smoke test passed")


if __name__ == "__main__":
    main()
