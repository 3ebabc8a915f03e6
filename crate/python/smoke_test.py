"""Smoke test for the `qlab` extension module.

Build and install first:  pip install -e crates/py --no-build-isolation
"""

from fractions import Fraction
import math
import sys

import qlab


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    half = qlab.QContext("1/2")
    flt = qlab.QContext(0.5, mode="float")
    assert half.mode == "exact" and half.q_exact == Fraction(1, 2)

    assert qlab.qfact(3, half) == Fraction(21, 8)
    assert qlab.qnum(0, half) == 0
    assert qlab.qbinom(4, 2, half) == Fraction(35, 16)
    assert qlab.gamma1(4, half) == Fraction(21, 8)
    assert qlab.gamma2(1, half) == 1
    assert close(qlab.gamma1(4, flt), 2.625)
    assert qlab.qpoch("1/2", 2, half) == Fraction(3, 8)
    assert close(qlab.eq(0.3, flt) * qlab.Eq(-0.3, flt), 1.0)
    c, s = qlab.trig("cos_small", 0.7, flt), qlab.trig("sin_small", 0.7, flt)
    assert math.isfinite(c) and math.isfinite(s)

    xy = qlab.Descriptor("mono:1,1")
    assert close(xy.numeric(1, 1.0, 1.0, flt), 1.0)
    image = xy.catalog(1, half)
    assert image.exact("2", "3") == Fraction(1, 36)
    assert str(image.invert()) == str(xy)

    e = qlab.Descriptor("expqadd:0.5,0.25,small")
    assert close(e.catalog(1, flt)(1.0, 1.0), 8 / 3)
    assert close(e.numeric(1, 1.0, 1.0, flt), 8 / 3)

    try:
        qlab.Descriptor("sep:esmall:5|const").numeric(1, 1.0, 1.0, flt)
    except qlab.DivergenceError as err:
        assert "axis x" in str(err)
    else:
        raise AssertionError("expected a divergence")

    try:
        qlab.Descriptor("sep:esmall:1|const").catalog(2, flt)
    except qlab.CatalogMissError:
        pass
    else:
        raise AssertionError("expected a catalog miss")

    try:
        qlab.Descriptor("blob:1")
    except qlab.ParseError:
        pass
    else:
        raise AssertionError("expected a parse error")

    rows = qlab.run_verify("identities", half)
    assert rows and all(r["status"] == "pass" for r in rows)

    sol = qlab.solve("transport", half, c=-1.0, f="mono:2", g="mono:2")
    assert sol["residual_max"] < 1e-10 and not sol["inversion_incomplete"]
    assert qlab.solve("wave", half, f="zero", g="zero")["descriptor"] == "0"

    print(f"smoke test passed ({len(rows)} identity rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
