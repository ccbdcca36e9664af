"""Smoke test for the qrmap Python module.

    pip install --no-build-isolation -e crates/python
    python3 python/smoke_test.py
"""

import sys

import qrmap


def check(cond, what):
    if not cond:
        print(f"FAIL: {what}")
        sys.exit(1)
    print(f"ok: {what}")


def main():
    check(qrmap.families() == ["v1", "v2", "v3", "v4a", "v4b"], "five families")

    r = qrmap.classify("v3", 0.16, -2.2)
    check((r["kind"], r["method"]) == ("TYPE2", "floodfill"), "v3 at 0.16-2.2i is TYPE2 by flood fill")
    check(r["cycle"][1] == "infinity" and len(r["cycle"]) == 3, "v3 critical cycle passes through infinity")
    check(qrmap.classify("v2", 0.0)["kind"] == "INVALID_PARAM", "v2 at a = 0 is invalid")
    check(qrmap.classify("v1", 0.0)["kind"] == "NOT_ATTRACTED", "v1 at c = 0 does not escape")
    check(qrmap.classify("v1", 1.0)["kind"] == "TYPE1", "v1 at c = 1 escapes")

    try:
        qrmap.classify("v5", 1.0)
        check(False, "v5 rejected")
    except ValueError as e:
        check("genus 1" in str(e), "v5 rejected: genus 1")

    ppm = qrmap.render_param("v1", mode="phase", size=(48, 32))
    check(ppm.startswith(b"P6\n48 32\n255\n"), "render_param returns a 48x32 PPM")
    check(qrmap.render_param("v1", mode="phase", size=(48, 32)) == ppm, "render_param is deterministic")
    check(qrmap.count_components(ppm, "red") == 1, "escape region of v1 is one red component")

    png = qrmap.render_dynamical("v4a", 0.675, -0.9375, center=(0.4, 0.07), half_width=0.25, size=64, format="png")
    check(png.startswith(b"\x89PNG"), "render_dynamical returns PNG bytes")

    check(qrmap.genus(3)["genus"] == 0, "period-3 curve has genus 0")
    g5 = qrmap.genus(5)
    check(g5["genus"] == 1 and g5["degree"] == 5, "period-5 curve is a quintic of genus 1")
    check(qrmap.period_polynomial(3) == "1 + b + c", "P3 = 1 + b + c")


if __name__ == "__main__":
    main()
