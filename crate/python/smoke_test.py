"""Smoke test for the Python bindings.

Run `cargo build -p exotic-bv-py` first, or install the package with
`maturin develop -m crates/py/Cargo.toml`. Without an installed module the
test loads the freshly built library from target/.
"""

import importlib.util
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import exotic_bv

        return exotic_bv
    except ImportError:
        pass
    target = Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target"))
    for profile in ("release", "debug"):
        for name in ("libexotic_bv_py.so", "libexotic_bv_py.dylib", "exotic_bv_py.dll"):
            lib = target / profile / name
            if lib.exists():
                suffix = ".pyd" if name.endswith(".dll") else ".so"
                tmp = Path(tempfile.mkdtemp()) / f"exotic_bv{suffix}"
                shutil.copy(lib, tmp)
                spec = importlib.util.spec_from_file_location("exotic_bv", tmp)
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                return module
    sys.exit("exotic_bv is not built; run `cargo build -p exotic-bv-py`")


def main():
    ev = load()

    primes = ev.enumerate(6, 3, "prime")
    assert len(primes) == 4, primes
    assert "[[[1,3],4],[2,5]]" in ev.prime_bracketings(5)
    assert ev.enumerate(4, 1, "prime") == []

    assert ev.nu(4) == ""
    nu5 = ev.nu(5, ascii=True)
    assert nu5.startswith("zeta(2)*("), nu5

    terms = ev.nu_terms(6)
    assert len(terms) == 4
    assert all(t[1].lstrip("-") == "zeta(3)" for t in terms), [t[1] for t in terms]

    value, error, fitted = ev.period(5, 1, 1e-10)
    assert abs(value - math.pi**2 / 6) < 1e-8, value
    assert fitted == "zeta(2)"
    assert ev.mzv("zeta(2)").startswith("1.64493406684822")

    report = ev.nu5_match(d=2, trials=5)
    assert report["passed"] and report["exact_zero"], report
    report = ev.ainfty_check(6, d=2, trials=5)
    assert report["passed"], report
    report = ev.ainfty_check(6, d=2, trials=5, perturb=0.01)
    assert not report["passed"], report
    assert ev.derivation_check(5, d=3, trials=5)["passed"]
    assert ev.bv_axioms(d=2, trials=10) == []

    try:
        ev.nu(12)
    except ValueError:
        pass
    else:
        raise AssertionError("nu(12) should fail")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
