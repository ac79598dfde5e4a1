"""Build the extension module and exercise it from Python.

Usage: python3 python/smoke_test.py [--no-build]
"""

import argparse
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "rtmix-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )


def install(target_dir):
    suffix = ".dylib" if sys.platform == "darwin" else ".so"
    lib = ROOT / "target" / "release" / f"librtmix{suffix}"
    dest = Path(target_dir) / ("rtmix" + (sysconfig.get_config_var("EXT_SUFFIX") or ".so"))
    shutil.copy(lib, dest)
    sys.path.insert(0, str(target_dir))


def check(rtmix):
    Task = rtmix.Task
    sample = [Task(15, 65, 8, 65), Task(7, 30, 5, 30), Task(13, 50, 25, 50)]

    assert [r[1] for r in rtmix.analyze(sample)] == [15, 22, 42]
    for alg in ["lcm-scan", "turing", "bruteforce"]:
        assert rtmix.response_time(sample[:2], 13, alg)[0] == 42, alg
    assert rtmix.response_time(sample[:2], 13)[1] == "turing"

    b = rtmix.bounds(sample[:2], 13)
    assert Fraction(b.ell) == Fraction(6245, 209)
    assert Fraction(b.ell) <= 42 <= b.u

    inst = rtmix.tight_mixing_instance(3)
    sol = rtmix.solve_mix(inst, "bruteforce")
    assert (sol.s, sol.objective) == (23, 23)
    assert rtmix.solve_mix(inst).objective == 23
    assert inst.objective_at(sol.s) == 23

    extreme = rtmix.construct_extreme([1], 2)
    assert extreme == [Task(1, 2, 2, 2), Task(1, 4, 4, 4), Task(1, 4, 4, 4)]
    assert rtmix.response_time(extreme[:2], 1, "harmonic")[0] == 12

    jobs = [[(0, 8)], [(0, 5), (30, 35)], [(0, 25)]]
    segments, done = rtmix.simulate(sample, jobs, 60)
    busy = [s for s in segments if s[2] is not None]
    assert busy[:2] == [(5, 8, 1), (8, 23, 0)]
    assert [j for j in done if j[0] == 2][0][4] == 47

    jitter_free = [Task(t.c, t.p, 0, t.d) for t in sample]
    assert rtmix.solve_4block(rtmix.encode_rtc_as_4block(jitter_free)) == 42

    rtmix.reset_ops()
    rtmix.response_time(rtmix.random_system(5, 4, 32, True)[:-1], 3, "harmonic")
    assert rtmix.ops() > 0

    try:
        rtmix.analyze([Task(0, 1)])
    except ValueError:
        pass
    else:
        raise AssertionError("invalid task accepted")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--no-build", action="store_true")
    args = parser.parse_args()
    if not args.no_build:
        build()
    with tempfile.TemporaryDirectory() as tmp:
        install(tmp)
        import rtmix

        check(rtmix)
    print("python smoke test passed")


if __name__ == "__main__":
    main()
