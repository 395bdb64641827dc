use driftlab_py::driftlab_py;
use pyo3::prelude::*;

fn python(code: &std::ffi::CStr) -> PyResult<()> {
    pyo3::append_to_inittab!(driftlab_py);
    Python::initialize();
    Python::attach(|py| py.run(code, None, None))
}

#[test]
fn module_round_trip() {
    python(
        cr#"
import math
import driftlab_py as dl

f = dl.Objective.onemax(8)
built = dl.construct(f, c=1.0)
assert built.ln_weights == [0.0] * 8
report = dl.verify(f, built, 1.0, mode="exhaustive")
assert report["states_checked"] == 255
assert abs(report["implied_nu"] - 8 * (8 / 7) ** 7) < 1e-9

b = dl.Objective.binval(12)
w = dl.construct(b, c=1.0).ln_weights
assert all(abs(x - i * math.log(2)) < 1e-12 for i, x in enumerate(w))

r = dl.run(dl.Objective.family("binval", 40, seed=2), c=2.0, seed=9)
assert r == dl.run(dl.Objective.family("binval", 40, seed=2), c=2.0, seed=9)

for bad in (lambda: dl.construct(f, c=0.0), lambda: dl.Objective.family("nosuch", 5), lambda: dl.verify(f, built, 1.0, mode="x")):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
"#,
    )
    .unwrap();
}
