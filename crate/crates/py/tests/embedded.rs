use std::ffi::CString;
use std::path::Path;

use pyo3::prelude::*;

use cddr::cddr;

#[test]
fn smoke_script_runs_in_embedded_interpreter() {
    pyo3::append_to_inittab!(cddr);
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../python/smoke_test.py");
    let code = CString::new(std::fs::read_to_string(script).unwrap()).unwrap();
    Python::attach(|py| {
        let module = PyModule::from_code(py, &code, c"smoke_test.py", c"smoke_test").unwrap();
        module.getattr("main").unwrap().call0().unwrap();
    });
}
