use pyo3::prelude::*;

#[pymodule]
fn stg_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
