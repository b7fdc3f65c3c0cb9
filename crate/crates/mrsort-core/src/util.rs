//! Small numeric helpers shared across modules.

/// Number of cells when `step` divides the unit interval into at least two
/// equal parts; `None` otherwise. Works without `f64::round`, which is
/// unavailable without `std`.
pub(crate) fn unit_grid_cells(step: f64) -> Option<usize> {
    if !(step > 0.0 && step <= 0.5) {
        return None;
    }
    let cells = ((1.0 / step) + 0.5) as usize;
    if cells < 2 || (cells as f64 * step - 1.0).abs() > 1e-9 {
        return None;
    }
    Some(cells)
}

#[cfg(test)]
mod tests {
    use super::unit_grid_cells;

    #[test]
    fn recognizes_unit_dividing_steps() {
        assert_eq!(unit_grid_cells(0.1), Some(10));
        assert_eq!(unit_grid_cells(0.25), Some(4));
        assert_eq!(unit_grid_cells(0.5), Some(2));
        assert_eq!(unit_grid_cells(0.07), None);
        assert_eq!(unit_grid_cells(0.0), None);
        assert_eq!(unit_grid_cells(-0.1), None);
        assert_eq!(unit_grid_cells(1.0), None);
    }
}
