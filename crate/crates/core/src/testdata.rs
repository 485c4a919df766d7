use serde::Deserialize;

use crate::surface::SurfaceCoefficients;

#[derive(Deserialize)]
pub struct TablePoint {
    pub x: [i64; 3],
    pub y: [i64; 3],
    pub period: usize,
}

#[derive(Deserialize)]
pub struct TableRow {
    pub period: usize,
    #[serde(flatten)]
    pub surface: SurfaceCoefficients,
    pub points: Vec<TablePoint>,
}

pub fn periodic_table() -> Vec<TableRow> {
    serde_json::from_str(include_str!("../tests/fixtures/periodic_table.json")).unwrap()
}

pub fn picard_two() -> SurfaceCoefficients {
    SurfaceCoefficients::parse(include_str!("../tests/fixtures/picard_two.json")).unwrap()
}
